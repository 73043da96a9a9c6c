"""Command line entry point.

``run`` executes a JSON job file; every other subcommand builds a one-job
config from its flags and runs it the same way. Exit codes: 0 when every job
passes, 1 when some job reports a violation and none errors, 2 on any error
or invalid input.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import config as cfg
from .errors import VerificationError
from .report import VerificationReport, explain

EXIT_PASS, EXIT_VIOLATION, EXIT_ERROR = 0, 1, 2


def _quad_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, help="tolerance (default depends on the check)")
    p.add_argument("--nodes", type=int, help="Gauss-Legendre nodes per panel")
    p.add_argument("--panels", type=int, help="panels per unit parameter interval")
    p.add_argument("--grid", type=int, help="grid resolution for sampled checks")
    p.add_argument("--csv", help="write sampled residuals to this CSV file")


def _output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.add_argument("--out", help="write the report to PATH instead of stdout")
    p.add_argument("--timings", metavar="PATH", help="write wall-clock timings to a separate JSON file")
    p.add_argument("--workers", type=int, default=1, help="run jobs on this many threads")


def _exclusions(values):
    out = []
    for text in values or []:
        c, _, r = text.rpartition(",")
        if not c:
            raise VerificationError(f"exclusion {text!r} must look like CENTER,RADIUS")
        out.append([c, r])
    return out


# each subcommand: (kind, help, [(flag, dest, kwargs)])
SUBCOMMANDS = {
    "integrate": ("contour_integral", "contour integral of f dz along a path", [
        ("--f", "f", {"required": True}), ("--path", "path", {"required": True}),
        ("--expected", "expected", {"help": "compare with this complex value"}),
        ("--riemann", "n", {"type": int, "help": "use a left Riemann sum with N points"}),
    ]),
    "check-cr": ("cr_residual", "Cauchy-Riemann residuals on a grid", [
        ("--f", "f", {"required": True}), ("--region", "region", {"required": True}),
        ("--exclude", "exclusions", {"action": "append", "help": "CENTER,RADIUS disk to skip"}),
    ]),
    "rectangle": ("rectangle_identity", "rectangle loop identity", [
        ("--f", "f", {"required": True}), ("--rect", "rect", {"default": "rect:0,1,0,1"}),
    ]),
    "goursat": ("goursat_certify", "quadrisection certificate", [
        ("--f", "f", {"required": True}), ("--rect", "rect", {"default": "rect:0,1,0,1"}),
        ("--max-depth", "max_depth", {"type": int, "default": 12}),
    ]),
    "homotopy": ("homotopy_invariance", "path integrals along a linear homotopy", [
        ("--f", "f", {"required": True}), ("--base", "base", {"required": True}),
        ("--target", "target", {"required": True}),
        ("--eps", "epsilons", {"type": float, "nargs": "+"}),
    ]),
    "green": ("green_check", "Green's formula on a region", [
        ("--P", "P", {"required": True}), ("--Q", "Q", {"required": True}),
        ("--region", "region", {"required": True}),
    ]),
    "cauchy-green": ("cauchy_via_green", "loop integral against the Green area terms", [
        ("--f", "f", {"required": True}), ("--region", "region", {"required": True}),
    ]),
    "winding": ("winding_number", "winding number of a closed path about a point", [
        ("--path", "path", {"required": True}), ("--a", "a", {"required": True}),
    ]),
    "exactness": ("loop_exactness_test", "closedness against the loop integral of P dx + Q dy", [
        ("--P", "P", {"required": True}), ("--Q", "Q", {"required": True}),
        ("--loop", "loop", {"required": True}),
    ]),
    "conformal": ("conformality_check", "angle preservation at a point", [
        ("--f", "f", {"required": True}), ("--a", "a", {"required": True}),
        ("--dir1", "dir1", {"default": "1"}), ("--dir2", "dir2", {"default": "i"}),
    ]),
    "divergence": ("divergence_check", "divergence theorem on a solid", [
        ("--field", "field", {"nargs": 3, "required": True, "metavar": ("P", "Q", "R")}),
        ("--solid", "solid", {"required": True}),
    ]),
    "gauss-volume": ("gauss_volume", "volume as a surface integral", [
        ("--solid", "solid", {"required": True}),
    ]),
    "green-identity": ("green_identity_check", "Green's symmetric identity on a solid", [
        ("--U", "U", {"required": True}), ("--V", "V", {"required": True}),
        ("--solid", "solid", {"required": True}),
    ]),
    "fluid-potential": ("potential_velocity", "velocity from a complex potential and its closedness", [
        ("--psi", "psi", {"required": True}), ("--region", "region", {"required": True}),
        ("--exclude", "exclusions", {"action": "append"}),
    ]),
    "fluid-planar": ("planar_incompressibility", "planar divergence of a meridional velocity", [
        ("--q", "q", {"required": True}), ("--p", "p", {"required": True}),
        ("--region", "region", {"required": True}), ("--exclude", "exclusions", {"action": "append"}),
    ]),
    "fluid-axisym": ("axisym_divergence", "axisymmetric divergence off the axis band", [
        ("--q", "q", {"required": True}), ("--p", "p", {"required": True}),
        ("--region", "region", {"required": True}), ("--exclude", "exclusions", {"action": "append"}),
        ("--band", "band", {"type": float}),
    ]),
    "fluid-acceleration": ("material_acceleration", "material acceleration of a meridional velocity", [
        ("--q", "q", {"required": True}), ("--p", "p", {"required": True}),
        ("--a-scale", "a_scale", {"type": float, "default": 1.0}),
        ("--expected-x", "expected_x", {"help": "expected x component (with --expected-z)"}),
        ("--expected-z", "expected_z", {"help": "expected z component (with --expected-x)"}),
    ]),
    "fluid-jacobian": ("flow_jacobian_check", "flow-map volume rate against the divergence", [
        ("--field", "field", {"nargs": 3, "required": True, "metavar": ("U", "V", "W")}),
        ("--point", "points", {"action": "append", "required": True, "help": "x,y,z (repeatable)"}),
        ("--dt", "dt", {"type": float}), ("--steps", "steps", {"type": int}),
    ]),
    "fluid-bernoulli": ("bernoulli_check", "pressure drop along a streamline", [
        ("--v", "v", {"required": True, "help": "speed as an expression in s"}),
        ("--s-max", "s_max", {"type": float, "required": True}),
    ]),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="holoverify", description="Numerical checks of complex-analysis and vector-calculus identities.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute a JSON job file")
    p.add_argument("--config", required=True)
    _output_flags(p)

    p = sub.add_parser("explain", help="render a saved JSON report as text")
    p.add_argument("report", help="report or run-summary JSON file ('-' for stdin)")

    for name, (kind, help_text, flags) in SUBCOMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        for flag, dest, kwargs in flags:
            p.add_argument(flag, dest=dest, **kwargs)
        _quad_flags(p)
        _output_flags(p)
        p.set_defaults(kind=kind)
    return parser


def job_from_args(args) -> dict:
    """Translate subcommand flags into a single job record."""
    kind = args.kind
    job = {"name": args.command, "kind": kind}
    for _, dest, _ in SUBCOMMANDS[args.command][2]:
        value = getattr(args, dest)
        if value is not None:
            job[dest] = value
    if kind == "contour_integral" and "n" in job:
        job["kind"] = "riemann_sum_integral"
    if "exclusions" in job:
        job["exclusions"] = _exclusions(job["exclusions"])
    if "expected_x" in job or "expected_z" in job:
        job["expected"] = [job.pop("expected_x", "0"), job.pop("expected_z", "0")]
    if kind == "flow_jacobian_check":
        job["points"] = [p.split(",") for p in job["points"]]
    quad = {k: getattr(args, k) for k in ("nodes", "panels", "grid") if getattr(args, k) is not None}
    if quad:
        job["quad"] = quad
    if args.grid is not None and "region" in job and kind != "green_check" and kind != "cauchy_via_green":
        job["resolution"] = args.grid
    if args.tol is not None:
        job["tol"] = args.tol
    if args.csv:
        job["output"] = {"csv": args.csv}
    return job


def _emit(summary: cfg.RunSummary, args) -> None:
    if args.format == "json":
        text = summary.to_json(timings=False)
    else:
        text = "\n\n".join(explain(r) for r in summary.reports)
        c = summary.counts
        text += f"\n\n{len(summary.reports)} job(s): {c['pass']} pass, {c['violation']} violation, {c['error']} error\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.timings:
        with open(args.timings, "w") as fh:
            json.dump(summary.timings(), fh, sort_keys=True, indent=2)
            fh.write("\n")


def _explain_file(path: str) -> int:
    text = sys.stdin.read() if path == "-" else open(path).read()
    data = json.loads(text)
    reports = data["reports"] if "reports" in data else [data]
    reps = [VerificationReport.from_dict(r) for r in reports]
    print("\n\n".join(explain(r) for r in reps))
    if any(r.status == "error" for r in reps):
        return EXIT_ERROR
    return EXIT_VIOLATION if any(r.status == "violation" for r in reps) else EXIT_PASS


def glue_negative_values(argv: list[str]) -> list[str]:
    """Join ``--flag -expr`` into ``--flag=-expr`` so argparse does not read
    an expression such as ``-x/(x^2+y^2)`` as an option."""
    single = {flag for _, _, flags in SUBCOMMANDS.values() for flag, _, kw in flags if "nargs" not in kw and kw.get("action") != "store_true"}
    out, k = [], 0
    while k < len(argv):
        tok = argv[k]
        if tok in single and k + 1 < len(argv) and argv[k + 1].startswith("-") and not argv[k + 1].startswith("--"):
            out.append(f"{tok}={argv[k + 1]}")
            k += 2
        else:
            out.append(tok)
            k += 1
    return out


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(glue_negative_values(argv))
    try:
        if args.command == "explain":
            return _explain_file(args.report)
        if args.command == "run":
            config = cfg.load_config(args.config)
            base = os.path.dirname(os.path.abspath(args.config))
        else:
            config, base = {"jobs": [job_from_args(args)]}, "."
        summary = cfg.run(config, workers=max(1, args.workers), base_dir=base)
    except (VerificationError, OSError, ValueError, KeyError) as exc:
        print(f"holoverify: invalid input: {exc}", file=sys.stderr)
        return EXIT_ERROR
    _emit(summary, args)
    return summary.exit_code


if __name__ == "__main__":
    sys.exit(main())
