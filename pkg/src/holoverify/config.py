"""Batch job configuration: literal parsing, validation and the job runner.

A config is a JSON tree ``{"jobs": [...]}``. Each job names a ``kind`` (an
operation name such as ``rectangle_identity``), its expressions and geometry,
and optional ``tol``, ``quad`` and ``output`` blocks. Every job is parsed and
validated before any job runs, so a bad config never half-executes.
"""
from __future__ import annotations

import functools
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import analysis, fluids, quad, theorems
from .analysis import GridSampling, write_csv
from .errors import ConfigError, VerificationError
from .expr import PLANAR, SPATIAL, evaluate, param, parse
from .geometry import Box, Disk, GraphSolid, Homotopy, Path, Polygon, Rectangle, XConvex, curve
from .report import VerificationReport, error_report, flat, make_report, plain

# --------------------------------------------------------------------------- literals


def parse_complex(value) -> complex:
    """A number, an ``[re, im]`` pair, or a constant expression such as ``"0.5+0.5*i"``."""
    if isinstance(value, bool):
        raise ConfigError(f"not a complex literal: {value!r}")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value):
        return complex(value[0], value[1])
    if isinstance(value, str):
        e = parse(value, "z")
        if not e.is_constant():
            raise ConfigError(f"complex literal {value!r} must not contain variables")
        return complex(evaluate(e))
    raise ConfigError(f"not a complex literal: {value!r}")


def parse_real(value) -> float:
    z = parse_complex(value)
    if z.imag != 0:
        raise ConfigError(f"expected a real number, got {value!r}")
    return z.real


def _items(text: str, sep: str = ","):
    return [s.strip() for s in text.split(sep) if s.strip()]


def _decoded(text):
    """JSON text (as typed on a command line) becomes the tree it encodes."""
    if isinstance(text, str) and text.lstrip().startswith(("{", "[")):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad JSON literal: {exc}") from None
    return text


def _tagged(text):
    """Split ``"tag:body"`` shorthand or a one-key record into (tag, body)."""
    text = _decoded(text)
    if isinstance(text, str):
        tag, sep, body = text.partition(":")
        if not sep:
            raise ConfigError(f"geometry literal {text!r} needs a 'kind:' prefix")
        return tag.strip(), body
    if isinstance(text, dict) and len(text) == 1:
        return next(iter(text.items()))
    if isinstance(text, dict) and "type" in text:
        return text["type"], text
    raise ConfigError(f"cannot read geometry literal {text!r}")


def _literal(what: str):
    """Report malformed literals (wrong arity, missing keys) as ConfigError."""

    def deco(fn):
        @functools.wraps(fn)
        def wrapper(spec):
            try:
                return fn(spec)
            except VerificationError:
                raise
            except (TypeError, ValueError, KeyError) as exc:
                raise ConfigError(f"cannot read {what} {spec!r}: {exc}") from None

        return wrapper

    return deco


def _segment(spec):
    tag, body = _tagged(spec)
    if tag in ("line", "segment"):
        a, b = _items(body) if isinstance(body, str) else body
        return Path.segment(parse_complex(a), parse_complex(b)).segments[0]
    if tag == "arc":
        if isinstance(body, str):
            c, r, t0, t1 = _items(body)
            body = {"center": c, "radius": r, "theta0": t0, "theta1": t1}
        return Path.arc(parse_complex(body["center"]), parse_real(body["radius"]), parse_real(body["theta0"]), parse_real(body["theta1"])).segments[0]
    if tag == "curve":
        return curve(body["x"], body["y"], parse_real(body.get("t0", 0)), parse_real(body.get("t1", 1)))
    raise ConfigError(f"unknown segment kind {tag!r}")


@_literal("path")
def parse_path(spec) -> Path:
    """Shorthand ``segment:A,B``, ``circle:C,R[,turns]``, ``arc:C,R,t0,t1``,
    ``polyline:A;B;C`` (``closed-polyline:`` closes it), or a JSON record."""
    tag, body = _tagged(spec)
    if tag in ("segment", "line"):
        a, b = _items(body) if isinstance(body, str) else body
        return Path.segment(parse_complex(a), parse_complex(b))
    if tag in ("polyline", "closed-polyline"):
        pts = _items(body, ";") if isinstance(body, str) else body
        return Path.polyline([parse_complex(p) for p in pts], closed=tag == "closed-polyline")
    if tag == "circle":
        if isinstance(body, str):
            parts = _items(body)
            body = {"center": parts[0], "radius": parts[1], "turns": parts[2] if len(parts) > 2 else 1}
        return Path.circle(parse_complex(body.get("center", 0)), parse_real(body.get("radius", 1)), parse_real(body.get("start", 0)), int(parse_real(body.get("turns", 1))))
    if tag == "arc":
        return Path((_segment({"arc": body}),))
    if tag == "segments":
        return Path(tuple(_segment(s) for s in body))
    if tag == "boundary":
        return parse_region(body).boundary()
    raise ConfigError(f"unknown path kind {tag!r}")


@_literal("region")
def parse_region(spec):
    """``rect:x0,X,y0,Y``, ``disk:C,R``, ``polygon:A;B;C``, or ``{"xconvex": {...}}``.

    A bare list of four numbers is a rectangle.
    """
    spec = _decoded(spec)
    if isinstance(spec, (list, tuple)) and len(spec) == 4:
        return Rectangle(*(parse_real(v) for v in spec))
    tag, body = _tagged(spec)
    if tag in ("rect", "rectangle"):
        vals = _items(body) if isinstance(body, str) else body
        return Rectangle(*(parse_real(v) for v in vals))
    if tag == "disk":
        if isinstance(body, str):
            c, r = _items(body)
            body = {"center": c, "radius": r}
        return Disk(parse_complex(body["center"]), parse_real(body["radius"]))
    if tag == "polygon":
        pts = _items(body, ";") if isinstance(body, str) else body
        return Polygon(tuple(parse_complex(p) for p in pts))
    if tag == "xconvex":
        return XConvex.from_text(parse_real(body["a"]), parse_real(body["b"]), body["left"], body["right"])
    raise ConfigError(f"unknown region kind {tag!r}")


@_literal("solid")
def parse_solid(spec):
    """``box:x0,X,y0,Y,z0,Z``, ``graph:BASE|LOWER|UPPER`` or the JSON records.

    A bare list of six numbers is a box.
    """
    spec = _decoded(spec)
    if isinstance(spec, (list, tuple)) and len(spec) == 6:
        return Box(*(parse_real(v) for v in spec))
    tag, body = _tagged(spec)
    if tag == "box":
        vals = _items(body) if isinstance(body, str) else body
        return Box(*(parse_real(v) for v in vals))
    if tag == "graph":
        if isinstance(body, str):
            base, lower, upper = body.split("|")
            body = {"base": base, "lower": lower, "upper": upper}
        base = parse_region(body["base"])
        return GraphSolid.from_text(base, body["lower"], body["upper"])
    raise ConfigError(f"unknown solid kind {tag!r}")


def parse_quad(block) -> quad.QuadSpec:
    block = dict(block or {})
    unknown = set(block) - {"nodes", "panels", "grid"}
    if unknown:
        raise ConfigError(f"unknown quad keys {sorted(unknown)}")
    try:
        return quad.QuadSpec(**{k: int(v) for k, v in block.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def parse_grid(job) -> GridSampling:
    region = parse_region(_need(job, "region"))
    exclusions = [(parse_complex(c), parse_real(r)) for c, r in job.get("exclusions", [])]
    return GridSampling(region, int(job.get("resolution", 33)), tuple(exclusions))


# --------------------------------------------------------------------------- jobs


def _need(job, key):
    if key not in job:
        raise ConfigError(f"job {job.get('name', '?')!r} ({job.get('kind')}) needs {key!r}")
    return job[key]


def _field_report(kind, fields, tol, diag=None):
    worst = max(f.max_abs for f in fields)
    left = [f.max_abs for f in fields]
    d = {"mean_abs": [f.mean_abs for f in fields], "samples": int(fields[0].points.size)}
    d.update(diag or {})
    return make_report(kind, left, [0.0] * len(fields), [worst], tol, d)


def _csv_fields(path, fields, coords=("x", "y")):
    if path:
        write_csv(path, list(fields), coords)


def _integral_report(kind, value, expected, tol):
    if expected is None:
        return make_report(kind, flat(value), [], [0.0], tol, {"value": value})
    exp = parse_complex(expected)
    return make_report(kind, flat(value), flat(exp), [abs(value - exp)], tol, {"value": value})


def _velocity(job):
    return fluids.PlanarVelocity(_need(job, "q"), _need(job, "p"))


def _prepare_one(job, tol, q, csv_path) -> Callable[[], VerificationReport]:
    """Parse one job eagerly; return a thunk that runs it."""
    kind = job["kind"]
    z = lambda key: parse(_need(job, key), "z")  # noqa: E731
    planar = lambda key: parse(_need(job, key), PLANAR)  # noqa: E731
    spatial = lambda key: tuple(parse(e, SPATIAL) for e in _need(job, key))  # noqa: E731

    if kind == "rectangle_identity":
        f, rect = z("f"), parse_region(_need(job, "rect"))
        return lambda: theorems.rectangle_identity(f, rect, q, tol=tol)
    if kind == "homotopy_invariance":
        f = z("f")
        H = Homotopy(parse_path(_need(job, "base")), parse_path(_need(job, "target")))
        eps = job.get("epsilons")
        eps = None if eps is None else [parse_real(e) for e in eps]
        return lambda: theorems.homotopy_invariance(f, H, eps, q, tol=tol)
    if kind == "green_check":
        P, Q, region = planar("P"), planar("Q"), parse_region(_need(job, "region"))
        return lambda: theorems.green_check(P, Q, region, q, tol=tol)
    if kind == "cauchy_via_green":
        f, region = z("f"), parse_region(_need(job, "region"))
        return lambda: theorems.cauchy_via_green(f, region, q, tol=tol)
    if kind == "goursat_certify":
        f, rect = z("f"), parse_region(_need(job, "rect"))
        depth = int(job.get("max_depth", 12))
        if not 0 <= depth <= 16:
            raise ConfigError("max_depth must lie in [0, 16]")
        return lambda: theorems.goursat_check(f, rect, tol=tol, max_depth=depth, q=q)
    if kind == "divergence_check":
        X, solid = spatial("field"), parse_solid(_need(job, "solid"))
        return lambda: theorems.divergence_check(X, solid, q, tol=tol)
    if kind == "gauss_volume":
        solid = parse_solid(_need(job, "solid"))
        return lambda: theorems.gauss_volume(solid, q, tol=tol)
    if kind == "green_identity_check":
        U, V = parse(_need(job, "U"), SPATIAL), parse(_need(job, "V"), SPATIAL)
        solid = parse_solid(_need(job, "solid"))
        return lambda: theorems.green_identity_check(U, V, solid, q, tol=tol)
    if kind == "contour_integral":
        f, path = z("f"), parse_path(_need(job, "path"))
        exp = job.get("expected")
        if exp is not None:
            parse_complex(exp)
        return lambda: _integral_report(kind, quad.contour_integral(f, path, q), exp, tol)
    if kind == "riemann_sum_integral":
        f, path, n = z("f"), parse_path(_need(job, "path")), int(job.get("n", 1000))
        exp = job.get("expected")
        if exp is not None:
            parse_complex(exp)
        return lambda: _integral_report(kind, quad.riemann_sum_integral(f, path, n), exp, tol)
    if kind in ("cr_residual", "primitive_cr_check"):
        g = parse_grid(job)
        if kind == "primitive_cr_check":
            F = z("F")
            compute = lambda: analysis.primitive_cr_check(F, g)  # noqa: E731
        elif "f" in job:
            f = z("f")
            compute = lambda: analysis.cr_residual(f, g)  # noqa: E731
        else:
            pair = (planar("u"), planar("v"))
            compute = lambda: analysis.cr_residual(pair, g)  # noqa: E731

        def run_cr():
            fields = compute()
            _csv_fields(csv_path, fields)
            return _field_report(kind, fields, tol)

        return run_cr
    if kind == "exactness_residual":
        P, Q, g = planar("P"), planar("Q"), parse_grid(job)

        def run_exact():
            fld = analysis.exactness_residual(P, Q, g)
            _csv_fields(csv_path, [fld])
            return _field_report(kind, [fld], tol)

        return run_exact
    if kind == "loop_exactness_test":
        P, Q, loop = planar("P"), planar("Q"), parse_path(_need(job, "loop"))

        def run_loop():
            res = analysis.loop_exactness_test(P, Q, loop, q, tol)
            residual = res.clairaut_max if res.verdict == "not closed" else abs(res.loop_integral)
            rep = make_report(kind, [res.clairaut_max], flat(res.loop_integral), [residual], tol, {"verdict": res.verdict})
            return rep

        return run_loop
    if kind == "winding_number":
        path, a = parse_path(_need(job, "path")), parse_complex(_need(job, "a"))

        def run_winding():
            w = analysis.winding_number(path, a, q)
            dist = abs(w.raw - round(w.raw.real))
            return make_report(kind, flat(w.raw), [] if w.value is None else [w.value], [dist], min(tol, analysis.WINDING_SNAP), {"winding": w.value, "distance_ok": w.distance_ok})

        return run_winding
    if kind == "conformality_check":
        f, a = z("f"), parse_complex(_need(job, "a"))
        d1, d2 = parse_complex(job.get("dir1", 1)), parse_complex(job.get("dir2", "i"))

        def run_conf():
            c = analysis.conformality_check(f, a, d1, d2)
            return make_report(kind, [c.angle_in], [c.angle_out], [c.residual], tol, {"orientation_preserved": c.orientation_preserved})

        return run_conf
    if kind == "potential_velocity":
        psi, g = z("psi"), parse_grid(job)

        def run_pot():
            flow = fluids.potential_velocity(psi, g)
            fields = flow.closedness
            _csv_fields(csv_path, fields, ("x", "z"))
            return _field_report(kind, fields, tol, {"M": str(flow.velocity.q), "N": str(flow.velocity.p)})

        return run_pot
    if kind in ("planar_incompressibility", "axisym_divergence"):
        v, g = _velocity(job), parse_grid(job)
        band = parse_real(job.get("band", fluids.AXIS_BAND))

        def run_flow():
            if kind == "planar_incompressibility":
                fld = fluids.planar_incompressibility(v, g)
                diag = {}
            else:
                fld = fluids.axisym_divergence(v, g, band)
                red = fld.meta.get("reduction_max")
                diag = {"reduction_max": red}
                if red is not None and red > fluids.REDUCTION_TOL:
                    diag["warnings"] = [f"3D divergence reduction disagrees by {red:.3e}"]
            if csv_path:
                fluids.write_velocity_csv(csv_path, v, fld)
            return _field_report(kind, [fld], tol, diag)

        return run_flow
    if kind == "material_acceleration":
        v, a = _velocity(job), parse_real(job.get("a_scale", 1))

        def run_acc():
            ax, az = fluids.material_acceleration(v, a)
            diag = {"acceleration": [str(ax), str(az)]}
            expected = job.get("expected")
            if expected is None:
                return make_report(kind, [], [], [0.0], tol, diag)
            g = parse_grid({"region": job.get("region", "rect:-1,1,-1,1")})
            pts = g.points()
            diffs = [
                np.max(np.abs(evaluate(got, x=pts.real, z=pts.imag) - evaluate(parse(want, "meridional"), x=pts.real, z=pts.imag)))
                for got, want in zip((ax, az), expected)
            ]
            return make_report(kind, [], [], [float(max(diffs))], tol, diag)

        return run_acc
    if kind == "flow_jacobian_check":
        X = fluids.SpatialField(*spatial("field"))
        points = [[parse_real(c) for c in p] for p in _need(job, "points")]
        dt, steps = parse_real(job.get("dt", 1e-3)), int(job.get("steps", 1))
        return lambda: fluids.flow_jacobian_check(X, points, dt=dt, steps=steps, tol=tol)
    if kind == "bernoulli_check":
        if "channel" in job:
            ch = job["channel"]
            v = fluids.channel_velocity(parse_real(ch["v_a"]), parse_real(ch.get("w_a", 1)), ch["width"])
        else:
            v = parse(_need(job, "v"), param("s"))
        s_max = parse_real(_need(job, "s_max"))
        return lambda: fluids.bernoulli_check(v, s_max, q, tol=tol)
    raise ConfigError(f"unknown job kind {kind!r}")


KINDS = (
    "rectangle_identity",
    "homotopy_invariance",
    "green_check",
    "cauchy_via_green",
    "goursat_certify",
    "divergence_check",
    "gauss_volume",
    "green_identity_check",
    "contour_integral",
    "riemann_sum_integral",
    "cr_residual",
    "primitive_cr_check",
    "exactness_residual",
    "loop_exactness_test",
    "winding_number",
    "conformality_check",
    "potential_velocity",
    "planar_incompressibility",
    "axisym_divergence",
    "material_acceleration",
    "flow_jacobian_check",
    "bernoulli_check",
)
DEFAULT_TOLS = {"flow_jacobian_check": 1e-4}


@dataclass
class Job:
    name: str
    kind: str
    tol: float
    inputs: dict
    thunk: Callable[[], VerificationReport] = field(repr=False)


def prepare(config, base_dir: str = ".") -> list[Job]:
    """Validate every job and parse its expressions and geometry.

    Raises :class:`ConfigError` (or a parse/geometry error) before anything runs.
    """
    if not isinstance(config, dict) or not isinstance(config.get("jobs"), list):
        raise ConfigError('config must be an object with a "jobs" list')
    jobs, names = [], set()
    for k, job in enumerate(config["jobs"]):
        if not isinstance(job, dict):
            raise ConfigError(f"job {k} is not an object")
        kind = job.get("kind")
        if kind not in KINDS:
            raise ConfigError(f"job {k}: unknown kind {kind!r}")
        name = str(job.get("name", f"job{k}"))
        if name in names:
            raise ConfigError(f"duplicate job name {name!r}")
        names.add(name)
        tol = parse_real(job.get("tol", DEFAULT_TOLS.get(kind, 1e-8)))
        if not tol > 0:
            raise ConfigError(f"job {name!r}: tolerance must be positive")
        q = parse_quad(job.get("quad"))
        csv_path = (job.get("output") or {}).get("csv")
        if csv_path:
            csv_path = os.path.join(base_dir, csv_path)
        try:
            thunk = _prepare_one(job, tol, q, csv_path)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, VerificationError):
                raise
            raise ConfigError(f"job {name!r}: {exc}") from exc
        inputs = {key: val for key, val in job.items() if key not in ("name", "kind")}
        jobs.append(Job(name, kind, tol, inputs, thunk))
    return jobs


def _execute(job: Job) -> VerificationReport:
    t0 = time.perf_counter()
    try:
        rep = job.thunk()
    except Exception as exc:  # contained per job: the batch keeps going
        rep = error_report(job.kind, exc, job.tol)
    rep.job = job.name
    rep.kind = job.kind
    rep.diagnostics["inputs"] = plain(job.inputs)
    rep.runtime_ms = (time.perf_counter() - t0) * 1e3
    return rep


@dataclass
class RunSummary:
    reports: list
    counts: dict
    runtime_ms: float

    @property
    def exit_code(self) -> int:
        if self.counts["error"]:
            return 2
        return 1 if self.counts["violation"] else 0

    def to_dict(self, timings: bool = False) -> dict:
        return {
            "counts": dict(self.counts),
            "reports": [r.to_dict(timings) for r in self.reports],
        }

    def to_json(self, timings: bool = False) -> str:
        return json.dumps(self.to_dict(timings), sort_keys=True, indent=2) + "\n"

    def timings(self) -> dict:
        return {"total_ms": self.runtime_ms, "jobs": {r.job: r.runtime_ms for r in self.reports}}


def run(config, workers: int = 1, base_dir: str = ".") -> RunSummary:
    """Execute every job; reports keep config order whatever the completion order."""
    t0 = time.perf_counter()
    jobs = prepare(config, base_dir)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_execute, jobs))
    else:
        reports = [_execute(j) for j in jobs]
    counts = {s: sum(r.status == s for r in reports) for s in ("pass", "violation", "error")}
    return RunSummary(reports, counts, (time.perf_counter() - t0) * 1e3)


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
