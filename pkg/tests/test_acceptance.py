"""Acceptance criteria 1-15, each at its stated tolerance.

Every test prints one ``criterion N: PASS|FAIL`` line (also echoed in the
terminal summary) and then asserts on the same checks.
"""
import json
import math
import shutil
import time
from pathlib import Path as FsPath

import numpy as np
from conftest import ACCEPTANCE_LINES
from hypothesis import given, settings
from test_expr import POINTS as FD_POINTS
from test_expr import SMOOTH, trees

from holoverify.analysis import GridSampling, loop_exactness_test, exactness_residual
from holoverify.cli import main
from holoverify.expr import Expr, evaluate, get_mode, parse, symbolic_diff
from holoverify.fluids import PlanarVelocity, SpatialField, axisym_divergence, bernoulli_check, flow_jacobian_check, jacobian_rate
from holoverify.geometry import Box, Disk, GraphSolid, Homotopy, Path, Rectangle
from holoverify.goursat import goursat_certify
from holoverify.quad import riemann_sum_integral, volume_integral
from holoverify.theorems import (
    cauchy_via_green,
    divergence_check,
    gauss_volume,
    goursat_check,
    green_check,
    green_identity_check,
    homotopy_invariance,
    rectangle_identity,
)

Z = lambda t: parse(t, "z")  # noqa: E731
P = lambda t: parse(t, "planar")  # noqa: E731
S = lambda t: parse(t, "spatial")  # noqa: E731
UNIT = Rectangle(0, 1, 0, 1)
BOX = Box(0, 1, 0, 1, 0, 1)
FIXTURES = FsPath(__file__).parent / "fixtures"


def verdict(n: int, checks: dict) -> None:
    failed = [name for name, ok in checks.items() if not ok]
    line = f"criterion {n}: {'PASS' if not failed else 'FAIL'}" + (f" ({', '.join(failed)})" if failed else "")
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert not failed, line


def close(a, b, tol):
    return abs(complex(a) - complex(b)) <= tol


def test_criterion_01_rectangle_identity():
    checks = {}
    for f in ("z^2", "exp(z)", "1/(z-3)"):
        t0 = time.perf_counter()
        rep = rectangle_identity(Z(f), UNIT)
        elapsed = time.perf_counter() - t0
        checks[f"{f} residual"] = rep.residual <= 1e-10
        checks[f"{f} under 1 s"] = elapsed < 1.0
    verdict(1, checks)


def test_criterion_02_enclosed_pole():
    rep = rectangle_identity(Z("1/(z-(0.5+0.5*i))"), UNIT)
    lhs, rhs = complex(*rep.left), complex(*rep.right)
    verdict(2, {
        "RHS - LHS = 2 pi i": close(rhs - lhs, 2j * math.pi, 1e-8),
        "winding 1": rep.diagnostics.get("winding") == 1,
    })


def test_criterion_03_dalembert():
    Pf, Qf = P("y/(x^2+y^2)"), P("-x/(x^2+y^2)")
    annulus = GridSampling(Rectangle(-2, 2, -2, 2), 41, ((0, 0.5),))
    res = loop_exactness_test(Pf, Qf, Path.circle())
    verdict(3, {
        "Clairaut on annulus grid": exactness_residual(Pf, Qf, annulus).max_abs <= 1e-10,
        "Clairaut on loop": res.clairaut_max <= 1e-10,
        "loop = -2 pi": abs(res.loop_integral + 2 * math.pi) <= 1e-10,
        "verdict": res.verdict == "non-exact despite closedness",
    })


def test_criterion_04_riemann_order():
    exact = np.exp(1 + 1j) - 1
    ns = [2**k for k in range(7, 13)]
    errs = [abs(riemann_sum_integral(Z("exp(z)"), Path.segment(0, 1 + 1j), n) - exact) for n in ns]
    order = -np.polyfit(np.log(ns), np.log(errs), 1)[0]
    print(f"  empirical order {order:.4f}")
    verdict(4, {"order in [0.9, 1.1]": 0.9 <= order <= 1.1})


def test_criterion_05_homotopy():
    H = Homotopy(Path.segment(0, 1), Path.polyline([0, 1j, 1]))
    eps = np.linspace(0, 1, 11)
    rep = homotopy_invariance(Z("z^3"), H, eps)
    integrals = [complex(*v) for v in rep.diagnostics["integrals"]]
    verdict(5, {
        "11 epsilons": len(integrals) == 11,
        "max spread": max(abs(v - integrals[0]) for v in integrals) <= 1e-9,
        "derivative identity": max(rep.diagnostics["derivative_identity"]) <= 1e-9,
        "status": rep.passed,
    })


def test_criterion_06_green():
    a = green_check(P("-y"), P("x"), Disk(0, 1))
    b = green_check(P("-y^3"), P("x^3"), Disk(0, 1))
    verdict(6, {
        "rotation loop": close(a.left[0], 2 * math.pi, 1e-9),
        "rotation area": close(a.right[0], 2 * math.pi, 1e-9),
        "cubic loop": close(b.left[0], 1.5 * math.pi, 1e-8),
        "cubic area": close(b.right[0], 1.5 * math.pi, 1e-8),
    })


def test_criterion_07_cauchy_via_green():
    a = cauchy_via_green(Z("abs(z)^2"), UNIT)
    b = cauchy_via_green(Z("exp(z)"), UNIT)
    verdict(7, {
        "abs^2 loop": close(complex(*a.left), -1 + 1j, 1e-9),
        "abs^2 area form": close(complex(*a.right), -1 + 1j, 1e-9),
        "exp loop": abs(complex(*b.left)) <= 1e-10,
        "exp A1": abs(b.diagnostics["A1"]) <= 1e-10,
        "exp A2": abs(b.diagnostics["A2"]) <= 1e-10,
    })


GOURSAT_FUNCS = ["exp(z)", "conj(z)", "z^2*conj(z)", "1/(z-0.3-0.7*i)", "sin(z)/(z-2)", "abs(z)", "z^5"]


def test_criterion_08_goursat():
    checks = {}
    for f in GOURSAT_FUNCS:
        cert = goursat_certify(Z(f), UNIT, tol=1e-10, max_depth=8)
        checks[f"{f} defect"] = cert.defect <= 1e-12 * cert.squares
    exp = goursat_certify(Z("exp(z)"), UNIT, tol=1e-10)
    conj = goursat_certify(Z("conj(z)"), UNIT)
    checks["exp certified"] = exp.outcome == "certified" and exp.bound <= 1e-10
    checks["conj violation 2"] = conj.outcome == "violation" and abs(conj.violation - 2) <= 1e-9
    verdict(8, checks)


def test_criterion_09_divergence():
    a = divergence_check((S("x"), S("y"), S("z")), BOX)
    b = divergence_check((S("x^2"), S("x*y"), S("y*z")), BOX)
    verdict(9, {
        "identity flux": close(a.left[0], 3, 1e-10),
        "identity volume": close(a.right[0], 3, 1e-10),
        "quadratic flux": close(b.left[0], 2, 1e-9),
        "quadratic volume": close(b.right[0], 2, 1e-9),
    })


def test_criterion_10_gauss_volume():
    cap = GraphSolid.from_text(Disk(0, 1), "0", "1-x^2-y^2")
    hemi = GraphSolid.from_text(Disk(0, 1), "0", "sqrt(1-x^2-y^2)")
    c, b, h = gauss_volume(cap), gauss_volume(BOX), gauss_volume(hemi)
    verdict(10, {
        "cap direct": close(c.left[0], math.pi / 2, 1e-6),
        "cap surface": all(close(v, math.pi / 2, 1e-6) for v in c.right),
        "box direct exactly 1": b.left == [1.0] and volume_integral(S("1"), BOX) == 1.0,
        "box three surface routes exactly 1": b.right == [1.0, 1.0, 1.0],
        "hemisphere direct": close(h.left[0], 2 * math.pi / 3, 1e-3),
        "hemisphere surface": all(close(v, 2 * math.pi / 3, 1e-3) for v in h.right),
        "hemisphere warning": bool(h.diagnostics.get("warnings")),
    })


def test_criterion_11_green_identity():
    rep = green_identity_check(S("1"), S("x^2+y^2+z^2"), BOX)
    verdict(11, {
        "left 0": abs(rep.left[0]) <= 1e-9,
        "right 0": abs(rep.right[0]) <= 1e-9,
        "6 - 6": close(rep.diagnostics["volume_terms"][0], 6, 1e-9) and close(rep.diagnostics["surface_terms"][0], -6, 1e-9),
    })


def test_criterion_12_fluids():
    source = PlanarVelocity("x/(x^2+z^2)^1.5", "z/(x^2+z^2)^1.5")
    field = axisym_divergence(source, GridSampling(Rectangle(-1, 1, 0.05, 1), 33))
    X = SpatialField("x", "y", "z")
    points = [(0.1, 0.2, 0.3), (1, 1, 1), (-0.5, 0.7, 0)]
    jac = flow_jacobian_check(X, points, dt=1e-5, tol=1e-4)
    errs = [abs(jacobian_rate(X, points[0], dt) - 3) for dt in (1e-3, 5e-4, 2.5e-4)]
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    bern = bernoulli_check("1/(1+s)", 1)
    verdict(12, {
        "point source residual": field.max_abs <= 1e-10,
        "point source 3D reduction": field.meta["reduction_max"] <= 1e-10,
        "dJ/dt = 3": all(close(v, 3, 1e-4) for v in jac.left),
        "O(dt) scaling": all(1.7 <= r <= 2.3 for r in ratios),
        "Bernoulli residual": bern.residual <= 1e-10,
        "Bernoulli 3/8": close(bern.left[0], 3 / 8, 1e-10) and close(bern.right[0], 3 / 8, 1e-10),
    })


ANALYTIC = ["exp(z)", "z^3 - 2*z + 1", "sin(z)*cos(2*z)", "1/(z-3)", "log(z+5)"]
RECTS = [Rectangle(0, 1, 0, 1), Rectangle(-1, 0.5, -0.5, 1), Rectangle(0.5, 2, -2, -0.5)]


def test_criterion_13_cross_engine():
    checks = {}
    for f in ANALYTIC:
        e = Z(f)
        for k, r in enumerate(RECTS):
            a, b = complex(r.x0, r.y0), complex(r.x1, r.y1)
            H = Homotopy(Path.segment(a, b), Path.polyline([a, complex(r.x1, r.y0), b]))
            reps = [
                rectangle_identity(e, r, tol=1e-8),
                cauchy_via_green(e, r, tol=1e-8),
                homotopy_invariance(e, H, tol=1e-8),
                goursat_check(e, r, tol=1e-8),
            ]
            checks[f"{f} on region {k}"] = all(rep.passed for rep in reps)
    verdict(13, checks)


def test_criterion_14_parser():
    precedence = {"1+2*i^2": -1, "2^3^2": 512, "-2^2": -4}
    checks = {f"{t} -> {v}": complex(evaluate(Z(t))) == v for t, v in precedence.items()}
    seen, bad = [0], []

    @settings(max_examples=1000, deadline=None, database=None)
    @given(trees(("z",)))
    def round_trip(tree):
        seen[0] += 1
        e = Expr(tree, get_mode("z"))
        if parse(str(e), "z") != e:
            bad.append(str(e))

    round_trip()
    checks["round trip on 1000 expressions"] = seen[0] >= 1000 and not bad
    worst = 0.0
    for text, var, mode in SMOOTH:
        e = parse(text, mode)
        d = symbolic_diff(e, var)
        for p in FD_POINTS:
            env = {"z": p} if mode == "z" else dict(zip(get_mode(mode).variables, (p.real, p.imag, 0.25)))
            h = 1e-6 * (1 + abs(env[var]))
            up, dn = dict(env), dict(env)
            up[var] += h
            dn[var] -= h
            fd = (complex(evaluate(e, **up)) - complex(evaluate(e, **dn))) / (2 * h)
            exact = complex(evaluate(d, **env))
            worst = max(worst, abs(exact - fd) / max(1.0, abs(exact)))
    checks["symbolic vs FD"] = worst <= 1e-6
    verdict(14, checks)


def test_criterion_15_cli(tmp_path, capsys):
    for f in FIXTURES.glob("*.json"):
        shutil.copy(f, tmp_path / f.name)
    codes = {name: main(["run", "--config", str(tmp_path / f"{name}.json")]) for name in ("pass", "violation", "error")}
    outs = []
    for k in range(2):
        out = tmp_path / f"out{k}.json"
        main(["run", "--config", str(tmp_path / "mixed.json"), "--format", "json", "--out", str(out)])
        outs.append(out.read_bytes())
    capsys.readouterr()
    verdict(15, {
        "exit codes 0/1/2": codes == {"pass": 0, "violation": 1, "error": 2},
        "byte-identical JSON": outs[0] == outs[1] and json.loads(outs[0])["counts"]["error"] == 1,
    })
