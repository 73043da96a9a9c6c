import cmath
import math

import numpy as np
import pytest

from holoverify.expr import parse
from holoverify.geometry import Box, Disk, GraphSolid, Homotopy, Path, Polygon, Rectangle, XConvex
from holoverify.goursat import goursat_certify
from holoverify.quad import contour_integral, riemann_sum_integral
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


# --------------------------------------------------------------------------- rectangle identity


def test_rectangle_exp_against_closed_form():
    rep = rectangle_identity(Z("exp(z)"), UNIT)
    e = cmath.exp
    lhs = (e(1 + 1j) - e(1j)) - (e(1) - e(0))
    rhs = (e(1 + 1j) - e(1)) - (e(1j) - e(0))
    assert complex(*rep.left) == pytest.approx(lhs, abs=1e-13)
    assert complex(*rep.right) == pytest.approx(rhs, abs=1e-13)
    assert rep.passed and rep.residual <= 1e-10


def test_rectangle_conj_violation():
    rep = rectangle_identity(Z("conj(z)"), UNIT)
    assert rep.status == "violation"
    assert rep.residual == pytest.approx(2, abs=1e-12)


def test_rectangle_enclosed_pole():
    f = Z("1/(z-0.5-0.5*i)")
    rep = rectangle_identity(f, UNIT)
    oracle = riemann_sum_integral(f, UNIT.boundary(), 400_000)
    assert abs(oracle - 2j * math.pi) <= 1e-4
    loop = complex(*rep.diagnostics["loop_integral"])
    assert abs(loop - 2j * math.pi) <= 1e-8
    assert rep.status == "violation" and rep.diagnostics["winding"] == 1


@pytest.mark.parametrize("f", ["z^2", "conj(z)*z", "1/(z-0.3-0.6*i)", "exp(z)*abs(z)"])
def test_rectangle_residual_is_the_loop_integral(f):
    rep = rectangle_identity(Z(f), Rectangle(-0.5, 1, 0, 2))
    loop = contour_integral(Z(f), Rectangle(-0.5, 1, 0, 2).boundary())
    assert abs(rep.residual - abs(loop)) <= 1e-12


def test_rectangle_component_identities():
    rep = rectangle_identity(Z("z^3"), UNIT)
    assert max(rep.diagnostics["component_residuals"]) <= 1e-12


# --------------------------------------------------------------------------- homotopy


def test_homotopy_cubic():
    H = Homotopy(Path.segment(0, 1), Path.polyline([0, 1j, 1]))
    rep = homotopy_invariance(Z("z^3"), H, [0, 0.25, 0.5, 0.75, 1])
    assert rep.passed
    for re_, im_ in rep.diagnostics["integrals"]:
        assert abs(complex(re_, im_) - 0.25) <= 1e-9


def test_homotopy_identity():
    g = Path.arc(0, 2, 0.3, 2.0)
    rep = homotopy_invariance(Z("exp(z)/(z-5)"), Homotopy(g, g))
    assert rep.residual <= 1e-14


def test_homotopy_crosses_singularity():
    H = Homotopy(Path.arc(0, 1, 0, math.pi), Path.arc(0, 1, 0, -math.pi))
    rep = homotopy_invariance(Z("1/z"), H)
    assert rep.status == "error"
    assert rep.diagnostics["error"] == "homotopy crosses singularity"
    loc = rep.diagnostics["location"]
    assert loc["t"] == pytest.approx(0.5, abs=0.02) and loc["eps"] == pytest.approx(0.5, abs=0.02)
    upper = contour_integral(Z("1/z"), Path.arc(0, 1, 0, math.pi))
    lower = contour_integral(Z("1/z"), Path.arc(0, 1, 0, -math.pi))
    assert abs(upper - lower - 2j * math.pi) <= 1e-12


def test_homotopy_non_analytic_integrand_uses_finite_differences():
    H = Homotopy(Path.segment(0, 1), Path.polyline([0, 1j, 1]))
    rep = homotopy_invariance(Z("conj(z)"), H)
    assert rep.status == "violation"


# --------------------------------------------------------------------------- Green


def test_green_examples():
    rep = green_check(P("-y"), P("x"), Disk(0, 1))
    assert rep.left[0] == pytest.approx(2 * math.pi, abs=1e-9) and rep.right[0] == pytest.approx(2 * math.pi, abs=1e-9)
    rep = green_check(P("0"), P("x"), UNIT)
    assert rep.left[0] == pytest.approx(1) and rep.right[0] == pytest.approx(1)
    rep = green_check(P("x^2*y"), P("x^3-y^2"), UNIT)
    assert rep.passed and rep.right[0] == pytest.approx(2 / 3, abs=1e-12)


@pytest.mark.parametrize(
    "region",
    [Polygon((0, 2, 2 + 1j, 1 + 2j, 1j)), XConvex.from_text(0, 1, "y^2", "1+y"), Disk(0.5 - 0.5j, 0.7)],
)
def test_green_on_other_regions(region):
    assert green_check(P("x*y^2 + sin(y)"), P("exp(x)*y"), region).passed


def test_cauchy_via_green_examples():
    rep = cauchy_via_green(Z("abs(z)^2"), UNIT)
    assert abs(complex(*rep.left) - (-1 + 1j)) <= 1e-9
    rep = cauchy_via_green(Z("exp(z)"), UNIT)
    assert rep.passed
    assert abs(complex(*rep.left)) <= 1e-10
    assert abs(rep.diagnostics["A1"]) <= 1e-10 and abs(rep.diagnostics["A2"]) <= 1e-10
    rep = cauchy_via_green(Z("conj(z)"), UNIT)
    assert rep.diagnostics["A1"] == pytest.approx(0, abs=1e-12) and rep.diagnostics["A2"] == pytest.approx(2)
    assert complex(*rep.right) == pytest.approx(2j)


def test_cauchy_via_green_enclosed_pole_is_an_error():
    rep = cauchy_via_green(Z("1/(z-0.5-0.5*i)"), Rectangle(0, 1, 0, 1))
    assert rep.status in ("error", "violation")


# --------------------------------------------------------------------------- Goursat


def test_goursat_exp_certified():
    cert = goursat_certify(Z("exp(z)"), UNIT, tol=1e-10)
    assert cert.outcome == "certified" and cert.bound <= 1e-10 and cert.depth <= 4
    assert cert.defect <= 1e-13


def test_goursat_conj_violation():
    cert = goursat_certify(Z("conj(z)"), UNIT)
    assert cert.outcome == "violation"
    assert cert.violation == pytest.approx(2, abs=1e-9)


def test_goursat_pole_localized():
    cert = goursat_certify(Z("1/(z-0.5-0.5*i)"), UNIT, tol=1e-10, max_depth=12)
    assert cert.outcome == "max_depth exceeded"
    assert abs(cert.worst_square - (0.5 + 0.5j)) <= 2**-12 * math.sqrt(2)
    rep = goursat_check(Z("1/(z-0.5-0.5*i)"), UNIT, tol=1e-10, max_depth=12)
    assert rep.status == "error" and "worst_square" in rep.diagnostics


@pytest.mark.parametrize("f", ["exp(z)", "conj(z)", "z^2*conj(z)", "1/(z-0.3-0.7*i)", "sin(z)/(z-2)", "abs(z)"])
def test_goursat_telescoping_defect(f):
    cert = goursat_certify(Z(f), UNIT, tol=1e-8, max_depth=8)
    assert cert.defect <= 1e-12 * cert.squares


# --------------------------------------------------------------------------- solids


def test_divergence_examples():
    rep = divergence_check((S("x"), S("y"), S("z")), BOX)
    assert rep.left[0] == pytest.approx(3, abs=1e-10) and rep.right[0] == pytest.approx(3, abs=1e-10)
    assert divergence_check((S("-y"), S("x"), S("0")), BOX).residual <= 1e-14
    rep = divergence_check((S("x^2"), S("x*y"), S("y*z")), BOX)
    # face oracle: x=1 gives 1, y=1 gives 1/2, z=1 gives 1/2, the three zero faces vanish
    assert sorted(np.round(rep.diagnostics["face_fluxes"], 12)) == [0, 0, 0, 0.5, 0.5, 1]
    assert rep.right[0] == pytest.approx(2, abs=1e-9)


def test_divergence_on_graph_solid():
    cap = GraphSolid.from_text(Disk(0, 1), "0", "1-x^2-y^2")
    assert divergence_check((S("x*z"), S("y^2"), S("exp(x)*z")), cap).passed


def test_gauss_volume_examples():
    rep = gauss_volume(BOX)
    assert rep.passed and rep.diagnostics["routes"] == ["z", "x", "y"]
    assert rep.left == [1.0]
    cap = gauss_volume(GraphSolid.from_text(Disk(0, 1), "0", "1-x^2-y^2"))
    assert cap.left[0] == pytest.approx(math.pi / 2, abs=1e-6) and cap.right[0] == pytest.approx(math.pi / 2, abs=1e-6)
    hemi = gauss_volume(GraphSolid.from_text(Disk(0, 1), "0", "sqrt(1-x^2-y^2)"))
    assert hemi.passed and hemi.tolerance == 1e-3
    assert hemi.left[0] == pytest.approx(2 * math.pi / 3, abs=1e-3)
    assert hemi.diagnostics["warnings"]


def test_divergence_reproduces_gauss_z_form():
    for solid in (Box(0, 2, -1, 1, 0, 0.5), GraphSolid.from_text(Rectangle(0, 1, 0, 1), "x*y", "2+x")):
        div = divergence_check((S("0"), S("0"), S("z")), solid)
        vol = gauss_volume(solid)
        assert abs(div.left[0] - vol.right[0]) <= 1e-9


def test_green_identity_examples():
    assert green_identity_check(S("x*y+z"), S("x*y+z"), BOX).residual <= 1e-12
    rep = green_identity_check(S("1"), S("x^2+y^2+z^2"), BOX)
    assert abs(rep.left[0]) <= 1e-9 and abs(rep.right[0]) <= 1e-9
    assert rep.diagnostics["volume_terms"][0] == pytest.approx(6) and rep.diagnostics["surface_terms"][0] == pytest.approx(-6)
    # U = x, V = y^2: int U lap V = 1, int U dV/dw = -1 (face y=1);
    # V lap U = 0, and the faces x=0, x=1 give +1/3 and -1/3 for V dU/dw
    rep = green_identity_check(S("x"), S("y^2"), BOX)
    assert rep.diagnostics["volume_terms"] == pytest.approx([1, 0])
    assert rep.diagnostics["surface_terms"] == pytest.approx([-1, 0], abs=1e-13)
    assert rep.passed and rep.residual <= 1e-9


# --------------------------------------------------------------------------- cross-engine agreement

ANALYTIC = ["exp(z)", "z^3 - 2*z + 1", "sin(z)*cos(2*z)", "1/(z-3)", "log(z+5)"]
RECTS = [Rectangle(0, 1, 0, 1), Rectangle(-1, 0.5, -0.5, 1), Rectangle(0.5, 2, -2, -0.5)]


@pytest.mark.parametrize("f", ANALYTIC)
@pytest.mark.parametrize("rect", RECTS)
def test_cross_engine_agreement(f, rect):
    e = Z(f)
    a, b = complex(rect.x0, rect.y0), complex(rect.x1, rect.y1)
    H = Homotopy(Path.segment(a, b), Path.polyline([a, complex(rect.x1, rect.y0), b]))
    reps = [
        rectangle_identity(e, rect),
        cauchy_via_green(e, rect),
        homotopy_invariance(e, H),
        goursat_check(e, rect, tol=1e-8),
    ]
    assert [r.status for r in reps] == ["pass"] * 4
