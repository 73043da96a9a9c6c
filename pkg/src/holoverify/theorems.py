"""Theorem checks: each computes both sides of a classical integral identity.

Every check returns a :class:`~holoverify.report.VerificationReport`. A finite
residual above tolerance is a *violation*, which is an informative result
(an enclosed pole, a non-holomorphic integrand), never an exception. Library
errors such as a pole on the integration path become *error* reports.
"""
from __future__ import annotations

import math

import numpy as np

from ._rules import composite
from .analysis import component_partials, partial
from .errors import EvaluationError, SingularityError
from .expr import PLANAR, SPATIAL, Expr, compile_expr, is_analytic_syntax, parse, symbolic_diff
from .goursat import GoursatCertificate, goursat_certify, goursat_check
from .geometry import GraphSolid, Homotopy, Rectangle, boundary_of, faces_of
from .quad import (
    DEFAULT,
    QuadSpec,
    area_integral,
    as_callable,
    contour_integral,
    flux,
    line_integral,
    sample,
    volume_integral,
)
from .report import checked, flat, make_report

DEFAULT_TOL = 1e-8
FD_STEP = 1e-6


def _expr(e, mode):
    return parse(e, mode) if isinstance(e, str) else e


def _num(v):
    v = complex(v)
    return v.real if v.imag == 0 else v


def _snap(raw: complex, tol: float = 1e-6):
    n = round(raw.real)
    return int(n) if abs(raw - n) <= tol else None


# --------------------------------------------------------------------------- rectangle identity


@checked("rectangle_identity")
def rectangle_identity(f, rect: Rectangle, q: QuadSpec = DEFAULT, tol: float = DEFAULT_TOL):
    """Compare ``int [f(x+iY) - f(x+iy0)] dx`` with ``i int [f(X+iy) - f(x0+iy)] dy``.

    Their difference RHS - LHS is the loop integral around the rectangle; its
    value over 2*pi*i is reported as a winding diagnostic when it is an integer.
    The two real identities for S = re f and T = im f are reported as well.
    """
    func = as_callable(_expr(f, "z"))
    s, w = composite(q.panels, q.nodes)
    hx, hy = rect.x1 - rect.x0, rect.y1 - rect.y0
    x = rect.x0 + hx * s
    y = rect.y0 + hy * s
    top = sample(func, x + 1j * rect.y1, where=" on the top edge")
    bottom = sample(func, x + 1j * rect.y0, where=" on the bottom edge")
    right = sample(func, rect.x1 + 1j * y, where=" on the right edge")
    left = sample(func, rect.x0 + 1j * y, where=" on the left edge")
    ix = complex(hx * np.sum(w * (top - bottom)))
    iy = complex(hy * np.sum(w * (right - left)))
    lhs, rhs = ix, 1j * iy
    loop = rhs - lhs
    # int (S(X,y) - S(x0,y)) dy = int (T(x,Y) - T(x,y0)) dx  and
    # int (S(x,Y) - S(x,y0)) dx = -int (T(X,y) - T(x0,y)) dy
    components = [abs(iy.real - ix.imag), abs(ix.real + iy.imag)]
    diag = {
        "loop_integral": loop,
        "winding": _snap(loop / (2j * math.pi)),
        "component_residuals": components,
    }
    return make_report("rectangle_identity", flat(lhs), flat(rhs), [abs(lhs - rhs)], tol, diag)


# --------------------------------------------------------------------------- homotopy


def _homotopy_rule(H: Homotopy, q: QuadSpec):
    s, w = composite(q.panels, q.nodes)
    bp = H.breakpoints
    ts, ws = [], []
    for a, b in zip(bp[:-1], bp[1:]):
        ts.append(a + (b - a) * s)
        ws.append((b - a) * w)
    return np.concatenate(ts), np.concatenate(ws)


SWEEP_T = 129
SWEEP_EPS = 33
BLOWUP = 1e8


def _sweep(func, H: Homotopy, epsilons):
    """Sample f on a (t, eps) grid and raise at the worst suspicious sample.

    Quadrature nodes almost never land on a pole exactly, so a sample is
    suspicious when it fails, is non-finite, or exceeds 1e8 times the typical
    magnitude.
    """
    ts = np.arange(SWEEP_T) / (SWEEP_T - 1)
    es = np.union1d(np.asarray(epsilons, dtype=float), np.linspace(0.0, 1.0, SWEEP_EPS))
    mags = np.empty((es.size, ts.size))
    for k, e in enumerate(es):
        z = H.at(ts, e)
        try:
            mags[k] = np.abs(np.broadcast_to(func(z), z.shape))
        except EvaluationError:
            for j, zj in enumerate(z):
                try:
                    mags[k, j] = abs(complex(func(zj)))
                except EvaluationError:
                    mags[k, j] = np.inf
    bad = ~np.isfinite(mags)
    finite = mags[~bad]
    scale = max(1.0, float(np.median(finite))) if finite.size else 1.0
    bad |= np.where(np.isfinite(mags), mags, 0.0) > BLOWUP * scale
    if np.any(bad):
        score = np.where(bad, np.nan_to_num(mags, nan=np.inf, posinf=np.inf), -1.0)
        k, j = np.unravel_index(int(np.argmax(score)), score.shape)
        raise SingularityError("homotopy crosses singularity", {"t": float(ts[j]), "eps": float(es[k])})


@checked("homotopy_invariance")
def homotopy_invariance(f, H: Homotopy, epsilons=None, q: QuadSpec = DEFAULT, tol: float = DEFAULT_TOL):
    """Sweep ``I_eps`` along the linear blend between two paths with shared endpoints.

    Reports ``max |I_eps - I_0|`` and, per eps, the integral of
    ``f'(g_eps) W g_eps' + f(g_eps) W'`` (the eps-derivative of ``I_eps``),
    which should vanish. Non-analytic integrands differentiate along W by
    central differences.
    """
    f = _expr(f, "z")
    func = as_callable(f)
    eps = np.linspace(0.0, 1.0, 11) if epsilons is None else np.asarray(epsilons, dtype=float)
    if np.any((eps < 0) | (eps > 1)):
        raise ValueError("epsilons must lie in [0, 1]")
    _sweep(func, H, eps)
    T, W = _homotopy_rule(H, q)
    disp = H.displacement(T)
    rate = H.displacement_rate(T)
    deriv = compile_expr(symbolic_diff(f, "z")) if isinstance(f, Expr) and is_analytic_syntax(f) else None

    def integral(e):
        z = H.at(T, e)
        dz = H.tangent_at(T, e)
        vals = sample(func, z, where=f" on the curve eps={e:g}")
        if deriv is not None:
            dfe = sample(deriv, z, where=f" on the curve eps={e:g}") * disp
        else:
            dfe = (sample(func, z + FD_STEP * disp) - sample(func, z - FD_STEP * disp)) / (2 * FD_STEP)
        return complex(np.sum(W * vals * dz)), complex(np.sum(W * (dfe * dz + vals * rate)))

    i0, _ = integral(0.0)
    values, derivs = zip(*(integral(e) for e in eps))
    spread = max(abs(v - i0) for v in values)
    dmax = max(abs(d) for d in derivs)
    diag = {
        "epsilons": eps.tolist(),
        "integrals": list(values),
        "derivative_identity": [abs(d) for d in derivs],
        "max_spread": spread,
    }
    return make_report("homotopy_invariance", flat(i0), flat(*values), [spread, dmax], tol, diag)


# --------------------------------------------------------------------------- planar Green


@checked("green_check")
def green_check(P, Q, region, q: QuadSpec = DEFAULT, tol: float = DEFAULT_TOL):
    """Loop integral of ``P dx + Q dy`` against the area integral of ``Q_x - P_y``."""
    P, Q = _expr(P, PLANAR), _expr(Q, PLANAR)
    Qx, Py = partial(Q, "x"), partial(P, "y")
    loop = line_integral(P, Q, boundary_of(region), q)
    area = area_integral(lambda x, y: Qx(x, y) - Py(x, y), region, q)
    return make_report("green_check", flat(_num(loop)), flat(area), [abs(loop - area)], tol)


@checked("cauchy_via_green")
def cauchy_via_green(f, region, q: QuadSpec = DEFAULT, tol: float = DEFAULT_TOL):
    """Loop integral of f dz against ``-A1 + i*A2`` with
    ``A1 = int (v_x + u_y)`` and ``A2 = int (u_x - v_y)``.

    For analytic-syntax f the CR equations force A1 = A2 = 0, and those two
    magnitudes join the residual list.
    """
    f = _expr(f, "z")
    ux, uy, vx, vy = component_partials(f)
    loop = contour_integral(f, boundary_of(region), q)
    a1 = area_integral(lambda x, y: vx(x, y) + uy(x, y), region, q)
    a2 = area_integral(lambda x, y: ux(x, y) - vy(x, y), region, q)
    green = -a1 + 1j * a2
    residuals = [abs(loop - green)]
    analytic = is_analytic_syntax(f)
    if analytic:
        residuals += [abs(a1), abs(a2)]
    diag = {"A1": a1, "A2": a2, "analytic_syntax": analytic}
    return make_report("cauchy_via_green", flat(loop), flat(complex(green)), residuals, tol, diag)


# --------------------------------------------------------------------------- solids


def _divergence(field):
    parts = [partial(c, v) for c, v in zip(field, "xyz")]
    return lambda x, y, z: parts[0](x, y, z) + parts[1](x, y, z) + parts[2](x, y, z)


@checked("divergence_check")
def divergence_check(X, solid, q: QuadSpec = DEFAULT, tol: float = DEFAULT_TOL):
    """Outward flux of ``X = (P, Q, R)`` through every face against the volume integral of div X."""
    field = tuple(_expr(c, SPATIAL) for c in X)
    if len(field) != 3:
        raise ValueError("a spatial field has three components")
    per_face = [flux(field, face, q) for face in faces_of(solid)]
    total = math.fsum(per_face)
    volume = volume_integral(_divergence(field), solid, q)
    diag = {"face_fluxes": per_face}
    return make_report("divergence_check", [total], [volume], [abs(total - volume)], tol, diag)


SLOPE_LIMIT = 1e6
DEGRADED_TOL = 1e-3


def _rim_slope_blows_up(solid) -> bool:
    """True when a bounding graph has unbounded slope on the base boundary."""
    if not isinstance(solid, GraphSolid):
        return False
    z = solid.base.boundary().point_at(np.linspace(0.0, 1.0, 257))
    for h in (solid.lower, solid.upper):
        for var in ("x", "y"):
            try:
                d = np.asarray(partial(h, var)(z.real, z.imag))
            except EvaluationError:
                return True
            if not np.all(np.isfinite(d)) or np.max(np.abs(d)) > SLOPE_LIMIT:
                return True
    return False


@checked("gauss_volume")
def gauss_volume(solid, q: QuadSpec = DEFAULT, tol: float = DEFAULT_TOL):
    """Volume directly and as the surface integral of ``z cos(theta) dS``.

    Boxes add the x and y variants. When a bounding graph is vertical on the
    base boundary (a hemisphere) the surface element is unbounded there; the
    check then warns and degrades the tolerance to 1e-3.
    """
    zero = lambda x, y, z: 0.0  # noqa: E731
    routes = {"z": (zero, zero, lambda x, y, z: z)}
    if not isinstance(solid, GraphSolid):
        routes["x"] = (lambda x, y, z: x, zero, zero)
        routes["y"] = (zero, lambda x, y, z: y, zero)
    diag = {}
    if _rim_slope_blows_up(solid):
        tol = max(tol, DEGRADED_TOL)
        diag["warnings"] = [f"surface element unbounded on the base boundary; tolerance degraded to {tol:g}"]
    direct = volume_integral(lambda x, y, z: 1.0, solid, q)
    surface = {k: math.fsum(flux(field, face, q) for face in faces_of(solid)) for k, field in routes.items()}
    diag["routes"] = list(surface)
    residuals = [abs(direct - v) for v in surface.values()]
    return make_report("gauss_volume", [direct], list(surface.values()), residuals, tol, diag)


def _laplacian(e: Expr):
    second = [compile_expr(symbolic_diff(symbolic_diff(e, v), v)) for v in "xyz"]
    return lambda x, y, z: second[0](x, y, z) + second[1](x, y, z) + second[2](x, y, z)


def _green_side(U, V, solid, q):
    """``int U lap V + int U dV/dw`` with w the interior normal, so ``dV/dw = -grad V . N``."""
    fu, lap = compile_expr(U), _laplacian(V)
    grad = [compile_expr(symbolic_diff(V, v)) for v in "xyz"]
    bulk = volume_integral(lambda x, y, z: fu(x, y, z) * lap(x, y, z), solid, q)
    field = tuple((lambda g: lambda x, y, z: fu(x, y, z) * g(x, y, z))(g) for g in grad)
    boundary = -math.fsum(flux(field, face, q) for face in faces_of(solid))
    return bulk, boundary


@checked("green_identity_check")
def green_identity_check(U, V, solid, q: QuadSpec = DEFAULT, tol: float = DEFAULT_TOL):
    """Symmetric Green identity: ``int U lap V + int U dV/dw`` equals the same with U, V swapped."""
    U, V = _expr(U, SPATIAL), _expr(V, SPATIAL)
    bu, su = _green_side(U, V, solid, q)
    bv, sv = _green_side(V, U, solid, q)
    left, right = bu + su, bv + sv
    diag = {"volume_terms": [bu, bv], "surface_terms": [su, sv]}
    return make_report("green_identity_check", [left], [right], [abs(left - right)], tol, diag)


__all__ = [
    "rectangle_identity",
    "homotopy_invariance",
    "green_check",
    "cauchy_via_green",
    "divergence_check",
    "gauss_volume",
    "green_identity_check",
    "goursat_certify",
    "goursat_check",
    "GoursatCertificate",
]
