"""Pointwise and field-level differential checks.

Partials are symbolic wherever the syntax allows. A complex function of z is
first rewritten in x and y, where conj, re and im are still differentiable;
only ``abs`` forces the central finite-difference fallback.
"""
from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateError, DifferentiationError, GeometryError, SingularityError
from .expr import PLANAR, Expr, compile_expr, is_analytic_syntax, parse, symbolic_diff, to_planar
from .geometry import Path
from .quad import DEFAULT, QuadSpec, contour_integral, line_integral, sample, segment_rule

FD_STEP = 1e-6
WINDING_SNAP = 1e-6


@dataclass(frozen=True)
class GridSampling:
    """Uniform ``resolution x resolution`` grid over the region's bounding box,
    restricted to the region and with the exclusion disks removed."""

    region: object
    resolution: int = 33
    exclusions: tuple = ()  # (center, radius) pairs

    def __post_init__(self):
        if self.resolution < 2:
            raise GeometryError("grid resolution must be at least 2")
        object.__setattr__(self, "exclusions", tuple((complex(c), float(r)) for c, r in self.exclusions))
        if self.points().size == 0:
            raise GeometryError("exclusions remove every grid point")

    def points(self) -> np.ndarray:
        x0, x1, y0, y1 = self.region.bbox
        X, Y = np.meshgrid(np.linspace(x0, x1, self.resolution), np.linspace(y0, y1, self.resolution), indexing="ij")
        z = (X + 1j * Y).ravel()
        keep = np.asarray(self.region.contains(z.real, z.imag), dtype=bool)
        for c, r in self.exclusions:
            keep &= np.abs(z - c) >= r
        return z[keep]


@dataclass(frozen=True)
class ResidualField:
    points: np.ndarray  # complex, x + i*y
    values: np.ndarray
    name: str = "residual"
    max_abs: float = field(init=False)
    mean_abs: float = field(init=False)
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        mags = np.abs(self.values)
        object.__setattr__(self, "max_abs", float(np.max(mags)) if mags.size else 0.0)
        object.__setattr__(self, "mean_abs", float(np.mean(mags)) if mags.size else 0.0)


def fmt17(v) -> str:
    return f"{float(v) + 0.0:.17g}"


def write_csv(path, fields, coords=("x", "y")) -> None:
    """Write residual fields sharing one point set as ``x, y, name1, name2, ...``."""
    pts = fields[0].points
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*coords, *(f.name for f in fields)])
        for k, p in enumerate(pts):
            w.writerow([fmt17(p.real), fmt17(p.imag), *(fmt17(np.real(f.values[k])) for f in fields)])


def _real(vals):
    vals = np.asarray(vals)
    return vals.real.copy() if not np.any(vals.imag) else np.abs(vals)


# --------------------------------------------------------------------------- partials


def partial(e: Expr, var: str):
    """Vectorized callable for the partial of a real-coordinate expression.

    Symbolic when possible; otherwise a central difference with step
    ``1e-6*(1 + |coordinate|)``.
    """
    try:
        return compile_expr(symbolic_diff(e, var))
    except DifferentiationError:
        pass
    func = compile_expr(e)
    k = e.mode.variables.index(var)

    def fd(*coords):
        coords = [np.asarray(c, dtype=float) for c in coords]
        h = FD_STEP * (1.0 + np.abs(coords[k]))
        plus = list(coords)
        minus = list(coords)
        plus[k] = coords[k] + h
        minus[k] = coords[k] - h
        return (func(*plus) - func(*minus)) / (2 * h)

    return fd


def _planar(e) -> Expr:
    if isinstance(e, str):
        return parse(e, PLANAR)
    if e.mode.complex_variable:
        raise TypeError("expected an expression in x and y")
    return e


def component_partials(f):
    """(u_x, u_y, v_x, v_y) callables for a z-mode Expr or a (u, v) pair."""
    if isinstance(f, Expr):
        F = to_planar(f)
        Fx, Fy = partial(F, "x"), partial(F, "y")
        return (
            lambda x, y: np.real(Fx(x, y)),
            lambda x, y: np.real(Fy(x, y)),
            lambda x, y: np.imag(Fx(x, y)),
            lambda x, y: np.imag(Fy(x, y)),
        )
    u, v = (_planar(c) for c in f)
    return partial(u, "x"), partial(u, "y"), partial(v, "x"), partial(v, "y")


def _on_grid(func, pts, what):
    try:
        return sample(func, pts.real, pts.imag, where=f" while computing {what}")
    except SingularityError as exc:
        raise SingularityError(f"{exc} (add an exclusion disk around the singularity)", exc.location) from exc


# --------------------------------------------------------------------------- operations


def cr_residual(f, g: GridSampling) -> tuple[ResidualField, ResidualField]:
    """Cauchy-Riemann residuals ``r1 = u_x - v_y`` and ``r2 = u_y + v_x``.

    ``f`` is a z-mode Expr (split into u = re f, v = im f) or a planar pair (u, v).
    """
    ux, uy, vx, vy = component_partials(f)
    pts = g.points()
    r1 = _on_grid(lambda x, y: ux(x, y) - vy(x, y), pts, "u_x - v_y")
    r2 = _on_grid(lambda x, y: uy(x, y) + vx(x, y), pts, "u_y + v_x")
    return ResidualField(pts, _real(r1), "r1"), ResidualField(pts, _real(r2), "r2")


def exactness_residual(P, Q, g: GridSampling) -> ResidualField:
    """Clairaut residual ``P_y - Q_x`` of the form ``P dx + Q dy``."""
    Py, Qx = partial(_planar(P), "y"), partial(_planar(Q), "x")
    pts = g.points()
    vals = _on_grid(lambda x, y: Py(x, y) - Qx(x, y), pts, "P_y - Q_x")
    return ResidualField(pts, _real(vals), "clairaut")


@dataclass(frozen=True)
class LoopExactness:
    clairaut_max: float
    loop_integral: complex
    verdict: str  # "exact-consistent", "non-exact despite closedness" or "not closed"
    tolerance: float


def loop_exactness_test(P, Q, loop: Path, q: QuadSpec = DEFAULT, tol: float = 1e-8) -> LoopExactness:
    """Probe whether a closed form ``P dx + Q dy`` is exact around ``loop``.

    A form can satisfy ``P_y = Q_x`` everywhere on the loop and still have a
    nonzero loop integral when the loop encloses a point where the form is
    undefined.
    """
    if not loop.closed:
        raise GeometryError("exactness probe needs a closed loop")
    P, Q = _planar(P), _planar(Q)
    Py, Qx = partial(P, "y"), partial(Q, "x")
    worst = 0.0
    for k, seg in enumerate(loop.segments):
        z, _, _ = segment_rule(seg, q)
        vals = sample(lambda x, y: Py(x, y) - Qx(x, y), z.real, z.imag, where=f" on loop segment {k}")
        worst = max(worst, float(np.max(np.abs(vals))))
    total = line_integral(P, Q, loop, q)
    if worst > tol:
        verdict = "not closed"
    elif abs(total) > tol:
        verdict = "non-exact despite closedness"
    else:
        verdict = "exact-consistent"
    return LoopExactness(worst, total, verdict, tol)


@dataclass(frozen=True)
class Winding:
    value: int | None  # None when the raw value is not within 1e-6 of an integer
    raw: complex
    distance_ok: bool


def winding_number(p: Path, a: complex, q: QuadSpec = DEFAULT) -> Winding:
    """``(1/2 pi i) * loop integral of dz/(z - a)``, snapped to an integer."""
    if not p.closed:
        raise GeometryError("winding number needs a closed path")
    a = complex(a)
    if p.distance_to(a) < 1e-9:
        raise SingularityError("point lies on the path", {"a": [a.real, a.imag]})
    raw = contour_integral(lambda z: 1.0 / (z - a), p, q) / (2j * math.pi)
    nearest = round(raw.real)
    ok = abs(raw - nearest) <= WINDING_SNAP
    return Winding(int(nearest) if ok else None, complex(raw), bool(ok))


@dataclass(frozen=True)
class Conformality:
    angle_in: float
    angle_out: float
    residual: float
    orientation_preserved: bool


def _directional(f: Expr, a: complex, d: complex) -> complex:
    if is_analytic_syntax(f):
        return complex(compile_expr(symbolic_diff(f, "z"))(a)) * d
    func = compile_expr(f)
    h = FD_STEP * (1.0 + abs(a))
    return complex((func(a + h * d) - func(a - h * d)) / (2 * h))


def conformality_check(f: Expr, a: complex, dir1: complex = 1, dir2: complex = 1j) -> Conformality:
    """Compare the angle between two directions at ``a`` with the angle
    between their images under the derivative map of ``f``."""
    a, d1, d2 = complex(a), complex(dir1), complex(dir2)
    if abs(d1) == 0 or abs(d2) == 0:
        raise ValueError("directions must be nonzero")
    d1, d2 = d1 / abs(d1), d2 / abs(d2)
    im1, im2 = _directional(f, a, d1), _directional(f, a, d2)
    if min(abs(im1), abs(im2)) < 1e-9:
        raise DegenerateError(f"derivative vanishes at {a}: the map is not conformal there")
    angle_in = cmath.phase(d2 / d1)
    angle_out = cmath.phase(im2 / im1)
    diff = (angle_out - angle_in + math.pi) % (2 * math.pi) - math.pi
    same = np.sign(angle_in) == np.sign(angle_out)
    return Conformality(angle_in, angle_out, abs(diff), bool(same))


def primitive_cr_check(F: Expr, g: GridSampling) -> tuple[ResidualField, ResidualField]:
    """Differentiate a primitive F symbolically and check CR for f = F'."""
    return cr_residual(symbolic_diff(F, "z"), g)
