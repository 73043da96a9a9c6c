"""Fluid checks: potential-pair velocities, incompressibility, acceleration,
flow-map volume change and the streamline pressure relation.

Planar and meridional velocities use coordinates ``(x, z)``: x along the
flow (or the symmetry axis), z across it (the distance from the axis in the
axisymmetric case). Density is taken as 1 throughout.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ._rules import composite
from .analysis import GridSampling, ResidualField, fmt17, partial
from .errors import DifferentiationError, GeometryError, SingularityError
from .expr import MERIDIONAL, SPATIAL, Expr, compile_expr, param, parse, symbolic_diff, to_planar
from .expr import diff as D
from .expr.nodes import BinOp, Call, Var
from .quad import DEFAULT, QuadSpec, sample
from .report import checked, make_report

AXIS_BAND = 0.05
REDUCTION_TOL = 1e-10


def _meridional(e) -> Expr:
    if isinstance(e, str):
        return parse(e, MERIDIONAL)
    if e.mode != MERIDIONAL:
        if set(e.variables) <= {"x", "z"} and not e.mode.complex_variable:
            return e.with_mode(MERIDIONAL)
        raise TypeError("expected an expression in x and z")
    return e


@dataclass(frozen=True)
class PlanarVelocity:
    """Velocity ``(q, p)`` in the (x, z) plane."""

    q: Expr
    p: Expr

    def __post_init__(self):
        object.__setattr__(self, "q", _meridional(self.q))
        object.__setattr__(self, "p", _meridional(self.p))


@dataclass(frozen=True)
class SpatialField:
    u: Expr
    v: Expr
    w: Expr

    def __post_init__(self):
        for name in ("u", "v", "w"):
            e = getattr(self, name)
            object.__setattr__(self, name, parse(e, SPATIAL) if isinstance(e, str) else e.with_mode(SPATIAL))

    @property
    def components(self):
        return self.u, self.v, self.w

    def divergence(self) -> Expr:
        terms = [symbolic_diff(c, v).root for c, v in zip(self.components, "xyz")]
        return Expr(D.add(D.add(terms[0], terms[1]), terms[2]), SPATIAL)


def _xz(g: GridSampling):
    pts = g.points()
    return pts, pts.real, pts.imag


def write_velocity_csv(path, v: PlanarVelocity, field: ResidualField) -> None:
    """Rows ``x, z, q, p, residual`` at the field's sample points."""
    x, z = field.points.real, field.points.imag
    q = np.real(sample(compile_expr(v.q), x, z))
    p = np.real(sample(compile_expr(v.p), x, z))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "z", "q", "p", field.name])
        for row in zip(x, z, q, p, np.real(field.values)):
            w.writerow([fmt17(c) for c in row])


# --------------------------------------------------------------------------- potential pairs


@dataclass(frozen=True)
class PotentialFlow:
    velocity: PlanarVelocity  # q = M, p = N
    closedness: tuple | None  # residual fields for M dx + N dz and N dx - M dz


def potential_velocity(psi, grid: GridSampling | None = None) -> PotentialFlow:
    """Pair ``(M, N)`` with ``M - iN = psi(x + iz)``.

    The reflected partner ``phi(conj z) = conj(psi(z))`` keeps M and N real,
    giving ``M = re psi`` and ``N = -im psi``. With a grid, also returns the
    closedness residuals ``M_z - N_x`` (for ``M dx + N dz``) and
    ``N_z + M_x`` (for ``N dx - M dz``).
    """
    psi = parse(psi, "z") if isinstance(psi, str) else psi
    if not psi.mode.complex_variable:
        raise TypeError("the potential must be an expression in z")
    inner = to_planar(psi, MERIDIONAL).root
    M = Expr(Call("re", inner), MERIDIONAL)
    N = Expr(D.neg(Call("im", inner)), MERIDIONAL)
    vel = PlanarVelocity(M, N)
    if grid is None:
        return PotentialFlow(vel, None)
    pts, x, z = _xz(grid)
    Mx, Mz, Nx, Nz = partial(M, "x"), partial(M, "z"), partial(N, "x"), partial(N, "z")
    first = sample(lambda x, z: Mz(x, z) - Nx(x, z), x, z, where=" in the closedness check")
    second = sample(lambda x, z: Nz(x, z) + Mx(x, z), x, z, where=" in the closedness check")
    fields = (ResidualField(pts, np.real(first), "closed_M_dx_N_dz"), ResidualField(pts, np.real(second), "closed_N_dx_M_dz"))
    return PotentialFlow(vel, fields)


def planar_incompressibility(v: PlanarVelocity, g: GridSampling) -> ResidualField:
    """Residual ``q_x + p_z``."""
    qx, pz = partial(v.q, "x"), partial(v.p, "z")
    pts, x, z = _xz(g)
    vals = sample(lambda x, z: qx(x, z) + pz(x, z), x, z, where=" in the divergence")
    return ResidualField(pts, np.real(vals), "q_x+p_z")


def _rotated(v: PlanarVelocity) -> SpatialField:
    """3D field ``(q, p*y/rho, p*z/rho)``, ``rho = sqrt(y^2 + z^2)``, with the
    profiles q(x, z), p(x, z) taken literally in the spatial coordinates."""
    rho = Call("sqrt", BinOp("+", BinOp("^", Var("y"), D.num(2)), BinOp("^", Var("z"), D.num(2))))
    q, p = v.q.root, v.p.root
    return SpatialField(
        Expr(q, SPATIAL),
        Expr(BinOp("/", BinOp("*", p, Var("y")), rho), SPATIAL),
        Expr(BinOp("/", BinOp("*", p, Var("z")), rho), SPATIAL),
    )


def axisym_reduction_residual(v: PlanarVelocity, g: GridSampling) -> ResidualField:
    """Symbolic divergence of the rotated field minus
    ``q_x + p_z*z/rho + p/rho``, sampled at ``y = 0.75 z``."""
    div = compile_expr(_rotated(v).divergence())
    qx, pz = compile_expr(symbolic_diff(v.q, "x")), compile_expr(symbolic_diff(v.p, "z"))
    pf = compile_expr(v.p)
    pts, x, z = _xz(g)
    y = 0.75 * z
    rho = np.hypot(y, z)
    lhs = sample(div, x, y, z, where=" in the rotated field")
    rhs = sample(lambda x, z: qx(x, z) + pz(x, z) * z / rho + pf(x, z) / rho, x, z)
    return ResidualField(pts, np.abs(lhs - rhs), "reduction")


def axisym_divergence(v: PlanarVelocity, g: GridSampling, band: float = AXIS_BAND) -> ResidualField:
    """Residual ``q_x + p_z + p/z`` for a meridional profile of an axisymmetric flow.

    Every sample must keep ``z >= band``. The 3D reduction behind the formula
    is re-derived symbolically at each sample; its worst discrepancy is
    stored as ``reduction_max`` on the returned field's ``meta``.
    """
    if not band > 0:
        raise ValueError("the axis guard band must be positive")
    pts, x, z = _xz(g)
    if np.any(z < band):
        k = int(np.argmin(z))
        raise GeometryError(f"sample ({x[k]:g}, {z[k]:g}) lies within {band:g} of the axis z = 0")
    qx, pz, pf = partial(v.q, "x"), partial(v.p, "z"), compile_expr(v.p)
    vals = sample(lambda x, z: qx(x, z) + pz(x, z) + pf(x, z) / z, x, z, where=" in the axisymmetric divergence")
    field = ResidualField(pts, np.real(vals), "q_x+p_z+p/z")
    try:
        reduction = axisym_reduction_residual(v, g).max_abs
    except DifferentiationError:  # abs in a profile: only the planar residual is available
        reduction = None
    field.meta["reduction_max"] = reduction
    return field


def material_acceleration(v: PlanarVelocity, a_scale: float = 1.0) -> tuple[Expr, Expr]:
    """``a^2 * (q q_x + p q_z, q p_x + p p_z)`` as expressions in (x, z)."""
    q, p = v.q.root, v.p.root
    qx, qz = symbolic_diff(v.q, "x").root, symbolic_diff(v.q, "z").root
    px, pz = symbolic_diff(v.p, "x").root, symbolic_diff(v.p, "z").root
    scale = D.num(a_scale**2)
    ax = D.mul(scale, D.add(D.mul(q, qx), D.mul(p, qz)))
    az = D.mul(scale, D.add(D.mul(q, px), D.mul(p, pz)))
    return Expr(ax, MERIDIONAL), Expr(az, MERIDIONAL)


# --------------------------------------------------------------------------- flow map


CUBE_EDGE = 1e-3
_SIGNS = np.array([[i, j, k] for i in (-0.5, 0.5) for j in (-0.5, 0.5) for k in (-0.5, 0.5)])


def _rk4(funcs, pos, dt, steps):
    def rhs(p):
        return np.stack([np.real(sample(f, p[:, 0], p[:, 1], p[:, 2], where=" along an orbit")) for f in funcs], axis=1)

    h = dt / steps
    for _ in range(steps):
        k1 = rhs(pos)
        k2 = rhs(pos + 0.5 * h * k1)
        k3 = rhs(pos + 0.5 * h * k2)
        k4 = rhs(pos + h * k3)
        pos = pos + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return pos


def jacobian_rate(X: SpatialField, point, dt: float = 1e-3, steps: int = 1, h: float = CUBE_EDGE) -> float:
    """Forward-difference estimate ``(J(dt) - 1)/dt`` of the flow-map Jacobian.

    The 8 corners of a cube of edge h around the point are advanced by RK4;
    the deformation gradient averages the four cube edges along each axis.
    """
    c = np.asarray(point, dtype=float)
    corners = c + h * _SIGNS
    try:
        moved = _rk4([compile_expr(e) for e in X.components], corners, dt, steps)
    except SingularityError as exc:
        raise SingularityError(f"orbit escapes the evaluation domain: {exc}", {"point": c.tolist()}) from exc
    F = np.empty((3, 3))
    for axis in range(3):
        bit = 4 >> axis  # corner index is 4i + 2j + k
        lo = [c for c in range(8) if not c & bit]
        hi = [c | bit for c in lo]
        F[:, axis] = np.mean(moved[hi] - moved[lo], axis=0) / h
    return (float(np.linalg.det(F)) - 1.0) / dt


@checked("flow_jacobian_check")
def flow_jacobian_check(X: SpatialField, points, dt: float = 1e-3, steps: int = 1, tol: float = 1e-4):
    """Compare the flow-map volume rate with ``div X`` at each point.

    The forward difference carries an O(dt) error (``4.5*dt`` for
    ``X = (x, y, z)``), so tight tolerances need a small dt.
    """
    if not dt > 0 or steps < 1:
        raise ValueError("dt must be positive and steps at least 1")
    pts = [tuple(map(float, p)) for p in points]
    div = compile_expr(X.divergence())
    rates = [jacobian_rate(X, p, dt, steps) for p in pts]
    divs = [float(np.real(div(*p))) for p in pts]
    residuals = [abs(r - d) for r, d in zip(rates, divs)]
    diag = {"points": pts, "dt": dt, "steps": steps, "cube_edge": CUBE_EDGE}
    return make_report("flow_jacobian_check", rates, divs, residuals, tol, diag)


# --------------------------------------------------------------------------- streamline pressure


def channel_velocity(v_a: float, w_a: float, width) -> Expr:
    """Speed ``v_a * w_a / w(s)`` through a channel of width ``w(s)``."""
    w = parse(width, param("s")) if isinstance(width, str) else width
    return Expr(BinOp("/", D.num(v_a * w_a), w.root), param("s"))


@checked("bernoulli_check")
def bernoulli_check(v_of_s, s_max: float, q: QuadSpec = DEFAULT, tol: float = 1e-8):
    """``int_0^s_max -v dv/ds ds`` against ``(v(0)^2 - v(s_max)^2)/2`` along a streamline."""
    v = parse(v_of_s, param("s")) if isinstance(v_of_s, str) else v_of_s
    if v.mode.variables != ("s",):
        raise TypeError("the speed must be an expression in s")
    if not s_max > 0:
        raise ValueError("s_max must be positive")
    fv, dv = compile_expr(v), compile_expr(symbolic_diff(v, "s"))
    s, w = composite(q.panels, q.nodes)
    probe = np.union1d(np.linspace(0.0, s_max, 1025), s_max * s)
    speed = np.real(sample(fv, probe, where=" along the streamline"))
    if np.any(speed <= 0):
        k = int(np.argmax(speed <= 0))
        raise SingularityError("stagnation: the speed vanishes on the streamline", {"s": float(probe[k])})
    nodes = s_max * s
    left = float(s_max * np.sum(w * np.real(-sample(fv, nodes) * sample(dv, nodes))))
    v0, v1 = float(np.real(fv(0.0))), float(np.real(fv(s_max)))
    right = 0.5 * (v0**2 - v1**2)
    return make_report("bernoulli_check", [left], [right], [abs(left - right)], tol, {"s_max": s_max})
