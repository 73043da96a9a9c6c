"""Oriented paths, fixed-endpoint homotopies, planar regions and 3D solids.

A :class:`Path` is a chain of segments sharing one global parameter
``t in [0, 1]``; segment ``k`` of ``n`` occupies ``[k/n, (k+1)/n]``.
All values are immutable.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from ._rules import composite, smoothstep
from .errors import GeometryError
from .expr import PLANAR, Expr, evaluate, param, parse
from .expr.nodes import BinOp, Num, Var

JOIN_TOL = 1e-12


def _close(a: complex, b: complex, tol=JOIN_TOL) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


# --------------------------------------------------------------------------- segments


@dataclass(frozen=True)
class LineSegment:
    start: complex
    end: complex

    def point(self, s):
        s = np.asarray(s, dtype=float)
        return (1.0 - s) * self.start + s * self.end

    def derivative(self, s):
        return np.full(np.shape(s), self.end - self.start, dtype=complex)

    def reversed(self):
        return LineSegment(self.end, self.start)

    def distance_to(self, a: complex) -> float:
        d = self.end - self.start
        if d == 0:
            return abs(a - self.start)
        s = min(1.0, max(0.0, ((a - self.start) * d.conjugate()).real / abs(d) ** 2))
        return abs(a - (self.start + s * d))


@dataclass(frozen=True)
class ArcSegment:
    """Circular arc ``center + radius*exp(i*theta)``, theta from ``theta0`` to ``theta1``.

    ``theta1 < theta0`` runs clockwise; a span beyond 2*pi winds more than once.
    """

    center: complex
    radius: float
    theta0: float
    theta1: float

    def __post_init__(self):
        if not self.radius > 0:
            raise GeometryError("arc radius must be positive")

    def point(self, s):
        theta = self.theta0 + np.asarray(s, dtype=float) * (self.theta1 - self.theta0)
        return self.center + self.radius * np.exp(1j * theta)

    def derivative(self, s):
        theta = self.theta0 + np.asarray(s, dtype=float) * (self.theta1 - self.theta0)
        return 1j * (self.theta1 - self.theta0) * self.radius * np.exp(1j * theta)

    def reversed(self):
        return ArcSegment(self.center, self.radius, self.theta1, self.theta0)

    def distance_to(self, a: complex) -> float:
        lo, hi = sorted((self.theta0, self.theta1))
        if a == self.center:
            return self.radius
        if hi - lo >= 2 * math.pi:
            return abs(abs(a - self.center) - self.radius)
        phi = cmath.phase(a - self.center)
        phi = lo + (phi - lo) % (2 * math.pi)
        if phi <= hi:
            return abs(abs(a - self.center) - self.radius)
        return min(abs(a - complex(self.point(0.0))), abs(a - complex(self.point(1.0))))


@dataclass(frozen=True)
class CurveSegment:
    """Curve ``x(t) + i*y(t)`` for ``t`` from ``t0`` to ``t1``; x, y share one parameter."""

    x: Expr
    y: Expr
    t0: float
    t1: float
    _dx: Expr = field(init=False, repr=False, compare=False)
    _dy: Expr = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.x.mode != self.y.mode or len(self.x.mode.variables) != 1:
            raise GeometryError("curve components must share a single-parameter mode")
        var = self.x.mode.variables[0]
        object.__setattr__(self, "_dx", self.x.diff(var))
        object.__setattr__(self, "_dy", self.y.diff(var))

    @property
    def var(self) -> str:
        return self.x.mode.variables[0]

    def _t(self, s):
        return self.t0 + np.asarray(s, dtype=float) * (self.t1 - self.t0)

    def point(self, s):
        t = self._t(s)
        x = np.real(evaluate(self.x, {self.var: t}))
        y = np.real(evaluate(self.y, {self.var: t}))
        return np.asarray(x + 1j * y)

    def derivative(self, s):
        t = self._t(s)
        dx = np.real(evaluate(self._dx, {self.var: t}))
        dy = np.real(evaluate(self._dy, {self.var: t}))
        return np.asarray((dx + 1j * dy) * (self.t1 - self.t0))

    def reversed(self):
        flip = {self.var: BinOp("-", Num(self.t0 + self.t1), Var(self.var))}
        return CurveSegment(self.x.substitute(flip), self.y.substitute(flip), self.t0, self.t1)

    def distance_to(self, a: complex) -> float:
        pts = self.point(np.linspace(0.0, 1.0, 4097))
        return float(np.min(np.abs(pts - a)))


Segment = LineSegment | ArcSegment | CurveSegment


def curve(x: str | Expr, y: str | Expr, t0: float = 0.0, t1: float = 1.0, var: str = "t") -> CurveSegment:
    mode = param(var)
    x = parse(x, mode) if isinstance(x, str) else x
    y = parse(y, mode) if isinstance(y, str) else y
    return CurveSegment(x, y, float(t0), float(t1))


# --------------------------------------------------------------------------- paths


@dataclass(frozen=True)
class Path:
    segments: tuple

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise GeometryError("a path needs at least one segment")
        object.__setattr__(self, "segments", segs)
        ends = [(complex(s.point(0.0)), complex(s.point(1.0))) for s in segs]
        for k in range(len(segs) - 1):
            if not _close(ends[k][1], ends[k + 1][0]):
                raise GeometryError(f"segment {k} ends at {ends[k][1]} but segment {k + 1} starts at {ends[k + 1][0]}")
        object.__setattr__(self, "_ends", ends)

    # constructors
    @classmethod
    def segment(cls, a: complex, b: complex) -> "Path":
        return cls((LineSegment(complex(a), complex(b)),))

    @classmethod
    def polyline(cls, points, closed: bool = False) -> "Path":
        pts = [complex(p) for p in points]
        if closed and not _close(pts[0], pts[-1]):
            pts.append(pts[0])
        if len(pts) < 2:
            raise GeometryError("a polyline needs two points")
        return cls(tuple(LineSegment(a, b) for a, b in zip(pts, pts[1:])))

    @classmethod
    def arc(cls, center: complex, radius: float, theta0: float, theta1: float) -> "Path":
        return cls((ArcSegment(complex(center), float(radius), float(theta0), float(theta1)),))

    @classmethod
    def circle(cls, center: complex = 0j, radius: float = 1.0, start: float = 0.0, turns: int = 1) -> "Path":
        """Counterclockwise circle traversed ``turns`` times (negative = clockwise)."""
        return cls.arc(center, radius, start, start + 2 * math.pi * turns)

    # properties
    @property
    def start(self) -> complex:
        return self._ends[0][0]

    @property
    def end(self) -> complex:
        return self._ends[-1][1]

    @property
    def closed(self) -> bool:
        return _close(self.start, self.end)

    @property
    def breakpoints(self) -> np.ndarray:
        n = len(self.segments)
        return np.arange(n + 1) / n

    def _locate(self, t):
        t = np.asarray(t, dtype=float)
        if np.any((t < 0) | (t > 1)) or np.any(np.isnan(t)):
            raise GeometryError("path parameter out of range [0, 1]")
        n = len(self.segments)
        k = np.minimum((t * n).astype(int), n - 1)
        return t, k, t * n - k

    def point_at(self, t):
        t, k, s = self._locate(t)
        out = np.empty(t.shape, dtype=complex)
        for idx, seg in enumerate(self.segments):
            mask = k == idx
            if np.any(mask):
                out[mask] = seg.point(s[mask])
        # endpoints are reproduced exactly
        out[t == 0] = self.start
        out[t == 1] = self.end
        return complex(out) if out.ndim == 0 else out

    def tangent_at(self, t):
        """Exact derivative with respect to the global parameter.

        Interior breakpoints are rejected: the tangent may jump there.
        """
        t, k, s = self._locate(t)
        n = len(self.segments)
        interior = (t > 0) & (t < 1) & (s == 0)
        if np.any(interior):
            raise GeometryError("tangent requested at a segment junction")
        out = np.empty(t.shape, dtype=complex)
        for idx, seg in enumerate(self.segments):
            mask = k == idx
            if np.any(mask):
                out[mask] = n * seg.derivative(s[mask])
        return complex(out) if out.ndim == 0 else out

    def reversed(self) -> "Path":
        return Path(tuple(seg.reversed() for seg in reversed(self.segments)))

    def __add__(self, other: "Path") -> "Path":
        return Path(self.segments + other.segments)

    def distance_to(self, a: complex) -> float:
        return min(seg.distance_to(complex(a)) for seg in self.segments)

    def length(self, nodes: int = 16, panels: int = 8) -> float:
        s, w = composite(panels, nodes)
        return float(sum(np.sum(w * np.abs(seg.derivative(s))) for seg in self.segments))

    def signed_area(self, nodes: int = 16, panels: int = 8) -> float:
        """Half the loop integral of x dy - y dx (positive for counterclockwise loops)."""
        s, w = composite(panels, nodes)
        total = 0.0
        for seg in self.segments:
            z = seg.point(s)
            dz = seg.derivative(s)
            total += 0.5 * float(np.sum(w * (z.real * dz.imag - z.imag * dz.real)))
        return total


# --------------------------------------------------------------------------- homotopy


@dataclass(frozen=True)
class Homotopy:
    """Linear blend ``base(t) + eps*(target(t) - base(t))`` with pinned endpoints."""

    base: Path
    target: Path

    def __post_init__(self):
        if not (_close(self.base.start, self.target.start) and _close(self.base.end, self.target.end)):
            raise GeometryError("homotopy paths must share both endpoints")

    @property
    def breakpoints(self) -> np.ndarray:
        return np.union1d(self.base.breakpoints, self.target.breakpoints)

    def at(self, t, eps):
        _check_eps(eps)
        g = self.base.point_at(t)
        return g + eps * (self.target.point_at(t) - g)

    def displacement(self, t):
        """W(t) = target(t) - base(t); vanishes at t = 0 and t = 1."""
        return self.target.point_at(t) - self.base.point_at(t)

    def displacement_rate(self, t):
        return self.target.tangent_at(t) - self.base.tangent_at(t)

    def tangent_at(self, t, eps):
        _check_eps(eps)
        g = self.base.tangent_at(t)
        return g + eps * (self.target.tangent_at(t) - g)


def _check_eps(eps):
    if np.any(np.asarray(eps) < 0) or np.any(np.asarray(eps) > 1):
        raise GeometryError("homotopy parameter out of range [0, 1]")


def homotopy_at(h: Homotopy, t, eps):
    return h.at(t, eps)


def point_at(p: Path, t):
    return p.point_at(t)


def tangent_at(p: Path, t):
    return p.tangent_at(t)


# --------------------------------------------------------------------------- regions


@dataclass(frozen=True)
class Rectangle:
    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise GeometryError("rectangle must have positive area")

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    @property
    def bbox(self):
        return self.x0, self.x1, self.y0, self.y1

    def boundary(self) -> Path:
        x0, x1, y0, y1 = self.bbox
        return Path.polyline([complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)], closed=True)

    def contains(self, x, y):
        return (x >= self.x0) & (x <= self.x1) & (y >= self.y0) & (y <= self.y1)


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise GeometryError("disk radius must be positive")

    @property
    def area(self) -> float:
        return math.pi * self.radius**2

    @property
    def bbox(self):
        c, r = self.center, self.radius
        return c.real - r, c.real + r, c.imag - r, c.imag + r

    def boundary(self) -> Path:
        return Path.circle(self.center, self.radius)

    def contains(self, x, y):
        return np.abs((x - self.center.real) + 1j * (y - self.center.imag)) <= self.radius


def _cross(o, a, b):
    return (a - o).real * (b - o).imag - (a - o).imag * (b - o).real


def _segments_cross(p1, p2, q1, q2) -> bool:
    d1, d2 = _cross(q1, q2, p1), _cross(q1, q2, p2)
    d3, d4 = _cross(p1, p2, q1), _cross(p1, p2, q2)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 * d2 != 0 and d3 * d4 != 0:
        return True

    def on(a, b, c):
        return _cross(a, b, c) == 0 and min(a.real, b.real) <= c.real <= max(a.real, b.real) and min(a.imag, b.imag) <= c.imag <= max(a.imag, b.imag)

    return on(q1, q2, p1) or on(q1, q2, p2) or on(p1, p2, q1) or on(p1, p2, q2)


@dataclass(frozen=True)
class Polygon:
    """Simple polygon, vertices listed counterclockwise, not repeated at the end."""

    vertices: tuple

    def __post_init__(self):
        v = [complex(p) for p in self.vertices]
        if len(v) > 1 and _close(v[0], v[-1]):
            v = v[:-1]
        if len(v) < 3:
            raise GeometryError("polygon needs at least three vertices")
        object.__setattr__(self, "vertices", tuple(v))
        if self.area <= 0:
            raise GeometryError("polygon vertices must be counterclockwise with positive area")
        n = len(v)
        for i in range(n):
            for j in range(i + 1, n):
                if j == i + 1 or (i == 0 and j == n - 1):
                    continue
                if _segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]):
                    raise GeometryError("polygon is not simple")

    @property
    def area(self) -> float:
        v = self.vertices
        return 0.5 * sum(_cross(0j, a, b) for a, b in zip(v, v[1:] + v[:1]))

    @property
    def bbox(self):
        xs = [p.real for p in self.vertices]
        ys = [p.imag for p in self.vertices]
        return min(xs), max(xs), min(ys), max(ys)

    def boundary(self) -> Path:
        return Path.polyline(self.vertices, closed=True)

    def contains(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        inside = np.zeros(np.broadcast(x, y).shape, dtype=bool)
        v = self.vertices
        for a, b in zip(v, v[1:] + v[:1]):
            cond = (a.imag > y) != (b.imag > y)
            with np.errstate(divide="ignore", invalid="ignore"):
                xcross = a.real + (y - a.imag) * (b.real - a.real) / (b.imag - a.imag)
            inside ^= cond & (x < xcross)
        return inside


@dataclass(frozen=True)
class XConvex:
    """Region ``{(x, y): a <= y <= b, left(y) <= x <= right(y)}``.

    ``left`` and ``right`` are expressions in the single real variable ``y``.
    """

    a: float
    b: float
    left: Expr
    right: Expr

    def __post_init__(self):
        if not self.b > self.a:
            raise GeometryError("x-convex region needs b > a")
        for g in (self.left, self.right):
            if g.mode.variables != ("y",):
                raise GeometryError("boundary graphs must be expressions in y alone")
        y = np.linspace(self.a, self.b, 257)
        x1, x2 = self.graphs(y)
        if np.any(x1 > x2 + 1e-12):
            raise GeometryError("left boundary exceeds right boundary")
        if not np.any(x2 - x1 > 0):
            raise GeometryError("x-convex region has zero area")

    @classmethod
    def from_text(cls, a, b, left: str, right: str) -> "XConvex":
        return cls(float(a), float(b), parse(left, param("y")), parse(right, param("y")))

    def graphs(self, y):
        x1 = np.real(evaluate(self.left, {"y": y}))
        x2 = np.real(evaluate(self.right, {"y": y}))
        return x1, x2

    @property
    def area(self) -> float:
        s, w = composite(8, 16)
        phi, dphi = smoothstep(s)
        x1, x2 = self.graphs(self.a + (self.b - self.a) * phi)
        return float(np.sum(w * dphi * (x2 - x1)) * (self.b - self.a))

    @property
    def bbox(self):
        y = np.linspace(self.a, self.b, 1025)
        x1, x2 = self.graphs(y)
        return float(np.min(x1)), float(np.max(x2)), self.a, self.b

    def boundary(self) -> Path:
        """Bottom edge, right graph upward, top edge, left graph downward.

        The graphs are traversed with ``y = a + (b - a)*t^2*(3 - 2t)`` so that
        square-root endpoints still give a bounded tangent.
        """
        a, b = self.a, self.b
        t = param("t")
        step = BinOp("*", BinOp("^", Var("t"), Num(2.0)), BinOp("-", Num(3.0), BinOp("*", Num(2.0), Var("t"))))
        y_up = BinOp("+", Num(a), BinOp("*", Num(b - a), step))
        y_down = BinOp("-", Num(b), BinOp("*", Num(b - a), step))
        right = CurveSegment(self.right.substitute({"y": y_up}, t), Expr(y_up, t), 0.0, 1.0)
        left = CurveSegment(self.left.substitute({"y": y_down}, t), Expr(y_down, t), 0.0, 1.0)
        return Path((
            LineSegment(complex(left.point(1.0)), complex(right.point(0.0))),
            right,
            LineSegment(complex(right.point(1.0)), complex(left.point(0.0))),
            left,
        ))

    def contains(self, x, y):
        y = np.asarray(y, dtype=float)
        inside = (y >= self.a) & (y <= self.b)
        yc = np.clip(y, self.a, self.b)
        x1, x2 = self.graphs(yc)
        return inside & (x >= x1) & (x <= x2)


Region2D = Rectangle | Disk | Polygon | XConvex


def boundary_of(r) -> Path:
    return r.boundary()


# --------------------------------------------------------------------------- solids


@dataclass(frozen=True)
class Box:
    x0: float
    x1: float
    y0: float
    y1: float
    z0: float
    z1: float

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0 and self.z1 > self.z0):
            raise GeometryError("box must have positive volume")

    @property
    def volume(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0) * (self.z1 - self.z0)

    @property
    def bounds(self):
        return ((self.x0, self.x1), (self.y0, self.y1), (self.z0, self.z1))


@dataclass(frozen=True)
class GraphSolid:
    """Points over ``base`` between the graphs ``lower(x, y) <= z <= upper(x, y)``."""

    base: Rectangle | Disk
    lower: Expr
    upper: Expr

    def __post_init__(self):
        if not isinstance(self.base, (Rectangle, Disk)):
            raise GeometryError("graph solids need a rectangle or disk base")
        for g in (self.lower, self.upper):
            if not set(g.variables) <= {"x", "y"}:
                raise GeometryError("graph heights must be expressions in x and y")
        # sample strictly inside the base: boundary graphs may be singular on the rim
        x0, x1, y0, y1 = self.base.bbox
        gx, gy = np.meshgrid(np.linspace(x0, x1, 41)[1:-1], np.linspace(y0, y1, 41)[1:-1])
        keep = self.base.contains(gx, gy)
        if isinstance(self.base, Disk):
            keep &= np.abs((gx - self.base.center.real) + 1j * (gy - self.base.center.imag)) < self.base.radius * 0.999
        lo = np.real(evaluate(self.lower, x=gx[keep], y=gy[keep]))
        hi = np.real(evaluate(self.upper, x=gx[keep], y=gy[keep]))
        if np.any(lo > hi + 1e-12):
            raise GeometryError("lower graph exceeds upper graph")
        if not np.any(hi > lo):
            raise GeometryError("graph solid has zero volume")

    @classmethod
    def from_text(cls, base, lower: str, upper: str) -> "GraphSolid":
        return cls(base, parse(lower, PLANAR), parse(upper, PLANAR))


Solid3D = Box | GraphSolid


# --------------------------------------------------------------------------- faces


@dataclass(frozen=True)
class PlaneFace:
    """Axis-aligned rectangle ``coord[axis] = value`` with outward normal ``sign*e_axis``."""

    axis: int
    value: float
    ranges: tuple  # bounds of the two remaining axes, in increasing axis order
    sign: int

    def normal(self):
        n = [0.0, 0.0, 0.0]
        n[self.axis] = float(self.sign)
        return tuple(n)


@dataclass(frozen=True)
class GraphFace:
    """Graph ``z = height(x, y)`` over ``base``; ``upper`` selects the outward side."""

    base: Rectangle | Disk
    height: Expr
    upper: bool
    _hx: Expr = field(init=False, repr=False, compare=False)
    _hy: Expr = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        h = self.height.with_mode(PLANAR)
        object.__setattr__(self, "height", h)
        object.__setattr__(self, "_hx", h.diff("x"))
        object.__setattr__(self, "_hy", h.diff("y"))

    def slopes(self, x, y):
        hx = np.real(evaluate(self._hx, x=x, y=y))
        hy = np.real(evaluate(self._hy, x=x, y=y))
        return hx, hy

    def normal(self, x, y):
        """Outward unit normal; ``(-h_x, -h_y, 1)/norm`` on the upper graph."""
        hx, hy = self.slopes(x, y)
        norm = np.sqrt(1.0 + hx**2 + hy**2)
        sgn = 1.0 if self.upper else -1.0
        return np.stack([-sgn * hx / norm, -sgn * hy / norm, sgn / norm + 0 * hx])


@dataclass(frozen=True)
class WallFace:
    """Vertical wall above the straight base edge ``start -> end`` between two graphs.

    The base boundary runs counterclockwise, so the outward normal is the edge
    direction turned clockwise.
    """

    start: complex
    end: complex
    lower: Expr
    upper: Expr

    def normal(self):
        d = (self.end - self.start) / abs(self.end - self.start)
        return (d.imag, -d.real, 0.0)


@dataclass(frozen=True)
class RimFace:
    """Cylindrical wall over the rim of a disk base between two graphs."""

    center: complex
    radius: float
    lower: Expr
    upper: Expr


Face = PlaneFace | GraphFace | WallFace | RimFace


def faces_of(s) -> list:
    """Boundary faces with outward orientation."""
    if isinstance(s, Box):
        faces = []
        b = s.bounds
        for axis in range(3):
            others = tuple(b[k] for k in range(3) if k != axis)
            faces.append(PlaneFace(axis, b[axis][0], others, -1))
            faces.append(PlaneFace(axis, b[axis][1], others, +1))
        return faces
    if isinstance(s, GraphSolid):
        faces = [GraphFace(s.base, s.upper, True), GraphFace(s.base, s.lower, False)]
        if isinstance(s.base, Rectangle):
            corners = list(s.base.boundary().segments)
            faces += [WallFace(seg.start, seg.end, s.lower, s.upper) for seg in corners]
        else:
            faces.append(RimFace(s.base.center, s.base.radius, s.lower, s.upper))
        return faces
    raise GeometryError(f"not a solid: {s!r}")
