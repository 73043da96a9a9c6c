"""Integration engines: contour integrals, area, surface and volume integrals.

Composite Gauss-Legendre is the production rule everywhere. The left-endpoint
Riemann sum is kept as the slow, independent construction that the contour
rule is checked against.

Integrands are :class:`~holoverify.expr.Expr` objects or plain vectorized
callables taking the coordinate arrays positionally. Any non-finite sample
raises :class:`~holoverify.errors.SingularityError`; there is no attempt to
locate poles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._rules import composite, gauss_legendre, smoothstep
from .errors import EvaluationError, GeometryError, SingularityError
from .expr import Expr, compile_expr
from .geometry import (
    Box,
    Disk,
    GraphFace,
    GraphSolid,
    Path,
    PlaneFace,
    Polygon,
    Rectangle,
    RimFace,
    WallFace,
    XConvex,
)


@dataclass(frozen=True)
class QuadSpec:
    nodes: int = 16  # Gauss-Legendre order per panel
    panels: int = 8  # composite subdivisions per path segment
    grid: int = 64  # per-axis tensor resolution for area, surface and volume rules

    def __post_init__(self):
        for name in ("nodes", "panels", "grid"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")


DEFAULT = QuadSpec()


def as_callable(f):
    if isinstance(f, Expr):
        return compile_expr(f)
    if callable(f):
        return f
    raise TypeError(f"expected an Expr or a callable, got {type(f).__name__}")


def sample(func, *coords, where=""):
    """Evaluate ``func`` and insist every value is finite."""
    try:
        vals = np.asarray(func(*coords), dtype=complex)
    except EvaluationError as exc:
        raise SingularityError(f"evaluation failed{where}: {exc}") from exc
    vals = np.broadcast_to(vals, np.broadcast(*coords).shape)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        idx = np.flatnonzero(bad.ravel())[0]
        loc = {f"c{k}": complex(np.ravel(c)[idx] if np.ndim(c) else c) for k, c in enumerate(coords)}
        raise SingularityError(f"non-finite sample{where}", {k: [v.real, v.imag] for k, v in loc.items()})
    return vals


def _maybe_real(total: complex, vals) -> complex | float:
    return float(total.real) if not np.any(np.imag(vals)) else complex(total)


# --------------------------------------------------------------------------- contour integrals


def riemann_sum_integral(f, path: Path, n: int) -> complex:
    """Left-endpoint sum ``sum f(z_k)(z_{k+1} - z_k)`` with ``z_k = path(k/n)``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    func = as_callable(f)
    z = path.point_at(np.arange(n + 1) / n)
    vals = sample(func, z[:-1], where=" on the path")
    return complex(np.sum(vals * np.diff(z)))


def segment_rule(seg, q: QuadSpec):
    s, w = composite(q.panels, q.nodes)
    return seg.point(s), seg.derivative(s), w


_ENDS = np.array([0.0, 1.0])


def _probe_ends(funcs, seg, k):
    """Gauss nodes never touch segment ends, so a pole sitting on a vertex
    would go unseen; sample the ends explicitly."""
    z = seg.point(_ENDS)
    for func, planar in funcs:
        coords = (z.real, z.imag) if planar else (z,)
        sample(func, *coords, where=f" at an end of path segment {k}")


def contour_integral(f, path: Path, q: QuadSpec = DEFAULT) -> complex:
    """Composite Gauss-Legendre approximation of the integral of f(z) dz along ``path``."""
    func = as_callable(f)
    total = 0j
    for k, seg in enumerate(path.segments):
        _probe_ends([(func, False)], seg, k)
        z, dz, w = segment_rule(seg, q)
        vals = sample(func, z, where=f" on path segment {k}")
        total += complex(np.sum(w * vals * dz))
    return total


def line_integral(P, Q, path: Path, q: QuadSpec = DEFAULT) -> complex:
    """Integral of ``P dx + Q dy`` along ``path``; P and Q take (x, y)."""
    fp, fq = as_callable(P), as_callable(Q)
    total = 0j
    for k, seg in enumerate(path.segments):
        _probe_ends([(fp, True), (fq, True)], seg, k)
        z, dz, w = segment_rule(seg, q)
        p = sample(fp, z.real, z.imag, where=f" on path segment {k}")
        qv = sample(fq, z.real, z.imag, where=f" on path segment {k}")
        total += complex(np.sum(w * (p * dz.real + qv * dz.imag)))
    return total


# --------------------------------------------------------------------------- area integrals


def region_rule(region, n: int):
    """Nodes ``(x, y)`` and weights ``w`` integrating over ``region``.

    Polygons use a fan of signed triangles from the first vertex, each mapped
    from the unit square by a collapsed (Duffy) map.
    """
    s, w = gauss_legendre(n)
    if isinstance(region, Rectangle):
        hx, hy = region.x1 - region.x0, region.y1 - region.y0
        X, Y = np.meshgrid(region.x0 + hx * s, region.y0 + hy * s, indexing="ij")
        W = np.outer(w * hx, w * hy)
        return X.ravel(), Y.ravel(), W.ravel()
    if isinstance(region, Disk):
        R = region.radius
        r, th = np.meshgrid(R * s, 2 * math.pi * s, indexing="ij")
        W = np.outer(w * R, w * 2 * math.pi) * r
        c = region.center
        return (c.real + r * np.cos(th)).ravel(), (c.imag + r * np.sin(th)).ravel(), W.ravel()
    if isinstance(region, Polygon):
        v = region.vertices
        U, V = np.meshgrid(s, s, indexing="ij")
        WU = np.outer(w, w)
        xs, ys, ws = [], [], []
        for a, b in zip(v[1:-1], v[2:]):
            pts = v[0] + U * (a - v[0]) + U * V * (b - a)
            jac = ((a - v[0]).real * (b - a).imag - (a - v[0]).imag * (b - a).real) * U
            xs.append(pts.real.ravel())
            ys.append(pts.imag.ravel())
            ws.append((WU * jac).ravel())
        return np.concatenate(xs), np.concatenate(ys), np.concatenate(ws)
    if isinstance(region, XConvex):
        phi, dphi = smoothstep(s)
        yv = region.a + (region.b - region.a) * phi
        x1, x2 = region.graphs(yv)
        X = x1[:, None] + (x2 - x1)[:, None] * s[None, :]
        Y = np.broadcast_to(yv[:, None], X.shape)
        W = np.outer(w * dphi * (region.b - region.a), w) * (x2 - x1)[:, None]
        return X.ravel(), Y.ravel(), W.ravel()
    raise GeometryError(f"not a planar region: {region!r}")


def area_integral(g, region, q: QuadSpec = DEFAULT):
    """Integral of ``g(x, y)`` over ``region``; real unless ``g`` takes complex values."""
    func = as_callable(g)
    x, y, w = region_rule(region, q.grid)
    vals = sample(func, x, y, where=" inside the region")
    return _maybe_real(complex(np.sum(w * vals)), vals)


def strip_area_integral(X, region: XConvex, q: QuadSpec = DEFAULT):
    """Area integral of dX/dx over an x-convex region, reduced to the boundary
    difference ``X(right(y), y) - X(left(y), y)`` integrated in y alone."""
    if not isinstance(region, XConvex):
        raise GeometryError("strip integration needs an x-convex region")
    func = as_callable(X)
    s, w = composite(q.panels, q.nodes)
    phi, dphi = smoothstep(s)
    y = region.a + (region.b - region.a) * phi
    x1, x2 = region.graphs(y)
    diff = sample(func, x2, y, where=" on the right boundary") - sample(func, x1, y, where=" on the left boundary")
    return _maybe_real(complex(np.sum(w * dphi * diff) * (region.b - region.a)), diff)


# --------------------------------------------------------------------------- surfaces


@dataclass(frozen=True)
class FaceSample:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    normal: np.ndarray  # shape (3, N), outward unit normals
    weight: np.ndarray  # area element times quadrature weight


def _graph_height(expr, x, y, what):
    return np.real(sample(compile_expr(expr), x, y, where=f" on the {what} graph"))


def face_rule(face, n: int) -> FaceSample:
    s, w = gauss_legendre(n)
    if isinstance(face, PlaneFace):
        (a0, a1), (b0, b1) = face.ranges
        A, B = np.meshgrid(a0 + (a1 - a0) * s, b0 + (b1 - b0) * s, indexing="ij")
        W = np.outer(w * (a1 - a0), w * (b1 - b0)).ravel()
        coords = [None, None, None]
        others = [k for k in range(3) if k != face.axis]
        coords[others[0]], coords[others[1]] = A.ravel(), B.ravel()
        coords[face.axis] = np.full(W.shape, float(face.value))
        normal = np.repeat(np.array(face.normal(), dtype=float)[:, None], W.size, axis=1)
        return FaceSample(*coords, normal, W)
    if isinstance(face, GraphFace):
        x, y, wb = region_rule(face.base, n)
        z = _graph_height(face.height, x, y, "boundary")
        hx, hy = face.slopes(x, y)
        element = np.sqrt(1.0 + hx**2 + hy**2)
        normal = face.normal(x, y)
        if not (np.all(np.isfinite(element)) and np.all(np.isfinite(normal))):
            raise SingularityError("unbounded area element on a graph face")
        return FaceSample(x, y, z, normal, wb * element)
    if isinstance(face, (WallFace, RimFace)):
        if isinstance(face, WallFace):
            base = face.start + (face.end - face.start) * s
            wu = w * abs(face.end - face.start)
            nrm = np.array(face.normal(), dtype=float)[:, None] * np.ones(n)
        else:
            th = 2 * math.pi * s
            base = face.center + face.radius * np.exp(1j * th)
            wu = w * 2 * math.pi * face.radius
            nrm = np.stack([np.cos(th), np.sin(th), np.zeros(n)])
        lo = _graph_height(face.lower, base.real, base.imag, "lower")
        hi = _graph_height(face.upper, base.real, base.imag, "upper")
        height = np.maximum(hi - lo, 0.0)
        Z = lo[:, None] + height[:, None] * s[None, :]
        W = (wu * height)[:, None] * w[None, :]
        X = np.broadcast_to(base.real[:, None], Z.shape)
        Y = np.broadcast_to(base.imag[:, None], Z.shape)
        N = np.repeat(nrm[:, :, None], n, axis=2).reshape(3, -1)
        return FaceSample(X.ravel(), Y.ravel(), Z.ravel(), N, W.ravel())
    raise GeometryError(f"not a face: {face!r}")


def surface_integral(g, face, q: QuadSpec = DEFAULT) -> float:
    """Integral of ``g(x, y, z) dS`` over one face.

    Graph faces integrate over their base with the area element
    ``sqrt(1 + h_x^2 + h_y^2)`` built from symbolic partials of the height.
    """
    fs = face_rule(face, q.grid)
    vals = sample(as_callable(g), fs.x, fs.y, fs.z, where=" on a face")
    return float(np.sum(fs.weight * vals.real))


def flux(field, face, q: QuadSpec = DEFAULT) -> float:
    """Outward flux of the vector field ``(P, Q, R)`` through one face."""
    fs = face_rule(face, q.grid)
    comps = [np.real(sample(as_callable(c), fs.x, fs.y, fs.z, where=" on a face")) for c in field]
    return float(np.sum(fs.weight * sum(c * nk for c, nk in zip(comps, fs.normal))))


# --------------------------------------------------------------------------- volumes


def volume_rule(solid, n: int):
    s, w = gauss_legendre(n)
    if isinstance(solid, Box):
        (x0, x1), (y0, y1), (z0, z1) = solid.bounds
        X, Y, Z = np.meshgrid(x0 + (x1 - x0) * s, y0 + (y1 - y0) * s, z0 + (z1 - z0) * s, indexing="ij")
        W = np.einsum("i,j,k->ijk", w * (x1 - x0), w * (y1 - y0), w * (z1 - z0))
        return X.ravel(), Y.ravel(), Z.ravel(), W.ravel()
    if isinstance(solid, GraphSolid):
        x, y, wb = region_rule(solid.base, n)
        lo = _graph_height(solid.lower, x, y, "lower")
        hi = _graph_height(solid.upper, x, y, "upper")
        Z = lo[:, None] + (hi - lo)[:, None] * s[None, :]
        W = (wb * (hi - lo))[:, None] * w[None, :]
        X = np.broadcast_to(x[:, None], Z.shape)
        Y = np.broadcast_to(y[:, None], Z.shape)
        return X.ravel(), Y.ravel(), Z.ravel(), W.ravel()
    raise GeometryError(f"not a solid: {solid!r}")


def volume_integral(g, solid, q: QuadSpec = DEFAULT) -> float:
    """Integral of ``g(x, y, z)`` over a box (tensor rule) or a graph solid
    (inner z-rule between the graphs, outer rule over the base)."""
    n = q.grid
    x, y, z, w = volume_rule(solid, n)
    vals = sample(as_callable(g), x, y, z, where=" inside the solid").real
    # reduce one axis at a time: a constant integrand then sums exactly like the 1D weights
    _, w1 = gauss_legendre(n)
    line = lambda a: np.sum(a * w1, axis=-1)  # noqa: E731
    if isinstance(solid, Box):
        (x0, x1), (y0, y1), (z0, z1) = solid.bounds
        inner = line(vals.reshape(n, n, n)) * (z1 - z0)
        return float(line(line(inner) * (y1 - y0)) * (x1 - x0))
    outer = w.reshape(-1, n)[:, 0] / w1[0]  # base weight times column height
    return float(np.sum(line(vals.reshape(-1, n)) * outer))
