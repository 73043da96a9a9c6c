from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre(n: int):
    """Gauss-Legendre nodes and weights mapped to [0, 1] (read-only arrays)."""
    if n < 1:
        raise ValueError("need at least one node")
    x, w = np.polynomial.legendre.leggauss(n)
    s = 0.5 * (x + 1.0)
    w = 0.5 * w
    s.setflags(write=False)
    w.setflags(write=False)
    return s, w


@lru_cache(maxsize=None)
def composite(panels: int, nodes: int):
    """Composite Gauss-Legendre rule on [0, 1] with equal panels."""
    if panels < 1:
        raise ValueError("need at least one panel")
    s, w = gauss_legendre(nodes)
    k = np.arange(panels)[:, None]
    pts = ((k + s[None, :]) / panels).ravel()
    wts = np.broadcast_to(w / panels, (panels, nodes)).ravel().copy()
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts


def smoothstep(s):
    """Map ``u -> u^2 (3 - 2u)`` on [0, 1] and its derivative.

    Clusters nodes at both ends so that boundary graphs with square-root
    endpoint behaviour (a disk written as an x-convex region) become smooth
    in the new variable.
    """
    s = np.asarray(s, dtype=float)
    return s * s * (3.0 - 2.0 * s), 6.0 * s * (1.0 - s)
