"""Gauss-Legendre rules on intervals, segments and convex polygons."""
from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``n``-point rule mapped to ``[0, 1]``."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def integrate_interval(fun, t0: float, t1: float, n: int = 16,
                       rtol: float = 1e-13, atol: float = 1e-15,
                       max_depth: int = 30) -> float:
    """Adaptive composite Gauss-Legendre integral of a vectorized ``fun``.

    Each panel is accepted when the ``n``-point rule and the ``n``-point rule
    applied to its two halves agree to ``max(atol, rtol * |I|)``.
    """
    nodes, weights = gauss_legendre(n)

    def rule(a, b):
        return (b - a) * float(np.dot(weights, fun(a + (b - a) * nodes)))

    total = 0.0
    stack = [(t0, t1, rule(t0, t1), 0)]
    while stack:
        a, b, whole, depth = stack.pop()
        m = 0.5 * (a + b)
        left, right = rule(a, m), rule(m, b)
        if depth >= max_depth or abs(left + right - whole) <= max(atol, rtol * abs(left + right)):
            total += left + right
        else:
            stack.append((a, m, left, depth + 1))
            stack.append((m, b, right, depth + 1))
    return total


def integrate_segment(fun, p0, p1, n: int = 16) -> float:
    """Line integral ``int f ds`` over the segment ``[p0, p1]``."""
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    nodes, weights = gauss_legendre(n)
    pts = p0 + nodes[:, None] * (p1 - p0)
    return float(np.linalg.norm(p1 - p0) * np.dot(weights, fun(pts)))


@lru_cache(maxsize=None)
def _triangle_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    # collapsed (Duffy) product rule on the reference triangle
    u, wu = gauss_legendre(n)
    U, V = np.meshgrid(u, u, indexing="ij")
    W = np.outer(wu, wu) * (1 - U)
    bary = np.column_stack([U.ravel(), (V * (1 - U)).ravel()])
    return bary, W.ravel()


def integrate_polygon(fun, vertices, n: int = 12) -> float:
    """Integral of ``fun`` over a convex polygon by fan triangulation."""
    vertices = np.asarray(vertices, dtype=float)
    if len(vertices) < 3:
        return 0.0
    bary, w = _triangle_rule(n)
    p0 = vertices[0]
    e1 = vertices[1:-1] - p0
    e2 = vertices[2:] - p0
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    pts = p0 + bary[None, :, 0:1] * e1[:, None, :] + bary[None, :, 1:2] * e2[:, None, :]
    vals = fun(pts.reshape(-1, 2)).reshape(len(det), -1)
    return float(np.sum(det * (vals @ w)))
