"""Experiment scenes: the delta sweep, Gaussian grids and discretized shapes.

All scenes use the aperture ``[-1, 1]^2`` at height ``alpha = 1`` with the
uniform density ``1/4`` (total mass 1). The shape generators use square
lattices centred on the symmetry axes so the point sets keep the reflection
symmetries of the shape.
"""
from __future__ import annotations

import numpy as np

from .distribution import SourceDensity
from .geometry import Scene

SQUARE = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
RHO = 0.25
SWEEP_DELTAS = (0.1, 0.2, 0.3, 0.5, 2.0)
GAUSSIAN_COEF = 2.0
FOUR_DISKS = {"centers": [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)],
              "radius": 0.3, "points_per_disk": 50}
LETTER_H = {"bbox": (-0.75, 0.75, -0.75, 0.75), "stroke": 0.25, "points": 200}


def grid_points(n: int, extent=(-1.0, 1.0)) -> np.ndarray:
    """``n x n`` uniform grid, row by row; ``extent`` is ``[lo, hi]`` or ``[x0, x1, y0, y1]``."""
    if n < 1:
        raise ValueError("grid size must be positive")
    x0, x1, y0, y1 = (extent if len(extent) == 4 else (*extent, *extent))
    xs = np.linspace(x0, x1, n) if n > 1 else np.array([0.5 * (x0 + x1)])
    ys = np.linspace(y0, y1, n) if n > 1 else np.array([0.5 * (y0 + y1)])
    X, Y = np.meshgrid(xs, ys)
    return np.column_stack([X.ravel(), Y.ravel()])


def gaussian_weights(points, coef: float = GAUSSIAN_COEF) -> np.ndarray:
    """``exp(-coef |y_i|^2)`` normalized to sum 1."""
    w = np.exp(-coef * (np.asarray(points) ** 2).sum(axis=1))
    return w / w.sum()


def _lattice(center, half_width, spacing):
    k = int(np.floor(half_width / spacing))
    offs = np.arange(-k, k + 1) * spacing
    X, Y = np.meshgrid(center[0] + offs, center[1] + offs)
    return np.column_stack([X.ravel(), Y.ravel()])


def four_disks_points(centers=FOUR_DISKS["centers"], radius: float = FOUR_DISKS["radius"],
                      points_per_disk: int = FOUR_DISKS["points_per_disk"]) -> np.ndarray:
    """Square-lattice discretization of disks, about ``points_per_disk`` points each."""
    spacing = radius * np.sqrt(np.pi / points_per_disk)
    out = []
    for c in np.asarray(centers, dtype=float):
        pts = _lattice(c, radius, spacing)
        out.append(pts[((pts - c) ** 2).sum(1) <= radius ** 2 * (1 + 1e-12)])
    return np.concatenate(out)


def letter_h_points(bbox=LETTER_H["bbox"], stroke: float = LETTER_H["stroke"],
                    points: int = LETTER_H["points"]) -> np.ndarray:
    """Square-lattice discretization of a letter H with about ``points`` points."""
    x0, x1, y0, y1 = bbox
    height = y1 - y0
    bar = (x1 - x0) - 2 * stroke
    area = 2 * stroke * height + bar * stroke
    spacing = np.sqrt(area / points)
    c = np.array([0.5 * (x0 + x1), 0.5 * (y0 + y1)])
    pts = _lattice(c, 0.5 * max(x1 - x0, height), spacing)
    eps = 1e-12 * spacing
    x, y = pts[:, 0], pts[:, 1]
    inside_box = (x >= x0 - eps) & (x <= x1 + eps) & (y >= y0 - eps) & (y <= y1 + eps)
    legs = (x <= x0 + stroke + eps) | (x >= x1 - stroke - eps)
    crossbar = np.abs(y - c[1]) <= 0.5 * stroke + eps
    return pts[inside_box & (legs | crossbar)]


def shape_points(name: str, **params) -> np.ndarray:
    if name == "four_disks":
        return four_disks_points(**params)
    if name == "letter_h":
        return letter_h_points(**params)
    raise ValueError(f"unknown shape {name!r}; expected four_disks or letter_h")


def square_scene(targets, weights, delta: float = 1.0, alpha: float = 1.0) -> Scene:
    """Scene on ``[-1, 1]^2`` with density ``1/4``; ``weights`` are rescaled to total mass 1."""
    weights = np.asarray(weights, dtype=float)
    return Scene(alpha, alpha + delta, SQUARE, targets, weights / weights.sum(),
                 SourceDensity.constant(RHO))


def sweep_scene(delta: float) -> Scene:
    """25 equal masses on a ``5 x 5`` grid of ``[0, 1]^2`` at distance ``delta`` above the aperture."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    pts = grid_points(5, (0.0, 1.0))
    return square_scene(pts, np.ones(len(pts)), delta)


def gaussian_scene(n: int, delta: float = 1.0, coef: float = GAUSSIAN_COEF) -> Scene:
    """``n x n`` grid of ``[-1, 1]^2`` with Gaussian masses."""
    pts = grid_points(n)
    return square_scene(pts, gaussian_weights(pts, coef), delta)


def shape_scene(name: str, delta: float = 1.0, **params) -> Scene:
    """Equal masses on a discretized shape."""
    pts = shape_points(name, **params)
    return square_scene(pts, np.ones(len(pts)), delta)
