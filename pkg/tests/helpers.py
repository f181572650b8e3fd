import numpy as np

from metalens.distribution import SourceDensity
from metalens.geometry import Scene

SQUARE = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])


def make_scene(targets, masses=None, alpha=1.0, beta=2.0, domain=SQUARE, rho=0.25):
    """Scene on ``domain`` with constant density ``rho``; masses are rescaled to balance it."""
    targets = np.asarray(targets, dtype=float).reshape(-1, 2)
    masses = np.ones(len(targets)) if masses is None else np.asarray(masses, dtype=float)
    src = SourceDensity.constant(rho)
    total = src.total_mass(domain, alpha)
    return Scene(alpha, beta, domain, targets, masses * total / masses.sum(), src)


def jittered_grid(rng, n, jitter=0.1, extent=0.7):
    """``n x n`` grid of targets in ``[-extent, extent]^2`` with random jitter."""
    xs = np.linspace(-extent, extent, n)
    X, Y = np.meshgrid(xs, xs)
    pts = np.column_stack([X.ravel(), Y.ravel()])
    return pts + rng.uniform(-jitter, jitter, pts.shape) * (2 * extent / max(n - 1, 1))


def admissible_b(rng, scene, scale=0.05):
    """Random weights whose cells are all non-empty (grid check)."""
    from metalens.cells import grid_cells

    while True:
        b = rng.normal(0.0, scale, scene.n_targets)
        if np.all(grid_cells(scene, b, 256).counts(scene.n_targets) > 0):
            return b
        scale *= 0.7
