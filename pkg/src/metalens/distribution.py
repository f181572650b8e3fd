"""Source density, refracted distribution ``G(b)`` and its Jacobian.

``G_i(b)`` is the source mass captured by the Laguerre cell of target ``i``.
Two engines compute it:

``grid``
    midpoint rule on a pixel grid, boundary pixels refined by sub-sampling
    and renormalized to their exact clipped area;
``boundary``
    Green's formula on the exact cell boundaries from the lifting engine
    (constant density only): ``G_i = rho * (1/2) ∮ x1 dx2 - x2 dx1``.

The Jacobian has off-diagonal entries
``dG_i/db_j = ∫_{gamma_ij} rho / |grad c_i - grad c_j| ds`` and diagonal
equal to minus the row sum.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import DegenerateGradient
from .geometry import polygon_area
from .quadrature import integrate_polygon

DEGENERATE_TOL = 1e-8


@dataclass(frozen=True)
class SourceDensity:
    """Source density on the aperture.

    ``constant(v)`` is uniform; ``sphere(f)`` derives the planar density
    ``rho(X) = f(X/|X|) (X . e) / |X|^3`` from an intensity ``f`` on the
    unit sphere, with ``e = (0, 0, 1)``.
    """

    kind: str
    value: float = 0.0
    intensity: Callable | None = None

    @classmethod
    def constant(cls, value: float) -> "SourceDensity":
        value = float(value)
        if not np.isfinite(value) or value <= 0:
            raise ValueError(f"constant density must be positive and finite, got {value}")
        return cls("constant", value)

    @classmethod
    def sphere(cls, intensity: Callable) -> "SourceDensity":
        return cls("sphere", intensity=intensity)

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    def __call__(self, x, alpha: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.is_constant:
            return np.full(x.shape[:-1], self.value)
        X = np.concatenate([x, np.full(x.shape[:-1] + (1,), alpha)], axis=-1)
        r = np.linalg.norm(X, axis=-1)
        return np.asarray(self.intensity(X / r[..., None]), dtype=float) * alpha / r ** 3

    def total_mass(self, domain, alpha: float) -> float:
        if self.is_constant:
            return self.value * polygon_area(np.asarray(domain, dtype=float))
        return integrate_polygon(lambda p: self(p, alpha), domain, n=16)


def rho_eval(x, source: SourceDensity, alpha: float) -> np.ndarray:
    """Density ``rho`` at in-plane points ``x`` of the aperture at height ``alpha``."""
    return source(x, alpha)


@dataclass(frozen=True, eq=False)
class RefractedDistribution:
    """Cell masses ``G`` and the engine that produced them."""

    G: np.ndarray
    engine: str
    diagram: object = field(default=None, repr=False)

    @property
    def total(self) -> float:
        return float(self.G.sum())

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.G, dtype=dtype)


def _clip_square(x0, y0, x1, y1, normals, offsets):
    poly = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    for (nx, ny), h in zip(normals, offsets):
        out = []
        k = len(poly)
        for a in range(k):
            px, py = poly[a]
            qx, qy = poly[(a + 1) % k]
            dp = nx * px + ny * py - h
            dq = nx * qx + ny * qy - h
            if dp <= 0:
                out.append((px, py))
            if (dp < 0 < dq) or (dq < 0 < dp):
                s = dp / (dp - dq)
                out.append((px + s * (qx - px), py + s * (qy - py)))
        poly = out
        if len(poly) < 3:
            return None
    return np.array(poly)


@lru_cache(maxsize=16)
def grid_samples(scene, resolution=1024, subsamples: int = 4):
    """Quadrature points and ``rho``-weighted weights of the grid engine.

    Interior pixels use their centre. A pixel cut by the domain boundary
    spreads its exact clipped area over its inside sub-samples (or its
    clipped centroid when no sub-sample falls inside), so constant
    densities integrate exactly.
    """
    from .cells import _resolution

    nx, ny = _resolution(resolution)
    x0, y0, x1, y1 = scene.bbox
    hx, hy = (x1 - x0) / nx, (y1 - y0) / ny
    cx = x0 + np.arange(nx + 1) * hx
    cy = y0 + np.arange(ny + 1) * hy
    CX, CY = np.meshgrid(cx, cy)
    normals, offsets = scene.halfplanes
    tol = 1e-12 * scene.diameter
    corner_in = scene.contains(np.stack([CX, CY], axis=-1), tol=-tol)
    full = corner_in[:-1, :-1] & corner_in[1:, :-1] & corner_in[:-1, 1:] & corner_in[1:, 1:]
    # candidate cut pixels: the bounding boxes of the domain edges, dilated by one pixel
    cand = np.zeros_like(full)
    K = len(scene.domain)
    for e in range(K):
        p, q = scene.domain[e], scene.domain[(e + 1) % K]
        c0, c1 = sorted(((p[0] - x0) / hx, (q[0] - x0) / hx))
        r0, r1 = sorted(((p[1] - y0) / hy, (q[1] - y0) / hy))
        n = max(2, int(np.ceil(max(c1 - c0, r1 - r0))) * 2 + 2)
        s = np.linspace(0, 1, n)
        pts = p + s[:, None] * (q - p)
        c = np.clip(((pts[:, 0] - x0) / hx).astype(int), 0, nx - 1)
        r = np.clip(((pts[:, 1] - y0) / hy).astype(int), 0, ny - 1)
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                cand[np.clip(r + dr, 0, ny - 1), np.clip(c + dc, 0, nx - 1)] = True
    cand &= ~full

    X, Y = np.meshgrid(x0 + (np.arange(nx) + 0.5) * hx, y0 + (np.arange(ny) + 0.5) * hy)
    pts = [np.column_stack([X[full], Y[full]])]
    wts = [np.full(np.count_nonzero(full), hx * hy)]
    s = subsamples
    off = (np.arange(s) + 0.5) / s
    ox, oy = np.meshgrid(off * hx, off * hy)
    lattice = np.column_stack([ox.ravel(), oy.ravel()])
    for r, c in zip(*np.nonzero(cand)):
        px, py = x0 + c * hx, y0 + r * hy
        clipped = _clip_square(px, py, px + hx, py + hy, normals, offsets)
        if clipped is None:
            continue
        area = polygon_area(clipped)
        if area <= 0:
            continue
        sub = lattice + (px, py)
        sub = sub[scene.contains(sub)]
        if len(sub) == 0:
            sub = clipped.mean(axis=0)[None, :]
        pts.append(sub)
        wts.append(np.full(len(sub), area / len(sub)))
    points = np.concatenate(pts)
    weights = np.concatenate(wts) * scene.source(points, scene.alpha)
    points.setflags(write=False)
    weights.setflags(write=False)
    return points, weights


def _grid_masses(scene, b, resolution, subsamples) -> np.ndarray:
    from .cells import argmin_labels

    points, weights = grid_samples(scene, resolution, subsamples)
    labels = argmin_labels(points, scene, b)
    return np.bincount(labels, weights=weights, minlength=scene.n_targets)


def refracted_distribution(scene, b, engine: str = "boundary", resolution=1024,
                           subsamples: int = 4, diagram=None) -> RefractedDistribution:
    """Masses ``G_i(b)`` of the Laguerre cells.

    Parameters
    ----------
    engine : {"boundary", "grid"}
        ``boundary`` needs a constant density and weights satisfying the
        lift condition; ``grid`` works for any density.
    resolution, subsamples
        Grid engine pixel count per side and boundary sub-sampling.
    diagram : LaguerreDiagram, optional
        Prebuilt diagram for ``b`` (boundary engine).

    Raises
    ------
    LiftConditionViolated
        Boundary engine with weights outside the lift domain.
    """
    b = np.asarray(b, dtype=float)
    if b.shape != (scene.n_targets,) or not np.all(np.isfinite(b)):
        raise ValueError(f"weights must be {scene.n_targets} finite numbers")
    if engine == "grid":
        G = _grid_masses(scene, b, resolution, subsamples)
        if not np.all(np.isfinite(G)):
            raise ValueError("density produced non-finite values")
        return RefractedDistribution(G, "grid", diagram)
    if engine != "boundary":
        raise ValueError(f"unknown engine {engine!r}")
    if not scene.source.is_constant:
        raise ValueError("the boundary engine needs a constant density; use engine='grid'")
    if diagram is None:
        from .cells import boundary_arcs

        diagram = boundary_arcs(scene, b)
    G = scene.source.value * diagram.areas
    return RefractedDistribution(G, "boundary", diagram)


def _arc_flux(arc, scene) -> float:
    conic = arc.conic

    def integrand(t):
        x = conic.point(t)
        g = np.linalg.norm(conic.gradient(x), axis=-1)
        if np.any(g < DEGENERATE_TOL):
            raise DegenerateGradient(
                f"cost gradients of targets {arc.cell} and {arc.other} coincide on their shared arc"
            )
        speed = np.linalg.norm(conic.velocity(t), axis=-1)
        return scene.source(x, scene.alpha) * speed / g

    from .quadrature import integrate_interval

    return integrate_interval(integrand, arc.t0, arc.t1)


def jacobian_raw(scene, b, diagram=None) -> np.ndarray:
    """One-sided arc integrals: entry ``(i, j)`` integrates along the arcs of cell ``i``.

    The diagonal is left at zero.
    """
    if diagram is None:
        from .cells import boundary_arcs

        diagram = boundary_arcs(scene, b)
    n = scene.n_targets
    J = np.zeros((n, n))
    for arc in diagram.interior_arcs():
        J[arc.cell, arc.other] += _arc_flux(arc, scene)
    return J


def jacobian(scene, b, diagram=None, symmetrize: bool = True) -> np.ndarray:
    """``DG(b)``: symmetrized arc integrals off the diagonal, minus row sums on it.

    Raises
    ------
    DegenerateGradient
        If ``|grad c_i - grad c_j|`` drops below ``1e-8`` on an arc.
    """
    J = jacobian_raw(scene, b, diagram)
    if symmetrize:
        J = 0.5 * (J + J.T)
    np.fill_diagonal(J, 0.0)
    np.fill_diagonal(J, -J.sum(axis=1))
    return J


def jacobian_fd(scene, b, h: float = 1e-4, engine: str = "boundary", **opts) -> np.ndarray:
    """Central differences ``(G(b + h e_j) - G(b - h e_j)) / 2h``, column by column."""
    if h <= 0:
        raise ValueError("step must be positive")
    b = np.asarray(b, dtype=float)
    n = len(b)
    J = np.zeros((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        gp = refracted_distribution(scene, b + e, engine, **opts).G
        gm = refracted_distribution(scene, b - e, engine, **opts).G
        J[:, j] = (gp - gm) / (2 * h)
    return J


@dataclass(frozen=True)
class MonotonicityReport:
    """Structural checks of a Jacobian against the expected sign pattern."""

    symmetry_defect: float
    max_eigenvalue: float
    kernel_dim: int
    kernel_alignment: float
    row_sum_defect: float
    min_offdiag: float
    n_components: int
    consistent: bool

    @property
    def irreducible(self) -> bool:
        return self.n_components == 1


def monotonicity_report(J, masses_positive: bool = True, rtol: float = 1e-8) -> MonotonicityReport:
    """Symmetry, sign, spectrum, kernel and irreducibility of ``J``.

    ``kernel_alignment`` is ``1 - |<v, e>| / sqrt(N)`` for the unit kernel
    vector ``v`` when the kernel is one-dimensional (0 means aligned), else
    ``nan``. Eigenvalues below ``rtol * ||J||`` in magnitude count as zero.
    With ``masses_positive`` the report is ``consistent`` when ``J`` is
    negative semi-definite with kernel ``span(e)``.
    """
    J = np.asarray(J, dtype=float)
    n = len(J)
    norm = max(np.abs(J).max(), np.finfo(float).tiny)
    sym = float(np.abs(J - J.T).max())
    S = 0.5 * (J + J.T)
    w, V = np.linalg.eigh(S)
    zero = np.abs(w) <= rtol * norm
    kdim = int(zero.sum()) if n > 1 or J[0, 0] != 0 else 1
    if kdim == 1:
        v = V[:, np.argmin(np.abs(w))]
        align = float(1.0 - abs(v.sum()) / np.sqrt(n))
    else:
        align = float("nan")
    off = J - np.diag(np.diag(J))
    adj = csr_matrix((np.abs(off) + np.abs(off.T)) > rtol * norm)
    ncomp = int(connected_components(adj, directed=False)[0])
    min_off = float(off[~np.eye(n, dtype=bool)].min()) if n > 1 else 0.0
    max_eig = float(w.max())
    consistent = bool(max_eig <= rtol * norm and min_off >= -rtol * norm)
    if masses_positive:
        consistent = consistent and kdim == 1 and align <= 1e-6 and ncomp == 1
    return MonotonicityReport(
        symmetry_defect=sym,
        max_eigenvalue=max_eig,
        kernel_dim=kdim,
        kernel_alignment=align,
        row_sum_defect=float(np.abs(J.sum(axis=1)).max()),
        min_offdiag=min_off,
        n_components=ncomp,
        consistent=consistent,
    )
