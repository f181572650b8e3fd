"""Monte-Carlo ray trace of a near-field solution.

Rays leave the origin, hit the aperture at ``X = (x, alpha)`` with
probability proportional to ``rho`` and are refracted with ``n1 = n2 = 1``:
the tangential part of the outgoing direction is ``x/|X| - grad phi(x)``.
Each ray is followed to the target plane and attributed to the nearest
target. The landed fractions are compared with ``g / sum(g)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Scene, cost_gradient_inplane, weighted_costs

CHUNK = 65536
COMPLEX_STEP = 1e-20


@dataclass(frozen=True, eq=False)
class TraceReport:
    """Landed-mass statistics of a ray trace.

    ``fractions[i]`` is the share of the ``samples`` rays landing on target
    ``i`` and ``expected`` is ``g / sum(g)``. ``tolerance`` is
    ``4 / sqrt(samples) + 1e-8``. ``snell_max`` and ``snell_mean`` describe
    the tangential Snell residual at ``snell_points`` interior points and
    ``landing_miss`` is the largest distance between a landing point and the
    target it was attributed to.
    """

    samples: int
    fractions: np.ndarray
    expected: np.ndarray
    tolerance: float
    snell_max: float
    snell_mean: float
    snell_points: int
    landing_miss: float

    @property
    def max_deviation(self) -> float:
        return float(np.abs(self.fractions - self.expected).max())

    @property
    def mass_consistent(self) -> bool:
        return self.max_deviation <= self.tolerance

    @property
    def snell_ok(self) -> bool:
        return self.snell_max <= 1e-10

    @property
    def consistent(self) -> bool:
        return self.mass_consistent and self.snell_ok


def _density_bound(scene: Scene) -> float:
    src = scene.source
    if src.is_constant:
        return src.value
    x0, y0, x1, y1 = scene.bbox
    X, Y = np.meshgrid(np.linspace(x0, x1, 257), np.linspace(y0, y1, 257))
    return 1.1 * float(src(np.column_stack([X.ravel(), Y.ravel()]), scene.alpha).max())


def sample_source(scene: Scene, m: int, rng: np.random.Generator) -> np.ndarray:
    """``m`` aperture points distributed with density proportional to ``rho``."""
    x0, y0, x1, y1 = scene.bbox
    bound = _density_bound(scene)
    out, have = [], 0
    while have < m:
        k = max(2 * (m - have), 1024)
        p = rng.uniform((x0, y0), (x1, y1), size=(k, 2))
        keep = scene.contains(p)
        if not scene.source.is_constant:
            keep &= rng.uniform(0.0, bound, k) < scene.source(p, scene.alpha)
        out.append(p[keep])
        have += int(keep.sum())
    return np.concatenate(out)[:m]


def phase_gradient(x, labels, scene: Scene) -> np.ndarray:
    """Gradient of the supporting phase of ``labels`` at ``x`` by complex step."""
    x = np.asarray(x, dtype=float)
    y = scene.targets[labels]
    out = np.empty_like(x)
    for k in range(2):
        xc = x.astype(complex)
        xc[:, k] += 1j * COMPLEX_STEP
        d = xc - y
        c = np.sqrt((xc ** 2).sum(1) + scene.alpha ** 2) + np.sqrt((d ** 2).sum(1) + scene.delta ** 2)
        out[:, k] = c.imag / COMPLEX_STEP
    return out


def refract(x, grad, scene: Scene) -> np.ndarray:
    """Landing points on the target plane of rays through ``x`` deflected by ``grad``."""
    r = np.sqrt((x ** 2).sum(1) + scene.alpha ** 2)
    t = x / r[:, None] - grad
    t3 = np.sqrt(np.clip(1.0 - (t ** 2).sum(1), 0.0, None))
    return x + t * (scene.delta / t3)[:, None]


def snell_residual(x, labels, scene: Scene) -> np.ndarray:
    """``|x_hat_t - m_hat_t - grad_x c(X, Y_i)|`` with ``m_hat`` pointing at the assigned target."""
    y = scene.targets[labels]
    X = np.column_stack([x, np.full(len(x), scene.alpha)])
    M = np.column_stack([y - x, np.full(len(x), scene.delta)])
    xh = X / np.linalg.norm(X, axis=1, keepdims=True)
    mh = M / np.linalg.norm(M, axis=1, keepdims=True)
    diff = xh[:, :2] - mh[:, :2] - cost_gradient_inplane(x, y, scene)
    return np.linalg.norm(diff, axis=1)


def _interior(x, scene: Scene, b, margin: float):
    """Labels and a mask of points whose best and second-best costs differ by ``margin``."""
    vals = weighted_costs(x, scene, b)
    labels = np.argmin(vals, axis=1)
    if scene.n_targets == 1:
        return labels, np.ones(len(x), dtype=bool)
    part = np.partition(vals, 1, axis=1)
    return labels, part[:, 1] - part[:, 0] > margin


def trace_verify(scene: Scene, b, samples: int = 1_000_000, seed: int = 0,
                 snell_points: int = 1000) -> TraceReport:
    """Ray-trace ``samples`` rays through the phase with weights ``b``."""
    if samples < 10_000:
        raise ValueError("need at least 10^4 samples")
    b = np.asarray(b, dtype=float)
    rng = np.random.default_rng(seed)
    n = scene.n_targets
    counts = np.zeros(n, dtype=np.int64)
    miss = 0.0
    snell_x, snell_lab = [], []
    margin = 1e-6 * scene.diameter
    done = 0
    while done < samples:
        m = min(CHUNK, samples - done)
        x = sample_source(scene, m, rng)
        labels, inner = _interior(x, scene, b, margin)
        land = refract(x, phase_gradient(x, labels, scene), scene)
        d2 = ((land[:, None, :] - scene.targets[None]) ** 2).sum(-1)
        hit = np.argmin(d2, axis=1)
        miss = max(miss, float(np.sqrt(d2[np.arange(m), hit].max())))
        counts += np.bincount(hit, minlength=n)
        need = snell_points - sum(len(s) for s in snell_x)
        if need > 0:
            idx = np.nonzero(inner)[0][:need]
            snell_x.append(x[idx])
            snell_lab.append(labels[idx])
        done += m
    sx = np.concatenate(snell_x) if snell_x else np.empty((0, 2))
    res = snell_residual(sx, np.concatenate(snell_lab).astype(int), scene) if len(sx) else np.zeros(1)
    g = scene.masses
    return TraceReport(samples, counts / samples, g / g.sum(), 4.0 / np.sqrt(samples) + 1e-8,
                       float(res.max()), float(res.mean()), len(sx), miss)


__all__ = ["TraceReport", "phase_gradient", "refract", "sample_source",
           "snell_residual", "trace_verify"]
