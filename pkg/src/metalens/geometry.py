"""Scene description, the near-field cost and the bisector conics.

Points of the aperture plane ``x3 = alpha`` and of the target plane
``x3 = beta`` are carried around as their two in-plane coordinates; every
function here broadcasts over leading axes, so ``x`` may be a single point of
shape ``(2,)`` or a batch of shape ``(..., 2)``.

The cost of sending the ray through ``X = (x, alpha)`` to ``Y = (y, beta)`` is

    c(X, Y) = |X| + |X - Y|

and a weight vector ``b`` defines the phase ``phi(X) = min_i c(X, Y_i) + b_i``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from .errors import EmptyBisector, SceneError

TOL_GEOM_REL = 1e-9
ARC_TOL_REL = 1e-4


def polygon_area(vertices: np.ndarray) -> float:
    """Signed area of a polygon given by its vertex loop."""
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def polygon_halfplanes(vertices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Outward unit normals ``n`` and offsets ``h`` with ``Omega = {n.x <= h}``.

    The vertices must be a counterclockwise convex loop.
    """
    edges = np.roll(vertices, -1, axis=0) - vertices
    normals = np.column_stack([edges[:, 1], -edges[:, 0]])
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    offsets = np.einsum("ij,ij->i", normals, vertices)
    return normals, offsets


@dataclass(frozen=True, eq=False)
class Scene:
    """Fixed geometry of a near-field problem.

    Parameters
    ----------
    alpha : float
        Height of the metasurface plane, ``alpha > 0``.
    beta : float
        Height of the target plane, ``beta > alpha``.
    domain : array (K, 2)
        Convex aperture polygon, counterclockwise.
    targets : array (N, 2)
        In-plane coordinates of the distinct target points.
    masses : array (N,)
        Prescribed positive energies ``g_i``.
    source : SourceDensity, optional
        Source density on the aperture. Defaults to the uniform density
        whose total mass equals ``sum(masses)``.
    mass_rtol : float
        Relative tolerance of the energy balance check.
    """

    alpha: float
    beta: float
    domain: np.ndarray
    targets: np.ndarray
    masses: np.ndarray
    source: object = None
    mass_rtol: float = 1e-6
    _halfplanes: tuple = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        alpha, beta = float(self.alpha), float(self.beta)
        if not np.isfinite(alpha) or alpha <= 0:
            raise SceneError(f"alpha must be positive, got {alpha}")
        if not np.isfinite(beta) or beta <= alpha:
            raise SceneError(
                f"beta must be greater than alpha (planar target above the "
                f"metasurface), got alpha={alpha}, beta={beta}"
            )
        domain = np.array(self.domain, dtype=float).reshape(-1, 2)
        targets = np.array(self.targets, dtype=float).reshape(-1, 2)
        masses = np.array(self.masses, dtype=float).reshape(-1)
        if len(domain) < 3 or not np.all(np.isfinite(domain)):
            raise SceneError("domain needs at least 3 finite vertices")
        edges = np.roll(domain, -1, axis=0) - domain
        turns = edges[:, 0] * np.roll(edges[:, 1], -1) - edges[:, 1] * np.roll(edges[:, 0], -1)
        if np.any(turns <= 0):
            raise SceneError("domain must be a convex polygon listed counterclockwise")
        if len(targets) < 1 or not np.all(np.isfinite(targets)):
            raise SceneError("need at least one finite target")
        if len(masses) != len(targets):
            raise SceneError(f"{len(masses)} masses for {len(targets)} targets")
        if np.any(~np.isfinite(masses)) or np.any(masses <= 0):
            raise SceneError("target masses must be positive")
        if len(targets) > 1:
            order = np.lexsort(targets.T[::-1])
            srt = targets[order]
            if np.any(np.all(np.diff(srt, axis=0) == 0, axis=1)):
                raise SceneError("targets must be pairwise distinct")
        for name, value in (("alpha", alpha), ("beta", beta), ("domain", domain),
                            ("targets", targets), ("masses", masses)):
            object.__setattr__(self, name, value)
        for arr in (domain, targets, masses):
            arr.setflags(write=False)
        object.__setattr__(self, "_halfplanes", polygon_halfplanes(domain))

        source = self.source
        if source is None:
            from .distribution import SourceDensity
            source = SourceDensity.constant(masses.sum() / polygon_area(domain))
            object.__setattr__(self, "source", source)
        total = source.total_mass(domain, alpha)
        if abs(total - masses.sum()) > self.mass_rtol * max(total, masses.sum()):
            raise SceneError(
                f"energy balance violated: source mass {total:.12g} "
                f"!= sum of target masses {masses.sum():.12g}"
            )

    @property
    def n_targets(self) -> int:
        return len(self.targets)

    @property
    def delta(self) -> float:
        """Vertical gap ``beta - alpha``."""
        return self.beta - self.alpha

    @property
    def area(self) -> float:
        return polygon_area(self.domain)

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        lo, hi = self.domain.min(axis=0), self.domain.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    @property
    def diameter(self) -> float:
        d = self.domain[:, None, :] - self.domain[None, :, :]
        return float(np.sqrt((d ** 2).sum(-1)).max())

    @property
    def tol_geom(self) -> float:
        return TOL_GEOM_REL * self.diameter

    @property
    def arc_tol(self) -> float:
        return ARC_TOL_REL * self.diameter

    @property
    def halfplanes(self) -> tuple[np.ndarray, np.ndarray]:
        return self._halfplanes

    def contains(self, x, tol: float = 0.0) -> np.ndarray:
        """Boolean mask of the points of ``x`` lying in the closed domain."""
        x = np.asarray(x, dtype=float)
        n, h = self._halfplanes
        return np.all(x @ n.T <= h + tol, axis=-1)

    def with_masses(self, masses) -> "Scene":
        return Scene(self.alpha, self.beta, self.domain, self.targets, masses,
                     self.source, self.mass_rtol)


def cost_near(x, y, scene: Scene) -> np.ndarray:
    """``|X| + |X - Y|`` for ``X = (x, alpha)`` and ``Y = (y, beta)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r0 = np.sqrt(x[..., 0] ** 2 + x[..., 1] ** 2 + scene.alpha ** 2)
    d = x - y
    r1 = np.sqrt(d[..., 0] ** 2 + d[..., 1] ** 2 + scene.delta ** 2)
    return r0 + r1


def cost_gradient_inplane(x, y, scene: Scene) -> np.ndarray:
    """In-plane gradient of :func:`cost_near` with respect to ``x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r0 = np.sqrt((x ** 2).sum(-1) + scene.alpha ** 2)
    d = x - y
    r1 = np.sqrt((d ** 2).sum(-1) + scene.delta ** 2)
    return x / r0[..., None] + d / r1[..., None]


def weighted_costs(x, scene: Scene, b) -> np.ndarray:
    """Matrix of ``c(X, Y_i) + b_i`` with the target index on the last axis."""
    x = np.asarray(x, dtype=float)
    b = np.asarray(b, dtype=float)
    return cost_near(x[..., None, :], scene.targets, scene) + b


def phase_eval(x, scene: Scene, b):
    """Phase value ``min_i c(X, Y_i) + b_i`` and the smallest minimizing index."""
    b = np.asarray(b, dtype=float)
    if b.shape != (scene.n_targets,):
        raise ValueError(f"expected {scene.n_targets} weights, got shape {b.shape}")
    vals = weighted_costs(x, scene, b)
    idx = np.argmin(vals, axis=-1)
    val = np.take_along_axis(vals, idx[..., None], axis=-1)[..., 0]
    if np.ndim(idx) == 0:
        return float(val), int(idx)
    return val, idx


class WeightedPoint3(NamedTuple):
    q: np.ndarray
    omega: float


@dataclass(frozen=True, eq=False)
class LiftedPoints:
    """Weighted point cloud ``q_i = (y_i, -b_i)``, ``omega_i = -2 b_i**2``."""

    q: np.ndarray
    omega: np.ndarray

    def __len__(self) -> int:
        return len(self.omega)

    def __getitem__(self, i) -> WeightedPoint3:
        return WeightedPoint3(self.q[i], float(self.omega[i]))

    def __iter__(self) -> Iterator[WeightedPoint3]:
        return (self[i] for i in range(len(self)))

    def recover(self) -> tuple[np.ndarray, np.ndarray]:
        """Return the targets ``y`` and weights ``b`` the cloud was built from."""
        return self.q[:, :2].copy(), -self.q[:, 2]


def lift_weighted_points(scene: Scene, b) -> LiftedPoints:
    b = np.asarray(b, dtype=float)
    q = np.column_stack([scene.targets, -b])
    return LiftedPoints(q, -2.0 * b ** 2)


def sheet_height(x, i: int, scene: Scene, b) -> np.ndarray:
    """Height ``|X - Y_i| + b_i`` of the upper hyperboloid sheet above ``x``."""
    d = np.asarray(x, dtype=float) - scene.targets[i]
    return np.sqrt((d ** 2).sum(-1) + scene.delta ** 2) + b[i]


def separation_threshold(i: int, j: int, scene: Scene) -> float:
    """``sqrt(4 (alpha - beta)^2 + |y_i - y_j|^2)``, the minimum of ``|X-Y_i| + |X-Y_j|``."""
    dy = scene.targets[i] - scene.targets[j]
    return float(np.sqrt(4 * scene.delta ** 2 + dy @ dy))


def sheets_separated(i: int, j: int, scene: Scene, b) -> bool:
    """True when the upper sheet of ``i`` and the lower sheet of ``j`` do not meet."""
    if i == j:
        raise ValueError("sheets_separated needs two distinct indices")
    return separation_threshold(i, j, scene) > b[j] - b[i]


@dataclass(frozen=True, eq=False)
class ConicCurve:
    """The equal-cost curve ``c(X, Y_i) + b_i = c(X, Y_j) + b_j``.

    ``coefficients`` are ``(A, B, C, D, E, F)`` of the squared equation
    ``A x1^2 + B x1 x2 + C x2^2 + D x1 + E x2 + F = 0``; its zero set holds
    the true curve and the mirror branch introduced by squaring, which
    :meth:`on_branch` rejects.

    The true curve is one branch of a hyperbola (a line when ``b_i = b_j``)
    with centre ``center`` halfway between the targets and parametrization

        x(t) = center + sign * a cosh(t) e1 + bb sinh(t) e2

    where ``e1`` points from ``y_i`` to ``y_j``. With increasing ``t`` the
    region where target ``i`` is cheaper lies on the left.
    """

    i: int
    j: int
    y_i: np.ndarray
    y_j: np.ndarray
    delta: float
    gap: float
    coefficients: np.ndarray
    center: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    a: float
    bb: float
    sign: float

    def evaluate(self, x) -> np.ndarray:
        """Value of the squared (implicit) conic equation."""
        x = np.asarray(x, dtype=float)
        A, B, C, D, E, F = self.coefficients
        x1, x2 = x[..., 0], x[..., 1]
        return A * x1 * x1 + B * x1 * x2 + C * x2 * x2 + D * x1 + E * x2 + F

    def residual(self, x) -> np.ndarray:
        """Unsquared cost difference ``c_i + b_i - c_j - b_j``; negative on the ``i`` side."""
        x = np.asarray(x, dtype=float)
        di = x - self.y_i
        dj = x - self.y_j
        ri = np.sqrt((di ** 2).sum(-1) + self.delta ** 2)
        rj = np.sqrt((dj ** 2).sum(-1) + self.delta ** 2)
        return ri - rj - self.gap

    def gradient(self, x) -> np.ndarray:
        """In-plane gradient of :meth:`residual`, equal to ``grad c_i - grad c_j``."""
        x = np.asarray(x, dtype=float)
        di = x - self.y_i
        dj = x - self.y_j
        ri = np.sqrt((di ** 2).sum(-1) + self.delta ** 2)
        rj = np.sqrt((dj ** 2).sum(-1) + self.delta ** 2)
        return di / ri[..., None] - dj / rj[..., None]

    def on_branch(self, x, tol: float = 0.0) -> np.ndarray:
        s = np.asarray(x, dtype=float) - self.y_i
        d = self.y_j - self.y_i
        kappa = self.gap ** 2 - d @ d
        return self.gap * (2 * (s @ d) + kappa) >= -tol

    def point(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        u = self.sign * self.a * np.cosh(t)
        v = self.bb * np.sinh(t)
        return self.center + u[..., None] * self.e1 + v[..., None] * self.e2

    def velocity(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        u = self.sign * self.a * np.sinh(t)
        v = self.bb * np.cosh(t)
        return u[..., None] * self.e1 + v[..., None] * self.e2

    def exponential_form(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(c, p, m)`` with ``x(t) = c + p z + m / z`` for ``z = exp(t)``."""
        u = self.sign * self.a * self.e1
        v = self.bb * self.e2
        return self.center, 0.5 * (u + v), 0.5 * (u - v)

    def parameter_bound(self, radius: float) -> float:
        """``T`` such that ``|x(t) - center| > radius`` whenever ``|t| > T``."""
        return float(np.arcsinh(radius / self.bb))


def squared_bisector_coefficients(y_i, y_j, delta: float, gap: float) -> np.ndarray:
    """Coefficients of ``(L + gap^2)^2 - 4 gap^2 (|x - y_i|^2 + delta^2)``.

    Here ``L = |x - y_i|^2 - |x - y_j|^2`` is affine in ``x``.
    """
    y_i = np.asarray(y_i, dtype=float)
    d = np.asarray(y_j, dtype=float) - y_i
    kappa = gap ** 2 - d @ d
    M = 4 * np.outer(d, d) - 4 * gap ** 2 * np.eye(2)
    lin_s = 4 * kappa * d
    const_s = kappa ** 2 - 4 * gap ** 2 * delta ** 2
    lin = lin_s - 2 * M @ y_i
    const = y_i @ M @ y_i - lin_s @ y_i + const_s
    coef = np.array([M[0, 0], 2 * M[0, 1], M[1, 1], lin[0], lin[1], const])
    scale = np.abs(coef).max()
    return coef / scale if scale > 0 else coef


def bisector_conic(i: int, j: int, scene: Scene, b) -> ConicCurve:
    """Curve where targets ``i`` and ``j`` have equal weighted cost.

    Raises
    ------
    EmptyBisector
        If one of the two weighted costs dominates the other everywhere.
    """
    if i == j:
        raise ValueError("bisector_conic needs two distinct indices")
    y_i, y_j = scene.targets[i], scene.targets[j]
    gap = float(b[j] - b[i])
    d = y_j - y_i
    dist = float(np.hypot(d[0], d[1]))
    # the curve needs |gap| < |y_i - y_j| (strict triangle inequality off the target line)
    if not abs(gap) < dist:
        raise EmptyBisector(f"cost of target {i if gap > 0 else j} dominates everywhere")
    e1 = d / dist
    e2 = np.array([-e1[1], e1[0]])
    bb = float(np.sqrt(scene.delta ** 2 + 0.25 * (dist - gap) * (dist + gap)))
    a = bb * abs(gap) / float(np.sqrt((dist - gap) * (dist + gap)))
    return ConicCurve(
        i=i, j=j, y_i=y_i, y_j=y_j, delta=scene.delta, gap=gap,
        coefficients=squared_bisector_coefficients(y_i, y_j, scene.delta, gap),
        center=0.5 * (y_i + y_j), e1=e1, e2=e2, a=a, bb=bb, sign=float(np.sign(gap)),
    )
