"""Damped Newton solver for ``G(b) = g``.

Iterates stay in the zero-sum gauge ``sum(b) = 0``. Each step solves
``DG(b) v = g - G(b)`` on the zero-sum subspace and backtracks over
``tau = 2^-l`` until every cell keeps mass at least ``eps`` and the error
shrinks by the factor ``1 - tau / 2``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .cells import boundary_arcs
from .distribution import jacobian, refracted_distribution
from .errors import (
    InfeasibleStart,
    LiftConditionViolated,
    ProjectionOutsideDomain,
    SingularSystem,
    StepFailure,
)


@dataclass(frozen=True)
class SolveConfig:
    """Newton loop settings.

    ``engine`` selects how masses are computed (``"boundary"`` or
    ``"grid"``); the Jacobian always comes from the exact cell boundaries.
    """

    max_iters: int = 50
    target_error: float = 1e-8
    resolution: int = 1024
    engine: str = "boundary"
    ell_max: int = 30
    subsamples: int = 4

    def __post_init__(self):
        if not self.target_error > 0:
            raise ValueError("target_error must be positive")
        if self.ell_max < 1:
            raise ValueError("ell_max must be at least 1")
        if self.max_iters < 0:
            raise ValueError("max_iters must be non-negative")
        if self.engine not in ("boundary", "grid"):
            raise ValueError(f"unknown engine {self.engine!r}")


class NearFieldProblem:
    """Masses and Jacobian of a near-field scene, caching the last diagram."""

    def __init__(self, scene, config: SolveConfig | None = None):
        self.scene = scene
        self.config = config or SolveConfig()
        self._cache = (None, None)

    @property
    def n(self) -> int:
        return self.scene.n_targets

    @property
    def g(self) -> np.ndarray:
        return self.scene.masses

    def diagram(self, b):
        key = np.asarray(b, dtype=float).tobytes()
        if self._cache[0] != key:
            self._cache = (key, boundary_arcs(self.scene, b))
        return self._cache[1]

    def masses(self, b) -> np.ndarray:
        """``G(b)``; zero vector-free: raises LiftConditionViolated off the lift domain."""
        c = self.config
        if c.engine == "grid":
            return refracted_distribution(self.scene, b, "grid", c.resolution, c.subsamples).G
        return refracted_distribution(self.scene, b, "boundary", diagram=self.diagram(b)).G

    def jacobian(self, b) -> np.ndarray:
        return jacobian(self.scene, b, self.diagram(b))


def _as_problem(problem, config):
    if hasattr(problem, "masses") and hasattr(problem, "jacobian") and hasattr(problem, "g"):
        return problem
    return NearFieldProblem(problem, config)


def to_zero_sum(b) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    return b - b.mean()


def pin_first(b) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    return b - b[0]


@dataclass(frozen=True)
class IterationRecord:
    iter: int
    error: float
    tau: float
    ell: int
    min_cell_mass: float


@dataclass(frozen=True, eq=False)
class SolveReport:
    """Outcome of :func:`solve`.

    ``b`` is in the zero-sum gauge, ``b_pinned`` is shifted so that
    ``b[0] = 0``. ``history[0]`` describes the starting point (no step).
    """

    b: np.ndarray
    G: np.ndarray
    g: np.ndarray
    epsilon: float
    converged: bool
    history: list[IterationRecord] = field(default_factory=list)

    @property
    def b_pinned(self) -> np.ndarray:
        return pin_first(self.b)

    @property
    def iterations(self) -> int:
        return len(self.history) - 1

    @property
    def errors(self) -> np.ndarray:
        return np.array([h.error for h in self.history])

    @property
    def taus(self) -> np.ndarray:
        return np.array([h.tau for h in self.history[1:]])

    @property
    def error(self) -> float:
        return self.history[-1].error

    @property
    def contraction_factors(self) -> np.ndarray:
        e = self.errors
        return e[1:] / e[:-1] if len(e) > 1 else np.empty(0)

    @property
    def linear_rate(self) -> float:
        """Geometric mean of the per-step error ratios."""
        f = self.contraction_factors
        f = f[f > 0]
        return float(np.exp(np.log(f).mean())) if len(f) else 0.0

    def steps_contract(self) -> bool:
        """Every step satisfies ``e_{k+1} <= (1 - tau_k / 2) e_k``."""
        e = self.errors
        return bool(np.all(e[1:] <= (1 - self.taus / 2) * e[:-1]))


def epsilon_from(G0, g) -> float:
    """``eps = min(min G(b0), min g) / 2``.

    Raises
    ------
    InfeasibleStart
        If some cell of the starting weights has no mass.
    """
    G0 = np.asarray(G0, dtype=float)
    empty = np.nonzero(G0 <= 0)[0]
    if len(empty):
        raise InfeasibleStart(f"cells without mass at the start: {empty.tolist()}")
    return 0.5 * min(float(G0.min()), float(np.min(g)))


def epsilon_guard(scene, b0, config: SolveConfig | None = None) -> float:
    problem = _as_problem(scene, config)
    try:
        G0 = problem.masses(to_zero_sum(b0))
    except LiftConditionViolated as exc:
        raise InfeasibleStart(f"starting weights leave a cell empty: {exc}") from exc
    return epsilon_from(G0, problem.g)


def default_init(scene) -> np.ndarray:
    """Zero weights, valid when every target projects into the aperture.

    Raises
    ------
    ProjectionOutsideDomain
        Listing the targets whose projection falls outside.
    """
    outside = np.nonzero(~scene.contains(scene.targets))[0]
    if len(outside):
        raise ProjectionOutsideDomain(outside.tolist())
    return np.zeros(scene.n_targets)


def newton_direction(J, residual) -> np.ndarray:
    """Zero-sum ``v`` with ``J v = r - mean(r) e``.

    The system is reduced to ``Z^T J Z w = Z^T r`` with ``Z = [I; -1^T]`` and
    ``v = Z w``.

    Raises
    ------
    SingularSystem
        If ``J`` restricted to the zero-sum subspace is numerically singular.
    """
    J = np.asarray(J, dtype=float)
    r = np.asarray(residual, dtype=float)
    n = len(r)
    if n == 1:
        return np.zeros(1)
    r = r - r.mean()
    Z = np.vstack([np.eye(n - 1), -np.ones((1, n - 1))])
    A = Z.T @ J @ Z
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
            w = scipy.linalg.solve(A, Z.T @ r, assume_a="sym")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as exc:
        raise SingularSystem(f"reduced Newton system is singular: {exc}") from exc
    return Z @ w


def line_search(problem, b, v, eps: float, g=None, error: float | None = None,
                ell_max: int = 30):
    """Largest ``tau = 2^-l`` keeping all masses ``>= eps`` with error decrease.

    Returns ``(tau, ell, b_next, G_next)``.

    Raises
    ------
    StepFailure
        If no ``l <= ell_max`` qualifies.
    """
    problem = _as_problem(problem, None)
    g = problem.g if g is None else np.asarray(g, dtype=float)
    b = np.asarray(b, dtype=float)
    if error is None:
        error = float(np.linalg.norm(problem.masses(b) - g))
    for ell in range(ell_max + 1):
        tau = 2.0 ** -ell
        trial = to_zero_sum(b + tau * v)
        try:
            G = problem.masses(trial)
        except LiftConditionViolated:
            # weights off the lift domain leave some cell empty
            continue
        if G.min() >= eps and np.linalg.norm(G - g) <= (1 - tau / 2) * error:
            return tau, ell, trial, G
    raise StepFailure(f"no admissible step with tau >= 2^-{ell_max}")


def solve(problem, config: SolveConfig | None = None, b0=None, callback=None) -> SolveReport:
    """Damped Newton iteration from ``b0`` (default :func:`default_init`).

    ``problem`` is a :class:`~metalens.geometry.Scene` or any object with
    ``g``, ``masses(b)`` and ``jacobian(b)``. Stops when the Euclidean error
    reaches ``config.target_error`` or after ``config.max_iters`` steps; the
    latter is reported through ``converged=False``.
    """
    config = config or getattr(problem, "config", None) or SolveConfig()
    problem = _as_problem(problem, config)
    g = np.asarray(problem.g, dtype=float)
    if b0 is None:
        b0 = default_init(problem.scene) if hasattr(problem, "scene") else np.zeros(len(g))
    b = to_zero_sum(b0)
    try:
        G = problem.masses(b)
    except LiftConditionViolated as exc:
        raise InfeasibleStart(f"starting weights leave a cell empty: {exc}") from exc
    eps = epsilon_from(G, g)
    err = float(np.linalg.norm(G - g))
    history = [IterationRecord(0, err, float("nan"), -1, float(G.min()))]
    if callback:
        callback(history[-1])
    while err > config.target_error and len(history) <= config.max_iters:
        v = newton_direction(problem.jacobian(b), g - G)
        tau, ell, b, G = line_search(problem, b, v, eps, g, err, config.ell_max)
        err = float(np.linalg.norm(G - g))
        history.append(IterationRecord(len(history), err, tau, ell, float(G.min())))
        if callback:
            callback(history[-1])
    return SolveReport(b, G, g, eps, err <= config.target_error, history)


def feasible_starts(problem, count: int, scale: float = 0.05, seed: int = 0,
                    config: SolveConfig | None = None) -> list[np.ndarray]:
    """``b0 = 0`` followed by random perturbations that keep every cell non-empty."""
    problem = _as_problem(problem, config)
    rng = np.random.default_rng(seed)
    starts = [np.zeros(problem.n)]
    while len(starts) < count:
        p = rng.normal(0.0, scale, problem.n)
        for _ in range(30):
            try:
                if problem.masses(to_zero_sum(p)).min() > 0:
                    break
            except LiftConditionViolated:
                pass
            p = 0.5 * p
        starts.append(to_zero_sum(p))
    return starts


def uniqueness_check(problem, config: SolveConfig | None = None, trials=5, seed: int = 0) -> float:
    """Largest sup-norm gap between pinned solutions from several starts.

    ``trials`` is a start count (see :func:`feasible_starts`) or a list of
    starting weight vectors.
    """
    config = config or SolveConfig()
    problem = _as_problem(problem, config)
    starts = feasible_starts(problem, trials, seed=seed) if np.ndim(trials) == 0 else list(trials)
    sols = [solve(problem, config, b0).b_pinned for b0 in starts]
    dev = 0.0
    for a in range(len(sols)):
        for c in range(a + 1, len(sols)):
            dev = max(dev, float(np.abs(sols[a] - sols[c]).max()))
    return dev
