"""Far-field variants: collimated beams and point sources at infinity.

Both reduce to affine comparisons on the aperture. With a max-convention
supporting phase ``L_i(x) = b_i + r_i - p_i . x`` the cells are convex
polygons ``{x : L_i(x) >= L_j(x) for all j}``:

* collimated direction ``m``: ``p = (m1, m2)``, ``r = 0``;
* point source direction ``y``: ``|X| - y . X + b`` with ``X = (x, a)``; the
  common ``|X|`` drops out leaving ``p = (y1, y2)``, ``r = -y3 a``.

The solver works in the min convention of the near field through the sign
flip ``w = -b``, so the shared damped Newton loop applies unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distribution import SourceDensity
from .errors import ParallelDirections, SceneError
from .geometry import polygon_area, polygon_halfplanes
from .quadrature import integrate_polygon, integrate_segment
from .solver import SolveConfig, SolveReport, solve


@dataclass(frozen=True)
class UnitDirection:
    """Unit vector of the upper hemisphere, ``|m| = 1`` and ``m3 > 0``."""

    m: tuple[float, float, float]

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        if m.shape != (3,) or not np.all(np.isfinite(m)):
            raise ValueError("a direction needs three finite components")
        if abs(np.linalg.norm(m) - 1.0) > 1e-12:
            raise ValueError(f"direction must have unit norm, got |m| = {np.linalg.norm(m)!r}")
        if m[2] <= 0:
            raise ValueError("direction must point upward (m3 > 0)")
        object.__setattr__(self, "m", tuple(float(v) for v in m))

    @classmethod
    def from_projection(cls, m1: float, m2: float) -> "UnitDirection":
        """Direction whose in-plane part is ``(m1, m2)``."""
        r2 = m1 * m1 + m2 * m2
        if r2 >= 1:
            raise ValueError("projection must lie in the open unit disk")
        return cls((m1, m2, float(np.sqrt(1.0 - r2))))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.m)


def supporting_phase_collimated(m: UnitDirection, b: float, x) -> np.ndarray:
    """``L(m, b, x) = b - m1 x1 - m2 x2``."""
    x = np.asarray(x, dtype=float)
    return b - x[..., 0] * m.m[0] - x[..., 1] * m.m[1]


def cost_far_point_source(x, y: UnitDirection, a: float) -> np.ndarray:
    """``|X| - y . X`` with ``X = (x1, x2, a)``."""
    x = np.asarray(x, dtype=float)
    X = np.concatenate([x, np.full(x.shape[:-1] + (1,), float(a))], axis=-1)
    return np.linalg.norm(X, axis=-1) - X @ np.asarray(y.m)


def farfield_limit_gap(x, P, b: float = 0.0, alpha: float = 1.0) -> np.ndarray:
    """``|(|X| + |X - P| - (|P| + b)) - (|X| - (P/|P|) . X - b)|``.

    The weight cancels exactly; the rest is evaluated without the
    cancellation of ``|X - P| - |P|`` for large ``|P|``.
    """
    x = np.asarray(x, dtype=float)
    X = np.concatenate([x, np.full(x.shape[:-1] + (1,), float(alpha))], axis=-1)
    P = np.asarray(P, dtype=float)
    nP = np.linalg.norm(P)
    if nP <= 0:
        raise ValueError("P must be non-zero")
    XX = (X * X).sum(-1)
    XP = X @ P
    s = np.linalg.norm(X - P, axis=-1) + nP
    gap = (XX * nP + XP * (XX - 2 * XP) / s) / (s * nP)
    return np.abs(gap)


@dataclass(frozen=True, eq=False)
class FarFieldScene:
    """Aperture polygon at height ``a``, directions, masses and density.

    ``kind`` is ``"collimated"`` or ``"point_source"``. The density defaults
    to the constant one balancing the masses.
    """

    domain: np.ndarray
    directions: np.ndarray
    masses: np.ndarray
    kind: str = "collimated"
    a: float = 1.0
    source: SourceDensity | None = None
    mass_rtol: float = 1e-6

    def __post_init__(self):
        domain = np.array(self.domain, dtype=float).reshape(-1, 2)
        dirs = np.array([UnitDirection(tuple(m)).m for m in np.atleast_2d(self.directions)])
        masses = np.array(self.masses, dtype=float).reshape(-1)
        if self.kind not in ("collimated", "point_source"):
            raise SceneError(f"unknown far-field kind {self.kind!r}")
        if len(masses) != len(dirs) or np.any(masses <= 0):
            raise SceneError("need one positive mass per direction")
        if len(domain) < 3:
            raise SceneError("domain needs at least 3 vertices")
        e = np.roll(domain, -1, axis=0) - domain
        if np.any(e[:, 0] * np.roll(e[:, 1], -1) - e[:, 1] * np.roll(e[:, 0], -1) <= 0):
            raise SceneError("domain must be a convex polygon listed counterclockwise")
        p = dirs[:, :2]
        d = np.abs(p[:, None, :] - p[None, :, :]).max(-1) + np.eye(len(p))
        if np.any(d == 0):
            i, j = np.argwhere(np.triu(d == 0, 1))[0]
            raise ParallelDirections(f"directions {i} and {j} coincide")
        source = self.source or SourceDensity.constant(masses.sum() / polygon_area(domain))
        total = source.total_mass(domain, self.a)
        if abs(total - masses.sum()) > self.mass_rtol * max(total, masses.sum()):
            raise SceneError(f"energy balance violated: {total:.12g} != {masses.sum():.12g}")
        for name, value in (("domain", domain), ("directions", dirs), ("masses", masses),
                            ("source", source), ("a", float(self.a))):
            object.__setattr__(self, name, value)

    @property
    def n_targets(self) -> int:
        return len(self.masses)

    @property
    def area(self) -> float:
        return polygon_area(self.domain)

    def affine_form(self, convention: str = "max"):
        """``(p, s)`` of the min-convention costs ``p_i . x + s_i``.

        ``convention="max"`` is the supporting-from-below orientation with
        weights ``w = -b``; ``"min"`` uses ``|X| - y . X + b`` directly and
        matches the limit of the near-field cost (point source only).
        """
        y = self.directions
        if convention == "max":
            r = np.zeros(len(y)) if self.kind == "collimated" else -y[:, 2] * self.a
            return y[:, :2].copy(), -r
        if convention == "min" and self.kind == "point_source":
            return -y[:, :2], -y[:, 2] * self.a
        raise ValueError(f"convention {convention!r} not available for {self.kind}")


def _clip_polygon(vertices, labels, n, h, label):
    """Clip a convex polygon by ``n . x <= h``; ``labels[k]`` tags edge ``k -> k+1``."""
    d = vertices @ n - h
    if np.all(d <= 0):
        return vertices, labels
    if np.all(d >= 0):
        return vertices[:0], []
    out, out_lab = [], []
    k = len(vertices)
    for a in range(k):
        b = (a + 1) % k
        P, Q = vertices[a], vertices[b]
        if d[a] <= 0:
            out.append(P)
            out_lab.append(labels[a])
        if (d[a] < 0 < d[b]) or (d[b] < 0 < d[a]):
            out.append(P + (Q - P) * (d[a] / (d[a] - d[b])))
            out_lab.append(label if d[a] < 0 else labels[a])
        elif d[a] <= 0 and d[b] > 0 and d[a] == 0:
            out_lab[-1] = label
    return np.array(out).reshape(-1, 2), out_lab


def affine_cells(domain, p, s, w):
    """Polygons ``{x : p_i . x + s_i + w_i <= p_j . x + s_j + w_j}`` clipped to ``domain``.

    Returns a list of ``(vertices, edge_labels)``; labels are ``("dom", e)``
    or ``("pair", j)``.
    """
    domain = np.asarray(domain, dtype=float)
    c = np.asarray(s, dtype=float) + np.asarray(w, dtype=float)
    n = len(p)
    base_labels = [("dom", e) for e in range(len(domain))]
    cells = []
    for i in range(n):
        verts, labs = domain, base_labels
        for j in range(n):
            if j == i or len(verts) == 0:
                continue
            # p_i . x + c_i <= p_j . x + c_j
            verts, labs = _clip_polygon(verts, labs, p[i] - p[j], c[j] - c[i], ("pair", j))
        if len(verts) >= 3 and polygon_area(verts) > 0:
            cells.append((verts, labs))
        else:
            cells.append((np.empty((0, 2)), []))
    return cells


def affine_init(domain, p, s) -> np.ndarray:
    """Weights giving every affine cell a non-empty interior.

    With ``q_i = p_i - mean(p)`` and costs ``|q_i|^2 / (2 k) - q_i . xc`` the
    cells are the Voronoi cells of the sites ``q_i`` seen through
    ``x -> -k (x - xc)``, so cell ``i`` contains ``xc - q_i / k``; ``k`` is
    chosen to keep those points inside the domain.
    """
    domain = np.asarray(domain, dtype=float)
    n, h = polygon_halfplanes(domain)
    xc = domain.mean(axis=0)
    inradius = float((h - n @ xc).min())
    q = p - p.mean(axis=0)
    spread = float(np.linalg.norm(q, axis=1).max())
    k = 2.0 * spread / inradius if spread > 0 else 1.0
    return 0.5 * (q * q).sum(1) / k - q @ xc - s


class FarFieldProblem:
    """Masses and Jacobian of a far-field scene in min-convention weights ``w``."""

    def __init__(self, scene: FarFieldScene, convention: str = "max"):
        self.scene = scene
        self.convention = convention
        self.p, self.s = scene.affine_form(convention)

    @property
    def n(self) -> int:
        return self.scene.n_targets

    @property
    def g(self) -> np.ndarray:
        return self.scene.masses

    def to_weights(self, b) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        return -b if self.convention == "max" else b

    def from_weights(self, w) -> np.ndarray:
        return self.to_weights(w)

    def cells(self, w):
        return affine_cells(self.scene.domain, self.p, self.s, w)

    def _density(self, x):
        return self.scene.source(x, self.scene.a)

    def masses(self, w) -> np.ndarray:
        src = self.scene.source
        out = np.zeros(self.n)
        for i, (verts, _) in enumerate(self.cells(w)):
            if len(verts):
                out[i] = (src.value * polygon_area(verts) if src.is_constant
                          else integrate_polygon(self._density, verts, n=16))
        return out

    def jacobian(self, w) -> np.ndarray:
        J = np.zeros((self.n, self.n))
        src = self.scene.source
        for i, (verts, labs) in enumerate(self.cells(w)):
            k = len(verts)
            for e, lab in enumerate(labs):
                if lab[0] != "pair":
                    continue
                j = lab[1]
                P, Q = verts[e], verts[(e + 1) % k]
                flux = (src.value * np.linalg.norm(Q - P) if src.is_constant
                        else integrate_segment(self._density, P, Q))
                J[i, j] += flux / np.linalg.norm(self.p[i] - self.p[j])
        J = 0.5 * (J + J.T)
        np.fill_diagonal(J, -J.sum(axis=1))
        return J


@dataclass(frozen=True, eq=False)
class FarFieldSolution:
    """Solver report plus weights in the scene's convention and the final cells."""

    report: SolveReport
    b: np.ndarray
    cells: list

    @property
    def areas(self) -> np.ndarray:
        return np.array([polygon_area(v) if len(v) else 0.0 for v, _ in self.cells])


def _solve(scene: FarFieldScene, config, b0, convention) -> FarFieldSolution:
    problem = FarFieldProblem(scene, convention)
    config = config or SolveConfig(target_error=1e-10)
    w0 = None if b0 is None else problem.to_weights(b0)
    if w0 is None:
        w0 = affine_init(scene.domain, problem.p, problem.s)
    report = solve(problem, config, w0)
    b = problem.from_weights(report.b)
    return FarFieldSolution(report, b, problem.cells(report.b))


def solve_collimated(scene: FarFieldScene, config: SolveConfig | None = None, b0=None) -> FarFieldSolution:
    """Weights of ``phi(x) = max_i L(m_i, b_i, x)`` sending ``g_i`` along ``m_i``."""
    if scene.kind != "collimated":
        raise ValueError("scene is not a collimated-beam scene")
    return _solve(scene, config, b0, "max")


def solve_point_source_far(scene: FarFieldScene, config: SolveConfig | None = None, b0=None,
                           convention: str = "max") -> FarFieldSolution:
    """Weights of the far-field point-source phase ``max_i |X| - y_i . X + b_i``.

    ``convention="min"`` solves ``min_i |X| - y_i . X + b_i`` instead, the
    limit of the near-field problem with targets receding along ``y_i``.
    """
    if scene.kind != "point_source":
        raise ValueError("scene is not a point-source scene")
    return _solve(scene, config, b0, convention)
