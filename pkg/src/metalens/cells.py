"""Laguerre cells of the near-field cost.

Two independent constructions live here:

* a rasterized oracle that evaluates ``argmin_i c(X, Y_i) + b_i`` directly
  (:func:`classify`, :func:`grid_cells`), and
* the exact construction through the 3D power diagram of the lifted points
  ``q_i = (y_i, -b_i)``, ``omega_i = -2 b_i^2``: cell ``i`` is the vertical
  projection of ``Pow_i ∩ Sigma_i^+ ∩ (Omega x R)`` where ``Sigma_i^+`` is the
  sheet ``x3 = |X - Y_i| + b_i`` (:func:`power_cell`,
  :func:`laguerre_via_lifting`, :func:`boundary_arcs`).

Cell boundaries are returned as oriented arcs (cell on the left): pieces of
the bisector conics between two cells and pieces of the domain edges.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import brentq

from .errors import EmptyBisector, LiftConditionViolated, OutsideDomain
from .geometry import (
    ConicCurve,
    LiftedPoints,
    Scene,
    bisector_conic,
    lift_weighted_points,
    polygon_area,
    separation_threshold,
    sheet_height,
    squared_bisector_coefficients,
)
from .polyhedron import ConvexPolyhedron3
from .quadrature import integrate_interval

_BLOCK = 1 << 21  # cost-matrix entries evaluated per chunk


# ----------------------------------------------------------------------------
# rasterized oracle


def argmin_labels(points, scene: Scene, b) -> np.ndarray:
    """Smallest index minimizing ``c(X, Y_i) + b_i`` for each row of ``points``.

    No domain check; the common ``|X|`` term is dropped since it does not
    change the minimizer.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float)
    n = scene.n_targets
    out = np.empty(len(points), dtype=np.int64)
    step = max(1, _BLOCK // n)
    d2 = scene.delta ** 2
    for s in range(0, len(points), step):
        p = points[s:s + step]
        diff = p[:, None, :] - scene.targets[None, :, :]
        h = np.sqrt(np.einsum("mnk,mnk->mn", diff, diff) + d2) + b
        out[s:s + step] = np.argmin(h, axis=1)
    return out


def classify(x, scene: Scene, b):
    """Index of the Laguerre cell containing ``x`` (lowest index on ties).

    Raises
    ------
    OutsideDomain
        If any point lies outside the aperture polygon.
    """
    x = np.asarray(x, dtype=float)
    inside = scene.contains(x, tol=scene.tol_geom)
    if not np.all(inside):
        raise OutsideDomain(f"{np.size(inside) - np.count_nonzero(inside)} point(s) outside the domain")
    labels = argmin_labels(x, scene, b).reshape(x.shape[:-1])
    return int(labels) if labels.ndim == 0 else labels


@dataclass(frozen=True, eq=False)
class LabelGrid:
    """Cell labels sampled at pixel centres of the domain bounding box.

    ``labels[r, c]`` belongs to the pixel centred at
    ``origin + ((c + 0.5) * spacing[0], (r + 0.5) * spacing[1])``; it is -1
    when that centre lies outside the domain.
    """

    origin: tuple[float, float]
    spacing: tuple[float, float]
    labels: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    @property
    def centers(self) -> np.ndarray:
        ny, nx = self.labels.shape
        xs = self.origin[0] + (np.arange(nx) + 0.5) * self.spacing[0]
        ys = self.origin[1] + (np.arange(ny) + 0.5) * self.spacing[1]
        X, Y = np.meshgrid(xs, ys)
        return np.stack([X, Y], axis=-1)

    def lookup(self, points) -> np.ndarray:
        """Label of the pixel containing each point (-1 off the grid)."""
        p = np.asarray(points, dtype=float)
        ny, nx = self.labels.shape
        c = np.floor((p[..., 0] - self.origin[0]) / self.spacing[0]).astype(int)
        r = np.floor((p[..., 1] - self.origin[1]) / self.spacing[1]).astype(int)
        ok = (c >= 0) & (c < nx) & (r >= 0) & (r < ny)
        out = np.full(p.shape[:-1], -1, dtype=np.int64)
        out[ok] = self.labels[r[ok], c[ok]]
        return out

    def counts(self, n: int) -> np.ndarray:
        lab = self.labels[self.labels >= 0]
        return np.bincount(lab, minlength=n)


def _resolution(resolution) -> tuple[int, int]:
    if np.ndim(resolution) == 0:
        nx = ny = int(resolution)
    else:
        nx, ny = (int(r) for r in resolution)
    if nx < 2 or ny < 2:
        raise ValueError("grid resolution must be at least 2x2")
    return nx, ny


def grid_cells(scene: Scene, b, resolution=1024) -> LabelGrid:
    """Rasterize the Laguerre diagram on a ``resolution`` pixel grid."""
    nx, ny = _resolution(resolution)
    x0, y0, x1, y1 = scene.bbox
    hx, hy = (x1 - x0) / nx, (y1 - y0) / ny
    grid = LabelGrid((x0, y0), (hx, hy), np.full((ny, nx), -1, dtype=np.int64))
    centers = grid.centers.reshape(-1, 2)
    inside = scene.contains(centers)
    labels = grid.labels.reshape(-1)
    labels[inside] = argmin_labels(centers[inside], scene, b)
    return grid


# ----------------------------------------------------------------------------
# lifting to a 3D power diagram


def check_lift_condition(scene: Scene, b) -> bool:
    """True iff ``|b_i - b_j| < sqrt(4 (alpha - beta)^2 + |y_i - y_j|^2)`` for all pairs."""
    return not lift_violations(scene, b)


def lift_violations(scene: Scene, b) -> list[tuple[int, int]]:
    b = np.asarray(b, dtype=float)
    y = scene.targets
    d2 = ((y[:, None, :] - y[None, :, :]) ** 2).sum(-1)
    rhs = np.sqrt(4 * scene.delta ** 2 + d2)
    bad = np.abs(b[:, None] - b[None, :]) >= rhs
    i, j = np.nonzero(np.triu(bad, 1))
    return list(zip(i.tolist(), j.tolist()))


def lifting_bounds(scene: Scene, b) -> tuple[float, float]:
    """Height range enclosing every sheet ``Sigma_i^+`` over the domain."""
    b = np.asarray(b, dtype=float)
    d = scene.domain[:, None, :] - scene.targets[None, :, :]
    far = float(np.sqrt((d ** 2).sum(-1).max() + scene.delta ** 2))
    margin = 0.1 * (1.0 + far + float(np.ptp(b)))
    return float(b.min()) - margin, float(b.max()) + far + margin


def _power_halfspaces(i: int, lifted: LiftedPoints):
    q, w = lifted.q, lifted.omega
    normals = 2.0 * (q - q[i])
    offsets = (q ** 2).sum(1) + w - (q[i] @ q[i] + w[i])
    norm = np.linalg.norm(normals, axis=1)
    norm[i] = 1.0
    return normals / norm[:, None], offsets / norm


def power_cell(i: int, lifted: LiftedPoints, bbox, domain=None,
               tol: float | None = None) -> ConvexPolyhedron3:
    """The power cell ``Pow_i(Q)`` of the weighted cloud, clipped to a box.

    Parameters
    ----------
    bbox : ((x0, y0, z0), (x1, y1, z1))
        Axis-aligned clipping box.
    domain : array (K, 2), optional
        If given, the horizontal extent is the prism over this convex
        polygon instead of the box's rectangle.
    """
    lo, hi = (np.asarray(v, dtype=float) for v in bbox)
    if tol is None:
        tol = 1e-11 * max(1.0, float(np.abs(np.concatenate([lo, hi])).max()))
    if domain is None:
        poly = ConvexPolyhedron3.box(lo, hi, tol)
    else:
        poly = ConvexPolyhedron3.prism(domain, lo[2], hi[2], tol)
    normals, offsets = _power_halfspaces(i, lifted)
    active = np.array([j for j in range(len(lifted)) if j != i], dtype=int)
    while active.size and not poly.is_empty:
        depth = (poly.vertices @ normals[active].T - offsets[active]).max(axis=0)
        cutting = depth > tol
        if not cutting.any():
            break
        active, depth = active[cutting], depth[cutting]
        k = int(np.argmax(depth))
        j = int(active[k])
        poly = poly.clip(normals[j], offsets[j], ("pow", j))
        active = np.delete(active, k)
    return poly


# ----------------------------------------------------------------------------
# arcs


@dataclass(frozen=True, eq=False)
class InteriorArc:
    """Piece ``t in [t0, t1]`` of the bisector between ``cell`` and ``other``."""

    cell: int
    other: int
    conic: ConicCurve
    t0: float
    t1: float

    @property
    def start(self) -> np.ndarray:
        return self.conic.point(self.t0)

    @property
    def end(self) -> np.ndarray:
        return self.conic.point(self.t1)

    def integrate(self, fun) -> float:
        """``int fun(x(t), x'(t)) dt`` over the arc."""
        c = self.conic
        return integrate_interval(lambda t: fun(c.point(t), c.velocity(t)), self.t0, self.t1)

    def area_term(self) -> float:
        return 0.5 * self.integrate(lambda x, v: x[:, 0] * v[:, 1] - x[:, 1] * v[:, 0])

    def length(self) -> float:
        return self.integrate(lambda x, v: np.linalg.norm(v, axis=1))

    def polyline(self, tol: float) -> np.ndarray:
        """Samples with chord deviation at most ``tol``."""
        c = self.conic
        ts = np.linspace(self.t0, self.t1, 9)
        for _ in range(40):
            p = c.point(ts)
            tm = 0.5 * (ts[1:] + ts[:-1])
            pm = c.point(tm)
            chord = p[1:] - p[:-1]
            clen = np.linalg.norm(chord, axis=1)
            rel = pm - p[:-1]
            dev = np.where(
                clen > 0,
                np.abs(rel[:, 0] * chord[:, 1] - rel[:, 1] * chord[:, 0]) / np.maximum(clen, 1e-300),
                np.linalg.norm(rel, axis=1),
            )
            bad = dev > tol
            if not bad.any():
                break
            ts = np.sort(np.concatenate([ts, tm[bad]]))
        return c.point(ts)


@dataclass(frozen=True, eq=False)
class DomainArc:
    """Piece of the domain edge ``edge`` from ``p0`` to ``p1``."""

    cell: int
    edge: int
    p0: np.ndarray
    p1: np.ndarray

    @property
    def start(self) -> np.ndarray:
        return self.p0

    @property
    def end(self) -> np.ndarray:
        return self.p1

    def area_term(self) -> float:
        return 0.5 * float(self.p0[0] * self.p1[1] - self.p0[1] * self.p1[0])

    def length(self) -> float:
        return float(np.linalg.norm(self.p1 - self.p0))

    def polyline(self, tol: float) -> np.ndarray:
        return np.array([self.p0, self.p1])


def _real_roots(coeffs, rtol=1e-6) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=float)
    scale = np.abs(coeffs).max()
    if scale == 0:
        return np.empty(0)
    coeffs = coeffs / scale
    nz = np.nonzero(np.abs(coeffs) > 1e-14)[0]
    coeffs = coeffs[nz[0]:]
    if len(coeffs) < 2:
        return np.empty(0)
    r = np.roots(coeffs)
    keep = np.abs(r.imag) <= rtol * np.maximum(1.0, np.abs(r))
    return r.real[keep]


def _batch_real_roots(C, rtol=1e-6):
    """Real roots of each row polynomial of ``C``; returns ``(row, root)`` arrays."""
    C = np.asarray(C, dtype=float)
    C = C / np.maximum(np.abs(C).max(axis=1, keepdims=True), 1e-300)
    m, d1 = C.shape
    regular = np.abs(C[:, 0]) > 1e-8
    rows, roots = [], []
    if regular.any():
        R = C[regular]
        comp = np.zeros((len(R), d1 - 1, d1 - 1))
        comp[:, 0, :] = -R[:, 1:] / R[:, :1]
        comp[:, np.arange(1, d1 - 1), np.arange(d1 - 2)] = 1.0
        ev = np.linalg.eigvals(comp)
        ok = np.abs(ev.imag) <= rtol * np.maximum(1.0, np.abs(ev))
        idx = np.nonzero(regular)[0]
        r, c = np.nonzero(ok)
        rows.append(idx[r])
        roots.append(ev.real[r, c])
    for k in np.nonzero(~regular)[0]:
        rr = _real_roots(C[k])
        rows.append(np.full(len(rr), k))
        roots.append(rr)
    if not rows:
        return np.empty(0, dtype=int), np.empty(0)
    return np.concatenate(rows).astype(int), np.concatenate(roots)


class _Curve:
    """Common interface for the conic and segment parametrizations."""

    def __init__(self, point, velocity, lo, hi):
        self.point, self.velocity, self.lo, self.hi = point, velocity, lo, hi


def _conic_curve(c: ConicCurve, T: float) -> _Curve:
    return _Curve(c.point, c.velocity, -T, T)


def _segment_curve(p0, p1) -> _Curve:
    e = p1 - p0
    return _Curve(lambda s: p0 + np.asarray(s)[..., None] * e,
                  lambda s: np.broadcast_to(e, np.shape(s) + (2,)), 0.0, 1.0)


class _PairConstraints:
    """Residuals ``r_i(x) - r_k(x) - (b_k - b_i)`` for a set of rivals ``k``."""

    def __init__(self, i, ks, scene: Scene, b):
        self.yi = scene.targets[i]
        self.yk = scene.targets[ks]
        self.gap = b[ks] - b[i]
        self.d2 = scene.delta ** 2
        self.coef = np.array([squared_bisector_coefficients(self.yi, y, scene.delta, g)
                              for y, g in zip(self.yk, self.gap)]).reshape(-1, 6)

    def _radii(self, x):
        ri = np.sqrt(((x - self.yi) ** 2).sum(-1) + self.d2)
        dk = x[..., None, :] - self.yk
        rk = np.sqrt((dk ** 2).sum(-1) + self.d2)
        return ri, dk, rk

    def values(self, x):
        ri, _, rk = self._radii(x)
        return ri[..., None] - rk - self.gap

    def slopes(self, x, v):
        ri, dk, rk = self._radii(x)
        gi = ((x - self.yi) * v).sum(-1) / ri
        return gi[..., None] - (dk * v[..., None, :]).sum(-1) / rk


class _LineConstraints:
    """Residuals ``n . x - h`` of the domain edges."""

    def __init__(self, normals, offsets):
        self.n, self.h = normals, offsets

    def values(self, x):
        return x @ self.n.T - self.h

    def slopes(self, x, v):
        return v @ self.n.T


def _candidates_conic_quadric(c: ConicCurve, coefs) -> tuple[np.ndarray, np.ndarray]:
    m0, p, m = c.exponential_form()
    A, B, C, D, E, F = np.asarray(coefs).T
    def q(u, w):
        return A * u[0] * w[0] + 0.5 * B * (u[0] * w[1] + u[1] * w[0]) + C * u[1] * w[1]
    def lin(u):
        return D * u[0] + E * u[1]
    poly = np.column_stack([
        q(p, p),
        2 * q(m0, p) + lin(p),
        q(m0, m0) + 2 * q(p, m) + lin(m0) + F,
        2 * q(m0, m) + lin(m),
        q(m, m),
    ])
    rows, z = _batch_real_roots(poly)
    keep = z > 0
    return rows[keep], np.log(z[keep])


def _candidates_conic_line(c: ConicCurve, normals, offsets):
    m0, p, m = c.exponential_form()
    poly = np.column_stack([normals @ p, normals @ m0 - offsets, normals @ m])
    rows, z = _batch_real_roots(poly)
    keep = z > 0
    return rows[keep], np.log(z[keep])


def _candidates_segment_quadric(p0, p1, coefs):
    e = p1 - p0
    A, B, C, D, E, F = np.asarray(coefs).T
    def q(u, w):
        return A * u[0] * w[0] + 0.5 * B * (u[0] * w[1] + u[1] * w[0]) + C * u[1] * w[1]
    poly = np.column_stack([
        q(e, e),
        2 * q(p0, e) + D * e[0] + E * e[1],
        q(p0, p0) + D * p0[0] + E * p0[1] + F,
    ])
    return _batch_real_roots(poly)


def _roots_along(curve: _Curve, cons, rows, cand, ftol, n_samples=33) -> list[float]:
    """Zeros on ``[lo, hi]`` of every constraint of ``cons`` along the curve.

    Algebraic candidates ``(rows, cand)`` are polished by Newton's method on
    the unsquared residuals; a sign scan with bracketing catches any root the
    candidates missed.
    """
    lo, hi = curve.lo, curve.hi
    span = hi - lo
    sel = (cand >= lo - 0.05 * span) & (cand <= hi + 0.05 * span)
    rows, u = rows[sel], cand[sel]
    if len(u):
        pick = np.arange(len(u))
        with np.errstate(all="ignore"):
            for _ in range(30):
                x = curve.point(u)
                g = cons.values(x)[pick, rows]
                dg = cons.slopes(x, curve.velocity(u))[pick, rows]
                step = np.where(dg != 0, g / np.where(dg != 0, dg, 1.0), 0.0)
                u = np.clip(u - step, lo - span, hi + span)
                if np.all(np.abs(step) <= 1e-12 * np.maximum(1.0, np.abs(u))):
                    break
            res = np.abs(cons.values(curve.point(u))[pick, rows])
        ok = (u >= lo) & (u <= hi) & (res <= ftol)
        rows, u = rows[ok], u[ok]
    roots = list(u)

    us = np.linspace(lo, hi, n_samples)
    F = cons.values(curve.point(us))
    a_idx, k_idx = np.nonzero(F[:-1] * F[1:] < 0)
    for a, k in zip(a_idx, k_idx):
        if np.any((rows == k) & (u >= us[a]) & (u <= us[a + 1])):
            continue
        fk = lambda t, k=k: float(cons.values(curve.point(np.array([t])))[0, k])
        roots.append(brentq(fk, us[a], us[a + 1], xtol=1e-15, rtol=1e-15))
    return sorted(float(r) for r in roots)


def _kept_intervals(curve: _Curve, breaks, member, min_len) -> list[tuple[float, float]]:
    """Sub-intervals of the curve whose interior lies in the cell."""
    pts = np.array([curve.lo] + [u for u in breaks if curve.lo < u < curve.hi] + [curve.hi])
    a, b = pts[:-1], pts[1:]
    keep = b - a > min_len
    a, b = a[keep], b[keep]
    probes = a[:, None] + (b - a)[:, None] * np.array([0.25, 0.5, 0.75])
    inside = member(curve.point(probes.ravel())).reshape(-1, 3)
    out = []

    def split(a, b, depth):
        if b - a <= min_len:
            return
        probes = a + (b - a) * np.array([0.25, 0.5, 0.75])
        inside = member(curve.point(probes))
        if inside.all() or (inside.any() and depth >= 40):
            out.append((a, b))
        elif inside.any():
            m = 0.5 * (a + b)
            split(a, m, depth + 1)
            split(m, b, depth + 1)

    for lo, hi, ins in zip(a, b, inside):
        if ins.all():
            out.append((lo, hi))
        elif ins.any():
            # an interval with mixed probes hides an unresolved break point
            m = 0.5 * (lo + hi)
            split(lo, m, 1)
            split(m, hi, 1)
    merged = []
    for lo, hi in out:
        if merged and abs(lo - merged[-1][1]) <= min_len:
            merged[-1] = (merged[-1][0], hi)
        else:
            merged.append((lo, hi))
    return merged


def cell_arcs(i: int, scene: Scene, b, poly: ConvexPolyhedron3) -> list:
    """Boundary arcs of cell ``i`` from its clipped power cell ``poly``."""
    b = np.asarray(b, dtype=float)
    if poly.is_empty:
        return []
    labels = set(poly.labels)
    neighbors = sorted(lab[1] for lab in labels if lab[0] == "pow")
    scale = scene.diameter
    ftol = 1e-10 * (1.0 + scale)
    mtol = poly.tol * 10
    min_len = 1e-13

    def lift(x):
        return np.concatenate([x, sheet_height(x, i, scene, b)[..., None]], axis=-1)

    arcs = []
    dom = scene.domain
    K = len(dom)
    pairs = _PairConstraints(i, np.array(neighbors, dtype=int), scene, b)
    for e in range(K):
        if ("dom", e) not in labels:
            continue
        p0, p1 = dom[e], dom[(e + 1) % K]
        curve = _segment_curve(p0, p1)
        breaks = []
        if neighbors:
            rows, cand = _candidates_segment_quadric(p0, p1, pairs.coef)
            breaks = _roots_along(curve, pairs, rows, cand, ftol, n_samples=9)
        member = lambda x, e=e: poly.contains(lift(x), mtol, exclude=("dom", e))
        for s0, s1 in _kept_intervals(curve, breaks, member, min_len):
            arcs.append(DomainArc(i, e, curve.point(s0), curve.point(s1)))

    lines = _LineConstraints(*scene.halfplanes)
    for idx, j in enumerate(neighbors):
        try:
            conic = bisector_conic(i, j, scene, b)
        except EmptyBisector:
            continue
        radius = float(np.linalg.norm(dom - conic.center, axis=1).max())
        if conic.a > radius:
            continue
        curve = _conic_curve(conic, conic.parameter_bound(radius * 1.01))
        rows, cand = _candidates_conic_line(conic, lines.n, lines.h)
        breaks = _roots_along(curve, lines, rows, cand, 1e-12 * (1.0 + scale))
        others = [k for k in neighbors if k != j]
        if others:
            rivals = _PairConstraints(i, np.array(others, dtype=int), scene, b)
            rows, cand = _candidates_conic_quadric(conic, rivals.coef)
            breaks += _roots_along(curve, rivals, rows, cand, ftol)
        member = lambda x, j=j: poly.contains(lift(x), mtol, exclude=("pow", j))
        for t0, t1 in _kept_intervals(curve, sorted(breaks), member, min_len):
            arcs.append(InteriorArc(i, j, conic, t0, t1))
    return arcs


def _assemble_loops(arcs, tol: float, arc_tol: float) -> list[np.ndarray]:
    remaining = list(range(len(arcs)))
    loops = []
    while remaining:
        first = remaining.pop(0)
        chain = [first]
        while True:
            end = arcs[chain[-1]].end
            if np.linalg.norm(end - arcs[first].start) <= tol and len(chain) > 0:
                closed = True
            else:
                closed = False
            if not remaining:
                break
            dists = [np.linalg.norm(arcs[k].start - end) for k in remaining]
            k = int(np.argmin(dists))
            if closed and dists[k] > tol:
                break
            if dists[k] > tol:
                break
            if closed and np.linalg.norm(end - arcs[first].start) <= dists[k]:
                break
            chain.append(remaining.pop(k))
        pts = [arcs[k].polyline(arc_tol)[:-1] for k in chain]
        loops.append(np.concatenate(pts + [arcs[chain[-1]].end[None, :]]))
    return loops


@dataclass(eq=False)
class LiftedCell:
    """Cell ``i`` obtained from the power diagram of the lifted points.

    ``contains`` is the lifted membership test: ``x`` belongs to the cell iff
    ``(x, |X - Y_i| + b_i)`` lies in the clipped power cell.
    """

    index: int
    scene: Scene
    b: np.ndarray
    polyhedron: ConvexPolyhedron3
    arcs: list = field(default_factory=list)

    @property
    def neighbors(self) -> list[int]:
        return sorted(lab[1] for lab in self.polyhedron.labels if lab[0] == "pow")

    @property
    def is_empty(self) -> bool:
        return not self.arcs

    def contains(self, x, tol: float | None = None) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        z = sheet_height(x, self.index, self.scene, self.b)
        return self.polyhedron.contains(np.concatenate([x, z[..., None]], axis=-1), tol)

    @cached_property
    def area(self) -> float:
        return float(sum(a.area_term() for a in self.arcs))

    @cached_property
    def loops(self) -> list[np.ndarray]:
        return _assemble_loops(self.arcs, 1e-7 * self.scene.diameter, self.scene.arc_tol)

    def loops_closed(self, tol: float | None = None) -> bool:
        """Every arc end meets the start of some arc of this cell."""
        tol = 1e-7 * self.scene.diameter if tol is None else tol
        starts = np.array([a.start for a in self.arcs]).reshape(-1, 2)
        return all(np.linalg.norm(starts - a.end, axis=1).min() <= tol for a in self.arcs)


def _require_lift(scene: Scene, b):
    bad = lift_violations(scene, b)
    if bad:
        raise LiftConditionViolated(bad)


def _lifted_cells(scene: Scene, b) -> list[LiftedCell]:
    b = np.asarray(b, dtype=float)
    lifted = lift_weighted_points(scene, b)
    zmin, zmax = lifting_bounds(scene, b)
    x0, y0, x1, y1 = scene.bbox
    box = ((x0, y0, zmin), (x1, y1, zmax))
    out = []
    for i in range(scene.n_targets):
        poly = power_cell(i, lifted, box, domain=scene.domain)
        out.append(LiftedCell(i, scene, b, poly, cell_arcs(i, scene, b, poly)))
    return out


def laguerre_via_lifting(i: int, scene: Scene, b) -> LiftedCell:
    """Cell ``i`` as the projection of ``Pow_i ∩ Sigma_i^+ ∩ (Omega x R)``.

    Raises
    ------
    LiftConditionViolated
        If two weights differ by at least their separation threshold.
    """
    b = np.asarray(b, dtype=float)
    _require_lift(scene, b)
    lifted = lift_weighted_points(scene, b)
    zmin, zmax = lifting_bounds(scene, b)
    x0, y0, x1, y1 = scene.bbox
    poly = power_cell(i, lifted, ((x0, y0, zmin), (x1, y1, zmax)), domain=scene.domain)
    return LiftedCell(i, scene, b, poly, cell_arcs(i, scene, b, poly))


@dataclass(eq=False)
class LaguerreDiagram:
    """All cells of a weight vector with their oriented boundary arcs."""

    scene: Scene
    b: np.ndarray
    cells: list[LiftedCell]

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def areas(self) -> np.ndarray:
        return np.array([c.area for c in self.cells])

    def interior_arcs(self):
        for c in self.cells:
            for a in c.arcs:
                if isinstance(a, InteriorArc):
                    yield a

    def label(self, x, tol: float | None = None) -> np.ndarray:
        """Lowest cell index whose lifted membership test accepts each point (-1 if none)."""
        x = np.asarray(x, dtype=float).reshape(-1, 2)
        out = np.full(len(x), -1, dtype=np.int64)
        for c in reversed(self.cells):
            if c.polyhedron.is_empty:
                continue
            lo = c.polyhedron.vertices[:, :2].min(axis=0) - 1e-9
            hi = c.polyhedron.vertices[:, :2].max(axis=0) + 1e-9
            sel = np.nonzero(np.all((x >= lo) & (x <= hi), axis=1))[0]
            if len(sel):
                hit = c.contains(x[sel], tol)
                out[sel[hit]] = c.index
        return out

    def distance_to_boundary(self, x, cells=None) -> np.ndarray:
        """Distance from each point to the sampled boundary polylines of ``cells``."""
        x = np.asarray(x, dtype=float).reshape(-1, 2)
        cells = range(len(self.cells)) if cells is None else cells
        segs = []
        for i in cells:
            for loop in self.cells[i].loops:
                segs.append(np.stack([loop[:-1], loop[1:]], axis=1))
        if not segs:
            return np.full(len(x), np.inf)
        segs = np.concatenate(segs)
        out = np.full(len(x), np.inf)
        a, d = segs[:, 0], segs[:, 1] - segs[:, 0]
        dd = np.maximum((d ** 2).sum(1), 1e-300)
        for s in range(0, len(x), 256):
            p = x[s:s + 256, None, :] - a[None]
            t = np.clip((p * d[None]).sum(-1) / dd, 0, 1)
            r = p - t[..., None] * d[None]
            out[s:s + 256] = np.sqrt((r ** 2).sum(-1)).min(axis=1)
        return out


def boundary_arcs(scene: Scene, b) -> LaguerreDiagram:
    """Build every cell through the lifting and extract its boundary arcs.

    Raises
    ------
    LiftConditionViolated
        If the lifting does not apply to ``b``.
    """
    b = np.asarray(b, dtype=float)
    _require_lift(scene, b)
    return LaguerreDiagram(scene, b, _lifted_cells(scene, b))


def domain_area(scene: Scene) -> float:
    return polygon_area(scene.domain)


__all__ = [
    "DomainArc", "InteriorArc", "LabelGrid", "LaguerreDiagram", "LiftedCell",
    "argmin_labels", "boundary_arcs", "cell_arcs", "check_lift_condition",
    "classify", "grid_cells", "laguerre_via_lifting",
    "lift_violations", "lifting_bounds", "power_cell", "separation_threshold",
]
