"""Convex polyhedra in R^3 built by successive half-space clipping."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class Face:
    label: tuple
    normal: np.ndarray
    offset: float
    vertices: np.ndarray  # (k, 3), cyclic order

    @property
    def area(self) -> float:
        v = self.vertices
        if len(v) < 3:
            return 0.0
        c = np.cross(v[1:-1] - v[0], v[2:] - v[0])
        return 0.5 * float(np.abs(c @ self.normal).sum())


def _dedupe(points, tol: float) -> np.ndarray:
    """Drop points within ``tol`` (max-norm) of an earlier kept point."""
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    close = np.abs(points[:, None, :] - points[None, :, :]).max(axis=-1) <= tol
    keep = []
    for k in range(len(points)):
        if not close[k, keep].any():
            keep.append(k)
    return points[keep]


def _order_in_plane(points: np.ndarray, normal: np.ndarray) -> np.ndarray:
    c = points.mean(axis=0)
    u = np.cross(normal, [1.0, 0.0, 0.0] if abs(normal[0]) < 0.9 else [0.0, 1.0, 0.0])
    u /= np.linalg.norm(u)
    v = np.cross(normal, u)
    d = points - c
    return points[np.argsort(np.arctan2(d @ v, d @ u))]


class ConvexPolyhedron3:
    """A closed convex polyhedron stored as labelled planar faces.

    Every face carries the half-space ``normal . x <= offset`` that produced
    it and a label identifying the constraint (``("box", k)``,
    ``("dom", k)`` or ``("pow", j)``).
    """

    def __init__(self, faces, tol: float = 1e-12):
        self.faces = list(faces)
        self.tol = tol

    @classmethod
    def prism(cls, polygon, zmin: float, zmax: float, tol: float = 1e-12):
        """Right prism over a counterclockwise convex polygon."""
        poly = np.asarray(polygon, dtype=float)
        k = len(poly)
        bottom = np.column_stack([poly, np.full(k, zmin)])
        top = np.column_stack([poly, np.full(k, zmax)])
        faces = [
            Face(("box", 0), np.array([0.0, 0.0, -1.0]), -zmin, bottom[::-1].copy()),
            Face(("box", 1), np.array([0.0, 0.0, 1.0]), zmax, top.copy()),
        ]
        for e in range(k):
            p, q = poly[e], poly[(e + 1) % k]
            n = np.array([q[1] - p[1], p[0] - q[0]])
            n /= np.linalg.norm(n)
            verts = np.array([[*p, zmin], [*q, zmin], [*q, zmax], [*p, zmax]])
            faces.append(Face(("dom", e), np.array([n[0], n[1], 0.0]), float(n @ p), verts))
        return cls(faces, tol)

    @classmethod
    def box(cls, lo, hi, tol: float = 1e-12):
        """Axis-aligned box ``[lo, hi]``."""
        x0, y0, z0 = lo
        x1, y1, z1 = hi
        return cls.prism([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], z0, z1, tol)

    @property
    def is_empty(self) -> bool:
        return len(self.faces) < 4

    @property
    def vertices(self) -> np.ndarray:
        if not self.faces:
            return np.empty((0, 3))
        return _dedupe(np.concatenate([f.vertices for f in self.faces]), self.tol)

    @property
    def labels(self) -> list:
        return [f.label for f in self.faces]

    def face(self, label) -> Face | None:
        for f in self.faces:
            if f.label == label:
                return f
        return None

    def planes(self, exclude=None) -> tuple[np.ndarray, np.ndarray]:
        faces = [f for f in self.faces if f.label != exclude]
        if not faces:
            return np.empty((0, 3)), np.empty(0)
        return (np.array([f.normal for f in faces]),
                np.array([f.offset for f in faces]))

    def contains(self, points, tol: float | None = None, exclude=None) -> np.ndarray:
        """Mask of points satisfying every face inequality (``exclude`` skipped)."""
        points = np.asarray(points, dtype=float)
        if self.is_empty:
            return np.zeros(points.shape[:-1], dtype=bool)
        tol = self.tol if tol is None else tol
        n, h = self.planes(exclude)
        if len(h) == 0:
            return np.ones(points.shape[:-1], dtype=bool)
        return np.all(points @ n.T <= h + tol, axis=-1)

    def volume(self) -> float:
        return sum(f.area * f.offset for f in self.faces) / 3.0

    def clip(self, normal, offset: float, label) -> "ConvexPolyhedron3":
        """Intersection with the half-space ``normal . x <= offset``."""
        normal = np.asarray(normal, dtype=float)
        scale = np.linalg.norm(normal)
        normal, offset = normal / scale, offset / scale
        tol = self.tol
        new_faces, cap = [], []
        for f in self.faces:
            d = f.vertices @ normal - offset
            if np.all(d <= tol):
                new_faces.append(f)
                cap.extend(f.vertices[np.abs(d) <= tol])
                continue
            if np.all(d >= -tol):
                cap.extend(f.vertices[np.abs(d) <= tol])
                continue
            out = []
            k = len(d)
            for a in range(k):
                b = (a + 1) % k
                P, Q = f.vertices[a], f.vertices[b]
                if d[a] <= tol:
                    out.append(P)
                    if d[a] >= -tol:
                        cap.append(P)
                if (d[a] < -tol and d[b] > tol) or (d[a] > tol and d[b] < -tol):
                    I = P + (Q - P) * (d[a] / (d[a] - d[b]))
                    out.append(I)
                    cap.append(I)
            verts = _dedupe(out, tol)
            if len(verts) >= 3:
                nf = Face(f.label, f.normal, f.offset, verts)
                if nf.area > tol * tol:
                    new_faces.append(nf)
        cap = _dedupe(cap, tol)
        if len(cap) >= 3 and new_faces:
            cf = Face(label, normal, offset, _order_in_plane(cap, normal))
            if cf.area > tol * tol:
                new_faces.append(cf)
        if len(new_faces) < 4:
            new_faces = []
        return ConvexPolyhedron3(new_faces, tol)

    def is_closed(self) -> bool:
        """Every edge is shared by exactly two faces (up to vertex welding)."""
        if self.is_empty:
            return True
        verts = self.vertices
        edges = {}
        for f in self.faces:
            ids = [int(np.argmin(np.abs(verts - v).max(axis=1))) for v in f.vertices]
            for a, b in zip(ids, ids[1:] + ids[:1]):
                if a != b:
                    key = (min(a, b), max(a, b))
                    edges[key] = edges.get(key, 0) + 1
        return all(c == 2 for c in edges.values())

