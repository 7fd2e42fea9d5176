"""Faces of a plane tessellation restricted to a cubic window (d=3).

Each plane inherits a line arrangement from its intersections with the
other planes; the 2-faces of the tessellation inside the window are the
cells of those per-plane line arrangements clipped to the window trace.
Statistics use minus-sampling: only faces that touch no window boundary
enter, which is unbiased for translation-invariant functionals under
stationarity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grassmann import Subspace
from .polytope import Halfspace, Polytope, _box_polygon, _clip_polygon_tagged

LINE_TOL = 1e-12
COINCIDENCE_TOL = 1e-9


class DegeneratePositionError(RuntimeError):
    """Coincident planes or three planes through one line; perturb the
    input planes to restore general position."""


class NoInteriorFacesError(RuntimeError):
    """Minus-sampling found nothing; enlarge the window."""


@dataclass(frozen=True)
class FaceComplex:
    """All 2-faces of a plane arrangement inside the box [-W, W]^3."""

    window: float
    planes: tuple
    faces: tuple
    interior: np.ndarray    # bool per face: touches no window boundary
    plane_of: np.ndarray    # index into planes per face

    def interior_faces(self) -> list[Polytope]:
        return [f for f, keep in zip(self.faces, self.interior) if keep]


def _plane_basis(normal: np.ndarray):
    """Deterministic orthonormal basis of the plane through the origin."""
    axis = int(np.argmin(np.abs(normal)))
    p = np.zeros(3)
    p[axis] = 1.0
    p = p - normal[axis] * normal
    p /= np.linalg.norm(p)
    q = np.cross(normal, p)
    return p, q


def _window_trace(normal, offset, p, q, window, snap):
    """Polygon of the plane within the window box, in (p, q) coordinates
    centered at offset * normal.  None when the plane misses the box."""
    bound = np.sqrt(3.0) * window
    verts, tags = _box_polygon(bound)
    for axis in range(3):
        for sign in (1.0, -1.0):
            n2 = sign * np.array([p[axis], q[axis]])
            off = window - sign * offset * normal[axis]
            nrm = np.linalg.norm(n2)
            if nrm <= LINE_TOL:
                if off < 0:
                    return None
                continue
            res = _clip_polygon_tagged(verts, tags, n2 / nrm, off / nrm,
                                       0, snap)
            if res is None:
                return None
            verts, tags, _ = res
    return verts


def _half_cell(verts, n2, off, snap):
    dummy = np.zeros(len(verts), dtype=int)
    res = _clip_polygon_tagged(verts, dummy, n2, off, 0, snap)
    return None if res is None else res[0]


def _trace_lines(planes, i, p, q, snap):
    """Lines cut into plane i by the other planes, as unit (a, b, c) with
    a*alpha + b*beta = c.  Raises on coincident planes or concurrent
    triples (two coincident lines)."""
    u, t = planes[i].normal, planes[i].offset
    lines = []
    for j, other in enumerate(planes):
        if j == i:
            continue
        a = float(p @ other.normal)
        b = float(q @ other.normal)
        c = float(other.offset - t * (u @ other.normal))
        nrm = float(np.hypot(a, b))
        if nrm <= LINE_TOL:
            if abs(c) <= snap:
                raise DegeneratePositionError(
                    "planes %d and %d coincide; perturb the input" % (i, j))
            continue
        lines.append((a / nrm, b / nrm, c / nrm))
    arr = np.array(lines) if lines else np.zeros((0, 3))
    flip = (arr[:, 0] < -COINCIDENCE_TOL) | (
        (np.abs(arr[:, 0]) <= COINCIDENCE_TOL) & (arr[:, 1] < 0))
    canon = np.where(flip[:, None], -arr, arr)
    for s in range(len(canon)):
        same = np.all(np.abs(canon[s + 1:] - canon[s]) < COINCIDENCE_TOL,
                      axis=1)
        if np.any(same):
            raise DegeneratePositionError(
                "three planes share a line within tolerance; "
                "perturb the input")
    return arr


def build_face_complex(planes: list[Halfspace], window: float) -> FaceComplex:
    """Enumerate the 2-faces of the arrangement inside [-window, window]^3."""
    if window <= 0:
        raise ValueError("window half-width must be positive")
    planes = tuple(planes)
    if planes and len(planes[0].normal) != 3:
        raise ValueError("face enumeration implemented for dimension 3")
    snap = 1e-10 * max(1.0, window)
    edge = window - 1e-9 * max(1.0, window)
    faces: list[Polytope] = []
    interior: list[bool] = []
    plane_of: list[int] = []
    for i, plane in enumerate(planes):
        u, t = plane.normal, plane.offset
        p, q = _plane_basis(u)
        trace = _window_trace(u, t, p, q, window, snap)
        if trace is None:
            continue
        cells = [trace]
        for a, b, c in _trace_lines(planes, i, p, q, snap):
            n2 = np.array([a, b])
            nxt = []
            for cell in cells:
                dvals = cell @ n2 - c
                if dvals.max() <= snap or dvals.min() >= -snap:
                    nxt.append(cell)
                    continue
                for piece in (_half_cell(cell, n2, c, snap),
                              _half_cell(cell, -n2, -c, snap)):
                    if piece is not None:
                        nxt.append(piece)
            cells = nxt
        carrier = Subspace(np.column_stack([p, q]))
        base = t * u
        for cell in cells:
            poly = Polytope.polygon(carrier, cell,
                                    tags=np.zeros(len(cell), dtype=int))
            ambient = base + cell @ np.vstack([p, q])
            faces.append(poly)
            interior.append(bool(np.max(np.abs(ambient)) < edge))
            plane_of.append(i)
    return FaceComplex(window, planes, tuple(faces),
                       np.array(interior, dtype=bool),
                       np.array(plane_of, dtype=int))


def weighted_face_statistic(complex_: FaceComplex, f) -> float:
    """Area-weighted mean of a translation-invariant functional over the
    interior faces: the window-ratio form of the weighted typical face."""
    kept = complex_.interior_faces()
    if not kept:
        raise NoInteriorFacesError("no interior faces; enlarge the window")
    areas = np.array([face.volume() for face in kept])
    vals = np.array([f(face.translated(-face.centroid_frame()))
                     for face in kept])
    return float(vals @ areas / areas.sum())


def typical_face_statistic(complex_: FaceComplex, f) -> float:
    """Unweighted mean over interior faces (number-weighted ensemble)."""
    kept = complex_.interior_faces()
    if not kept:
        raise NoInteriorFacesError("no interior faces; enlarge the window")
    return float(np.mean([f(face.translated(-face.centroid_frame()))
                          for face in kept]))


def plane_euler_characteristic(complex_: FaceComplex, plane_index: int,
                               merge_tol: float = 1e-7) -> int:
    """V - E + F of the cell complex a single plane carries; 1 for a
    disc-like tiling of the window trace."""
    vert_ids: dict = {}
    edges = set()
    n_faces = 0
    for face, idx in zip(complex_.faces, complex_.plane_of):
        if idx != plane_index:
            continue
        n_faces += 1
        ids = []
        for v in face.verts:
            key = (round(v[0] / merge_tol), round(v[1] / merge_tol))
            ids.append(vert_ids.setdefault(key, len(vert_ids)))
        for a, b in zip(ids, ids[1:] + ids[:1]):
            if a != b:
                edges.add((min(a, b), max(a, b)))
    if n_faces == 0:
        raise ValueError("plane %d carries no faces" % plane_index)
    return len(vert_ids) - len(edges) + n_faces
