"""Convex polytopes carried by low-dimensional subspaces.

Cells of hyperplane tessellations live in 2- or 3-dimensional carrier
subspaces of the ambient space.  Geometry is done in orthonormal frame
coordinates of the carrier; construction is incremental halfspace clipping
from a bounding box, with vertices within a small slack snapped onto each
cutting plane.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grassmann import Subspace
from .measures import SphericalMeasure

SNAP_TOL = 1e-10          # clipping slack: vertices this close sit on the plane
INCIDENCE_TOL = 1e-9
AREA_TOL = 1e-12


class EmptyPolytopeError(ValueError):
    """Halfspace intersection has empty interior."""


@dataclass(frozen=True)
class Halfspace:
    """Closed halfspace {x : <x, normal> <= offset} with unit normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        nn = np.linalg.norm(n)
        if abs(nn - 1.0) > 1e-9:
            raise ValueError("halfspace normal must be a unit vector")
        n = n / nn
        n.setflags(write=False)
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        return float(np.asarray(x) @ self.normal) <= self.offset + tol


# ---------------------------------------------------------------------------
# 2D clipping with edge provenance tags
# ---------------------------------------------------------------------------

def _clip_polygon_tagged(verts, tags, normal, offset, new_tag, snap):
    """Clip a ccw polygon by {<x,n> <= t}; tags track each edge's origin.

    Returns (verts, tags, changed) or None when the interior is lost.
    """
    d = verts @ normal - offset
    d[np.abs(d) <= snap] = 0.0
    if np.all(d <= 0.0):
        return verts, tags, False
    if np.all(d >= 0.0):
        return None
    m = len(verts)
    out_v: list[np.ndarray] = []
    out_t: list[int] = []

    def emit(p, g):
        if out_v and np.linalg.norm(p - out_v[-1]) <= snap:
            out_t[-1] = g       # coincident point: keep last outgoing tag
            return
        out_v.append(p)
        out_t.append(g)

    for i in range(m):
        j = (i + 1) % m
        di, dj = d[i], d[j]
        vi, vj = verts[i], verts[j]
        gi = tags[i]
        if di <= 0.0:
            emit(vi, new_tag if (di == 0.0 and dj > 0.0) else gi)
        if di < 0.0 < dj or dj < 0.0 < di:
            s = di / (di - dj)
            emit(vi + s * (vj - vi), new_tag if di < 0.0 else gi)
    # wrap-around duplicate: the zero-length closing segment's tag is void
    if len(out_v) > 1 and np.linalg.norm(out_v[0] - out_v[-1]) <= snap:
        out_v.pop()
        out_t.pop()
    if len(out_v) < 3:
        return None
    v = np.array(out_v)
    t = np.array(out_t, dtype=int)
    if _polygon_area(v) <= AREA_TOL:
        return None
    return v, t, True


def _polygon_area(verts) -> float:
    x, y = verts[:, 0], verts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _polygon_centroid(verts) -> np.ndarray:
    x, y = verts[:, 0], verts[:, 1]
    cr = x * np.roll(y, -1) - np.roll(x, -1) * y
    a = 0.5 * np.sum(cr)
    cx = np.sum((x + np.roll(x, -1)) * cr) / (6.0 * a)
    cy = np.sum((y + np.roll(y, -1)) * cr) / (6.0 * a)
    return np.array([cx, cy])


# ---------------------------------------------------------------------------
# 3D clipping
# ---------------------------------------------------------------------------

def _clip_face_3d(verts, d, snap):
    """Clip one face loop by the halfspace with precomputed signed dists.

    Returns (kept loop or None, points on the cutting plane).
    """
    on_plane = [verts[i] for i in range(len(verts)) if d[i] == 0.0]
    if np.all(d <= 0.0):
        return verts, on_plane
    if np.all(d >= 0.0):
        return None, on_plane
    m = len(verts)
    out = []
    cap_pts = list(on_plane)
    for i in range(m):
        j = (i + 1) % m
        di, dj = d[i], d[j]
        if di <= 0.0:
            out.append(verts[i])
        if di < 0.0 < dj or dj < 0.0 < di:
            s = di / (di - dj)
            p = verts[i] + s * (verts[j] - verts[i])
            out.append(p)
            cap_pts.append(p)
    cleaned = []
    for p in out:
        if not cleaned or np.linalg.norm(p - cleaned[-1]) > snap:
            cleaned.append(p)
    if len(cleaned) > 1 and np.linalg.norm(cleaned[0] - cleaned[-1]) <= snap:
        cleaned.pop()
    if len(cleaned) < 3:
        return None, cap_pts
    return np.array(cleaned), cap_pts


def _newell(verts) -> np.ndarray:
    """Cross-product sum of a loop: 2 * area * unit normal."""
    rolled = np.roll(verts, -1, axis=0)
    return np.sum(np.cross(verts, rolled), axis=0)


def _face_area(verts, normal) -> float:
    return 0.5 * float(_newell(verts) @ normal)


def _order_loop(points, normal):
    """Angle-sort coplanar points into a convex loop oriented along normal."""
    pts = np.array(points)
    c = pts.mean(axis=0)
    spread = np.linalg.norm(pts - c, axis=1)
    ref = pts[int(np.argmax(spread))] - c
    ref = ref / np.linalg.norm(ref)
    q = np.cross(normal, ref)
    ang = np.arctan2((pts - c) @ q, (pts - c) @ ref)
    return pts[np.argsort(ang)]


def _dedup_points(points, tol):
    out = []
    for p in points:
        if not any(np.linalg.norm(p - q) <= tol for q in out):
            out.append(p)
    return out


def _clip_polyhedron(faces, normals, offsets, tags, normal, offset,
                     new_tag, snap):
    """Clip a face-represented polyhedron by {<x,n> <= t}.

    Returns (faces, normals, offsets, tags, changed) or None when empty.
    """
    dists = [f @ normal - offset for f in faces]
    for d in dists:
        d[np.abs(d) <= snap] = 0.0
    if all(np.all(d <= 0.0) for d in dists):
        return faces, normals, offsets, tags, False
    if all(np.all(d >= 0.0) for d in dists):
        return None
    new_faces, new_n, new_o, new_t = [], [], [], []
    cap_pts: list[np.ndarray] = []
    for f, d, n, o, g in zip(faces, dists, normals, offsets, tags):
        kept, on_cut = _clip_face_3d(f, d, snap)
        cap_pts.extend(on_cut)
        if kept is not None:
            new_faces.append(kept)
            new_n.append(n)
            new_o.append(o)
            new_t.append(g)
    if not new_faces:
        return None
    cap = _dedup_points(cap_pts, 10 * snap)
    if len(cap) >= 3:
        loop = _order_loop(cap, normal)
        if _face_area(loop, normal) < 0:
            loop = loop[::-1]
        if _face_area(loop, normal) > AREA_TOL:
            new_faces.append(loop)
            new_n.append(normal)
            new_o.append(offset)
            new_t.append(new_tag)
    return new_faces, new_n, new_o, new_t, True


# ---------------------------------------------------------------------------
# the polytope class
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Polytope:
    """Convex polytope in an orthonormal frame of its carrier subspace.

    For k = 2 ``verts`` is a ccw loop; for k = 3 the face loops are kept in
    ``faces`` (outward oriented) and ``verts`` is the deduplicated vertex
    set.  ``tags`` give each facet's provenance: the index of the halfspace
    that produced it, or a negative id for surviving bounding-box facets.
    """

    carrier: Subspace
    verts: np.ndarray
    facet_normals: np.ndarray
    facet_offsets: np.ndarray
    facet_measures: np.ndarray
    tags: np.ndarray
    faces: tuple = field(default=(), repr=False)
    clipped: bool = False

    # -- constructors ----------------------------------------------------

    @classmethod
    def polygon(cls, carrier: Subspace, verts: np.ndarray,
                tags=None, clipped: bool = False) -> "Polytope":
        verts = np.asarray(verts, dtype=float)
        if _polygon_area(verts) < 0:
            verts = verts[::-1]
            if tags is not None:
                # edge j of the reversed loop is edge n-2-j of the original
                tags = np.roll(np.asarray(tags)[::-1], -1)
        if tags is None:
            tags = np.arange(len(verts))
        edges = np.roll(verts, -1, axis=0) - verts
        lengths = np.linalg.norm(edges, axis=1)
        keep = lengths > SNAP_TOL
        verts, tags, edges, lengths = (verts[keep], np.asarray(tags)[keep],
                                       edges[keep], lengths[keep])
        if len(verts) < 3 or _polygon_area(verts) <= AREA_TOL:
            raise EmptyPolytopeError("polygon has empty interior")
        edges = np.roll(verts, -1, axis=0) - verts
        lengths = np.linalg.norm(edges, axis=1)
        normals = np.column_stack([edges[:, 1], -edges[:, 0]]) / lengths[:, None]
        offsets = np.sum(verts * normals, axis=1)
        return cls(carrier, verts, normals, offsets, lengths,
                   np.asarray(tags, dtype=int), clipped=clipped)

    @classmethod
    def polyhedron(cls, carrier: Subspace, faces, normals, offsets, tags,
                   clipped: bool = False) -> "Polytope":
        keep = [i for i, f in enumerate(faces)
                if len(f) >= 3 and _face_area(f, normals[i]) > AREA_TOL]
        if len(keep) < 4:
            raise EmptyPolytopeError("polyhedron has empty interior")
        faces = [np.asarray(faces[i], dtype=float) for i in keep]
        normals = np.array([normals[i] for i in keep], dtype=float)
        offsets = np.array([offsets[i] for i in keep], dtype=float)
        tags = np.array([tags[i] for i in keep], dtype=int)
        measures = np.array([_face_area(f, n) for f, n in zip(faces, normals)])
        verts = np.array(_dedup_points(np.vstack(faces), INCIDENCE_TOL))
        return cls(carrier, verts, normals, offsets, measures, tags,
                   faces=tuple(faces), clipped=clipped)

    def __post_init__(self):
        for name in ("verts", "facet_normals", "facet_offsets",
                     "facet_measures", "tags"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    # -- basic queries ----------------------------------------------------

    @property
    def dim(self) -> int:
        return self.verts.shape[1]

    @property
    def nvertices(self) -> int:
        return self.verts.shape[0]

    def vertices_ambient(self) -> np.ndarray:
        return self.carrier.embed(self.verts)

    def direction_space(self) -> Subspace:
        return self.carrier

    def volume(self) -> float:
        if self.dim == 2:
            return _polygon_area(self.verts)
        return float(np.sum(self.facet_offsets * self.facet_measures)) / 3.0

    def centroid_frame(self) -> np.ndarray:
        if self.dim == 2:
            return _polygon_centroid(self.verts)
        total = 0.0
        acc = np.zeros(3)
        for f in self.faces:
            v0 = f[0]
            for i in range(1, len(f) - 1):
                w = float(np.linalg.det(np.array([v0, f[i], f[i + 1]]))) / 6.0
                total += w
                acc += w * (v0 + f[i] + f[i + 1]) / 4.0
        return acc / total

    def centroid(self) -> np.ndarray:
        return self.carrier.embed(self.centroid_frame())

    def support(self, u: np.ndarray) -> float:
        """Support function at an ambient direction."""
        uk = self.carrier.coords(np.asarray(u, dtype=float))
        return float(np.max(self.verts @ uk))

    def support_frame(self, u: np.ndarray) -> float:
        return float(np.max(self.verts @ np.asarray(u, dtype=float)))

    def contains_point(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        if not self.carrier.contains(x, tol):
            return False
        c = self.carrier.coords(x)
        return bool(np.all(self.facet_normals @ c
                           <= self.facet_offsets + tol))

    def surface_area_measure(self) -> SphericalMeasure:
        """Atoms at outward facet normals weighted by facet content."""
        ambient = self.carrier.embed(self.facet_normals)
        return SphericalMeasure(ambient, self.facet_measures.copy(),
                                check_even=False)

    def is_origin_symmetric(self, tol: float = 1e-9) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.verts))))
        d = self.verts[:, None, :] + self.verts[None, :, :]
        return bool(np.all(np.min(np.linalg.norm(d, axis=2), axis=1)
                           <= tol * scale))

    def inradius_circumradius(self) -> tuple[float, float, np.ndarray]:
        """(inradius, circumradius, center); center is o when symmetric."""
        if self.is_origin_symmetric():
            center = np.zeros(self.dim)
            r = float(np.min(self.facet_offsets))
            big = float(np.max(np.linalg.norm(self.verts, axis=1)))
            return r, big, self.carrier.embed(center)
        from scipy.optimize import linprog
        m = len(self.facet_offsets)
        a_ub = np.hstack([self.facet_normals, np.ones((m, 1))])
        c = np.zeros(self.dim + 1)
        c[-1] = -1.0
        res = linprog(c, A_ub=a_ub, b_ub=self.facet_offsets,
                      bounds=[(None, None)] * self.dim + [(0, None)],
                      method="highs")
        if not res.success:
            raise RuntimeError("inradius LP failed: %s" % res.message)
        center = res.x[:-1]
        r = float(res.x[-1])
        big = float(np.max(np.linalg.norm(self.verts - center, axis=1)))
        return r, big, self.carrier.embed(center)

    def max_vertex_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.verts, axis=1)))

    def diameter(self) -> float:
        d = self.verts[:, None, :] - self.verts[None, :, :]
        return float(np.max(np.linalg.norm(d, axis=2)))

    # -- transforms (all return new polytopes) -----------------------------

    def translated(self, z_frame: np.ndarray) -> "Polytope":
        z = np.asarray(z_frame, dtype=float)
        offsets = self.facet_offsets + self.facet_normals @ z
        faces = tuple(f + z for f in self.faces)
        return Polytope(self.carrier, self.verts + z, self.facet_normals,
                        offsets, self.facet_measures, self.tags,
                        faces=faces, clipped=self.clipped)

    def centered(self) -> "Polytope":
        return self.translated(-self.centroid_frame())

    def scaled(self, factor: float) -> "Polytope":
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        faces = tuple(f * factor for f in self.faces)
        return Polytope(self.carrier, self.verts * factor,
                        self.facet_normals, self.facet_offsets * factor,
                        self.facet_measures * factor ** (self.dim - 1),
                        self.tags, faces=faces, clipped=self.clipped)

    def negated(self) -> "Polytope":
        if self.dim == 2:
            return Polytope.polygon(self.carrier, -self.verts[::-1],
                                    clipped=self.clipped)
        faces = tuple(-f[::-1] for f in self.faces)
        return Polytope.polyhedron(self.carrier, list(faces),
                                   -self.facet_normals, self.facet_offsets,
                                   self.tags, clipped=self.clipped)

    def rotated(self, rho) -> "Polytope":
        """Apply an ambient rotation; frame data is carried unchanged."""
        return Polytope(Subspace(rho.matrix @ self.carrier.frame),
                        self.verts, self.facet_normals, self.facet_offsets,
                        self.facet_measures, self.tags, faces=self.faces,
                        clipped=self.clipped)

    def in_frame(self, other: Subspace) -> "Polytope":
        """Re-express in another frame of the same subspace."""
        q = other.frame.T @ self.carrier.frame
        if np.max(np.abs(q.T @ q - np.eye(self.dim))) > 1e-8:
            raise ValueError("frames do not span the same subspace")
        faces = tuple(f @ q.T for f in self.faces)
        return Polytope(other, self.verts @ q.T, self.facet_normals @ q.T,
                        self.facet_offsets, self.facet_measures, self.tags,
                        faces=faces, clipped=self.clipped)

    # -- serialization ------------------------------------------------------

    def to_json(self) -> str:
        import json
        return json.dumps({
            "carrier": {"dim": self.carrier.ambient_dim,
                        "frame": [list(map(float, c))
                                  for c in self.carrier.frame.T]},
            "vertices": [list(map(float, v)) for v in self.vertices_ambient()],
            "facets": [{"normal": list(map(float, n)),
                        "offset": float(t), "measure": float(m)}
                       for n, t, m in zip(
                           self.carrier.embed(self.facet_normals),
                           self.facet_offsets, self.facet_measures)],
        })

    @classmethod
    def from_json(cls, text: str) -> "Polytope":
        import json
        data = json.loads(text)
        carrier = Subspace(np.array(data["carrier"]["frame"], dtype=float).T)
        verts = carrier.coords(np.array(data["vertices"], dtype=float))
        normals = carrier.coords(np.array([f["normal"]
                                           for f in data["facets"]]))
        offsets = np.array([f["offset"] for f in data["facets"]])
        if carrier.dim == 2:
            c = verts.mean(axis=0)
            ang = np.arctan2(verts[:, 1] - c[1], verts[:, 0] - c[0])
            return cls.polygon(carrier, verts[np.argsort(ang)])
        faces, f_n, f_o, f_t = [], [], [], []
        for i, (n, t) in enumerate(zip(normals, offsets)):
            pts = verts[np.abs(verts @ n - t) <= INCIDENCE_TOL]
            if len(pts) >= 3:
                loop = _order_loop(pts, n)
                if _face_area(loop, n) < 0:
                    loop = loop[::-1]
                faces.append(loop)
                f_n.append(n)
                f_o.append(t)
                f_t.append(i)
        return cls.polyhedron(carrier, faces, np.array(f_n),
                              np.array(f_o), np.array(f_t))


# ---------------------------------------------------------------------------
# halfspace intersection
# ---------------------------------------------------------------------------

def _box_polygon(bound: float):
    verts = np.array([[bound, bound], [-bound, bound],
                      [-bound, -bound], [bound, -bound]], dtype=float)
    tags = np.array([-1, -2, -3, -4])
    return verts, tags


def _box_polyhedron(bound: float):
    b = bound
    quads = {
        -1: [( b, -b, -b), ( b,  b, -b), ( b,  b,  b), ( b, -b,  b)],
        -2: [(-b, -b, -b), (-b, -b,  b), (-b,  b,  b), (-b,  b, -b)],
        -3: [(-b,  b, -b), (-b,  b,  b), ( b,  b,  b), ( b,  b, -b)],
        -4: [(-b, -b, -b), ( b, -b, -b), ( b, -b,  b), (-b, -b,  b)],
        -5: [(-b, -b,  b), ( b, -b,  b), ( b,  b,  b), (-b,  b,  b)],
        -6: [(-b, -b, -b), (-b,  b, -b), ( b,  b, -b), ( b, -b, -b)],
    }
    axes = {-1: np.array([1., 0, 0]), -2: np.array([-1., 0, 0]),
            -3: np.array([0., 1, 0]), -4: np.array([0., -1, 0]),
            -5: np.array([0., 0, 1]), -6: np.array([0., 0, -1])}
    faces, normals, offsets, tags = [], [], [], []
    for t, quad in quads.items():
        loop = np.array(quad, dtype=float)
        n = axes[t]
        if _face_area(loop, n) < 0:
            loop = loop[::-1]
        faces.append(loop)
        normals.append(n)
        offsets.append(b)
        tags.append(t)
    return faces, normals, offsets, tags


def intersect_halfspaces(carrier: Subspace, halfspaces, bound: float,
                         frame_halfspaces=None) -> Polytope:
    """Intersect halfspaces given in ambient coordinates of the carrier.

    Clipping starts from the box [-bound, bound]^k in frame coordinates;
    the result's ``clipped`` flag reports whether any box facet survived.
    ``frame_halfspaces`` bypasses the ambient conversion with (normals,
    offsets) already in frame coordinates.
    """
    k = carrier.dim
    if k not in (2, 3):
        raise ValueError("carrier dimension must be 2 or 3")
    if frame_halfspaces is not None:
        normals, offsets = frame_halfspaces
        normals = np.atleast_2d(np.asarray(normals, dtype=float))
        offsets = np.atleast_1d(np.asarray(offsets, dtype=float))
    else:
        normals_list, offsets_list = [], []
        for h in halfspaces:
            nk = carrier.coords(h.normal)
            if abs(np.linalg.norm(nk) - 1.0) > 1e-9:
                raise ValueError("halfspace normal does not lie in the carrier")
            normals_list.append(nk / np.linalg.norm(nk))
            offsets_list.append(h.offset)
        normals = (np.array(normals_list) if normals_list
                   else np.zeros((0, k)))
        offsets = np.array(offsets_list)

    scale = max(1.0, bound, float(np.max(np.abs(offsets), initial=0.0)))
    snap = SNAP_TOL * scale

    if k == 2:
        verts, tags = _box_polygon(bound)
        for i, (n, t) in enumerate(zip(normals, offsets)):
            res = _clip_polygon_tagged(verts, tags, n, t, i, snap)
            if res is None:
                raise EmptyPolytopeError("intersection has empty interior")
            verts, tags, _ = res
        poly = Polytope.polygon(carrier, verts, tags)
        return Polytope(poly.carrier, poly.verts, poly.facet_normals,
                        poly.facet_offsets, poly.facet_measures, poly.tags,
                        clipped=bool(np.any(poly.tags < 0)))

    faces, f_n, f_o, f_t = _box_polyhedron(bound)
    for i, (n, t) in enumerate(zip(normals, offsets)):
        res = _clip_polyhedron(faces, f_n, f_o, f_t, n, t, i, snap)
        if res is None:
            raise EmptyPolytopeError("intersection has empty interior")
        faces, f_n, f_o, f_t, _ = res
    poly = Polytope.polyhedron(carrier, faces, np.array(f_n),
                               np.array(f_o), np.array(f_t))
    return Polytope(poly.carrier, poly.verts, poly.facet_normals,
                    poly.facet_offsets, poly.facet_measures, poly.tags,
                    faces=poly.faces, clipped=bool(np.any(poly.tags < 0)))
