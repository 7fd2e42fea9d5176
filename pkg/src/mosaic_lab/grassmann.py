"""Linear subspaces, rotations, and the rotation-defect metric.

Distance between k-subspaces is measured by the smallest Frobenius defect
||R - I||_F over rotations R carrying one subspace onto the other; for
principal angles t_1..t_k this equals sqrt(sum_i 8 sin^2(t_i / 2)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FRAME_TOL = 1e-12
ANGLE_TIE_TOL = 1e-9


class DegenerateRotationError(ValueError):
    """A principal angle of pi leaves no distinguished connecting rotation."""


@dataclass(frozen=True)
class Subspace:
    """k-dimensional linear subspace of R^d held as an orthonormal frame.

    ``frame`` is (d, k) with orthonormal columns.
    """

    frame: np.ndarray

    def __post_init__(self):
        frame = np.asarray(self.frame, dtype=float)
        if frame.ndim != 2:
            raise ValueError("frame must be a (d, k) array")
        d, k = frame.shape
        if not 1 <= k <= d:
            raise ValueError("need 1 <= k <= d")
        gram = frame.T @ frame
        if np.max(np.abs(gram - np.eye(k))) > 1e-10:
            raise ValueError("frame columns must be orthonormal")
        frame = frame.copy()
        frame.setflags(write=False)
        object.__setattr__(self, "frame", frame)

    @classmethod
    def from_spanning(cls, vectors: np.ndarray) -> "Subspace":
        """Orthonormalize a spanning set (rows or a (d, k) column stack)."""
        v = np.atleast_2d(np.asarray(vectors, dtype=float))
        if v.shape[0] < v.shape[1]:
            v = v.T
        q, r = np.linalg.qr(v)
        keep = np.abs(np.diag(r)) > 1e-12
        if not np.all(keep):
            raise ValueError("spanning set is rank deficient")
        return cls(q)

    @classmethod
    def coordinate(cls, dim: int, axes: tuple[int, ...]) -> "Subspace":
        """Span of the listed coordinate axes."""
        frame = np.zeros((dim, len(axes)))
        for j, a in enumerate(axes):
            frame[a, j] = 1.0
        return cls(frame)

    @classmethod
    def full(cls, dim: int) -> "Subspace":
        return cls(np.eye(dim))

    @classmethod
    def random(cls, dim: int, k: int, rng: np.random.Generator) -> "Subspace":
        g = rng.standard_normal((dim, k))
        q, _ = np.linalg.qr(g)
        return cls(q)

    @property
    def ambient_dim(self) -> int:
        return self.frame.shape[0]

    @property
    def dim(self) -> int:
        return self.frame.shape[1]

    def projector(self) -> np.ndarray:
        return self.frame @ self.frame.T

    def coords(self, x: np.ndarray) -> np.ndarray:
        """Frame coordinates of ambient points (last axis is ambient)."""
        return np.asarray(x, dtype=float) @ self.frame

    def embed(self, c: np.ndarray) -> np.ndarray:
        """Ambient coordinates of frame points."""
        return np.asarray(c, dtype=float) @ self.frame.T

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        resid = x - self.coords(x) @ self.frame.T
        return float(np.max(np.abs(resid), initial=0.0)) <= tol

    def orthocomplement(self) -> "Subspace":
        d, k = self.frame.shape
        q, _ = np.linalg.qr(np.hstack([self.frame,
                                       np.eye(d)]))
        return Subspace(q[:, k:d])

    def to_json(self) -> str:
        import json
        return json.dumps({"dim": self.ambient_dim,
                           "frame": [list(map(float, col))
                                     for col in self.frame.T]})

    @classmethod
    def from_json(cls, text: str) -> "Subspace":
        import json
        data = json.loads(text)
        return cls(np.array(data["frame"], dtype=float).T)


@dataclass(frozen=True)
class Rotation:
    """Proper orthogonal map of R^d."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        d = m.shape[0]
        if m.shape != (d, d):
            raise ValueError("rotation matrix must be square")
        if np.max(np.abs(m.T @ m - np.eye(d))) > 1e-9:
            raise ValueError("matrix is not orthogonal")
        if np.linalg.det(m) < 0:
            raise ValueError("matrix is orientation reversing")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, dim: int) -> "Rotation":
        return cls(np.eye(dim))

    @classmethod
    def from_axis_angle(cls, axis: np.ndarray, angle: float) -> "Rotation":
        """Rotation of R^3 about a unit axis."""
        a = np.asarray(axis, dtype=float)
        a = a / np.linalg.norm(a)
        kx = np.array([[0, -a[2], a[1]],
                       [a[2], 0, -a[0]],
                       [-a[1], a[0], 0]])
        m = np.eye(3) + np.sin(angle) * kx + (1 - np.cos(angle)) * (kx @ kx)
        return cls(m)

    @classmethod
    def in_plane(cls, a: np.ndarray, b: np.ndarray, angle: float) -> "Rotation":
        """Rotation by ``angle`` in the oriented plane span{a, b}."""
        a = np.asarray(a, dtype=float)
        a = a / np.linalg.norm(a)
        b = np.asarray(b, dtype=float)
        b = b - (b @ a) * a
        nb = np.linalg.norm(b)
        if nb < 1e-12:
            raise ValueError("plane spanned by parallel vectors")
        b = b / nb
        d = len(a)
        c, s = np.cos(angle), np.sin(angle)
        m = (np.eye(d)
             + (c - 1) * (np.outer(a, a) + np.outer(b, b))
             + s * (np.outer(b, a) - np.outer(a, b)))
        return cls(m)

    @classmethod
    def random(cls, dim: int, rng: np.random.Generator) -> "Rotation":
        from scipy.stats import special_ortho_group
        return cls(special_ortho_group.rvs(dim, random_state=rng))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.matrix.T

    def compose(self, other: "Rotation") -> "Rotation":
        """self after other."""
        return Rotation(self.matrix @ other.matrix)

    def inverse(self) -> "Rotation":
        return Rotation(self.matrix.T)

    def apply_subspace(self, s: Subspace) -> Subspace:
        return Subspace(self.matrix @ s.frame)


def rotation_defect(rho: Rotation) -> float:
    """Frobenius distance of a rotation from the identity."""
    d = rho.dim
    return float(np.linalg.norm(rho.matrix - np.eye(d)))


def _principal_pairs(a: Subspace, b: Subspace):
    """Principal angles plus matched orthonormal bases of both subspaces."""
    m = a.frame.T @ b.frame
    u, s, vt = np.linalg.svd(m)
    s = np.clip(s, -1.0, 1.0)
    angles = np.arccos(s)
    basis_a = a.frame @ u
    basis_b = b.frame @ vt.T
    return angles, basis_a, basis_b


def principal_angles(a: Subspace, b: Subspace) -> np.ndarray:
    return _principal_pairs(a, b)[0]


def subspace_distance(a: Subspace, b: Subspace) -> float:
    """Smallest rotation defect among rotations carrying ``a`` onto ``b``."""
    if a.ambient_dim != b.ambient_dim or a.dim != b.dim:
        raise ValueError("subspaces must share ambient dimension and rank")
    angles = principal_angles(a, b)
    return float(np.sqrt(np.sum(8.0 * np.sin(angles / 2.0) ** 2)))


def _direct_rotation_matrix(angles, basis_a, basis_b, dim: int) -> np.ndarray:
    m = np.eye(dim)
    for t, av, bv in zip(angles, basis_a.T, basis_b.T):
        if t < 1e-14:
            continue
        if 1.0 + np.cos(t) < 1e-12:
            raise DegenerateRotationError("principal angle at pi")
        c = (bv - np.cos(t) * av) / np.sin(t)
        m = m + ((np.cos(t) - 1) * (np.outer(av, av) + np.outer(c, c))
                 + np.sin(t) * (np.outer(c, av) - np.outer(av, c)))
    return m


def minimal_rotation(a: Subspace, b: Subspace) -> Rotation:
    """Defect-minimal rotation with R(a) = b (the direct rotation).

    Rotates by each principal angle inside its principal plane and fixes
    the joint orthogonal complement.
    """
    angles, basis_a, basis_b = _principal_pairs(a, b)
    return Rotation(_direct_rotation_matrix(angles, basis_a, basis_b,
                                            a.ambient_dim))


def minimal_rotations(a: Subspace, b: Subspace,
                      max_candidates: int = 16) -> list[Rotation]:
    """Defect-minimal rotations a -> b: the direct rotation plus sampled
    members of the minimizer family at non-generic configurations.

    Non-uniqueness arises from principal angles at pi/2 (either turning
    sense is minimal) and from repeated principal angles (the principal
    frame itself is free inside the tied block).
    """
    angles, basis_a, basis_b = _principal_pairs(a, b)
    dim = a.ambient_dim
    out = [Rotation(_direct_rotation_matrix(angles, basis_a, basis_b, dim))]

    halfpi = [i for i, t in enumerate(angles)
              if abs(t - np.pi / 2.0) < ANGLE_TIE_TOL]
    for i in halfpi:
        if len(out) >= max_candidates:
            break
        flipped = basis_b.copy()
        flipped[:, i] = -flipped[:, i]
        out.append(Rotation(_direct_rotation_matrix(angles, basis_a,
                                                    flipped, dim)))

    # repeated positive angles: remix the tied principal planes
    for i in range(len(angles) - 1):
        for j in range(i + 1, len(angles)):
            if (abs(angles[i] - angles[j]) < ANGLE_TIE_TOL
                    and angles[i] > ANGLE_TIE_TOL
                    and len(out) < max_candidates):
                for w in (np.pi / 6, np.pi / 3):
                    if len(out) >= max_candidates:
                        break
                    ca, sa = np.cos(w), np.sin(w)
                    ba = basis_a.copy()
                    bb = basis_b.copy()
                    ba[:, i] = ca * basis_a[:, i] + sa * basis_a[:, j]
                    ba[:, j] = -sa * basis_a[:, i] + ca * basis_a[:, j]
                    bb[:, i] = ca * basis_b[:, i] + sa * basis_b[:, j]
                    bb[:, j] = -sa * basis_b[:, i] + ca * basis_b[:, j]
                    out.append(Rotation(_direct_rotation_matrix(
                        angles, ba, bb, dim)))
    return out


def in_neighborhood(candidate: Subspace, center: Subspace,
                    theta: float) -> bool:
    """Whether the candidate lies within defect distance theta of center."""
    return subspace_distance(candidate, center) < theta
