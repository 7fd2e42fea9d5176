"""Even atomic measures on the unit sphere.

Direction distributions of hyperplane processes are kept as finite lists of
weighted unit vectors.  Antipodal symmetry is the normal state of affairs
here; the only non-even measures passing through this module are surface
area measures read back from non-symmetric polytopes, which skip that check.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

MERGE_TOL = 1e-10    # angular gap below which atom directions are merged
UNIT_TOL = 1e-12
EVEN_TOL = 1e-12
DROP_TOL = 1e-12     # squared-norm threshold for atoms projecting to zero

_GRID_3D = 10_000    # coarse stage of the nondegeneracy search, d = 3
_GRID_2D = 1_000
_REFINE_STEPS = 20


class DegenerateSupportError(ValueError):
    """Support of a measure fails to span its ambient space."""


class UnevenMeasureError(ValueError):
    """Measure violates the antipodal mass symmetry."""


@dataclass(frozen=True)
class SphericalMeasure:
    """Finite atomic measure on S^(d-1), atoms as rows of ``dirs``.

    ``dirs`` is (n, d) with unit rows, ``masses`` is (n,) positive.  By
    default the constructor checks antipodal evenness; surface-measure
    readbacks construct with ``check_even=False``.
    """

    dirs: np.ndarray
    masses: np.ndarray
    check_even: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        dirs = np.atleast_2d(np.asarray(self.dirs, dtype=float))
        masses = np.asarray(self.masses, dtype=float).ravel()
        if dirs.shape[0] != masses.shape[0]:
            raise ValueError("dirs and masses disagree in length")
        if dirs.shape[0] == 0:
            raise ValueError("measure needs at least one atom")
        norms = np.linalg.norm(dirs, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise ValueError("atom directions must be unit vectors")
        # renormalize the last few digits so downstream dot products stay clean
        dirs = dirs / norms[:, None]
        if np.any(masses <= 0):
            raise ValueError("atom masses must be positive")
        dirs.setflags(write=False)
        masses.setflags(write=False)
        object.__setattr__(self, "dirs", dirs)
        object.__setattr__(self, "masses", masses)
        if self.check_even:
            self._validate_even()

    def _validate_even(self):
        d = self.dirs
        m = self.masses
        match = d @ (-d.T)  # cos of angle to each negated direction
        for i in range(len(m)):
            j = int(np.argmax(match[i]))
            if match[i, j] < 1.0 - 1e-12 or abs(m[i] - m[j]) > EVEN_TOL:
                raise UnevenMeasureError(
                    "no antipodal partner of equal mass for atom %d" % i
                )

    # -- basic queries -------------------------------------------------

    @property
    def ambient_dim(self) -> int:
        return self.dirs.shape[1]

    @property
    def natoms(self) -> int:
        return self.dirs.shape[0]

    def total_mass(self) -> float:
        return float(self.masses.sum())

    def is_probability(self, tol: float = 1e-12) -> bool:
        return abs(self.total_mass() - 1.0) <= tol

    def spans_ambient(self, tol: float = 1e-12) -> bool:
        s = np.linalg.svd(self.dirs * self.masses[:, None], compute_uv=False)
        return len(s) >= self.ambient_dim and s[self.ambient_dim - 1] > tol

    def abs_moment(self, u: np.ndarray) -> float:
        """Sum of mass-weighted |<u, atom>|; support number of twice the
        zonoid associated with the measure."""
        u = np.asarray(u, dtype=float)
        return float(np.abs(self.dirs @ u) @ self.masses)

    def rotated(self, matrix: np.ndarray) -> "SphericalMeasure":
        """Image measure under an orthogonal map."""
        return SphericalMeasure(self.dirs @ np.asarray(matrix).T, self.masses,
                                check_even=self.check_even)

    def scaled(self, factor: float) -> "SphericalMeasure":
        if factor <= 0:
            raise ValueError("mass scale factor must be positive")
        return SphericalMeasure(self.dirs, self.masses * factor,
                                check_even=self.check_even)

    def normalized(self) -> "SphericalMeasure":
        return self.scaled(1.0 / self.total_mass())

    # -- serialization -------------------------------------------------

    def to_json(self) -> str:
        return json.dumps({
            "dim": self.ambient_dim,
            "atoms": [{"dir": list(map(float, u)), "mass": float(m)}
                      for u, m in zip(self.dirs, self.masses)],
        })

    @classmethod
    def from_json(cls, text: str, check_even: bool = True) -> "SphericalMeasure":
        data = json.loads(text)
        dirs = np.array([a["dir"] for a in data["atoms"]], dtype=float)
        masses = np.array([a["mass"] for a in data["atoms"]], dtype=float)
        if dirs.shape[1] != data["dim"]:
            raise ValueError("dim field disagrees with atom directions")
        return cls(dirs, masses, check_even=check_even)


def merge_atoms(dirs: np.ndarray, masses: np.ndarray,
                tol: float = MERGE_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Pool masses of directions closer than ``tol`` (angular)."""
    out_dirs: list[np.ndarray] = []
    out_mass: list[float] = []
    cos_tol = np.cos(tol)
    for u, m in zip(dirs, masses):
        for i, v in enumerate(out_dirs):
            if float(u @ v) >= cos_tol:
                out_mass[i] += m
                break
        else:
            out_dirs.append(u)
            out_mass.append(m)
    return np.array(out_dirs), np.array(out_mass)


def make_even(atoms: list[tuple[np.ndarray, float]]) -> SphericalMeasure:
    """Symmetrize raw (direction, weight) pairs into an even measure.

    Each input pair contributes half its weight at +-u; coincident
    directions merge.  Directions need not be normalized on input.
    """
    dirs = []
    masses = []
    for u, w in atoms:
        u = np.asarray(u, dtype=float)
        n = np.linalg.norm(u)
        if n <= UNIT_TOL:
            raise ValueError("zero vector cannot be normalized to a direction")
        if w <= 0:
            raise ValueError("atom weights must be positive")
        u = u / n
        dirs.extend([u, -u])
        masses.extend([w / 2.0, w / 2.0])
    dirs, masses = merge_atoms(np.array(dirs), np.array(masses))
    return SphericalMeasure(dirs, masses)


# ---------------------------------------------------------------------------
# nondegeneracy: minimal zonoid support over the sphere
# ---------------------------------------------------------------------------

def _fibonacci_sphere(n: int) -> np.ndarray:
    """Deterministic quasi-uniform grid on S^2."""
    i = np.arange(n, dtype=float) + 0.5
    phi = np.arccos(1.0 - 2.0 * i / n)
    theta = np.pi * (1.0 + 5.0 ** 0.5) * i
    return np.column_stack([np.sin(phi) * np.cos(theta),
                            np.sin(phi) * np.sin(theta),
                            np.cos(phi)])


@lru_cache(maxsize=8)
def _sphere_grid(dim: int, n: int) -> np.ndarray:
    if dim == 2:
        a = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        return np.column_stack([np.cos(a), np.sin(a)])
    if dim == 3:
        return _fibonacci_sphere(n)
    rng = np.random.default_rng(20260815)  # fixed grid, function stays pure
    g = rng.standard_normal((n, dim))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _tangent_basis(u: np.ndarray) -> np.ndarray:
    d = len(u)
    basis = np.eye(d) - np.outer(u, u)
    q, _ = np.linalg.qr(basis)
    # keep the d-1 columns least aligned with u
    cols = np.argsort(np.abs(q.T @ u))[: d - 1]
    return q[:, cols]


def nondegeneracy(measure: SphericalMeasure) -> float:
    """Minimum over unit u of the mass-weighted sum of |<u, atom>|.

    Strictly positive exactly when the support spans the ambient space.
    Coarse grid (10^4 directions for d = 3, 10^3 for d = 2) followed by 20
    halving steps of tangent pattern search; accurate to ~1e-6.
    """
    if not measure.spans_ambient():
        raise DegenerateSupportError("support does not span the ambient space")
    d = measure.ambient_dim
    grid = _sphere_grid(d, _GRID_2D if d == 2 else _GRID_3D)
    vals = np.abs(grid @ measure.dirs.T) @ measure.masses
    order = np.argsort(vals)[:5]
    best_val = np.inf
    best_u = None
    spacing = 2.0 * np.pi / _GRID_2D if d == 2 else 4.0 / np.sqrt(_GRID_3D)
    for idx in order:
        u = grid[idx]
        val = vals[idx]
        step = spacing
        for _ in range(_REFINE_STEPS):
            tb = _tangent_basis(u)
            cand = u[None, :] + step * np.vstack([tb.T, -tb.T])
            cand /= np.linalg.norm(cand, axis=1, keepdims=True)
            cvals = np.abs(cand @ measure.dirs.T) @ measure.masses
            j = int(np.argmin(cvals))
            if cvals[j] < val:
                u, val = cand[j], cvals[j]
            else:
                step *= 0.5
        if val < best_val:
            best_val, best_u = float(val), u
    return best_val


# ---------------------------------------------------------------------------
# spherical projection to a subspace
# ---------------------------------------------------------------------------

def project_measure(measure: SphericalMeasure, subspace) -> SphericalMeasure:
    """Push the measure to the unit sphere of a subspace.

    Atom u maps to its normalized orthogonal projection with mass scaled by
    the projection norm; atoms orthogonal to the subspace are dropped.
    Directions stay in ambient coordinates (they lie in the subspace).
    """
    frame = subspace.frame
    coords = measure.dirs @ frame              # (n, k)
    norms = np.linalg.norm(coords, axis=1)
    keep = norms > 1e-12
    if not np.any(keep):
        raise DegenerateSupportError("every atom projects to zero")
    proj_dirs = (coords[keep] / norms[keep, None]) @ frame.T
    proj_mass = measure.masses[keep] * norms[keep]
    dirs, masses = merge_atoms(proj_dirs, proj_mass)
    return SphericalMeasure(dirs, masses, check_even=measure.check_even)


# ---------------------------------------------------------------------------
# Prokhorov distance between atomic measures
# ---------------------------------------------------------------------------

_SUBSET_LIMIT = 20


@lru_cache(maxsize=4)
def _subset_codes(n: int) -> np.ndarray:
    """Bitmask codes of all subsets of range(n)."""
    return np.arange(1 << n, dtype=np.uint64)


def _max_deficiency_subsets(mu_mass, nu_mass, within) -> float:
    """max over subsets S of mu-atoms of mu(S) - nu(S_eps).

    ``within`` is the (n_mu, n_nu) boolean membership of nu-atoms in the
    eps-ball around each mu-atom.  Subsets are enumerated as bitmasks.
    """
    n = len(mu_mass)
    codes = _subset_codes(n)
    bits = np.uint64(1) << np.arange(n, dtype=np.uint64)
    mu_of = np.zeros(1 << n)
    for i in range(n):
        mu_of += mu_mass[i] * ((codes & bits[i]) != 0)
    covered = np.zeros(1 << n)
    for j in range(len(nu_mass)):
        mask = np.bitwise_or.reduce(bits[within[:, j]], initial=np.uint64(0))
        if mask:
            covered += nu_mass[j] * ((codes & mask) != 0)
    return float(np.max(mu_of - covered))


def _max_deficiency_transport(mu_mass, nu_mass, within) -> float:
    """Same quantity via the transport LP: by max-flow min-cut duality the
    worst subset deficiency equals total mass minus the largest mass
    movable across admissible pairs."""
    from scipy.optimize import linprog
    from scipy.sparse import csr_matrix

    n, m = len(mu_mass), len(nu_mass)
    ii, jj = np.nonzero(within)
    if len(ii) == 0:
        flow = 0.0
    else:
        nvar = len(ii)
        rows = np.concatenate([ii, n + jj])
        cols = np.concatenate([np.arange(nvar), np.arange(nvar)])
        a_ub = csr_matrix((np.ones(2 * nvar), (rows, cols)),
                          shape=(n + m, nvar))
        b_ub = np.concatenate([mu_mass, nu_mass])
        res = linprog(-np.ones(nvar), A_ub=a_ub, b_ub=b_ub,
                      bounds=(0, None), method="highs")
        if not res.success:
            raise RuntimeError("transport LP failed: %s" % res.message)
        flow = -res.fun
    return float(max(mu_mass.sum() - flow, nu_mass.sum() - flow))


def _prokhorov_feasible(mu: SphericalMeasure, nu: SphericalMeasure,
                        eps: float) -> bool:
    """Check mu(A) <= nu(A_eps) + eps and the symmetric inequality."""
    diff = mu.dirs[:, None, :] - nu.dirs[None, :, :]
    dist = np.linalg.norm(diff, axis=2)
    within = dist <= eps
    if max(mu.natoms, nu.natoms) <= _SUBSET_LIMIT:
        d1 = _max_deficiency_subsets(mu.masses, nu.masses, within)
        d2 = _max_deficiency_subsets(nu.masses, mu.masses, within.T)
        worst = max(d1, d2)
    else:
        worst = _max_deficiency_transport(mu.masses, nu.masses, within)
    return worst <= eps + 1e-15


def _matching_upper_bound(mu: SphericalMeasure, nu: SphericalMeasure) -> float:
    """Cheap upper bound from a greedy atom matching; inf when unusable."""
    if mu.natoms != nu.natoms:
        return np.inf
    dist = np.linalg.norm(mu.dirs[:, None, :] - nu.dirs[None, :, :], axis=2)
    used = np.zeros(nu.natoms, dtype=bool)
    max_d = 0.0
    mass_gap = 0.0
    for i in range(mu.natoms):
        order = np.argsort(dist[i])
        j = next((int(j) for j in order if not used[j]), None)
        used[j] = True
        max_d = max(max_d, float(dist[i, j]))
        mass_gap += abs(float(mu.masses[i] - nu.masses[j]))
    return max(max_d * (1 + 1e-12) + 1e-15, mass_gap)


def prokhorov_distance(mu: SphericalMeasure, nu: SphericalMeasure,
                       tol: float = 1e-6) -> float:
    """Prokhorov distance between two atomic spherical measures.

    Bisection on eps with an exact feasibility check per step: subset
    enumeration up to 20 atoms, bipartite max-flow beyond.  The returned
    value is within ``tol`` of the true distance.
    """
    if mu.ambient_dim != nu.ambient_dim:
        raise ValueError("measures live on spheres of different dimension")
    hi = 2.0 + abs(mu.total_mass() - nu.total_mass()) + 1e-9
    hi = min(hi, _matching_upper_bound(mu, nu))
    lo = 0.0
    if hi <= tol:
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _prokhorov_feasible(mu, nu, mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
