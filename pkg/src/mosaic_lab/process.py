"""Stationary Poisson hyperplane processes and their cells.

A process is (intensity, even direction distribution).  Hyperplanes are
parameterized as {x : <x, u> = t} with t > 0, so a sample within distance r
of the origin has Poisson(2 * gamma * r) many planes, directions drawn by
atom mass and offsets uniform on (0, r].
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .grassmann import Subspace, subspace_distance
from .measures import SphericalMeasure, project_measure
from .polytope import Halfspace, Polytope, intersect_halfspaces

MAX_DOUBLINGS = 40


class ZeroCellError(RuntimeError):
    """Adaptive cell construction failed to terminate."""


@dataclass(frozen=True)
class ProcessSpec:
    """Intensity and direction distribution of a hyperplane process."""

    gamma: float
    phi: SphericalMeasure

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("intensity must be positive")
        if not self.phi.is_probability():
            raise ValueError("direction distribution must have total mass 1")
        if not self.phi.spans_ambient():
            raise ValueError("direction distribution must span the space")

    @property
    def dim(self) -> int:
        return self.phi.ambient_dim

    def to_json(self) -> str:
        return json.dumps({"gamma": self.gamma,
                           "phi": json.loads(self.phi.to_json())})

    @classmethod
    def from_json(cls, text: str) -> "ProcessSpec":
        data = json.loads(text)
        return cls(float(data["gamma"]),
                   SphericalMeasure.from_json(json.dumps(data["phi"])))


@dataclass(frozen=True)
class SectionSpec:
    """Parameters of the trace process on a subspace."""

    carrier: Subspace
    gamma_section: float
    phi_section: SphericalMeasure   # probability measure, atoms inside carrier


def section_params(spec: ProcessSpec, subspace: Subspace) -> SectionSpec:
    """Intensity and direction law of the process sliced by a subspace.

    The projected (unnormalized) measure has total mass gamma_section /
    gamma, between the nondegeneracy value of phi and 1.
    """
    projected = project_measure(spec.phi, subspace)
    ratio = projected.total_mass()
    return SectionSpec(subspace, spec.gamma * ratio, projected.normalized())


def sample_hyperplanes(spec: ProcessSpec, radius: float,
                       rng: np.random.Generator) -> list[Halfspace]:
    """All hyperplanes of one realization within ``radius`` of the origin,
    as halfspaces containing the origin."""
    normals, offsets = _sample_batch(spec.gamma, spec.phi.dirs,
                                     spec.phi.masses, 0.0, radius, rng)
    return [Halfspace(n, t) for n, t in zip(normals, offsets)]


def _sample_batch(gamma, dirs, masses, t_lo, t_hi, rng):
    """Poisson batch of (direction, offset) pairs with offsets in (t_lo, t_hi]."""
    count = rng.poisson(2.0 * gamma * (t_hi - t_lo))
    if count == 0:
        return np.zeros((0, dirs.shape[1])), np.zeros(0)
    idx = rng.choice(len(masses), size=count, p=masses / masses.sum())
    offsets = t_lo + (t_hi - t_lo) * rng.random(count)
    return dirs[idx], offsets


def _zero_cell_frame(carrier: Subspace, gamma: float, dirs_frame: np.ndarray,
                     masses: np.ndarray, rng: np.random.Generator,
                     initial_radius: float | None = None) -> Polytope:
    """Zero cell via radius doubling: accept once every cell point is within
    half the sampled radius, so unseen far planes cannot cut the cell."""
    radius = initial_radius if initial_radius is not None else 1.0 / gamma
    normals, offsets = _sample_batch(gamma, dirs_frame, masses,
                                     0.0, radius, rng)
    for _ in range(MAX_DOUBLINGS):
        cell = intersect_halfspaces(carrier, None, bound=radius,
                                    frame_halfspaces=(normals, offsets))
        if not cell.clipped and cell.max_vertex_norm() <= radius / 2.0:
            return cell
        more_n, more_t = _sample_batch(gamma, dirs_frame, masses,
                                       radius, 2.0 * radius, rng)
        normals = np.vstack([normals, more_n])
        offsets = np.concatenate([offsets, more_t])
        radius *= 2.0
    raise ZeroCellError("radius doubled %d times without containment"
                        % MAX_DOUBLINGS)


def zero_cell(spec: ProcessSpec, rng: np.random.Generator,
              initial_radius: float | None = None) -> Polytope:
    """The cell of the tessellation containing the origin."""
    if spec.dim not in (2, 3):
        raise ValueError("ambient cells supported for dimension 2 or 3")
    return _zero_cell_frame(Subspace.full(spec.dim), spec.gamma,
                            spec.phi.dirs, spec.phi.masses, rng,
                            initial_radius)


def zero_cell_in_section(spec: ProcessSpec, subspace: Subspace,
                         rng: np.random.Generator,
                         section: SectionSpec | None = None) -> Polytope:
    """Zero cell of the trace process on a subspace (dimension 2 or 3)."""
    sec = section if section is not None else section_params(spec, subspace)
    dirs_frame = subspace.coords(sec.phi_section.dirs)
    return _zero_cell_frame(subspace, sec.gamma_section, dirs_frame,
                            sec.phi_section.masses, rng)


# ---------------------------------------------------------------------------
# direction law of intersection flats
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FlatDistribution:
    """Finite distribution over subspaces of a common dimension."""

    entries: tuple

    def __post_init__(self):
        total = sum(w for _, w in self.entries)
        if abs(total - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")
        if any(w <= 0 for _, w in self.entries):
            raise ValueError("weights must be positive")
        flats = [s for s, _ in self.entries]
        for i in range(len(flats)):
            for j in range(i + 1, len(flats)):
                if subspace_distance(flats[i], flats[j]) <= 1e-9:
                    raise ValueError("entries must be distinct subspaces")

    @property
    def subspaces(self) -> list[Subspace]:
        return [s for s, _ in self.entries]

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.entries])

    def sample(self, rng: np.random.Generator) -> Subspace:
        w = self.weights
        i = rng.choice(len(w), p=w / w.sum())
        return self.entries[i][0]

    def weight_of(self, subspace: Subspace, tol: float = 1e-9) -> float:
        for s, w in self.entries:
            if subspace_distance(s, subspace) < tol:
                return w
        return 0.0


def collapse_antipodal(measure: SphericalMeasure):
    """Representative direction and combined mass per antipodal atom pair."""
    reps: list[np.ndarray] = []
    mass: list[float] = []
    for u, m in zip(measure.dirs, measure.masses):
        for i, v in enumerate(reps):
            if abs(float(u @ v)) >= 1.0 - 1e-12:
                mass[i] += m
                break
        else:
            nz = np.nonzero(np.abs(u) > 1e-12)[0][0]
            reps.append(u if u[nz] > 0 else -u)
            mass.append(m)
    return np.array(reps), np.array(mass)


def intersection_direction_distribution(spec: ProcessSpec,
                                        k: int) -> FlatDistribution:
    """Direction law of the k-flats cut out by (d - k)-fold intersections.

    Each (d-k)-subset of distinct hyperplane direction axes contributes its
    common intersection subspace, weighted by the product of axis masses
    times the spanned parallelepiped content of the normals; degenerate
    subsets drop out and coincident subspaces pool their weight.
    """
    d = spec.dim
    if not 1 <= k <= d - 1:
        raise ValueError("need 1 <= k <= d - 1")
    order = d - k
    axes, ax_mass = collapse_antipodal(spec.phi)
    found: list[list] = []   # [subspace, weight]
    for subset in itertools.combinations(range(len(axes)), order):
        u = axes[list(subset)]
        gram = u @ u.T
        det = float(np.linalg.det(gram))
        if det <= 1e-24:
            continue
        weight = float(np.prod(ax_mass[list(subset)])) * np.sqrt(det)
        _, _, vt = np.linalg.svd(u)
        flat = Subspace(vt[order:].T)
        for entry in found:
            if subspace_distance(entry[0], flat) < 1e-9:
                entry[1] += weight
                break
        else:
            found.append([flat, weight])
    if not found:
        raise ValueError("no spanning subsets; direction law is degenerate")
    total = sum(w for _, w in found)
    return FlatDistribution(tuple((s, w / total) for s, w in found))


def sample_weighted_typical_face(spec: ProcessSpec, k: int,
                                 rng: np.random.Generator,
                                 flats: FlatDistribution | None = None
                                 ) -> Polytope:
    """Volume-weighted typical k-face: draw the face's direction space from
    the intersection law, then take the zero cell of the trace process."""
    if not 2 <= k <= spec.dim - 1:
        raise ValueError("face dimension must lie in {2, ..., d-1}")
    if flats is None:
        flats = intersection_direction_distribution(spec, k)
    subspace = flats.sample(rng)
    return zero_cell_in_section(spec, subspace, rng)
