"""Recover convex bodies from their surface area measures.

The planar case is exact: sorting atoms by normal angle and chaining the
rotated edge vectors closes up precisely when the measure is centered.  The
spatial case maximizes volume over support heights on the slice where the
mass-weighted height sum is one; at the maximizer the facet areas are
proportional to the target masses and a single rescale finishes the job.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grassmann import Subspace
from .measures import SphericalMeasure, project_measure, prokhorov_distance
from .polytope import Polytope, intersect_halfspaces
from .process import ProcessSpec, section_params

CENTER_TOL = 1e-9
REL_VOLUME_TOL = 1e-12
MAX_BOUND_RETRIES = 12


class NonConvergenceError(RuntimeError):
    """Iterative reconstruction stalled; carries the last residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class MinkowskiSolution:
    """Reconstructed body, its surface-measure residual, iteration count."""

    body: Polytope
    residual: float
    iterations: int


def _infer_carrier(measure: SphericalMeasure, k: int) -> Subspace:
    if measure.ambient_dim == k:
        return Subspace.full(k)
    u, s, vt = np.linalg.svd(measure.dirs)
    if s[k - 1] <= 1e-9 or (len(s) > k and s[k] > 1e-9):
        raise ValueError("atoms do not span a %d-dimensional subspace" % k)
    return Subspace(vt[:k].T)


def _frame_atoms(measure: SphericalMeasure, carrier: Subspace):
    dirs = carrier.coords(measure.dirs)
    norms = np.linalg.norm(dirs, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-9):
        raise ValueError("atoms do not lie in the carrier subspace")
    dirs /= norms[:, None]
    masses = measure.masses.copy()
    drift = np.linalg.norm(masses @ dirs)
    if drift > CENTER_TOL * masses.sum():
        raise ValueError("measure is not centered; no convex body exists")
    return dirs, masses


def solve_minkowski_2d(measure: SphericalMeasure,
                       carrier: Subspace | None = None) -> MinkowskiSolution:
    """Exact planar reconstruction: edge lengths are the atom masses."""
    if carrier is None:
        carrier = _infer_carrier(measure, 2)
    if carrier.dim != 2:
        raise ValueError("planar solver needs a 2-dimensional carrier")
    dirs, masses = _frame_atoms(measure, carrier)
    if len(masses) < 3:
        raise ValueError("need at least 3 atoms to bound a polygon")
    angles = np.arctan2(dirs[:, 1], dirs[:, 0])
    order = np.argsort(angles)
    edges = masses[order, None] * np.column_stack(
        [-dirs[order, 1], dirs[order, 0]])
    verts = np.vstack([np.zeros(2), np.cumsum(edges, axis=0)[:-1]])
    body = Polytope.polygon(carrier, verts, tags=order)
    body = body.translated(-body.centroid_frame())
    residual = prokhorov_distance(body.surface_area_measure(), measure,
                                  tol=1e-13)
    return MinkowskiSolution(body, residual, 0)


def _build(carrier, dirs, heights, bound):
    """Polytope bounded by the height-offset facet planes, plus its volume
    and per-atom facet areas.  Enlarges the working box until no box facet
    survives."""
    for _ in range(MAX_BOUND_RETRIES):
        poly = intersect_halfspaces(carrier, None, bound=bound,
                                    frame_halfspaces=(dirs, heights))
        if not poly.clipped:
            areas = np.zeros(len(dirs))
            for tag, a in zip(poly.tags, poly.facet_measures):
                areas[tag] += a
            return poly, poly.volume(), areas, bound
        bound *= 4.0
    raise NonConvergenceError("body does not close up within the working box",
                              float("inf"))


def solve_minkowski_iterative(measure: SphericalMeasure,
                              carrier: Subspace | None = None,
                              tol: float = 1e-8,
                              max_iters: int = 10_000,
                              initial_heights: np.ndarray | None = None
                              ) -> MinkowskiSolution:
    """Spatial reconstruction by projected volume ascent.

    Support heights stay on the slice where the mass-weighted sum is one;
    the ascent direction is the facet-area vector minus its component along
    the masses, with step halving from 1 until the volume increases.
    Convergence requires both the relative volume change below 1e-12 and
    the rescaled facet-area residual below ``tol``; the measure is
    normalized internally, so ``tol`` is relative to the total mass.
    """
    if carrier is None:
        carrier = _infer_carrier(measure, 3)
    if carrier.dim != 3:
        raise ValueError("iterative solver expects a 3-dimensional carrier")
    dirs, masses = _frame_atoms(measure, carrier)
    if np.linalg.matrix_rank(dirs, tol=1e-9) < 3:
        raise ValueError("atoms do not span the carrier")
    total = float(masses.sum())
    mu = masses / total
    if initial_heights is None:
        h = np.ones(len(mu))
    else:
        h = np.asarray(initial_heights, dtype=float)
        scale = float(mu @ h)
        if scale <= 0:
            raise ValueError("initial heights must have positive mass sum")
        h = h / scale

    def resid_of(areas):
        coeff = float(areas @ mu / (mu @ mu))
        return coeff, float(np.abs(areas / coeff - mu).sum())

    bound = 8.0 * float(np.max(np.abs(h)))
    body, vol, areas, bound = _build(carrier, dirs, h, bound)
    coeff, resid = resid_of(areas)
    relchange = float("inf")
    iters = 0
    for iters in range(1, max_iters + 1):
        if resid < tol and relchange < REL_VOLUME_TOL:
            break
        grad = areas - coeff * mu
        step = 1.0
        accepted = False
        while step > 1e-20:
            trial_h = h + step * grad
            try:
                trial = _build(carrier, dirs, trial_h, bound)
            except Exception:
                step *= 0.5
                continue
            trial_coeff, trial_resid = resid_of(trial[2])
            # near the maximizer the volume gain drops below roundoff,
            # so break ties by a strictly smaller facet-area residual
            better = trial[1] > vol or (
                trial[1] >= vol * (1.0 - 1e-14)
                and trial_resid < resid * (1.0 - 1e-12))
            if better:
                body, new_vol, areas, bound = trial
                relchange = abs(new_vol - vol) / new_vol
                vol = new_vol
                h = trial_h
                coeff, resid = trial_coeff, trial_resid
                accepted = True
                break
            step *= 0.5
        if not accepted:
            if resid < tol:
                relchange = 0.0
                break
            raise NonConvergenceError(
                "no improving step found at residual %g" % resid, resid)
    else:
        raise NonConvergenceError(
            "no convergence in %d iterations" % max_iters, resid)

    body = body.scaled((total / coeff) ** 0.5)
    body = body.translated(-body.centroid_frame())
    residual = prokhorov_distance(body.surface_area_measure(), measure,
                                  tol=min(tol, 1e-10))
    return MinkowskiSolution(body, residual, iters)


def solve_minkowski(measure: SphericalMeasure,
                    carrier: Subspace | None = None,
                    tol: float = 1e-8) -> MinkowskiSolution:
    """Dispatch on carrier dimension (2: exact, 3: iterative)."""
    if carrier is None:
        try:
            carrier = _infer_carrier(measure, 2)
        except ValueError:
            carrier = _infer_carrier(measure, 3)
    if carrier.dim == 2:
        return solve_minkowski_2d(measure, carrier)
    return solve_minkowski_iterative(measure, carrier, tol=tol)


def blaschke_body(spec: ProcessSpec, subspace: Subspace,
                  normalized: bool = True) -> Polytope:
    """Body whose surface area measure is the section direction law.

    With ``normalized`` the law is the probability measure of the trace
    process; otherwise it is the raw projection of the ambient law, whose
    body is the same shape shrunk by the mass ratio to the power 1/(k-1).
    """
    sec = section_params(spec, subspace)
    target = (sec.phi_section if normalized
              else project_measure(spec.phi, subspace))
    return solve_minkowski(target, subspace).body


def tail_rate_coefficient(body: Polytope) -> float:
    """Isoperimetric-type coefficient k * V^(1 - 1/k) driving the
    exponential volume tail of large section cells."""
    k = body.dim
    return k * body.volume() ** (1.0 - 1.0 / k)
