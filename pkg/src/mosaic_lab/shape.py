"""Homothety deviation between convex bodies.

The deviation of K from a reference body M is the log of the smallest
sandwich ratio beta/alpha over translates: alpha*M inside K+z inside
beta*M.  For polytopes both constants are exact support-function ratios:
the inner inclusion binds at K's facet normals, the outer at M's, so no
other rays can tighten the sandwich.  The ratio is quasi-convex in z and
is minimized by a multi-start downhill simplex; an origin-symmetric K
needs no search at all since the even objective is minimal at z = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .grassmann import Rotation, minimal_rotations, subspace_distance
from .polytope import Polytope

N_STARTS = 8
START_SEED = 0x5EED
SAME_SPACE_TOL = 1e-9


@dataclass(frozen=True)
class DeviationResult:
    """Optimal sandwich log-ratio with the certifying witness."""

    value: float
    witness_translation: np.ndarray   # ambient shift z applied to K
    witness_alpha: float
    witness_beta: float
    witness_rotation: Rotation

    def to_json_dict(self) -> dict:
        return {"value": self.value,
                "translation": self.witness_translation.tolist(),
                "alpha": self.witness_alpha,
                "beta": self.witness_beta,
                "rotation": self.witness_rotation.matrix.tolist()}


def _sandwich_fns(body: Polytope, reference: Polytope):
    """Exact alpha(z), beta(z) for alpha*ref <= body+z <= beta*ref."""
    n_body = body.facet_normals
    s_body = body.facet_offsets
    ref_at_body = np.max(reference.verts @ n_body.T, axis=0)
    n_ref = reference.facet_normals
    s_ref = reference.facet_offsets
    body_at_ref = np.max(body.verts @ n_ref.T, axis=0)

    def alpha_beta(z):
        a = float(np.min((s_body + n_body @ z) / ref_at_body))
        b = float(np.max((body_at_ref + n_ref @ z) / s_ref))
        return a, b

    return alpha_beta


def deviation_same_space(body: Polytope,
                         reference: Polytope) -> DeviationResult:
    """Deviation of a full-dimensional body from an o-symmetric reference
    living in the same carrier subspace."""
    if body.dim != reference.dim:
        raise ValueError("bodies live in different dimensions")
    body = body.in_frame(reference.carrier)
    if not reference.is_origin_symmetric():
        raise ValueError("reference body must be origin-symmetric")
    if np.min(reference.facet_offsets) <= 0:
        raise ValueError("origin must be interior to the reference body")

    alpha_beta = _sandwich_fns(body, reference)

    def objective(z):
        a, b = alpha_beta(z)
        if a <= 0:
            return 1e9 * (1.0 + float(np.linalg.norm(z)))
        return np.log(b) - np.log(a)

    if body.is_origin_symmetric():
        z_best = np.zeros(body.dim)
    else:
        diam = body.diameter()
        z0 = reference.centroid_frame() - body.centroid_frame()
        rng = np.random.default_rng(START_SEED)
        starts = [z0]
        for _ in range(N_STARTS - 1):
            u = rng.normal(size=body.dim)
            starts.append(z0 + (diam / 4.0) * u / np.linalg.norm(u))
        z_best, f_best = None, np.inf
        for start in starts:
            res = minimize(objective, start, method="Nelder-Mead",
                           options={"xatol": 1e-11 * max(diam, 1.0),
                                    "fatol": 1e-13, "maxiter": 2000,
                                    "maxfev": 4000})
            if res.fun < f_best:
                z_best, f_best = res.x, res.fun

    a, b = alpha_beta(z_best)
    return DeviationResult(float(np.log(b / a)),
                           reference.carrier.embed(z_best), a, b,
                           Rotation.identity(reference.carrier.ambient_dim))


def deviation_cross_space(body: Polytope,
                          reference: Polytope) -> DeviationResult:
    """Deviation across carriers: rotate the body's carrier onto the
    reference's by a defect-minimal rotation, then compare in one space.
    Non-generic carrier pairs admit a family of minimal rotations; the
    smallest deviation over the sampled family is returned."""
    sub_body, sub_ref = body.carrier, reference.carrier
    if sub_body.dim != sub_ref.dim:
        raise ValueError("carriers have different dimensions")
    if subspace_distance(sub_body, sub_ref) < SAME_SPACE_TOL:
        return deviation_same_space(body, reference)
    best = None
    for rho in minimal_rotations(sub_body, sub_ref):
        rotated = body.rotated(rho).in_frame(sub_ref)
        res = deviation_same_space(rotated, reference)
        if best is None or res.value < best.value:
            best = DeviationResult(res.value, res.witness_translation,
                                   res.witness_alpha, res.witness_beta, rho)
    return best
