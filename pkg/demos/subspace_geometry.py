"""Distances between subspaces and the rotations that realize them."""

import numpy as np

from mosaic_lab import (
    Rotation,
    Subspace,
    in_neighborhood,
    minimal_rotation,
    principal_angles,
    rotation_defect,
    subspace_distance,
)


def main():
    rng = np.random.default_rng(3)

    L = Subspace.coordinate(3, (0, 1))
    print("dihedral sweep, plane tilted about e1:")
    for omega in (0.1, 0.5, 1.0, np.pi / 2):
        rho = Rotation.from_axis_angle(np.array([1.0, 0.0, 0.0]), omega)
        E = rho.apply_subspace(L)
        dist = subspace_distance(L, E)
        closed = 2.0 * np.sqrt(2.0) * abs(np.sin(omega / 2.0))
        print("  omega=%.3f  distance=%.6f  closed form=%.6f" %
              (omega, dist, closed))

    print("\nrandom pairs in G(4,2):")
    for _ in range(3):
        a = Subspace.random(4, 2, rng)
        b = Subspace.random(4, 2, rng)
        angles = principal_angles(a, b)
        rho = minimal_rotation(a, b)
        carried = Subspace(rho.matrix @ a.frame)
        print("  angles=[%.4f %.4f]  distance=%.6f  defect of minimal "
              "rotation=%.6f  carry error=%.1e"
              % (angles[0], angles[1], subspace_distance(a, b),
                 rotation_defect(rho),
                 np.linalg.norm(carried.projector() - b.projector())))

    # the neighborhood predicate is what the experiments condition on
    print("\nneighborhood of span(e1,e2) at theta=0.5:")
    for name, other in (("itself", L),
                        ("span(e1,e3)", Subspace.coordinate(3, (0, 2))),
                        ("small tilt", Rotation.from_axis_angle(
                            np.array([1.0, 0.0, 0.0]), 0.1).apply_subspace(L))):
        print("  %-12s distance=%.4f  inside=%s"
              % (name, subspace_distance(L, other),
                 in_neighborhood(other, L, 0.5)))


if __name__ == "__main__":
    main()
