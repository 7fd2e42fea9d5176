"""Sampling a hyperplane tessellation: zero cells, sections, windows.

Run with --seed to get a different realization; everything printed here is
reproducible from that one integer.
"""

import argparse

import numpy as np

from mosaic_lab import (
    ProcessSpec,
    Subspace,
    build_face_complex,
    make_even,
    sample_hyperplanes,
    section_params,
    zero_cell,
    zero_cell_in_section,
)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--window", type=float, default=6.0)
    args = parser.parse_args()

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(
        args.seed)))
    spec = ProcessSpec(1.0, make_even([(u, 1.0 / 3.0) for u in np.eye(3)]))

    cell = zero_cell(spec, rng)
    r_in, r_out, _ = cell.inradius_circumradius()
    print("zero cell: %d facets, volume %.3f, inradius %.3f, circumradius "
          "%.3f" % (len(cell.facet_normals), cell.volume(), r_in, r_out))

    L = Subspace.coordinate(3, (0, 1))
    sec = section_params(spec, L)
    print("section process in span(e1,e2): intensity %.4f (expect 2/3), "
          "%d directions" % (sec.gamma_section, len(sec.phi_section.masses)))

    n = 400
    areas = np.array([zero_cell_in_section(spec, L, rng).volume()
                      for _ in range(n)])
    print("mean section zero-cell area over %d draws: %.2f +- %.2f "
          "(expect 36)" % (n, areas.mean(), areas.std(ddof=1) / np.sqrt(n)))

    radius = args.window * np.sqrt(3.0)
    planes = sample_hyperplanes(spec, radius, rng)
    complex_ = build_face_complex(planes, args.window)
    interior = int(np.asarray(complex_.interior).sum())
    print("window [-%g, %g]^3: %d planes, %d faces (%d interior)"
          % (args.window, args.window, len(planes), len(complex_.faces),
             interior))
    biggest = max(f.volume() for f in complex_.faces)
    print("largest face area in the window: %.2f" % biggest)


if __name__ == "__main__":
    main()
