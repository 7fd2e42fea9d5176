"""Large conditioned faces look like the reference body.

Draws weighted typical 2-faces of the axis-cross tessellation, keeps the
ones whose direction space is near the target plane, and tracks the
homothety deviation from the reference square as the area floor rises.
The medians drift down; pushing them toward zero needs far larger floors
than a quick demo can afford.
"""

import numpy as np

from mosaic_lab import (
    ProcessSpec,
    Subspace,
    blaschke_body,
    deviation_cross_space,
    intersection_direction_distribution,
    in_neighborhood,
    make_even,
    zero_cell_in_section,
)


def main():
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(1)))
    spec = ProcessSpec(1.0, make_even([(u, 1.0 / 3.0) for u in np.eye(3)]))
    target = Subspace.coordinate(3, (0, 1))
    law = intersection_direction_distribution(spec, 2)
    reference = blaschke_body(spec, target)

    n = 3000
    rows = []
    for _ in range(n):
        flat = law.sample(rng)
        if not in_neighborhood(flat, target, 0.5):
            continue
        cell = zero_cell_in_section(spec, flat, rng)
        centered = cell.translated(-cell.centroid_frame())
        rows.append((cell.volume(),
                     deviation_cross_space(centered, reference).value))
    areas = np.array([r[0] for r in rows])
    devs = np.array([r[1] for r in rows])
    print("%d conditioned faces out of %d draws" % (len(rows), n))

    print("%8s %8s %12s %12s" % ("floor", "faces", "median dev", "q90"))
    for floor in (0.0, 4.0, 16.0, 64.0):
        sel = areas >= floor
        kept = devs[sel]
        if len(kept) == 0:
            print("%8.0f %8d %12s %12s" % (floor, 0, "-", "-"))
            continue
        print("%8.0f %8d %12.4f %12.4f"
              % (floor, len(kept), float(np.median(kept)),
                 float(np.quantile(kept, 0.9))))


if __name__ == "__main__":
    main()
