"""End-to-end acceptance battery.

One test per shipped guarantee: solver exactness, oracle agreement,
Monte Carlo trend checks at the committed sample sizes, and byte-level
reproducibility.  Each test prints a single PASS/FAIL line with the
measured wall time against its runtime budget, so ``pytest -s`` on this
file reads as a checklist.  Numbers in the test names only fix the
ordering of that checklist.
"""

import time

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from mosaic_lab import (
    Halfspace,
    Polytope,
    ProcessSpec,
    Rotation,
    Subspace,
    default_config,
    deviation_same_space,
    intersect_halfspaces,
    intersection_direction_distribution,
    make_even,
    prokhorov_distance,
    run_scenario,
    sample_hyperplanes,
    section_params,
    solve_minkowski,
    subspace_distance,
)

PLANE = Subspace.full(2)
L_STAR = Subspace.coordinate(3, (0, 1))
CROSS = make_even([(u, 1.0 / 3.0) for u in np.eye(3)])


def _report(num, label, ok, elapsed, budget, detail):
    within = budget is None or elapsed < budget
    status = "PASS" if (ok and within) else "FAIL"
    clock = "%.1f s" % elapsed
    if budget is not None:
        clock += " / %.0f s budget" % budget
    line = "[%02d] %-34s %s  (%s)  %s" % (num, label, status, clock, detail)
    print(line, flush=True)
    assert ok, line
    assert within, line


def _random_even(rng, dim, pairs):
    raw = rng.normal(size=(pairs, dim))
    weights = rng.uniform(0.2, 1.0, size=pairs)
    return make_even(list(zip(raw, weights))).normalized()


def _random_symmetric_body(rng, pairs):
    hs = []
    for _ in range(pairs):
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        t = rng.uniform(0.6, 1.4)
        hs.extend([Halfspace(u, t), Halfspace(-u, t)])
    return intersect_halfspaces(Subspace.full(3), hs, 10.0)


def _random_polygon(rng, pairs, symmetric):
    hs = []
    for _ in range(pairs):
        u = rng.normal(size=2)
        u /= np.linalg.norm(u)
        t = rng.uniform(0.5, 1.5)
        hs.append(Halfspace(u, t))
        if symmetric:
            hs.append(Halfspace(-u, t))
    body = intersect_halfspaces(PLANE, hs, 10.0)
    return body if symmetric else body.translated(-body.centroid_frame())


def test_01_planar_reconstruction_exactness():
    rng = np.random.default_rng(20260815)
    t0 = time.monotonic()
    worst = 0.0
    for _ in range(50):
        pairs = int(rng.integers(2, 17))
        mu = _random_even(rng, 2, pairs)
        sol = solve_minkowski(mu)
        back = sol.body.surface_area_measure()
        worst = max(worst, prokhorov_distance(back, mu, tol=1e-11))
    elapsed = time.monotonic() - t0
    _report(1, "planar reconstruction exactness", worst <= 1e-10, elapsed,
            1.0, "worst round-trip residual %.2e over 50 measures" % worst)


def test_02_spatial_reconstruction_solver():
    t0 = time.monotonic()

    cube_mu = make_even([(u, 2.0) for u in np.eye(3)])
    cube = intersect_halfspaces(
        Subspace.full(3), [Halfspace(s * u, 0.5)
                           for u in np.eye(3) for s in (1.0, -1.0)], 5.0)
    dev_cube = deviation_same_space(solve_minkowski(cube_mu, tol=1e-6).body,
                                    cube).value

    corners = np.array([[sx, sy, sz] for sx in (1, -1) for sy in (1, -1)
                        for sz in (1, -1)], float) / np.sqrt(3.0)
    octa_mu = make_even([(c, np.sqrt(3.0)) for c in corners[:4]])
    octa = intersect_halfspaces(
        Subspace.full(3), [Halfspace(c, 1.0 / np.sqrt(3.0)) for c in corners],
        5.0)
    dev_octa = deviation_same_space(solve_minkowski(octa_mu, tol=1e-6).body,
                                    octa).value

    rng = np.random.default_rng(20260815)
    worst_rt = 0.0
    for _ in range(20):
        body = _random_symmetric_body(rng, int(rng.integers(4, 8)))
        sol = solve_minkowski(body.surface_area_measure(), tol=1e-6)
        worst_rt = max(worst_rt, deviation_same_space(sol.body, body).value)

    elapsed = time.monotonic() - t0
    ok = dev_cube <= 1e-4 and dev_octa <= 1e-4 and worst_rt <= 1e-4
    _report(2, "spatial reconstruction solver", ok, elapsed, 60.0,
            "cube %.1e, octahedron %.1e, worst of 20 round trips %.1e"
            % (dev_cube, dev_octa, worst_rt))


def test_03_projected_measure_stability():
    t0 = time.monotonic()
    table = run_scenario("lemma1", default_config("lemma1"))
    elapsed = time.monotonic() - t0
    worst = table.metadata["max_ratio"]
    ok = table.passed and worst <= 1.0 + 1e-3 and len(table.rows) == 200
    _report(3, "projected-measure stability", ok, elapsed, 30.0,
            "max distance/bound ratio %.4f over %d rotations"
            % (worst, len(table.rows)))


def test_04_section_intensity_monte_carlo():
    rng = np.random.default_rng(42)
    tilted = Rotation.from_axis_angle(np.eye(3)[0], 0.5).apply_subspace(L_STAR)
    asym = make_even([(np.eye(3)[0], 0.6), (np.eye(3)[1], 0.2),
                      (np.eye(3)[2], 0.2)])
    cases = [
        (ProcessSpec(1.0, CROSS), L_STAR),
        (ProcessSpec(1.0, CROSS), tilted),
        (ProcessSpec(1.5, asym), Subspace.coordinate(3, (0, 2))),
        (ProcessSpec(1.0, _random_even(rng, 3, 5)), Subspace.random(3, 2, rng)),
        (ProcessSpec(0.8, _random_even(rng, 3, 8)), Subspace.random(3, 2, rng)),
    ]
    n_real, radius = 10_000, 2.5
    t0 = time.monotonic()
    zs = []
    anchor = float("nan")
    for idx, (spec, L) in enumerate(cases):
        shadow = np.linalg.norm(spec.phi.dirs @ L.frame, axis=1)
        rate = spec.gamma * float(spec.phi.masses @ shadow)
        assert abs(section_params(spec, L).gamma_section - rate) <= 1e-12
        if idx == 0:
            anchor = rate
        hits = 0
        for _ in range(n_real):
            for p in sample_hyperplanes(spec, radius, rng):
                if p.offset <= radius * np.linalg.norm(p.normal @ L.frame):
                    hits += 1
        mean = n_real * 2.0 * rate * radius
        zs.append(abs(hits - mean) / np.sqrt(mean))
    elapsed = time.monotonic() - t0
    ok = max(zs) <= 3.0 and abs(anchor - 2.0 / 3.0) <= 1e-12
    _report(4, "section intensity Monte Carlo", ok, elapsed, 60.0,
            "max |z| %.2f over 5 direction/section pairs, axis-cross rate "
            "2/3 exact" % max(zs))


def _plane_trace_tally(spec, rng, n_min):
    """Accumulated in-ball trace area per plane direction class."""
    radius = 5.0
    acc = np.zeros(3)
    seen = 0
    while seen < n_min:
        for p in sample_hyperplanes(spec, radius, rng):
            axis = int(np.argmax(np.abs(p.normal)))
            acc[axis] += np.pi * (radius * radius - p.offset ** 2)
            seen += 1
    return acc / acc.sum(), seen


def _line_chord_tally(spec, rng, n_min):
    """Accumulated in-ball chord length per intersection-line direction
    class, over all hyperplane pairs of each realization."""
    radius = 6.0
    acc = np.zeros(3)
    seen = 0
    while seen < n_min:
        planes = sample_hyperplanes(spec, radius, rng)
        if len(planes) < 2:
            continue
        normals = np.array([p.normal for p in planes])
        offsets = np.array([p.offset for p in planes])
        i, j = np.triu_indices(len(planes), 1)
        seen += len(i)
        dot = (normals[i] * normals[j]).sum(axis=1)
        det = 1.0 - dot ** 2
        ok = det > 1e-12
        i, j, dot, det = i[ok], j[ok], dot[ok], det[ok]
        alpha = (offsets[i] - dot * offsets[j]) / det
        beta = (offsets[j] - dot * offsets[i]) / det
        dist2 = alpha * offsets[i] + beta * offsets[j]
        chord = 2.0 * np.sqrt(np.clip(radius * radius - dist2, 0.0, None))
        direction = np.cross(normals[i], normals[j])
        axis = np.argmax(np.abs(direction), axis=1)
        np.add.at(acc, axis, chord)
    return acc / acc.sum(), seen


def test_05_intersection_direction_law_vs_counting():
    rng = np.random.default_rng(19937)
    t0 = time.monotonic()

    spec_a = ProcessSpec(1.0, CROSS)
    law_a = intersection_direction_distribution(spec_a, 2)
    coord_planes = [Subspace.coordinate(3, tuple(j for j in range(3)
                                                 if j != i))
                    for i in range(3)]
    lib_a = np.array([law_a.weight_of(L) for L in coord_planes])
    assert np.max(np.abs(lib_a - 1.0 / 3.0)) <= 1e-12
    prop_a, n_a = _plane_trace_tally(spec_a, rng, 100_000)
    tv_a = 0.5 * float(np.abs(prop_a - lib_a).sum())

    spec_b = ProcessSpec(1.0, make_even([(np.eye(3)[0], 0.6),
                                         (np.eye(3)[1], 0.2),
                                         (np.eye(3)[2], 0.2)]))
    law_b = intersection_direction_distribution(spec_b, 1)
    coord_lines = [Subspace.coordinate(3, (i,)) for i in range(3)]
    lib_b = np.array([law_b.weight_of(L) for L in coord_lines])
    assert np.max(np.abs(lib_b - np.array([1.0, 3.0, 3.0]) / 7.0)) <= 1e-12
    prop_b, n_b = _line_chord_tally(spec_b, rng, 100_000)
    tv_b = 0.5 * float(np.abs(prop_b - lib_b).sum())

    elapsed = time.monotonic() - t0
    ok = tv_a < 0.02 and tv_b < 0.02
    _report(5, "direction law vs counting oracle", ok, elapsed, 300.0,
            "TV %.4f over %d plane traces, TV %.4f over %d line pairs"
            % (tv_a, n_a, tv_b, n_b))


def test_06_two_route_face_statistics():
    t0 = time.monotonic()
    table = run_scenario("consistency", default_config("consistency"))
    elapsed = time.monotonic() - t0
    cols = table.columns
    counts = {row[cols.index("route")]: row[cols.index("n_faces")]
              for row in table.rows}
    ok = (table.passed and counts["process"] >= 2000
          and counts["window"] >= 2000)
    _report(6, "two-route face statistics", ok, elapsed, 600.0,
            "process %d faces, window %d faces, all z within 3 sigma"
            % (counts["process"], counts["window"]))


def test_07_conditional_deviation_decay():
    cfg = default_config("theorem1")
    assert cfg.epsilon == 0.3 and cfg.a_grid == (1.0, 2.0, 4.0, 8.0)
    assert cfg.n_samples == 100_000
    t0 = time.monotonic()
    table = run_scenario("theorem1", cfg)
    elapsed = time.monotonic() - t0
    trend = next(a for a in table.assertions
                 if a["name"] == "monotone_decay")
    _report(7, "conditional deviation decay", table.passed, elapsed, 900.0,
            trend["detail"])


def test_08_section_volume_decay_bracket():
    cfg = default_config("lemma6")
    assert cfg.n_samples == 100_000
    t0 = time.monotonic()
    table = run_scenario("lemma6", cfg)
    elapsed = time.monotonic() - t0
    lo, hi = table.metadata["bracket"]
    slope = table.metadata["slope_base"]
    ok = (table.passed and abs(lo + 1.0) <= 1e-12 and abs(hi + 0.5) <= 1e-12
          and lo <= slope <= hi)
    _report(8, "section volume decay bracket", ok, elapsed, 600.0,
            "fitted slope %.4f within [%.2f, %.2f], doubled-rate ratio %.3f"
            % (slope, lo, hi,
               table.metadata["slope_doubled"] / slope))


def _sandwich_grid_oracle(body, ref, n=120):
    """Best homothety sandwich by translation grid search plus polish."""
    hk_dirs = body.facet_normals
    hm_dirs = ref.facet_normals

    def log_ratio(z):
        upper = ((body.verts + z) @ hm_dirs.T).max(axis=0) / ref.facet_offsets
        lower = ((body.verts + z) @ hk_dirs.T).max(axis=0)
        denom = (ref.verts @ hk_dirs.T).max(axis=0)
        a = np.min(lower / denom)
        if a <= 0:
            return np.inf
        return np.log(np.max(upper) / a)

    lo = -body.verts.max(axis=0)
    hi = -body.verts.min(axis=0)
    grid = [np.linspace(a + 1e-6, b - 1e-6, n) for a, b in zip(lo, hi)]
    zz = np.stack(np.meshgrid(*grid), axis=-1).reshape(-1, 2)
    vals = np.array([log_ratio(z) for z in zz])
    i = int(np.argmin(vals))
    res = minimize(log_ratio, zz[i], method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-14})
    return min(float(vals[i]), float(res.fun))


def test_09_deviation_optimizer_vs_grid_oracle():
    rng = np.random.default_rng(11)
    t0 = time.monotonic()

    worst_gap = 0.0
    for _ in range(100):
        body = _random_polygon(rng, int(rng.integers(3, 7)), symmetric=False)
        ref = _random_polygon(rng, int(rng.integers(2, 6)), symmetric=True)
        got = deviation_same_space(body, ref).value
        worst_gap = max(worst_gap, abs(got - _sandwich_grid_oracle(body, ref)))

    worst_tri = worst_rot = worst_scale = 0.0
    for _ in range(30):
        k = _random_polygon(rng, 4, symmetric=False)
        q = _random_polygon(rng, 3, symmetric=True)
        m = _random_polygon(rng, 3, symmetric=True)
        lhs = deviation_same_space(k, m).value
        rhs = (deviation_same_space(k, q).value
               + deviation_same_space(q, m).value)
        worst_tri = max(worst_tri, lhs - rhs)

        base = deviation_same_space(k, m).value
        ang = rng.uniform(0.0, 2.0 * np.pi)
        rho = Rotation(np.array(
            [[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]]))
        turned = deviation_same_space(k.rotated(rho).in_frame(PLANE),
                                      m.rotated(rho).in_frame(PLANE)).value
        worst_rot = max(worst_rot, abs(turned - base))

        lam = float(rng.uniform(0.3, 3.0))
        scaled = deviation_same_space(k.scaled(lam), m.scaled(lam)).value
        one_sided = deviation_same_space(k.scaled(lam), m).value
        worst_scale = max(worst_scale, abs(scaled - base),
                          abs(one_sided - base))

    elapsed = time.monotonic() - t0
    ok = (worst_gap <= 1e-4 and worst_tri <= 1e-8 and worst_rot <= 1e-8
          and worst_scale <= 1e-8)
    _report(9, "deviation optimizer vs grid oracle", ok, elapsed, 60.0,
            "grid gap %.1e, triangle %.1e, rotation %.1e, scaling %.1e"
            % (worst_gap, worst_tri, worst_rot, worst_scale))


def _periodic_min(fn, n=720):
    """Global minimum of a smooth 2*pi-periodic function: coarse grid,
    then a bounded polish on a bracket allowed to wrap past the seam."""
    step = 2.0 * np.pi / n
    grid = np.arange(n) * step
    vals = np.array([fn(t) for t in grid])
    i = int(np.argmin(vals))
    res = minimize_scalar(fn, bounds=(grid[i] - step, grid[i] + step),
                          method="bounded", options={"xatol": 1e-12})
    return min(float(res.fun), float(vals[i]))


def _stabilizer_scan_3d(a, b):
    """Least defect over rotations with rho(a)=b: one carrier composed
    with the plane stabilizer (in-plane turns, pi-flips about in-plane
    axes), scanned on a grid and polished."""
    na = a.orthocomplement().frame[:, 0]
    nb = b.orthocomplement().frame[:, 0]
    base = np.column_stack([b.frame, nb]) @ np.column_stack([a.frame, na]).T
    if np.linalg.det(base) < 0:
        base = (np.column_stack([b.frame, -nb])
                @ np.column_stack([a.frame, na]).T)

    def turn_defect(beta):
        rho = base @ Rotation.from_axis_angle(na, beta).matrix
        return np.linalg.norm(rho - np.eye(3))

    def flip_defect(alpha):
        u = np.cos(alpha) * a.frame[:, 0] + np.sin(alpha) * a.frame[:, 1]
        rho = base @ (2.0 * np.outer(u, u) - np.eye(3))
        return np.linalg.norm(rho - np.eye(3))

    return min(_periodic_min(turn_defect), _periodic_min(flip_defect))


def _block_scan_4d(a, b):
    """Same idea one dimension up: the stabilizer of a 2-plane splits into
    paired in-block rotations or paired in-block reflections, and the
    squared defect separates over the two blocks."""
    U = np.column_stack([a.frame, a.orthocomplement().frame])
    V = np.column_stack([b.frame, b.orthocomplement().frame])
    if np.linalg.det(U) < 0:
        U[:, -1] = -U[:, -1]
    if np.linalg.det(V) < 0:
        V[:, -1] = -V[:, -1]
    M = (V @ U.T) @ U

    def rot_cost(A, C):
        return _periodic_min(lambda t: ((A @ np.array(
            [[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]]) - C) ** 2
        ).sum())

    def ref_cost(A, C):
        return _periodic_min(lambda t: ((A @ np.array(
            [[np.cos(t), np.sin(t)], [np.sin(t), -np.cos(t)]]) - C) ** 2
        ).sum())

    blocks = [(M[:, :2], U[:, :2]), (M[:, 2:], U[:, 2:])]
    turn = sum(rot_cost(A, C) for A, C in blocks)
    flip = sum(ref_cost(A, C) for A, C in blocks)
    return float(np.sqrt(min(turn, flip)))


def test_10_rotation_defect_vs_restricted_scan():
    rng = np.random.default_rng(9)
    t0 = time.monotonic()
    worst3 = worst4 = 0.0
    for _ in range(50):
        a, b = Subspace.random(3, 2, rng), Subspace.random(3, 2, rng)
        worst3 = max(worst3,
                     abs(subspace_distance(a, b) - _stabilizer_scan_3d(a, b)))
    for _ in range(50):
        a, b = Subspace.random(4, 2, rng), Subspace.random(4, 2, rng)
        worst4 = max(worst4,
                     abs(subspace_distance(a, b) - _block_scan_4d(a, b)))
    elapsed = time.monotonic() - t0
    ok = worst3 <= 1e-6 and worst4 <= 1e-6
    _report(10, "rotation defect vs restricted scan", ok, elapsed, 60.0,
            "worst gap %.1e in dim 3, %.1e in dim 4, 50 pairs each"
            % (worst3, worst4))


def test_11_shape_concentration_schedule():
    cfg = default_config("limitshape")
    assert len(cfg.schedule) == 4
    t0 = time.monotonic()
    table = run_scenario("limitshape", cfg)
    elapsed = time.monotonic() - t0
    cols = table.columns
    medians = [row[cols.index("median_dev")] for row in table.rows]
    _report(11, "shape concentration schedule", table.passed, elapsed, 900.0,
            "stage medians " + ", ".join("%.4f" % m for m in medians))


def test_12_byte_identical_reruns():
    small = {
        "theorem1": default_config("theorem1").replace(n_samples=2000,
                                                       replicas=2),
        "theorem2": default_config("theorem2").replace(n_samples=600,
                                                       replicas=2,
                                                       window=7.0),
        "lemma1": default_config("lemma1").replace(n_pairs=30),
        "lemma6": default_config("lemma6").replace(n_samples=3000,
                                                   replicas=2),
        "limitshape": default_config("limitshape").replace(n_samples=1500,
                                                           replicas=2),
        "consistency": default_config("consistency").replace(n_samples=1200,
                                                             replicas=2,
                                                             window=7.0),
    }
    t0 = time.monotonic()
    stable = []
    for name, cfg in small.items():
        first = run_scenario(name, cfg).to_csv().encode()
        second = run_scenario(name, cfg).to_csv().encode()
        stable.append(first == second)
    elapsed = time.monotonic() - t0
    _report(12, "byte-identical reruns", all(stable), elapsed, None,
            "%d of %d scenarios reproduce exactly" % (sum(stable),
                                                      len(stable)))
