import json

import numpy as np
import pytest
from scipy import stats

from mosaic_lab import (
    FlatDistribution,
    ProcessSpec,
    Subspace,
    intersect_halfspaces,
    intersection_direction_distribution,
    make_even,
    sample_hyperplanes,
    sample_weighted_typical_face,
    section_params,
    zero_cell,
    zero_cell_in_section,
)

L_STAR = Subspace.coordinate(3, (0, 1))


def cross_spec(dim=3, gamma=1.0):
    eye = np.eye(dim)
    phi = make_even([(eye[i], 1.0 / dim) for i in range(dim)])
    return ProcessSpec(gamma, phi)


def section_of_cell(cell, subspace):
    """Trace of an ambient zero cell in a plane through the origin."""
    normals = cell.facet_normals @ subspace.frame
    scale = np.linalg.norm(normals, axis=1)
    keep = scale > 1e-12
    return intersect_halfspaces(
        subspace, None, 1e4,
        frame_halfspaces=(normals[keep] / scale[keep, None],
                          cell.facet_offsets[keep] / scale[keep]))


def test_process_spec_validation():
    with pytest.raises(ValueError):
        ProcessSpec(0.0, cross_spec().phi)
    # mass must be 1
    with pytest.raises(ValueError):
        ProcessSpec(1.0, cross_spec().phi.scaled(2.0))
    # support must span
    flat = make_even([(np.eye(3)[0], 0.5), (np.eye(3)[1], 0.5)])
    with pytest.raises(ValueError):
        ProcessSpec(1.0, flat)


def test_process_spec_json_round_trip():
    spec = cross_spec(3, gamma=2.5)
    back = ProcessSpec.from_json(spec.to_json())
    assert back.gamma == spec.gamma
    assert np.allclose(back.phi.dirs, spec.phi.dirs)
    assert np.allclose(back.phi.masses, spec.phi.masses)


def test_section_params_cross_plane():
    spec = cross_spec()
    sec = section_params(spec, L_STAR)
    assert abs(sec.gamma_section - 2.0 / 3.0) <= 1e-12
    assert sec.phi_section.natoms == 4
    assert np.allclose(sec.phi_section.masses, 0.25)
    assert np.all(np.abs(sec.phi_section.dirs @ np.eye(3)[2]) < 1e-12)


def test_hyperplane_count_and_offsets():
    spec = cross_spec()
    rng = np.random.default_rng(61)
    counts = []
    offsets = []
    for _ in range(2000):
        planes = sample_hyperplanes(spec, 5.0, rng)
        counts.append(len(planes))
        offsets.extend(h.offset for h in planes)
    mean = np.mean(counts)
    se = np.std(counts, ddof=1) / np.sqrt(len(counts))
    assert abs(mean - 10.0) <= 3.0 * se
    offsets = np.asarray(offsets)
    assert np.all(offsets > 0.0) and np.all(offsets <= 5.0)
    # offsets are uniform on (0, radius)
    p = stats.kstest(offsets, stats.uniform(0.0, 5.0).cdf).pvalue
    assert p > 0.01


def test_hyperplane_direction_frequencies():
    spec = cross_spec()
    rng = np.random.default_rng(62)
    normals = []
    while len(normals) < 10_000:
        normals.extend(h.normal for h in sample_hyperplanes(spec, 5.0, rng))
    normals = np.asarray(normals[:10_000])
    n = len(normals)
    for atom, mass in zip(spec.phi.dirs, spec.phi.masses):
        hits = int(np.sum(np.linalg.norm(normals - atom, axis=1) < 1e-9))
        band = 3.0 * np.sqrt(n * mass * (1.0 - mass))
        assert abs(hits - n * mass) <= band


def test_zero_cell_basics():
    spec = cross_spec()
    rng = np.random.default_rng(63)
    for _ in range(50):
        cell = zero_cell(spec, rng)
        assert cell.dim == 3
        assert not cell.clipped
        assert np.all(cell.facet_offsets > 0.0)   # o interior


def test_zero_cell_deterministic_replay():
    spec = cross_spec()
    a = zero_cell(spec, np.random.default_rng(99))
    b = zero_cell(spec, np.random.default_rng(99))
    assert np.array_equal(a.verts, b.verts)


def test_zero_cell_2d_mean_volume_split_half():
    # one-sided axis rate 2*gamma*m = 1/2: sides are Gamma(2, scale 2),
    # so the mean cell area is 16
    spec = cross_spec(2)
    rng = np.random.default_rng(64)
    vols = np.array([zero_cell(spec, rng).volume() for _ in range(10_000)])
    half = len(vols) // 2
    a, b = vols[:half], vols[half:]
    gap_se = np.sqrt(np.var(a, ddof=1) / half + np.var(b, ddof=1) / half)
    assert abs(a.mean() - b.mean()) <= 3.0 * gap_se
    se = vols.std(ddof=1) / np.sqrt(len(vols))
    assert abs(vols.mean() - 16.0) <= 3.0 * se


def test_zero_cell_scaling_covariance():
    rng = np.random.default_rng(65)
    base = cross_spec(2, gamma=1.0)
    double = cross_spec(2, gamma=2.0)
    v1 = np.array([zero_cell(base, rng).volume() for _ in range(10_000)])
    v2 = np.array([zero_cell(double, rng).volume() for _ in range(10_000)])
    # doubling the intensity halves lengths: rescale areas by 2^2
    p = stats.ks_2samp(v1, 4.0 * v2).pvalue
    assert p > 0.01


def test_section_cell_mean_volume():
    # Gamma(2, scale 3) sides in the coordinate plane: mean area 36
    spec = cross_spec()
    rng = np.random.default_rng(66)
    cells = [zero_cell_in_section(spec, L_STAR, rng) for _ in range(2500)]
    vols = np.array([c.volume() for c in cells])
    se = vols.std(ddof=1) / np.sqrt(len(vols))
    assert abs(vols.mean() - 36.0) <= 3.0 * se
    for c in cells[:20]:
        assert c.direction_space() is L_STAR or np.allclose(
            c.direction_space().frame, L_STAR.frame)


def test_section_flat_count_matches_section_intensity():
    spec = cross_spec()
    sec = section_params(spec, L_STAR)
    rng = np.random.default_rng(67)
    radius = 4.0
    counts = []
    for _ in range(2000):
        planes = sample_hyperplanes(spec, radius, rng)
        hits = 0
        for h in planes:
            trace = np.linalg.norm(h.normal @ L_STAR.frame)
            if trace > 1e-12 and h.offset <= radius * trace:
                hits += 1
        counts.append(hits)
    mean = np.mean(counts)
    se = np.std(counts, ddof=1) / np.sqrt(len(counts))
    assert abs(mean - 2.0 * sec.gamma_section * radius) <= 3.0 * se


def test_section_of_cell_equals_cell_of_section():
    spec = cross_spec()
    rng = np.random.default_rng(68)
    direct = np.array([
        section_of_cell(zero_cell(spec, rng), L_STAR).volume()
        for _ in range(1500)])
    within = np.array([
        zero_cell_in_section(spec, L_STAR, rng).volume()
        for _ in range(1500)])
    assert stats.ks_2samp(direct, within).pvalue > 0.01


def test_direction_distribution_cross():
    q = intersection_direction_distribution(cross_spec(), 2)
    assert len(q.subspaces) == 3
    assert np.allclose(q.weights, 1.0 / 3.0, atol=1e-12)
    for i in range(3):
        axes = tuple(j for j in range(3) if j != i)
        assert abs(q.weight_of(Subspace.coordinate(3, axes)) - 1.0 / 3.0) \
            <= 1e-12


def test_direction_distribution_asymmetric_lines():
    phi = make_even([(np.eye(3)[0], 0.6), (np.eye(3)[1], 0.2),
                     (np.eye(3)[2], 0.2)])
    q = intersection_direction_distribution(ProcessSpec(1.0, phi), 1)
    want = {2: 3.0 / 7.0, 1: 3.0 / 7.0, 0: 1.0 / 7.0}
    for axis, weight in want.items():
        line = Subspace(np.eye(3)[:, [axis]])
        assert abs(q.weight_of(line) - weight) <= 1e-12


def test_direction_distribution_gram_factor():
    # non-orthogonal normals scale pair weights by the parallelogram area
    tilted = np.array([1.0, 1.0, 0.0]) / np.sqrt(2.0)
    phi = make_even([(np.eye(3)[0], 0.5), (tilted, 0.3), (np.eye(3)[2], 0.2)])
    q = intersection_direction_distribution(ProcessSpec(1.0, phi), 1)
    raw = {
        "e1^tilted": 0.5 * 0.3 * np.sin(np.pi / 4.0),
        "e1^e3": 0.5 * 0.2,
        "tilted^e3": 0.3 * 0.2,
    }
    lines = {
        "e1^tilted": Subspace(np.eye(3)[:, [2]]),
        "e1^e3": Subspace(np.eye(3)[:, [1]]),
        "tilted^e3": Subspace(np.array([[1.0], [-1.0], [0.0]])
                              / np.sqrt(2.0)),
    }
    total = sum(raw.values())
    for name, line in lines.items():
        assert abs(q.weight_of(line, tol=1e-6) - raw[name] / total) <= 1e-12


def test_flat_distribution_sampling_frequencies():
    q = intersection_direction_distribution(cross_spec(), 2)
    rng = np.random.default_rng(69)
    counts = np.zeros(3)
    n = 6000
    for _ in range(n):
        s = q.sample(rng)
        for i, ref in enumerate(q.subspaces):
            if abs(abs(np.linalg.det(ref.frame.T @ s.frame)) - 1.0) < 1e-9:
                counts[i] += 1
    for c in counts:
        band = 3.0 * np.sqrt(n * (1.0 / 3.0) * (2.0 / 3.0))
        assert abs(c - n / 3.0) <= band


def test_flat_distribution_validation():
    L = Subspace.coordinate(3, (0, 1))
    with pytest.raises(ValueError):
        FlatDistribution(((L, 0.5), (L, 0.5)))


def test_weighted_typical_face_directions_and_conditional_law():
    spec = cross_spec()
    rng = np.random.default_rng(70)
    faces = [sample_weighted_typical_face(spec, 2, rng)
             for _ in range(10_000)]
    q = intersection_direction_distribution(spec, 2)
    counts = np.zeros(3)
    star_vols = []
    for f in faces:
        carrier = f.direction_space()
        assert q.weight_of(carrier) > 0.0
        for i, ref in enumerate(q.subspaces):
            if abs(abs(np.linalg.det(ref.frame.T @ carrier.frame)) - 1.0) \
                    < 1e-9:
                counts[i] += 1
                if np.allclose(ref.projector(), L_STAR.projector()):
                    star_vols.append(f.volume())
    assert stats.chisquare(counts).pvalue > 0.01
    rng2 = np.random.default_rng(71)
    section = np.array([zero_cell_in_section(spec, L_STAR, rng2).volume()
                        for _ in range(2500)])
    assert stats.ks_2samp(np.array(star_vols), section).pvalue > 0.01
