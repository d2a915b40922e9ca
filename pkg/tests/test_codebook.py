import math

import numpy as np
import pytest

from nearfield import (
    ConfigurationError,
    FAR_FIELD,
    SystemConfig,
    UcaGeometry,
    azimuth_grid,
    build_angular_codebook,
    build_polar_codebook,
    build_spherical_codebook,
    coherence_stats,
    column_correlation,
    distance_grid,
    elevation_grid,
    far_field_steering,
    first_j0_zero,
    near_field_steering,
    solve_beta_delta,
    uca_radius,
)
from nearfield.codebook import (
    export_grid_text,
    export_matrix_binary,
    load_grid_text,
    load_matrix_binary,
    min_codebook_distance,
)

# Frozen paper-scale grid constants (lambda = 0.01 m, N = 512, delta = 0.55).
PAPER_T = 106
PAPER_S_AT_PLANE = 668
PAPER_AZIMUTH_STEP = 0.009393825
PAPER_Z_CAP = 18.223103
PAPER_RINGS = (18.223103, 9.111552, 6.074368, 4.555776)


def paper_geometry():
    radius = uca_radius(0.005, 512)
    return radius, 0.01, first_j0_zero()


def count_oracle(radius, wavelength, alpha, r_min, beta):
    """Independent re-enumeration of the three nested sampling loops."""
    z_cap = math.pi * radius * radius / (2.0 * wavelength * beta)
    elevation_ratio = wavelength * alpha / (2.0 * math.pi * radius)
    t_max = math.floor(1.0 / elevation_ratio)
    total = 0
    per_level = []
    for t in range(t_max + 1):
        theta = math.asin(min(1.0, t * elevation_ratio))
        if theta == 0.0:
            total += 1
            per_level.append((t, 1, 1))
            continue
        azimuth_arg = wavelength * alpha / (4.0 * math.pi * radius * math.sin(theta))
        if azimuth_arg > 1.0:
            azimuths = 1
        else:
            azimuths = math.floor(math.pi / math.asin(azimuth_arg)) + 1
        rings = 1
        z = 1
        while z_cap * math.sin(theta) ** 2 / z >= r_min:
            rings += 1
            z += 1
        total += azimuths * rings
        per_level.append((t, azimuths, rings))
    return total, per_level


def test_elevation_grid_starts_at_zero_and_increases():
    radius, wavelength, alpha = paper_geometry()
    thetas = elevation_grid(radius, wavelength, alpha)
    assert thetas[0] == 0.0
    assert all(a < b for a, b in zip(thetas, thetas[1:]))
    assert thetas[-1] <= 0.5 * math.pi + 1e-12


def test_elevation_grid_paper_count():
    radius, wavelength, alpha = paper_geometry()
    assert len(elevation_grid(radius, wavelength, alpha)) == PAPER_T + 1


def test_elevation_grid_small_array_count():
    radius = uca_radius(0.005, 64)
    assert radius == pytest.approx(0.050950, abs=1e-6)
    assert len(elevation_grid(radius, 0.01, first_j0_zero())) == 13 + 1


def test_azimuth_grid_paper_plane_count_and_step():
    radius, wavelength, alpha = paper_geometry()
    phis = azimuth_grid(radius, wavelength, alpha, 0.5 * math.pi)
    assert len(phis) == PAPER_S_AT_PLANE + 1
    assert phis[0] == 0.0
    assert phis[1] == pytest.approx(PAPER_AZIMUTH_STEP, abs=1e-8)
    assert all(a < b for a, b in zip(phis, phis[1:]))
    assert phis[-1] <= 2.0 * math.pi + 1e-12


def test_azimuth_grid_degenerate_small_array():
    assert azimuth_grid(1e-5, 0.01, first_j0_zero(), 0.5 * math.pi) == [0.0]


def test_azimuth_grid_rejects_zero_elevation():
    with pytest.raises(ValueError):
        azimuth_grid(0.4, 0.01, first_j0_zero(), 0.0)


def test_distance_grid_paper_rings():
    rings = distance_grid(0.5 * math.pi, PAPER_Z_CAP, 4.0)
    assert rings[0] == FAR_FIELD
    assert len(rings) == 1 + len(PAPER_RINGS)
    for got, expected in zip(rings[1:], PAPER_RINGS):
        assert got == pytest.approx(expected, abs=1e-5)
    finite = rings[1:]
    assert all(a > b for a, b in zip(finite, finite[1:]))
    assert all(r >= 4.0 for r in finite)


def test_distance_grid_far_field_only_when_cap_below_r_min():
    assert distance_grid(0.1, 1.0, 4.0) == [FAR_FIELD]


def test_paper_z_cap_composition():
    radius, wavelength, _ = paper_geometry()
    beta = solve_beta_delta(0.55)
    z_cap = math.pi * radius**2 / (2.0 * wavelength * beta)
    assert z_cap == pytest.approx(PAPER_Z_CAP, abs=1e-5)


def test_spherical_codebook_columns_unit_norm(small_codebook):
    norms = np.linalg.norm(small_codebook.matrix, axis=0)
    assert np.allclose(norms, 1.0, atol=1e-12)


def test_spherical_codebook_matches_count_oracle(small_config, small_codebook):
    total, per_level = count_oracle(
        small_config.radius_m,
        small_config.wavelength_m,
        first_j0_zero(),
        0.25,
        solve_beta_delta(0.55),
    )
    assert small_codebook.num_columns == total
    by_level = {}
    for point in small_codebook.grid:
        t, s, z = point.indices
        azimuths, rings = by_level.get(t, (0, 0))
        by_level[t] = (max(azimuths, s + 1), max(rings, z + 1))
    assert by_level == {t: (azimuths, rings) for t, azimuths, rings in per_level}


def test_spherical_codebook_deterministic(small_config, small_codebook):
    again = build_spherical_codebook(small_config, 0.55, 0.25)
    assert np.array_equal(again.matrix, small_codebook.matrix)
    assert again.grid == small_codebook.grid


def test_spherical_codebook_grid_consistency(small_codebook):
    indices = [p.indices for p in small_codebook.grid]
    assert len(indices) == len(set(indices))
    for point in small_codebook.grid:
        assert point.is_far_field == (point.indices[2] == 0)
        if not point.is_far_field:
            assert point.distance_m >= 0.25


def test_spherical_codebook_zenith_contributes_one_column(small_codebook):
    zenith = [p for p in small_codebook.grid if p.indices[0] == 0]
    assert len(zenith) == 1
    assert zenith[0].is_far_field


def test_spherical_codebook_columns_match_direct_steering(small_config, small_codebook):
    geom = UcaGeometry.from_config(small_config)
    lam = small_config.wavelength_m
    rng = np.random.default_rng(0)
    for col in rng.choice(small_codebook.num_columns, size=20, replace=False):
        point = small_codebook.grid[col]
        if point.is_far_field:
            expected = far_field_steering(point.elevation_rad, point.azimuth_rad, geom, lam)
        else:
            expected = near_field_steering(
                point.distance_m, point.elevation_rad, point.azimuth_rad, geom, lam
            )
        assert np.array_equal(small_codebook.matrix[:, col], expected)


def test_spherical_codebook_rejects_r_min_inside_reactive_region(small_config):
    floor_m = min_codebook_distance(small_config)
    with pytest.raises(ConfigurationError) as err:
        build_spherical_codebook(small_config, 0.55, 0.5 * floor_m)
    assert f"{floor_m:.6g}" in str(err.value)


def test_spherical_codebook_rejects_bad_delta(small_config):
    with pytest.raises(ConfigurationError):
        build_spherical_codebook(small_config, 0.0, 0.25)


def test_polar_codebook_is_coplanar_subset(small_config, small_codebook):
    polar = build_polar_codebook(small_config, 0.55, 0.25)
    assert all(p.elevation_rad == 0.5 * math.pi for p in polar.grid)
    assert polar.num_columns <= small_codebook.num_columns


def test_polar_codebook_paper_count():
    config = SystemConfig(30e9, 100e6, 4, 512, 0.005, 4, 32)
    polar = build_polar_codebook(config, 0.55, 4.0)
    assert polar.num_columns == (PAPER_S_AT_PLANE + 1) * (len(PAPER_RINGS) + 1)


def test_angular_codebook_is_unitary(small_config):
    angular = build_angular_codebook(small_config)
    n = small_config.num_antennas
    assert angular.num_columns == n
    gram = angular.matrix.conj().T @ angular.matrix
    assert np.allclose(gram, np.eye(n), atol=1e-10)
    assert np.allclose(angular.matrix[:, 0], 1.0 / math.sqrt(n), atol=1e-14)


def test_column_correlation_basic_cases(small_config):
    angular = build_angular_codebook(small_config)
    b0 = angular.matrix[:, 0]
    b1 = angular.matrix[:, 1]
    assert column_correlation(b0, b0) == pytest.approx(1.0, abs=1e-12)
    assert column_correlation(b0, b1) < 1e-10
    with pytest.raises(ValueError):
        column_correlation(b0, b1[:-1])


def test_adjacent_ring_correlation_tracks_threshold():
    # Eq.-13-style check at paper scale: adjacent rings should correlate
    # near delta = 0.55; the Bessel relation is approximate, so +/- 0.2.
    geom = UcaGeometry.from_layout(512, 0.005)
    rings = distance_grid(0.5 * math.pi, PAPER_Z_CAP, 4.0)
    columns = [far_field_steering(0.5 * math.pi, 0.0, geom, 0.01)]
    columns += [
        near_field_steering(r, 0.5 * math.pi, 0.0, geom, 0.01) for r in rings[1:]
    ]
    for a, b in zip(columns, columns[1:]):
        assert 0.35 <= column_correlation(a, b) <= 0.75


def test_adjacent_elevation_correlation_matches_bessel_prediction():
    # The sampling rule nulls |J0(2 pi R delta_sin_theta / lambda)| for
    # neighbouring elevations; the exact inner product should stay within
    # 0.15 of that prediction at the far-field ring.
    from nearfield import bessel_j0

    geom = UcaGeometry.from_layout(512, 0.005)
    radius, wavelength, alpha = paper_geometry()
    thetas = elevation_grid(radius, wavelength, alpha)
    vectors = [far_field_steering(theta, 0.0, geom, wavelength) for theta in thetas]
    for (theta_a, a), (theta_b, b) in zip(zip(thetas, vectors), zip(thetas[1:], vectors[1:])):
        predicted = abs(
            bessel_j0(2.0 * math.pi * radius * (math.sin(theta_b) - math.sin(theta_a)) / wavelength)
        )
        assert abs(column_correlation(a, b) - predicted) < 0.15


def test_adjacent_ring_correlation_matches_bessel_prediction():
    # Rings are spaced so beta = pi R^2 sin^2(theta)/(2 lambda) |1/r_p - 1/r_q|
    # equals beta_delta between neighbours; exact correlations may drift from
    # |J0(beta)| by up to 0.2.
    from nearfield import bessel_j0

    geom = UcaGeometry.from_layout(512, 0.005)
    radius, wavelength, _ = paper_geometry()
    beta_delta = solve_beta_delta(0.55)
    z_cap = math.pi * radius**2 / (2.0 * wavelength * beta_delta)
    rings = distance_grid(0.5 * math.pi, z_cap, 4.0)[1:]
    columns = [near_field_steering(r, 0.5 * math.pi, 0.0, geom, wavelength) for r in rings]
    for (r_a, a), (r_b, b) in zip(zip(rings, columns), zip(rings[1:], columns[1:])):
        beta = math.pi * radius**2 / (2.0 * wavelength) * abs(1.0 / r_a - 1.0 / r_b)
        assert beta == pytest.approx(beta_delta, rel=1e-9)
        assert abs(column_correlation(a, b) - abs(bessel_j0(beta))) < 0.2


def test_coherence_stats_single_column(small_config):
    book = build_angular_codebook(small_config)
    single = type(book)(book.matrix[:, :1], (book.grid[0],), None)
    stats = coherence_stats(single, 10)
    assert stats.random_pairs.count == 0
    assert stats.adjacent_azimuth.count == 0


def test_coherence_stats_dft_codebook(small_config):
    stats = coherence_stats(build_angular_codebook(small_config), 500, seed=3)
    assert stats.adjacent_azimuth.max < 1e-10
    assert stats.random_pairs.max < 1e-10


def test_coherence_stats_desk_codebook(desk_codebook):
    stats = coherence_stats(desk_codebook, 1000, seed=0)
    assert stats.adjacent_elevation.mean < 0.3
    assert 0.35 <= stats.adjacent_distance.mean <= 0.75
    again = coherence_stats(desk_codebook, 1000, seed=0)
    assert again == stats


def test_coherence_stats_rejects_zero_budget(small_codebook):
    with pytest.raises(ValueError):
        coherence_stats(small_codebook, 0)


def test_grid_text_round_trip(tmp_path, small_codebook):
    path = tmp_path / "grid.txt"
    export_grid_text(small_codebook, path)
    assert load_grid_text(path) == small_codebook.grid


def test_matrix_binary_round_trip(tmp_path, small_codebook):
    path = tmp_path / "matrix.bin"
    export_matrix_binary(small_codebook, path)
    loaded = load_matrix_binary(path)
    assert np.array_equal(loaded, small_codebook.matrix)
    with open(path, "rb") as handle:
        header = handle.read(16)
    assert header[:4] == b"SPHW"
    n = int.from_bytes(header[8:12], "little")
    g = int.from_bytes(header[12:16], "little")
    assert (n, g) == small_codebook.matrix.shape


def test_matrix_binary_rejects_corrupt_header(tmp_path):
    path = tmp_path / "broken.bin"
    path.write_bytes(b"NOPE" + bytes(12))
    with pytest.raises(ValueError):
        load_matrix_binary(path)
