import pytest

from nearfield import SystemConfig, build_spherical_codebook, desk_profile


@pytest.fixture(scope="session")
def small_config():
    """Tiny geometry for fast unit tests."""
    return SystemConfig(
        carrier_freq_hz=30e9,
        bandwidth_hz=100e6,
        num_subcarriers=4,
        num_antennas=64,
        antenna_spacing_m=0.005,
        num_rf_chains=2,
        num_pilot_slots=8,
    )


@pytest.fixture(scope="session")
def small_codebook(small_config):
    return build_spherical_codebook(small_config, 0.55, 0.25)


@pytest.fixture(scope="session")
def desk_spec():
    return desk_profile()


@pytest.fixture(scope="session")
def desk_codebook(desk_spec):
    return build_spherical_codebook(desk_spec.system, desk_spec.delta, desk_spec.r_min_m)
