"""UCA geometry, spherical-wave propagation distances, steering vectors,
and multipath OFDM channel synthesis."""

import math
from dataclasses import dataclass, field

import numpy as np

# Propagation speed convention. 3e8 m/s keeps the default carrier's
# half-wavelength spacing at exactly d = 0.005 m (lambda = 0.01 m at 30 GHz),
# which the grid-size constants of the codebook design rely on.
C_LIGHT = 3.0e8


class ConfigurationError(ValueError):
    """A system or run parameter violates its documented constraints."""


def uca_radius(spacing_m: float, num_antennas: int) -> float:
    """Radius of a UCA whose adjacent-antenna chord equals `spacing_m`.

    R = d / (2 sin(pi/N)): the N antennas sit on a circle and consecutive
    ones are exactly one chord of length d apart.
    """
    if num_antennas < 3:
        raise ConfigurationError(
            f"a circular array needs at least 3 antennas, got {num_antennas}"
        )
    if spacing_m <= 0.0:
        raise ConfigurationError(f"antenna spacing must be positive, got {spacing_m}")
    return spacing_m / (2.0 * math.sin(math.pi / num_antennas))


@dataclass(frozen=True)
class SystemConfig:
    """Carrier, array, and pilot parameters defining one experiment."""

    carrier_freq_hz: float
    bandwidth_hz: float
    num_subcarriers: int
    num_antennas: int
    antenna_spacing_m: float
    num_rf_chains: int
    num_pilot_slots: int

    def __post_init__(self):
        if self.num_antennas < 3:
            raise ConfigurationError("num_antennas must be >= 3")
        if self.num_subcarriers < 1:
            raise ConfigurationError("num_subcarriers must be >= 1")
        if self.num_pilot_slots < 1:
            raise ConfigurationError("num_pilot_slots must be >= 1")
        if self.num_rf_chains < 1:
            raise ConfigurationError("num_rf_chains must be >= 1")
        for name in ("carrier_freq_hz", "bandwidth_hz", "antenna_spacing_m"):
            if getattr(self, name) <= 0.0:
                raise ConfigurationError(f"{name} must be strictly positive")

    @property
    def wavelength_m(self) -> float:
        return C_LIGHT / self.carrier_freq_hz

    @property
    def radius_m(self) -> float:
        return uca_radius(self.antenna_spacing_m, self.num_antennas)

    @property
    def aperture_m(self) -> float:
        return 2.0 * self.radius_m

    @property
    def num_measurement_rows(self) -> int:
        return self.num_pilot_slots * self.num_rf_chains

    @property
    def rayleigh_distance_m(self) -> float:
        return 2.0 * self.aperture_m**2 / self.wavelength_m


@dataclass(frozen=True, eq=False)
class UcaGeometry:
    """Antenna ring: radius plus the angular position of every element."""

    radius_m: float
    antenna_azimuths_rad: np.ndarray = field(repr=False)

    @classmethod
    def from_config(cls, config: SystemConfig) -> "UcaGeometry":
        return cls.from_layout(config.num_antennas, config.antenna_spacing_m)

    @classmethod
    def from_layout(cls, num_antennas: int, spacing_m: float) -> "UcaGeometry":
        radius = uca_radius(spacing_m, num_antennas)
        azimuths = 2.0 * math.pi * np.arange(num_antennas) / num_antennas
        return cls(radius, azimuths)

    @property
    def num_antennas(self) -> int:
        return self.antenna_azimuths_rad.size

    @property
    def aperture_m(self) -> float:
        return 2.0 * self.radius_m

    def positions(self) -> np.ndarray:
        """Cartesian (N, 3) coordinates; the ring lies in the z = 0 plane."""
        psi = self.antenna_azimuths_rad
        return np.stack(
            [self.radius_m * np.cos(psi), self.radius_m * np.sin(psi), np.zeros_like(psi)],
            axis=1,
        )


@dataclass(frozen=True)
class PathParams:
    """One propagation path: spherical position of the source plus complex gain.

    Azimuth is stored wrapped into [0, 2pi). Callers are responsible for
    keeping the source outside the array (distance_m > radius).
    """

    distance_m: float
    elevation_rad: float
    azimuth_rad: float
    gain: complex

    def __post_init__(self):
        if self.distance_m <= 0.0:
            raise ValueError(f"path distance must be positive, got {self.distance_m}")
        if not 0.0 < self.elevation_rad <= 0.5 * math.pi:
            raise ValueError(
                f"elevation must lie in (0, pi/2], got {self.elevation_rad}"
            )
        object.__setattr__(self, "azimuth_rad", self.azimuth_rad % (2.0 * math.pi))


@dataclass(frozen=True, eq=False)
class ChannelMatrix:
    """Frequency-domain channel H (N x M); column m belongs to subcarrier m."""

    entries: np.ndarray = field(repr=False)
    config: SystemConfig

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.complex128)
        object.__setattr__(self, "entries", entries)
        n, m = entries.shape
        if n != self.config.num_antennas or m != self.config.num_subcarriers:
            raise ValueError(
                f"channel shape {entries.shape} does not match config "
                f"({self.config.num_antennas}, {self.config.num_subcarriers})"
            )
        if not np.all(np.isfinite(entries)):
            raise ValueError("channel entries must be finite")


def subcarrier_frequencies(config: SystemConfig) -> np.ndarray:
    """f_m = f_c + (2m - M) B / (2M) for m = 1..M."""
    m = np.arange(1, config.num_subcarriers + 1)
    offset = (2 * m - config.num_subcarriers) * config.bandwidth_hz
    return config.carrier_freq_hz + offset / (2.0 * config.num_subcarriers)


def exact_distance(r, theta, phi, antenna_index, geom: UcaGeometry):
    """Euclidean distance from antenna n to the point (r, theta, phi).

    Law of cosines on the triangle (origin, antenna, source):
    sqrt(r^2 + R^2 - 2 R r sin(theta) cos(phi - psi_n)). Broadcasts over
    `antenna_index`.
    """
    if np.any(np.asarray(r) <= 0.0):
        raise ValueError("source distance must be positive")
    psi = np.asarray(geom.antenna_azimuths_rad)[antenna_index]
    radius = geom.radius_m
    projected = 2.0 * radius * r * np.sin(theta) * np.cos(phi - psi)
    return np.sqrt(r * r + radius * radius - projected)


def approx_distance(r, theta, phi, antenna_index, geom: UcaGeometry):
    """Second-order Taylor expansion of `exact_distance` in R/r.

    r - R sin(theta) cos(phi - psi_n) + R^2/(2r) (1 - sin^2 cos^2). Kept for
    validation of the codebook derivation; channel synthesis always uses the
    exact distance.
    """
    psi = np.asarray(geom.antenna_azimuths_rad)[antenna_index]
    radius = geom.radius_m
    cross = np.sin(theta) * np.cos(phi - psi)
    return r - radius * cross + radius * radius / (2.0 * r) * (1.0 - cross * cross)


def near_field_steering(r, theta, phi, geom: UcaGeometry, wavelength_m: float) -> np.ndarray:
    """Unit-norm spherical-wave steering vector for a source at (r, theta, phi).

    Entry n is exp(-j 2pi/lambda (r^(n) - r)) / sqrt(N), with r^(n) the exact
    per-antenna distance.
    """
    if r <= geom.radius_m:
        raise ValueError(
            f"near-field source must lie outside the array: r={r} <= R={geom.radius_m}"
        )
    n = geom.num_antennas
    dist = exact_distance(r, theta, phi, np.arange(n), geom)
    return np.exp(-2j * math.pi / wavelength_m * (dist - r)) / math.sqrt(n)


def far_field_steering(theta, phi, geom: UcaGeometry, wavelength_m: float) -> np.ndarray:
    """Plane-wave (r -> infinity) limit of the steering vector.

    Entry n is exp(+j 2pi/lambda R sin(theta) cos(phi - psi_n)) / sqrt(N).
    """
    psi = geom.antenna_azimuths_rad
    n = geom.num_antennas
    phase = 2.0 * math.pi / wavelength_m * geom.radius_m * np.sin(theta) * np.cos(phi - psi)
    return np.exp(1j * phase) / math.sqrt(n)


def generate_channel(paths, config: SystemConfig) -> ChannelMatrix:
    """Superpose L spherical-wave paths into the N x M channel matrix.

    Column m is sqrt(N/L) sum_l g_l exp(-j k_m r_l) b(r_l, theta_l, phi_l)
    with k_m = 2 pi f_m / c; the steering vectors use the centre wavelength.
    """
    paths = list(paths)
    num_paths = len(paths)
    if num_paths == 0:
        raise ValueError("at least one propagation path is required")
    if num_paths > config.num_antennas:
        raise ValueError(
            f"path count {num_paths} exceeds antenna count {config.num_antennas}"
        )
    geom = UcaGeometry.from_config(config)
    for p in paths:
        if p.distance_m <= geom.radius_m:
            raise ValueError(
                f"path at r={p.distance_m} lies inside the array (R={geom.radius_m})"
            )
    steering = np.column_stack(
        [
            near_field_steering(
                p.distance_m, p.elevation_rad, p.azimuth_rad, geom, config.wavelength_m
            )
            for p in paths
        ]
    )
    wavenumbers = 2.0 * math.pi * subcarrier_frequencies(config) / C_LIGHT
    distances = np.array([p.distance_m for p in paths])
    gains = np.array([p.gain for p in paths], dtype=np.complex128)
    coeffs = gains[:, None] * np.exp(-1j * np.outer(distances, wavenumbers))
    scale = math.sqrt(config.num_antennas / num_paths)
    return ChannelMatrix(scale * (steering @ coeffs), config)


def sample_paths(rng_seed, num_paths, distance_range, theta_range, phi_range):
    """Draw `num_paths` uniformly distributed paths with CN(0, 1) gains.

    Distances, elevations, and azimuths are independent uniforms over the
    given (low, high) ranges; the complex gain is circularly-symmetric
    standard normal. Deterministic for a fixed seed.
    """
    if num_paths < 1:
        raise ValueError("num_paths must be >= 1")
    for name, (lo, hi) in (
        ("distance_range", distance_range),
        ("theta_range", theta_range),
        ("phi_range", phi_range),
    ):
        if not lo < hi:
            raise ValueError(f"{name} must satisfy low < high, got ({lo}, {hi})")
    if distance_range[0] <= 0.0:
        raise ValueError("distance range must be strictly positive")
    if not (0.0 <= theta_range[0] and theta_range[1] <= 0.5 * math.pi):
        raise ValueError("theta range must lie within [0, pi/2]")
    rng = np.random.default_rng(rng_seed)
    r = rng.uniform(*distance_range, size=num_paths)
    theta = rng.uniform(*theta_range, size=num_paths)
    phi = rng.uniform(*phi_range, size=num_paths)
    gains = (rng.standard_normal(num_paths) + 1j * rng.standard_normal(num_paths))
    gains /= math.sqrt(2.0)
    return [
        PathParams(r[i], theta[i], phi[i], complex(gains[i])) for i in range(num_paths)
    ]
