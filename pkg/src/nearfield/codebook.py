"""Spherical-domain transform codebooks and coherence diagnostics.

The spherical codebook samples (distance, elevation, azimuth) jointly so
that neighbouring steering vectors land near the first zero of J0, keeping
column correlations at or below a target threshold. Polar (single-elevation)
and angular (DFT) variants back the baseline estimators.
"""

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .channel import (
    ConfigurationError,
    SystemConfig,
    UcaGeometry,
    far_field_steering,
    near_field_steering,
)
from .numerics import first_j0_zero, solve_beta_delta

#: Distance value marking the plane-wave (z = 0) ring of the distance grid.
FAR_FIELD = math.inf

_BINARY_MAGIC = b"SPHW"
_BINARY_VERSION = 1


@dataclass(frozen=True, slots=True)
class GridPoint:
    """One sampled (r, theta, phi) point with its (t, s, z) grid indices."""

    distance_m: float
    elevation_rad: float
    azimuth_rad: float
    indices: tuple

    @property
    def is_far_field(self) -> bool:
        return math.isinf(self.distance_m)


@dataclass(frozen=True)
class CodebookParams:
    """Derived sampling constants: threshold, Bessel root, and distance cap."""

    delta: float
    alpha: float
    beta_delta: float
    z_cap_m: float
    r_min_m: float


@dataclass(frozen=True, eq=False)
class SphericalCodebook:
    """Transform matrix (N x G) plus per-column grid metadata."""

    matrix: np.ndarray = field(repr=False)
    grid: tuple
    params: CodebookParams | None = None

    def __post_init__(self):
        if self.matrix.shape[1] != len(self.grid):
            raise ValueError(
                f"{self.matrix.shape[1]} columns but {len(self.grid)} grid points"
            )

    @property
    def num_antennas(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_columns(self) -> int:
        return self.matrix.shape[1]


def elevation_grid(radius_m: float, wavelength_m: float, alpha: float) -> list:
    """theta_t = asin(t lambda alpha / (2 pi R)) for t = 0..floor(2 pi R/(lambda alpha))."""
    if radius_m <= 0.0 or wavelength_m <= 0.0:
        raise ValueError("radius and wavelength must be positive")
    ratio = wavelength_m * alpha / (2.0 * math.pi * radius_m)
    count = math.floor(1.0 / ratio)
    return [math.asin(min(1.0, t * ratio)) for t in range(count + 1)]


def azimuth_grid(radius_m: float, wavelength_m: float, alpha: float, theta: float) -> list:
    """phi_s = s * 2 asin(lambda alpha / (4 pi R sin theta)) for s = 0..S.

    S = floor(pi / asin(.)), so the last sample lands just short of 2 pi.
    When the asin argument exceeds 1 (tiny array or grazing elevation) the
    grid degenerates to the single point phi = 0.
    """
    if theta <= 0.0:
        raise ValueError("azimuth sampling needs theta > 0")
    arg = wavelength_m * alpha / (4.0 * math.pi * radius_m * math.sin(theta))
    if arg > 1.0:
        return [0.0]
    half_step = math.asin(arg)
    count = math.floor(math.pi / half_step)
    return [s * 2.0 * half_step for s in range(count + 1)]


def distance_grid(theta: float, z_cap_m: float, r_min_m: float) -> list:
    """Far-field ring followed by r_z = Z sin^2(theta) / z down to r_min.

    The returned list is indexed by z: element 0 is the FAR_FIELD sentinel,
    finite rings follow for z = 1, 2, ... while r_z >= r_min.
    """
    if z_cap_m <= 0.0 or r_min_m <= 0.0:
        raise ValueError("z_cap and r_min must be positive")
    scaled = z_cap_m * math.sin(theta) ** 2
    rings = [FAR_FIELD]
    z = 1
    while scaled / z >= r_min_m:
        rings.append(scaled / z)
        z += 1
    return rings


def min_codebook_distance(config: SystemConfig) -> float:
    """Smallest admissible r_min for the geometry: 0.5 sqrt(D^3 / lambda)."""
    return 0.5 * math.sqrt(config.aperture_m**3 / config.wavelength_m)


def _build_from_elevations(config, delta, r_min_m, thetas):
    if not 0.0 < delta < 1.0:
        raise ConfigurationError(f"delta must lie in (0, 1), got {delta}")
    floor_m = min_codebook_distance(config)
    if r_min_m <= floor_m:
        raise ConfigurationError(
            f"r_min={r_min_m} m is inside the reactive region; it must exceed "
            f"0.5*sqrt(D^3/lambda) = {floor_m:.6g} m for this geometry"
        )
    geom = UcaGeometry.from_config(config)
    lam = config.wavelength_m
    alpha = first_j0_zero()
    beta = solve_beta_delta(delta)
    z_cap = math.pi * geom.radius_m**2 / (2.0 * lam * beta)

    grid = []
    for t, theta in enumerate(thetas):
        if theta == 0.0:
            # Near-field effects vanish at grazing elevation; the t = 0 point
            # collapses to the single constant plane-wave column.
            grid.append(GridPoint(FAR_FIELD, 0.0, 0.0, (t, 0, 0)))
            continue
        phis = azimuth_grid(geom.radius_m, lam, alpha, theta)
        rings = distance_grid(theta, z_cap, r_min_m)
        for s, phi in enumerate(phis):
            for z, ring in enumerate(rings):
                grid.append(GridPoint(ring, theta, phi, (t, s, z)))

    matrix = np.empty((config.num_antennas, len(grid)), dtype=np.complex128)
    for col, point in enumerate(grid):
        if point.is_far_field:
            matrix[:, col] = far_field_steering(
                point.elevation_rad, point.azimuth_rad, geom, lam
            )
        else:
            matrix[:, col] = near_field_steering(
                point.distance_m, point.elevation_rad, point.azimuth_rad, geom, lam
            )
    params = CodebookParams(delta, alpha, beta, z_cap, r_min_m)
    return SphericalCodebook(matrix, tuple(grid), params)


def build_spherical_codebook(config: SystemConfig, delta: float, r_min_m: float) -> SphericalCodebook:
    """Joint (elevation x azimuth x distance) codebook.

    Enumerates the elevation grid, and per elevation the azimuth and distance
    grids, appending one steering vector per sampled point (plane-wave column
    for the far-field ring). Deterministic: identical inputs give bit-identical
    matrices.
    """
    thetas = elevation_grid(config.radius_m, config.wavelength_m, first_j0_zero())
    return _build_from_elevations(config, delta, r_min_m, thetas)


def build_polar_codebook(config: SystemConfig, delta: float, r_min_m: float) -> SphericalCodebook:
    """Coplanar baseline: the spherical pipeline restricted to theta = pi/2."""
    return _build_from_elevations(config, delta, r_min_m, [0.5 * math.pi])


def build_angular_codebook(config: SystemConfig) -> SphericalCodebook:
    """Unitary DFT-over-antenna-index codebook (far-field, azimuth-only)."""
    n = config.num_antennas
    idx = np.arange(n)
    matrix = np.exp(-2j * math.pi * np.outer(idx, idx) / n) / math.sqrt(n)
    grid = tuple(
        GridPoint(FAR_FIELD, 0.5 * math.pi, 2.0 * math.pi * g / n, (0, g, 0))
        for g in range(n)
    )
    return SphericalCodebook(matrix, grid, None)


def column_correlation(b1: np.ndarray, b2: np.ndarray) -> float:
    """|b1^H b2| for two unit-norm columns."""
    b1 = np.asarray(b1)
    b2 = np.asarray(b2)
    if b1.shape != b2.shape:
        raise ValueError(f"length mismatch: {b1.shape} vs {b2.shape}")
    return float(abs(np.vdot(b1, b2)))


@dataclass(frozen=True)
class PairStats:
    """Summary of |correlation| over a set of column pairs."""

    count: int
    max: float
    mean: float
    median: float
    q90: float

    @classmethod
    def from_values(cls, values: np.ndarray) -> "PairStats":
        if values.size == 0:
            return cls(0, math.nan, math.nan, math.nan, math.nan)
        return cls(
            int(values.size),
            float(values.max()),
            float(values.mean()),
            float(np.quantile(values, 0.5)),
            float(np.quantile(values, 0.9)),
        )


@dataclass(frozen=True)
class CoherenceStats:
    adjacent_elevation: PairStats
    adjacent_azimuth: PairStats
    adjacent_distance: PairStats
    random_pairs: PairStats


def _pair_correlations(matrix: np.ndarray, left, right, chunk: int = 16384) -> np.ndarray:
    # Chunked so that paper-scale codebooks (~1e5 pairs per axis) never
    # materialise more than `chunk` gathered columns at once.
    if len(left) == 0:
        return np.empty(0)
    left = np.asarray(left)
    right = np.asarray(right)
    out = np.empty(left.size)
    for start in range(0, left.size, chunk):
        stop = start + chunk
        a = matrix[:, left[start:stop]]
        b = matrix[:, right[start:stop]]
        out[start:stop] = np.abs(np.einsum("ij,ij->j", a.conj(), b))
    return out


def coherence_stats(codebook: SphericalCodebook, sample_budget: int, seed: int = 0) -> CoherenceStats:
    """Column-correlation diagnostics.

    Covers every pair of columns adjacent in one grid index (t, s, or z with
    the other two fixed) plus a seeded random sample of up to `sample_budget`
    arbitrary pairs.
    """
    if sample_budget < 1:
        raise ValueError("sample_budget must be >= 1")
    by_index = {point.indices: col for col, point in enumerate(codebook.grid)}
    axes = {0: ([], []), 1: ([], []), 2: ([], [])}
    for (t, s, z), col in by_index.items():
        for axis, neighbour in enumerate(((t + 1, s, z), (t, s + 1, z), (t, s, z + 1))):
            other = by_index.get(neighbour)
            if other is not None:
                axes[axis][0].append(col)
                axes[axis][1].append(other)

    elevation = PairStats.from_values(_pair_correlations(codebook.matrix, *axes[0]))
    azimuth = PairStats.from_values(_pair_correlations(codebook.matrix, *axes[1]))
    distance = PairStats.from_values(_pair_correlations(codebook.matrix, *axes[2]))

    g = codebook.num_columns
    if g < 2:
        random_stats = PairStats.from_values(np.empty(0))
    else:
        rng = np.random.default_rng(seed)
        left = rng.integers(0, g, size=sample_budget)
        right = rng.integers(0, g - 1, size=sample_budget)
        right = np.where(right >= left, right + 1, right)  # exclude i == j
        random_stats = PairStats.from_values(
            _pair_correlations(codebook.matrix, left, right)
        )
    return CoherenceStats(elevation, azimuth, distance, random_stats)


def export_grid_text(codebook: SphericalCodebook, path) -> None:
    """One grid point per line: t,s,z,r,theta,phi (r = inf marks far field)."""
    with open(path, "w", encoding="utf-8") as handle:
        for point in codebook.grid:
            t, s, z = point.indices
            handle.write(
                f"{t},{s},{z},{point.distance_m!r},"
                f"{point.elevation_rad!r},{point.azimuth_rad!r}\n"
            )


def load_grid_text(path) -> tuple:
    """Parse a file written by `export_grid_text`."""
    points = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            t, s, z, r, theta, phi = line.split(",")
            points.append(
                GridPoint(float(r), float(theta), float(phi), (int(t), int(s), int(z)))
            )
    return tuple(points)


def export_matrix_binary(codebook: SphericalCodebook, path) -> None:
    """Raw dump: 16-byte header (magic 'SPHW', version, N, G as little-endian
    u32) followed by the matrix as column-major interleaved re/im float64."""
    n, g = codebook.matrix.shape
    header = _BINARY_MAGIC + struct.pack("<III", _BINARY_VERSION, n, g)
    payload = np.asfortranarray(codebook.matrix.astype("<c16", copy=False))
    with open(path, "wb") as handle:
        handle.write(header)
        handle.write(payload.tobytes(order="F"))


def load_matrix_binary(path) -> np.ndarray:
    """Read a matrix written by `export_matrix_binary`."""
    with open(path, "rb") as handle:
        header = handle.read(16)
        if len(header) != 16 or header[:4] != _BINARY_MAGIC:
            raise ValueError(f"{path}: not a codebook matrix file")
        version, n, g = struct.unpack("<III", header[4:])
        if version != _BINARY_VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        data = np.frombuffer(handle.read(), dtype="<c16")
    if data.size != n * g:
        raise ValueError(f"{path}: expected {n * g} complex values, got {data.size}")
    return data.reshape((n, g), order="F").copy()
