"""Near-field 3D channel estimation for UCA XL-MIMO systems.

Spherical-wave channel synthesis, a Bessel-zero-derived spherical-domain
codebook, simultaneous-OMP sparse recovery, baseline estimators, and a
seeded Monte Carlo experiment harness.
"""

from .channel import (
    C_LIGHT,
    ChannelMatrix,
    ConfigurationError,
    PathParams,
    SystemConfig,
    UcaGeometry,
    approx_distance,
    exact_distance,
    far_field_steering,
    generate_channel,
    near_field_steering,
    sample_paths,
    subcarrier_frequencies,
    uca_radius,
)
from .codebook import (
    FAR_FIELD,
    CoherenceStats,
    GridPoint,
    SphericalCodebook,
    azimuth_grid,
    build_angular_codebook,
    build_polar_codebook,
    build_spherical_codebook,
    coherence_stats,
    column_correlation,
    distance_grid,
    elevation_grid,
)
from .estimator import (
    CombiningMatrix,
    EstimationResult,
    MeasurementSet,
    generate_combining,
    ls_estimate,
    nmse,
    nmse_db,
    oracle_estimate,
    s_somp,
    synthesize_measurements,
)
from .harness import (
    METHODS,
    RunSpec,
    SweepResult,
    SweepRow,
    desk_profile,
    emit_csv,
    paper_profile,
    run_trial,
    sweep_pilot,
    sweep_snr,
)
from .numerics import (
    DegenerateSystemWarning,
    bessel_j0,
    first_j0_zero,
    least_squares_solve,
    solve_beta_delta,
)

__version__ = "0.1.0"
