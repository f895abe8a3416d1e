"""Coherence of a pure-dephasing qubit prepared by a nonselective measurement.

Submodules
----------
spectral
    Spectral densities, thermal context and frequency moments.
scheme
    Measurement schemes, N-constants, initial coherence and classification.
dynamics
    Dephasing factor, phase shift and coherence trajectories.
shorttime
    Short-time expansion, time scales and extremal initial velocities.
oracle
    Grid searches, finite differences and exact diagonalization.
"""
__version__ = "0.1.0"

from .dynamics import (
    CoherenceTrajectory,
    asymptotic_magnitude,
    coherence,
    compute_trajectory,
    continuous_coherence,
    dephasing_factor,
    upsilon0,
)
from .errors import (
    ConfigError,
    DegenerateSchemeError,
    DephaseError,
    DivergenceError,
    DomainError,
    OracleDisagreement,
    SingularityError,
    TruncationWarning,
    UnsupportedSpectrumError,
)
from .scheme import (
    MeasurementScheme,
    SchemeTag,
    a_coefficients,
    classify,
    initial_coherence,
    n_constants,
    q_critical,
)
from .shorttime import (
    build_extremal_scheme,
    short_time_profile,
    transition_scan,
    velocity_extrema,
)
from .spectral import (
    DiscreteModes,
    Gapped,
    OhmicLike,
    Tabulated,
    ThermalContext,
    moment,
)
