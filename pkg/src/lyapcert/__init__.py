"""Extremal Lyapunov exponents and uniform-expansion certificates."""

__version__ = "0.1.0"

from .dynamics import (
    DEFAULT_CRITICAL_TOL,
    Box,
    DoublingMap,
    MapSystem,
    PerturbedDoubling,
    PolynomialMap,
    ProductMap,
    ToralEndomorphism,
    finite_difference_jacobian,
    make_system,
)
from .errors import (
    AcyclicGraphError,
    ConfigError,
    CriticalPointEncountered,
    DegenerateBasisError,
    DimensionMismatch,
    DimensionUnsupported,
    SplittingInvalidError,
    UnsupportedSystemError,
)
from .sphere_bundle import (
    EPS_CRITICAL,
    LiftedOrbitRecord,
    SphereBundlePoint,
    birkhoff_average,
    direct_growth_rate,
    lift_step,
    log_stretch,
    lyapunov_spectrum,
)
from .measures import EmpiricalMeasure, trig_dictionary, weak_star_distance
from .ergodic_opt import (
    ExtremalCycleResult,
    ExtremalEstimates,
    PeriodicOrbit,
    SpherePartition,
    TransitionGraph,
    build_restricted_graph,
    build_transition_graph,
    estimate_extremal_exponents,
    max_mean_cycle,
    min_mean_cycle,
    periodic_orbits,
)
from .certify import (
    Counterexample,
    ExpansionCertificate,
    FibredCertification,
    GridSpec,
    Splitting,
    SplittingReport,
    certify_fibred_expansion,
    certify_uniform_expansion,
    check_splitting,
)
from .config import ExperimentConfig, parse_config
from .experiments import emit, run
