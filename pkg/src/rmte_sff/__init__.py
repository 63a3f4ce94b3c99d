"""Spectral form factor of coupled chaotic Floquet systems: random matrix
transition ensembles, coupled kicked rotors, and their large-N theory."""

__version__ = "0.1.0"

from .ensemble import EnsembleSpec
from .errors import (
    AccuracyError,
    CapacityError,
    ConfigError,
    ConvergenceError,
    DimensionError,
    DivergenceError,
    DomainError,
    RealizationError,
    RmteError,
    ThoulessNotFound,
    UnsupportedOrderError,
)
from .models import (
    BlochPhases,
    EigenphaseSet,
    FloquetOperator,
    KickedRotorParams,
    RmteParams,
    build_kicked_rotor_pair,
    build_rmte,
    eigenphases,
)
from .rng import PhaseDistribution, RngStream, characteristic_function, sample_coupling_phases, sample_cue
from .spectra import (
    SffEstimate,
    TimeGrid,
    estimate_sff,
    extract_thouless,
    level_spacings,
    smooth_moving_average,
    trace_powers,
    wigner_surmise,
)
