"""Quantum speed limits and shortcuts to adiabaticity for hard-core bosons.

A Tonks-Girardeau gas and the free Fermi gas it maps onto share their
single-particle orbitals, so everything here is driven by propagating those
orbitals in a power-law trap ``1/2 lam(t) x^(2q)`` and assembling many-body
quantities from them.
"""
from .errors import (
    ConfigError,
    DesignInfeasibleError,
    GridTooSmallError,
    InvalidArgumentError,
    InvalidStateError,
    NumericalError,
    OracleFailure,
    PropagationDivergedError,
    TonksError,
)
from .manybody import (
    FERMI,
    RSPDM,
    TG,
    CoherenceSpectrum,
    coherence_spectrum,
    density,
    fermi_rspdm,
    many_body_fidelity,
    overlap_matrix,
    rspdm,
    tg_rspdm,
)
from .metrics import (
    QSLReport,
    SpeedSeries,
    TraceDistanceParts,
    average_speed,
    instantaneous_speed,
    qsl_report,
    schatten_norm,
    trace_distance,
    trace_distance_decomposed,
)
from .propagate import RampSchedule, Trajectory, evolve
from .spectral import (
    Grid,
    OrbitalSet,
    PotentialSpec,
    build_grid,
    slater_energy_stats,
    stationary_states,
)
from .sta import (
    ScalingPolynomial,
    STARamp,
    ansatz_energy,
    compression_coefficient,
    design_ramp,
    design_scaling,
    ermakov_residual,
)

__version__ = "0.1.0"
