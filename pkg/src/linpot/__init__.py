"""Invariant-based dynamics of a particle in a complex time-dependent linear potential."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DomainError,
    GridCoverageError,
    InstabilityError,
    LinpotError,
    NumericError,
    SingularityError,
    UnsupportedFieldError,
    ValidityWindowError,
    WindowTooSmallError,
)
from .invariant import (
    ClassicalTrajectory,
    InvariantCoefficients,
    MetricParams,
    Scenario,
    ScenarioTables,
    build_coefficients,
    build_metric,
    build_tables,
    classical_trajectory,
    constraint_residuals,
    reference_scenario,
)
from .observables import (
    MomentReport,
    moments_closed_form,
    moments_quadrature,
    normalization,
    uncertainty_series,
)
from .packet import (
    ComplexField,
    density,
    dyson_transform,
    eigen_residual,
    eigenfunction,
    hermitian_packet,
    lr_phase,
    packet_closed_form,
    packet_quadrature,
    weight,
)
from .profiles import (
    CumulativeIntegral,
    Profile,
    SpaceGrid,
    TimeGrid,
    cumulative_integral,
    eval_profile,
    nested_integral,
    parse_profile,
)
from .propagation import (
    DEFAULT_BACKEND,
    PropagatorConfig,
    available_backends,
    propagate_tdse,
    tdse_residual,
)

__all__ = [name for name in dir() if not name.startswith("_")]
