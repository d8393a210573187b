"""Absorption analytics for nearest-neighbour random walks on ``0..N``.

Expected occupancy, visit and absorption probabilities and expected times
are computed from Fibonacci-indexed continuants, with a direct tridiagonal
solver and a seeded Monte Carlo simulator as independent checks.
"""

from .analytics import (
    absorption_report,
    constant_walk_x0,
    constant_walk_x0_printed,
    expected_arrivals,
    expected_time,
    occupancy_variance,
    visit_probabilities,
    visit_probability,
)
from .errors import (
    CapacityError,
    DegenerateSpecError,
    FibwalkError,
    NotAbsorbingError,
    OffsetRangeError,
    SpecValidationError,
)
from .fibcore import (
    CoefficientSet,
    TauTable,
    a_explicit,
    a_inhomogeneous,
    a_recurrence,
    fibonacci,
    reduce_column,
    tau,
)
from .oracle import SimulationResult, is_absorbing, simulate, solve_arrivals_direct, solve_time_direct
from .results import AbsorptionReport, ArrivalVector, TimeVector
from .scaled import ScaledReal, normalize
from .specdoc import SpecDocument, parse_spec, serialize
from .walkmodel import (
    Method,
    MethodTag,
    WalkSpec,
    arrival_coeffs_backward,
    arrival_coeffs_forward,
    constant_walk_spec,
    gamblers_ruin_spec,
    reflect,
    time_coeffs_backward,
    time_coeffs_forward,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "a_explicit",
    "a_inhomogeneous",
    "a_recurrence",
    "absorption_report",
    "AbsorptionReport",
    "arrival_coeffs_backward",
    "arrival_coeffs_forward",
    "ArrivalVector",
    "CapacityError",
    "CoefficientSet",
    "constant_walk_spec",
    "constant_walk_x0",
    "constant_walk_x0_printed",
    "DegenerateSpecError",
    "expected_arrivals",
    "expected_time",
    "fibonacci",
    "FibwalkError",
    "gamblers_ruin_spec",
    "is_absorbing",
    "Method",
    "MethodTag",
    "normalize",
    "NotAbsorbingError",
    "occupancy_variance",
    "OffsetRangeError",
    "parse_spec",
    "reduce_column",
    "reflect",
    "ScaledReal",
    "serialize",
    "simulate",
    "SimulationResult",
    "solve_arrivals_direct",
    "solve_time_direct",
    "SpecDocument",
    "SpecValidationError",
    "tau",
    "TauTable",
    "time_coeffs_backward",
    "time_coeffs_forward",
    "TimeVector",
    "validate",
    "visit_probabilities",
    "visit_probability",
    "WalkSpec",
]
