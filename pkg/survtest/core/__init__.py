"""Core estimators and homogeneity tests."""

from .exceptions import (
    SurvTestError,
    InvalidInputError,
    ConfigError,
    NoObservableCategoriesError,
    QuantileNotAttainedError,
    NumericalError,
    NotComputableError,
    DegenerateCovarianceError,
    GateError,
    SimulationError,
)
from .base import (
    Observation,
    ParsedSample,
    RiskTable,
    CategoryRange,
    WeightKind,
    WeightSpec,
    HomogeneityResult,
)
from .parser import ObservationParser, ingest_csv
from .survival_data import build_risk_table, category_range, type2_stop
from .logrank import LogRankState, logrank_test, logrank_test_type2
from .cvm import cvm_test

__all__ = [
    # Exceptions
    "SurvTestError",
    "InvalidInputError",
    "ConfigError",
    "NoObservableCategoriesError",
    "QuantileNotAttainedError",
    "NumericalError",
    "NotComputableError",
    "DegenerateCovarianceError",
    "GateError",
    "SimulationError",
    # Types
    "Observation",
    "ParsedSample",
    "RiskTable",
    "CategoryRange",
    "WeightKind",
    "WeightSpec",
    "HomogeneityResult",
    # Operations
    "ObservationParser",
    "ingest_csv",
    "build_risk_table",
    "category_range",
    "type2_stop",
    "LogRankState",
    "logrank_test",
    "logrank_test_type2",
    "cvm_test",
]
