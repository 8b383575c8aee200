"""Domain models, errors and result services."""

from teamform.domain.errors import (
    BoardParseError,
    BudgetExceededError,
    ConfigError,
    ContractError,
    DistributionInfeasibleError,
    IllegalActionError,
    InvalidCoalitionError,
    PreconditionError,
    TeamformError,
    TrainingFailureError,
    UnsupportedWeightsError,
)
from teamform.domain.models import (
    Board,
    BoardDistribution,
    BoardSet,
    BotMode,
    BotParams,
    ComparisonResult,
    CorrespondenceReport,
    EnvKind,
    EvaluationResult,
    NashCorrelationReport,
    NashSolution,
    PAConfig,
    PerturbationReport,
    RegressionReport,
    RLConfig,
    ShapleyVector,
    SplitLabel,
    TPConfig,
)
from teamform.domain.types import Coalition, ExperimentProgressHook, TrainingProgressHook

__all__ = [
    "Board",
    "BoardDistribution",
    "BoardSet",
    "SplitLabel",
    "ShapleyVector",
    "PAConfig",
    "TPConfig",
    "RLConfig",
    "EnvKind",
    "BotMode",
    "BotParams",
    "EvaluationResult",
    "NashSolution",
    "CorrespondenceReport",
    "ComparisonResult",
    "PerturbationReport",
    "RegressionReport",
    "NashCorrelationReport",
    "Coalition",
    "TrainingProgressHook",
    "ExperimentProgressHook",
    "TeamformError",
    "InvalidCoalitionError",
    "PreconditionError",
    "BudgetExceededError",
    "UnsupportedWeightsError",
    "DistributionInfeasibleError",
    "BoardParseError",
    "IllegalActionError",
    "ConfigError",
    "ContractError",
    "TrainingFailureError",
]
