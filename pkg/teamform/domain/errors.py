"""Error hierarchy for the laboratory.

Every error derives from ``TeamformError`` and from the closest builtin, so callers can
catch either the package base class or ``ValueError``/``RuntimeError``.
"""


class TeamformError(Exception):
    """Base class for all package errors."""


class InvalidCoalitionError(TeamformError, ValueError):
    """A coalition references agents outside the board."""


class PreconditionError(TeamformError, ValueError):
    """An operation was called with arguments violating its precondition."""


class BudgetExceededError(TeamformError, ValueError):
    """A computation would exceed its enumeration budget."""


class UnsupportedWeightsError(TeamformError, ValueError):
    """An integer-only algorithm received non-integer weights."""


class DistributionInfeasibleError(TeamformError, RuntimeError):
    """A board distribution rejected too many consecutive samples."""


class BoardParseError(TeamformError, ValueError):
    """A board file line could not be parsed."""

    def __init__(self, line_number: int, message: str):
        """Initialize with the offending line number.

        Args:
            line_number: 1-based line number in the board file
            message: Description of the problem
        """
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class IllegalActionError(TeamformError, ValueError):
    """An environment received an action not allowed in the current state."""


class ConfigError(TeamformError, ValueError):
    """Configuration is missing or inconsistent."""


class ContractError(TeamformError, ValueError):
    """Array shapes or sequence lengths do not match."""


class TrainingFailureError(TeamformError, RuntimeError):
    """Training produced non-finite parameters."""

    def __init__(self, seat: int, episode: int):
        """Initialize with the diverged seat and episode.

        Args:
            seat: Agent seat whose parameters diverged
            episode: Training episode at which divergence was detected
        """
        super().__init__(f"non-finite parameters for seat {seat} at episode {episode}")
        self.seat = seat
        self.episode = episode
