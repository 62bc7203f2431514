"""Exception and warning types shared across the package."""


class SMWError(Exception):
    """Base class for all errors raised by this package."""


class OutOfRangeEndpoint(SMWError):
    """An internal edge endpoint is not a valid node id (or is a self-loop)."""


class NegativeOrNonFiniteWeight(SMWError):
    """Edge weights must be finite and non-negative."""


class LabelOutOfRange(SMWError):
    """A semantic edge names a label id outside the graph's label range."""


class MutexViolation(SMWError):
    """Attempt to merge two clusters that are mutually exclusive."""


class LabelConflict(SMWError):
    """Attempt to combine two different, already assigned labels."""


class AlreadyConnected(SMWError):
    """Attempt to add a mutex between nodes of the same cluster."""


class TooManyLabels(SMWError):
    """The plain mutex watershed only accepts graphs with at most one label."""


class TooLargeForOracle(SMWError):
    """The exhaustive verifier is capped at 18 edges (2^18 subsets)."""


class InconsistentTransform(SMWError):
    """The active-set and cut-indicator objectives disagree."""


class ShapeMismatch(SMWError):
    """Tensor shapes are inconsistent with each other or with the pattern."""


class BadThreshold(SMWError):
    """Affinity thresholds must lie strictly between 0 and 1."""


class OverlappingClassSets(SMWError):
    """Thing and stuff class sets must be disjoint."""


class ParseError(SMWError):
    """A text input could not be parsed; carries the offending line number."""

    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


class BothMasksEmpty(UserWarning):
    """Soft-IoU of two all-zero masks; repulsion defaults to 0."""
