"""Exception types shared across the package."""


class ErlError(Exception):
    """Base class for all package errors."""


class InvalidBagError(ErlError):
    """A bag refers to node ids outside the graph's node range."""


class GraphParseError(ErlError):
    """Malformed graph input; carries the offending line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GenerationError(ErlError):
    """Infeasible generator parameters."""


class CapacityError(ErlError):
    """Requested computation exceeds a documented size cap."""


class PolicyViolationError(ErlError):
    """A curing policy returned an allocation that breaks its contract."""

    def __init__(self, policy_name, constraint):
        self.policy_name = policy_name
        self.constraint = constraint
        super().__init__(f"policy {policy_name!r} violated: {constraint}")


class ReplayError(ErlError):
    """An event log is inconsistent with the graph it claims to describe."""

    def __init__(self, message, index):
        self.index = index
        super().__init__(f"event {index}: {message}")


class LemmaViolationError(ErlError):
    """A property that must hold for every valid input failed.

    Raised by the trajectory auditors; seeing this on un-tampered inputs
    indicates a bug in the simulator or the resistance tables.
    """

    def __init__(self, message, witness=None):
        self.witness = witness
        super().__init__(message)
