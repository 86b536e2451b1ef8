"""Exception hierarchy shared by all modules (the CLI maps these to exit codes)."""


class RedCbcError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(RedCbcError, ValueError):
    """Invalid input: bad modulus, weights, schedule, parameter range, ..."""


class NonCyclicGroupError(ValidationError):
    """The unit group is not cyclic (b = 2), so no generator ordering exists."""


class InadmissibleFieldError(ValidationError):
    """The random field violates kappa < 1 or the coefficient is not positive."""


class ConditionViolation(ValidationError):
    """A precondition of a theoretical bound does not hold."""


class BudgetExceededError(RedCbcError):
    """The requested evaluation exceeds a configured work or memory budget."""
