"""Exception types shared across the package."""


class BoostLabError(Exception):
    pass


class ConfigurationError(BoostLabError, ValueError):
    """Unsupported task family, unregistered hypothesis, bad config key."""


class DomainError(BoostLabError, ValueError):
    """Argument outside the operation's domain."""


class ContractError(BoostLabError):
    """A subroutine precondition was detectably violated."""


class PreconditionError(ContractError):
    pass


class StatisticalAnomalyError(BoostLabError, RuntimeError):
    """A randomized loop ran far past its expected length."""


class ResourceError(BoostLabError, RuntimeError):
    """An example source ran dry."""


class DegenerateLearnerError(BoostLabError, RuntimeError):
    """Weak learner returned a hypothesis no better than chance."""
