"""Exception hierarchy shared by every udwharvest module."""


class HarvestError(Exception):
    """Base class for all errors raised by udwharvest."""


class DomainError(HarvestError, ValueError):
    """Input outside the domain where a formula or kernel is valid."""


class NotComputedError(DomainError):
    """Element that is deliberately not evaluated (X- at timelike compact-support separation)."""


class QuadratureError(HarvestError, ArithmeticError):
    """The k-integrator could not meet its tolerance within budget."""


class CausalityError(HarvestError, ValueError):
    """Cross-subsystem pair closer than L without allow_timelike."""


class EigensolverError(HarvestError, ArithmeticError):
    pass


class SizeGuardError(HarvestError, ValueError):
    pass


class ConfigError(HarvestError, ValueError):
    """Scenario file or flag combination that cannot be used."""


class NumericalWarning(UserWarning):
    """Recoverable numerical oddity the user should see."""
