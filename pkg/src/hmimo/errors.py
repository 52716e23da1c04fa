"""Exception types. ``category`` is the machine-readable tag reported by the CLI."""


class HmimoError(Exception):
    category = "error"
    exit_code = 1


class ConfigurationError(HmimoError, ValueError):
    category = "config"
    exit_code = 2


class InfeasibleError(ConfigurationError):
    """ZF/MMSE requested with fewer transmit harmonics than streams."""

    category = "infeasible"
    exit_code = 3


class DomainError(HmimoError, ValueError):
    category = "domain"
    exit_code = 2


class SingularityError(HmimoError, ArithmeticError):
    category = "singular"
    exit_code = 5


class DegenerateChannelError(SingularityError):
    category = "degenerate"


class OutputError(HmimoError, OSError):
    category = "io"
    exit_code = 4


class ValidationError(HmimoError, ValueError):
    category = "validation"
    exit_code = 2
