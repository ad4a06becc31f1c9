"""Exception hierarchy. CLI exit codes hang off these classes."""


class ThermometryError(Exception):
    exit_code = 1


class ConfigError(ThermometryError, ValueError):
    exit_code = 2


class ConvergenceError(ThermometryError, ArithmeticError):
    exit_code = 3


class RegimeError(ThermometryError):
    """A computation was asked for outside the regime where it is valid."""

    exit_code = 4

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class ProbeDecoupledError(RegimeError):
    """Every sampled G(w_m) P_m vanishes, so there is no steady state."""
