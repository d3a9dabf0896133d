"""Exception types shared across the package.

ConfigError subclasses map to CLI exit code 2, ConvergenceError subclasses
to exit code 3. The remaining types signal domain errors at call sites and
are not tied to an exit code.
"""


class ConfigError(ValueError):
    """Invalid configuration value or parameter combination."""


class StepTooLargeError(ConfigError):
    """Measurement step too strong for the rate mapping: needs 2*gamma*dt <= 1/4."""


class BudgetExceededError(ConfigError):
    """Requested enumeration would exceed the configured node budget."""


class TargetUnreachableError(ConfigError):
    """Requested entropy target cannot be reached from the initial state."""


class DegenerateAzimuthError(ValueError):
    """Azimuth requested for a state with ax = ay = 0."""


class FeedbackDivergenceError(ValueError):
    """Linearized feedback angle diverges (completely mixed state at t = 0)."""


class ConvergenceError(RuntimeError):
    """A numerical routine failed to converge to the requested tolerance."""


class QuadratureError(ConvergenceError):
    """Adaptive quadrature could not certify the requested relative tolerance."""
