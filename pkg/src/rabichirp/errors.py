"""Exception hierarchy.

Kept deliberately small: loader problems, degenerate level pairs that make
the design formulas blow up, fixed-point divergence, and integrator
failures. The CLI maps these onto its exit codes.
"""


class RabichirpError(Exception):
    """Base class for all library errors."""


class SystemLoadError(RabichirpError):
    """A level-system file failed validation; message names the entry."""


class DegeneracyError(RabichirpError):
    """Two levels are degenerate where a sign or a 1/(w_ab - w_p) is needed."""


class DivergenceError(RabichirpError):
    """A fixed-point denominator collapsed during chirp iteration."""


class IntegrationError(RabichirpError):
    """The ODE integrator could not proceed (step-size underflow)."""

    def __init__(self, message: str, t_reached: float):
        super().__init__(message)
        self.t_reached = t_reached


class ConfigError(RabichirpError):
    """Bad run configuration (CLI-level validation)."""
