"""Exception hierarchy shared by all solver layers."""


class NcfvError(Exception):
    """Base class for every error raised by the package."""


class DomainError(NcfvError, ValueError):
    """A state left the admissible set of the system."""


class DegenerateSpectrum(NcfvError, ArithmeticError):
    """Two eigenvalues are closer than the hyperbolicity gap."""


class SolverFailure(NcfvError, RuntimeError):
    """An exact Riemann solver could not build a wave fan."""


class RootFindFailure(SolverFailure):
    """No bracketed root was found for an intermediate state."""


class NoSolution(SolverFailure):
    """The Riemann problem has no admissible solution (e.g. vacuum)."""


class NoRealRoot(SolverFailure):
    """A shock curve has no admissible real branch at the requested depth."""


class ConnectFailure(SolverFailure):
    """A travelling-wave boundary value problem did not converge."""


class DegenerateJump(NcfvError, ArithmeticError):
    """The conserved functional does not separate the two side states."""


class SingularSystem(NcfvError, ArithmeticError):
    """The linear system for a two-jump reconstruction is singular."""


class ZeroWaveSpeed(NcfvError, ArithmeticError):
    """All wave speeds vanish and no time-step cap was given."""


class MaxStepsExceeded(NcfvError, RuntimeError):
    """The time loop hit its step cap before reaching the end time."""


class ConfigError(NcfvError, ValueError):
    """Invalid or unparsable run configuration."""

    def __init__(self, message, problems=None):
        super().__init__(message)
        self.problems = list(problems or [message])


class ParseError(ConfigError):
    """The configuration text is not valid TOML."""


class ValidationError(ConfigError):
    """The configuration parsed but violates one or more constraints."""


class IoError(NcfvError, OSError):
    """An output file could not be written or read back."""
