"""Exception hierarchy shared by all modules."""


class TonksError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(TonksError, ValueError):
    """An argument is outside its documented domain."""


class InvalidStateError(TonksError, ValueError):
    """A state object violates an invariant (orthonormality, Hermiticity, ...)."""


class GridTooSmallError(TonksError):
    """A stationary state has not decayed at the grid boundary."""

    def __init__(self, index, amplitude, threshold):
        self.index = index
        self.amplitude = amplitude
        self.threshold = threshold
        super().__init__(
            f"orbital {index} has boundary amplitude {amplitude:.3e} "
            f"(threshold {threshold:.1e}); enlarge the grid"
        )


class NumericalError(TonksError, ArithmeticError):
    """Base for numerical failures (mapped to exit code 3 by the CLI)."""


class PropagationDivergedError(NumericalError):
    def __init__(self, step, drift):
        self.step = step
        self.drift = drift
        super().__init__(f"norm drift {drift:.3e} at step {step}")


class DesignInfeasibleError(NumericalError):
    """The scaling factor became non-positive, so no ramp can be inverted."""


class OracleFailure(NumericalError):
    """The brute-force reference computation failed."""


class ConfigError(TonksError):
    """Invalid experiment configuration (mapped to exit code 2 by the CLI)."""

    def __init__(self, message, lineno=None, field=None):
        self.lineno = lineno
        self.field = field
        prefix = f"line {lineno}: " if lineno is not None else ""
        super().__init__(prefix + message)
