"""Exception hierarchy. The CLI maps each family onto an exit code."""


class TqetError(Exception):
    pass


class ConfigError(TqetError, ValueError):
    """Invalid chain specification or run configuration (exit code 1)."""


class CapacityError(ConfigError):
    """Requested Hilbert space exceeds the dense-kernel limit."""


class NumericalConsistencyError(TqetError, ArithmeticError):
    """A quantity that must be real/Hermitian/normalized is not (exit code 2)."""


class NotHermitianError(NumericalConsistencyError):
    pass


class UndefinedEfficiencyError(NumericalConsistencyError):
    """Alice's injected energy is too small for a meaningful efficiency."""
