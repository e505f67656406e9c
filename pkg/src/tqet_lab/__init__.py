"""Exact-diagonalization lab for timelike quantum energy teleportation on Ising chains."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CapacityError,
    ConfigError,
    NotHermitianError,
    NumericalConsistencyError,
    UndefinedEfficiencyError,
)
from .model import Chain, ChainSpec, GroundState  # noqa: E402
from .protocol import ProtocolTrace, ece, run_trace  # noqa: E402
from .timelike import CorrelatorSeries, run_series, sync_analysis  # noqa: E402

__all__ = [
    "CapacityError",
    "Chain",
    "ChainSpec",
    "ConfigError",
    "CorrelatorSeries",
    "GroundState",
    "NotHermitianError",
    "NumericalConsistencyError",
    "ProtocolTrace",
    "UndefinedEfficiencyError",
    "ece",
    "run_series",
    "run_trace",
    "sync_analysis",
]
