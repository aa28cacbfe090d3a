"""Entanglement and Bell nonlocality of spin pairs in the XXZ chain."""
from .bethe import AnisotropyPoint, Branch, QuadratureConfig, classify, ground_energy, ground_energy_at, ground_energy_derivative
from .correlations import CorrelationSet, Source, far_correlations, nn_correlations
from .ed import EDConfig, EDResult, Sector, diagonalize, extrapolate
from .errors import AccuracyError, DomainError, MemoryBudgetError, XXZError
from .measures import (
    MeasurementSettings,
    bell_measure_horodecki,
    bell_measure_symmetric,
    chsh_value,
    concurrence_general,
    concurrence_symmetric,
    maximize_chsh,
)
from .pair_state import PairState, Region, classify_region, region_boundaries, symmetric_state
from .sweep import SweepConfig, SweepRecord, detect_transitions, emit, run_sweep

__version__ = "0.1.0"
