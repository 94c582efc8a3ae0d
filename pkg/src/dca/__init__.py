"""Dendritic cell algorithm for signal-fusion anomaly detection."""

from .aggregation import Label, classify, compute_mcav, metrics
from .engine import NothingToClassify, PresentationLog, cell_cycle, init_engine, run, tissue_update
from .fusion import (
    MAPPINGS,
    PRESET_WEIGHTS,
    MappingCode,
    OutputSignals,
    WeightSet,
    apply_mapping,
    default_weights,
    derive_weights,
    fuse,
)
from .model import (
    AntigenEvent,
    Context,
    DendriticCell,
    McavReport,
    Params,
    PresentationRecord,
    SignalMatrix,
    validate_params,
)
from .sessions import Dataset, Scenario, SessionConfig, derive_signals, generate_corpus, generate_session

__version__ = "0.1.0"
