from heurevo.core.config import default_config, validate_config
from heurevo.core.journal import Journal, journal_replay
from heurevo.core.types import (
    FAILURE_SENTINEL,
    FitnessRecord,
    Heuristic,
    JournalEvent,
    RunConfig,
    TaskSpec,
    compute_gain,
)

__all__ = [
    "FAILURE_SENTINEL",
    "FitnessRecord",
    "Heuristic",
    "Journal",
    "JournalEvent",
    "RunConfig",
    "TaskSpec",
    "compute_gain",
    "default_config",
    "journal_replay",
    "validate_config",
]
