"""Execution bridge between the search loop and heuristic code."""

from heurevo.bridge.builtins import (
    get_builtin,
    list_builtin_heuristics,
    register_builtin,
)
from heurevo.bridge.pool import (
    DEFAULT_MEMORY_BYTES,
    DEFAULT_WALL_SECONDS,
    BridgeResult,
    ExecutionLimits,
    WorkerBridge,
    source_digest,
)

__all__ = [
    "BridgeResult",
    "DEFAULT_MEMORY_BYTES",
    "DEFAULT_WALL_SECONDS",
    "ExecutionLimits",
    "WorkerBridge",
    "get_builtin",
    "list_builtin_heuristics",
    "register_builtin",
    "source_digest",
]
