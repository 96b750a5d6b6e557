"""Evolutionary search over code heuristics for combinatorial optimization.

The package evolves a population of small Python functions (heuristics)
that parameterize classical solvers: guided local search for the TSP, ant
colony construction for bin packing and knapsack, and a plain greedy
constructor. An LLM acts as the variation operator; a fitness predictor
can stand in for expensive evaluations under a confidence-gated accept
rule. Every run writes an append-only journal that supports deterministic
replay and resume.
"""

from heurevo.core.types import (
    FAILURE_SENTINEL,
    FitnessRecord,
    Heuristic,
    JournalEvent,
    RunConfig,
    TaskSpec,
)

__version__ = "0.1.0"

__all__ = [
    "FAILURE_SENTINEL",
    "FitnessRecord",
    "Heuristic",
    "JournalEvent",
    "RunConfig",
    "TaskSpec",
    "__version__",
]
