"""Registry of trusted native heuristics.

Builtins execute in-process (no subprocess round-trip) and serve as seed
functions and baselines. LLM-generated source never registers here; it
runs through an external worker, or through the canned-corpus mapping for
scripted offline runs (see heurevo.corpus).
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from heurevo.errors import ConfigError

_REGISTRY: dict[str, tuple[str, str, Callable]] = {}


def register_builtin(name: str, task_id: str, description: str, fn: Callable) -> None:
    if name in _REGISTRY:
        raise ConfigError(f"builtin heuristic {name!r} already registered")
    _REGISTRY[name] = (task_id, description, fn)


def get_builtin(name: str) -> tuple[str, str, Callable]:
    if name not in _REGISTRY:
        raise ConfigError(f"unknown builtin heuristic {name!r}")
    return _REGISTRY[name]


def list_builtin_heuristics() -> list[tuple[str, str, str]]:
    """Stable, sorted (name, task_id, description) listing."""
    return [
        (name, task_id, description)
        for name, (task_id, description, _fn) in sorted(_REGISTRY.items())
    ]


# -- seed/baseline heuristics ------------------------------------------


def _kgls_badness(distances: np.ndarray) -> np.ndarray:
    # Classic guided-local-search rule: an edge is as bad as it is long.
    return np.array(distances, dtype=np.float64, copy=True)


def _nearest_neighbor(
    current: int, candidates: np.ndarray, distances: np.ndarray, visited: np.ndarray
) -> np.ndarray:
    return np.asarray(distances)[int(current), np.asarray(candidates, dtype=np.int64)]


def _uniform_promise(demands: np.ndarray, capacity: int) -> np.ndarray:
    n = int(np.asarray(demands).shape[0])
    return np.ones((n, n), dtype=np.float64)


def _value_per_weight(
    values: np.ndarray, weights: np.ndarray, capacities: np.ndarray
) -> np.ndarray:
    total_weight = np.asarray(weights).sum(axis=0)
    return np.asarray(values) / np.maximum(total_weight, 1e-9)


register_builtin(
    "kgls_badness",
    "gls_tsp",
    "distance-proportional edge badness (classic guided local search)",
    _kgls_badness,
)
register_builtin(
    "nearest_neighbor",
    "constructive_tsp",
    "score candidates by distance from the current node",
    _nearest_neighbor,
)
register_builtin(
    "uniform_promise",
    "aco_bpp",
    "uniform pairwise promise (vanilla ant colony)",
    _uniform_promise,
)
register_builtin(
    "value_per_weight",
    "aco_mkp",
    "item value divided by total weight across constraints",
    _value_per_weight,
)
