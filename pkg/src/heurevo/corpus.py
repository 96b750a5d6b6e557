"""Canned heuristic sources with native stand-ins.

Scripted (offline) runs replay pre-recorded model responses, so the
"generated" source text must be runnable without an external worker.
Every source here is compiled once at import time and registered under
its content digest; the bridge's ``builtin:auto`` runtime resolves a
candidate's source to the matching callable. Importing this module
therefore also proves that every canned source actually executes.

A few entries are deliberately pathological (NaN output, negative
entries, wrong shape) so failure paths can be exercised end to end in
scripted runs.
"""

from __future__ import annotations

import math
import textwrap
from dataclasses import dataclass
from typing import Callable

import numpy as np

from heurevo.bridge.pool import source_digest
from heurevo.core.types import ENTRY_POINTS, Heuristic


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    task_id: str
    source: str
    native: Callable


def _compile(source: str, entry_point: str) -> Callable:
    namespace: dict = {"np": np, "numpy": np, "math": math}
    exec(source, namespace)
    if entry_point not in namespace:
        raise ValueError(f"canned source does not define {entry_point!r}")
    return namespace[entry_point]


def _entry(name: str, task_id: str, source: str) -> CorpusEntry:
    source = textwrap.dedent(source).strip() + "\n"
    return CorpusEntry(name, task_id, source, _compile(source, ENTRY_POINTS[task_id]))


_BPP = "aco_bpp"

CORPUS: tuple[CorpusEntry, ...] = (
    _entry(
        "bpp_complementarity",
        _BPP,
        '''
        def heuristic(demands, capacity):
            """Favor item pairs whose demands nearly fill a bin together."""
            d = np.asarray(demands, dtype=float)
            pair_sum = d[:, None] + d[None, :]
            slack = capacity - pair_sum
            tight = 1.0 / (1.0 + np.maximum(slack, 0.0))
            return np.where(slack >= 0, tight, 0.01)
        ''',
    ),
    _entry(
        "bpp_exp_decay",
        _BPP,
        '''
        def heuristic(demands, capacity):
            """Exponential decay in leftover space when two items share a bin."""
            d = np.asarray(demands, dtype=float)
            slack = capacity - (d[:, None] + d[None, :])
            promise = np.where(slack >= 0, np.exp(-slack / capacity), 1e-3)
            return promise
        ''',
    ),
    _entry(
        "bpp_threshold",
        _BPP,
        '''
        def heuristic(demands, capacity):
            """Hard preference for pairs that fit, indifference beyond that."""
            d = np.asarray(demands, dtype=float)
            fits = (d[:, None] + d[None, :]) <= capacity
            return np.where(fits, 1.0, 0.05)
        ''',
    ),
    _entry(
        "bpp_fill_ratio",
        _BPP,
        '''
        def heuristic(demands, capacity):
            """Score pairs by how much of the bin they would occupy."""
            d = np.asarray(demands, dtype=float)
            ratio = (d[:, None] + d[None, :]) / capacity
            return np.clip(np.where(ratio <= 1.0, ratio, 0.0), 0.01, 1.0)
        ''',
    ),
    _entry(
        "bpp_product",
        _BPP,
        '''
        def heuristic(demands, capacity):
            d = np.asarray(demands, dtype=float)
            return (d[:, None] * d[None, :]) / (capacity * capacity) + 0.01
        ''',
    ),
    _entry(
        "bpp_softened_uniform",
        _BPP,
        '''
        def heuristic(demands, capacity):
            """Near-uniform promise with a mild pull toward larger partners."""
            d = np.asarray(demands, dtype=float)
            n = d.shape[0]
            return np.ones((n, n)) + 0.1 * (d[None, :] / capacity)
        ''',
    ),
    _entry(
        "bpp_squared_complement",
        _BPP,
        '''
        def heuristic(demands, capacity):
            d = np.asarray(demands, dtype=float)
            slack = capacity - (d[:, None] + d[None, :])
            norm = np.where(slack >= 0, slack / capacity, 1.0)
            return (1.0 - norm) ** 2 + 0.01
        ''',
    ),
    _entry(
        "bpp_small_partner",
        _BPP,
        '''
        def heuristic(demands, capacity):
            """Prefer small partners: leave room for later items."""
            d = np.asarray(demands, dtype=float)
            n = d.shape[0]
            inv = 1.0 - d / (capacity + 1.0)
            return np.tile(inv[None, :], (n, 1))
        ''',
    ),
    _entry(
        "bpp_large_partner",
        _BPP,
        '''
        def heuristic(demands, capacity):
            """Prefer large partners: pack the heavy items first."""
            d = np.asarray(demands, dtype=float)
            n = d.shape[0]
            return np.tile((d / capacity)[None, :], (n, 1)) + 0.05
        ''',
    ),
    _entry(
        "bpp_harmonic",
        _BPP,
        '''
        def heuristic(demands, capacity):
            d = np.asarray(demands, dtype=float)
            slack = capacity - (d[:, None] + d[None, :])
            promise = capacity / (1.0 + np.maximum(slack, 0.0))
            return np.where(slack >= 0, promise, 0.01) / capacity
        ''',
    ),
    _entry(
        "bpp_blend",
        _BPP,
        '''
        def heuristic(demands, capacity):
            """Blend of fill ratio and inverse slack."""
            d = np.asarray(demands, dtype=float)
            pair_sum = d[:, None] + d[None, :]
            slack = capacity - pair_sum
            ratio = np.clip(pair_sum / capacity, 0.0, 1.0)
            inv_slack = np.where(slack >= 0, 1.0 / (1.0 + np.maximum(slack, 0.0)), 0.0)
            return 0.5 * ratio + 0.5 * inv_slack + 0.01
        ''',
    ),
    _entry(
        "bpp_gaussian_fill",
        _BPP,
        '''
        def heuristic(demands, capacity):
            """Peak promise when a pair fills roughly 80% of the bin."""
            d = np.asarray(demands, dtype=float)
            ratio = (d[:, None] + d[None, :]) / capacity
            return np.exp(-((ratio - 0.8) ** 2) / 0.08) + 0.01
        ''',
    ),
    # Pathological fixtures for failure-path coverage in scripted runs.
    _entry(
        "bpp_nan_promise",
        _BPP,
        '''
        def heuristic(demands, capacity):
            d = np.asarray(demands, dtype=float)
            n = d.shape[0]
            out = np.ones((n, n))
            out[0, 0] = np.nan
            return out
        ''',
    ),
    _entry(
        "bpp_negative_promise",
        _BPP,
        '''
        def heuristic(demands, capacity):
            d = np.asarray(demands, dtype=float)
            return 0.5 - (d[:, None] + d[None, :]) / (2.0 * capacity)
        ''',
    ),
    _entry(
        "bpp_wrong_shape",
        _BPP,
        '''
        def heuristic(demands, capacity):
            return np.asarray(demands, dtype=float) / capacity
        ''',
    ),
    # Seed sources for the remaining task families. Their behavior matches
    # the identically-named builtins, so a scripted run can start from the
    # same baseline a live run would.
    _entry(
        "tsp_distance_badness",
        "gls_tsp",
        '''
        def heuristics(distance_matrix):
            """An edge is as bad as it is long."""
            return np.array(distance_matrix, dtype=float, copy=True)
        ''',
    ),
    _entry(
        "tsp_greedy_score",
        "constructive_tsp",
        '''
        def select_next_node_score(current, candidates, distances, visited):
            """Plain nearest-neighbor scoring."""
            return np.asarray(distances)[int(current), np.asarray(candidates, dtype=int)]
        ''',
    ),
    _entry(
        "mkp_value_per_weight",
        "aco_mkp",
        '''
        def heuristic(values, weights, capacities):
            total_weight = np.asarray(weights).sum(axis=0)
            return np.asarray(values) / np.maximum(total_weight, 1e-9)
        ''',
    ),
)

_BY_NAME: dict[str, CorpusEntry] = {e.name: e for e in CORPUS}
_BY_DIGEST: dict[str, CorpusEntry] = {source_digest(e.source): e for e in CORPUS}

# Canonical seed per task family.
_SEED_NAMES: dict[str, str] = {
    "gls_tsp": "tsp_distance_badness",
    "aco_bpp": "bpp_complementarity",
    "aco_mkp": "mkp_value_per_weight",
    "constructive_tsp": "tsp_greedy_score",
}


def corpus_entry(name: str) -> CorpusEntry:
    if name not in _BY_NAME:
        raise KeyError(f"no corpus entry named {name!r}")
    return _BY_NAME[name]


def corpus_source(name: str) -> str:
    return corpus_entry(name).source


def native_for_source(source: str) -> Callable | None:
    """Resolve ``builtin:auto`` source text to its compiled stand-in."""
    entry = _BY_DIGEST.get(source_digest(source))
    return None if entry is None else entry.native


def seed_heuristic(task_id: str, runtime_tag: str = "builtin:auto") -> Heuristic:
    """The canonical starting heuristic for a task family."""
    if task_id not in _SEED_NAMES:
        raise KeyError(f"no canned seed for task {task_id!r}")
    entry = _BY_NAME[_SEED_NAMES[task_id]]
    return Heuristic(
        id="seed",
        source=entry.source,
        runtime_tag=runtime_tag,
        origin="seed",
        parent_ids=(),
        iteration_born=0,
    )
