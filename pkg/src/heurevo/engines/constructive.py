"""Greedy constructive TSP with a pluggable node scorer.

The scorer answers batched queries: given the current node and the
unvisited candidates, return one score per candidate. The tour repeatedly
moves to the minimal-score candidate (ties to the lower index).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from heurevo.engines.instances import TspInstance
from heurevo.errors import InstanceError

# scorer(current, candidates, instance) -> one finite score per candidate
Scorer = Callable[[int, Sequence[int], TspInstance], Sequence[float]]


@dataclass(frozen=True)
class ConstructiveResult:
    length: float
    tour: np.ndarray


def constructive_tsp_solve(
    instance: TspInstance, scorer: Scorer, start_node: int = 0
) -> ConstructiveResult:
    n = instance.n
    if not 0 <= start_node < n:
        raise InstanceError(f"start_node {start_node} outside [0, {n})")
    dist = instance.dist
    visited = [False] * n
    tour = [start_node]
    visited[start_node] = True
    current = start_node
    for _ in range(n - 1):
        candidates = [j for j in range(n) if not visited[j]]
        scores = scorer(current, candidates, instance)
        if len(scores) != len(candidates):
            raise InstanceError(
                f"scorer returned {len(scores)} scores for {len(candidates)} candidates"
            )
        best_idx = 0
        best_score = float(scores[0])
        for i in range(1, len(candidates)):
            s = float(scores[i])
            if s < best_score:
                best_score = s
                best_idx = i
        nxt = candidates[best_idx]
        tour.append(nxt)
        visited[nxt] = True
        current = nxt
    length = 0.0
    for i in range(n):
        length += float(dist[tour[i], tour[(i + 1) % n]])
    return ConstructiveResult(length=length, tour=np.array(tour, dtype=np.int64))
