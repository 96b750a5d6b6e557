"""Guided local search for the TSP, parameterized by a badness matrix.

The candidate heuristic supplies an n x n "badness" matrix; at every
local optimum the tour edges with the highest badness/(1+penalty) utility
are penalized, steering the search away from them. The distance-
proportional matrix reproduces the classic penalty rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from heurevo import kernels
from heurevo.engines.instances import TspInstance
from heurevo.errors import InstanceError

GLS_DEFAULTS = {
    "a": 0.1,
    "rounds_train": 200,
    "rounds_test": 1000,
}


@dataclass(frozen=True)
class GlsResult:
    length: float
    tour: np.ndarray
    best_by_round: np.ndarray


def gls_tsp_solve(
    instance: TspInstance,
    badness: np.ndarray,
    params: dict | None = None,
    *,
    rounds: int | None = None,
) -> GlsResult:
    p = dict(GLS_DEFAULTS)
    if params:
        p.update(params)
    n = instance.n
    badness = np.ascontiguousarray(badness, dtype=np.float64)
    if badness.shape != (n, n):
        raise InstanceError(
            f"badness shape {badness.shape} does not match instance size {n}"
        )
    if not np.isfinite(badness).all():
        raise InstanceError("badness matrix contains non-finite entries")
    if (badness < 0).any():
        raise InstanceError("badness matrix contains negative entries")
    r = int(p["rounds_train"] if rounds is None else rounds)
    length, tour, trajectory = kernels.gls_run(
        np.ascontiguousarray(instance.dist, dtype=np.float64),
        badness,
        r,
        float(p["a"]),
    )
    return GlsResult(length=float(length), tour=tour, best_by_round=trajectory)
