"""Exact TSP oracle for desk-scale verification (n <= 15)."""

from __future__ import annotations

import numpy as np

from heurevo.engines.instances import TspInstance
from heurevo.errors import InstanceError

MAX_ORACLE_N = 15


def exact_tsp_oracle(instance: TspInstance) -> float:
    """Held-Karp dynamic program over subsets; optimal tour length."""
    n = instance.n
    if n > MAX_ORACLE_N:
        raise InstanceError(f"exact oracle refuses n={n} > {MAX_ORACLE_N}")
    if n == 1:
        return 0.0
    d = np.asarray(instance.dist, dtype=np.float64)
    if n == 2:
        return float(d[0, 1] + d[1, 0])

    # dp[mask, j]: cheapest path from node 0 through the set encoded by
    # mask (over nodes 1..n-1), ending at node j+1.
    m = n - 1
    full = 1 << m
    dp = np.full((full, m), np.inf)
    for j in range(m):
        dp[1 << j, j] = d[0, j + 1]
    for mask in range(1, full):
        row = dp[mask]
        if not np.isfinite(row).any():
            continue
        for j in range(m):
            if mask & (1 << j):
                continue
            new_mask = mask | (1 << j)
            # best over predecessors k in mask: dp[mask, k] + d[k+1, j+1]
            best = np.min(row + d[1 : m + 1, j + 1])
            if best < dp[new_mask, j]:
                dp[new_mask, j] = best
    closing = dp[full - 1] + d[1 : m + 1, 0]
    return float(np.min(closing))
