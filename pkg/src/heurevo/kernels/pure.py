"""Pure-Python kernel backend.

This module is the semantic reference for heurevo.kernels._speedups: the
compiled twin is a line-by-line translation and must produce bit-identical
results. Preserving that property constrains the code here:

- all randomness comes from an explicit splitmix64 stream (never a library
  RNG, whose draw order could differ between backends),
- floating-point expressions are written in the exact evaluation order the
  C code uses (no vectorized reductions, which reorder sums),
- float comparisons (including the == in the penalty argmax) are exact.

Do not "simplify" arithmetic here without mirroring the .pyx file.
"""

from __future__ import annotations

import numpy as np

_M64 = (1 << 64) - 1
_INV_2_53 = 1.0 / 9007199254740992.0  # 2^-53

# Move-acceptance threshold for the local search: improvements smaller
# than this are noise, not progress.
EPS = 1e-10


def sm64_next(state: list[int]) -> int:
    s = (state[0] + 0x9E3779B97F4A7C15) & _M64
    state[0] = s
    z = s
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def sm64_uniform(state: list[int]) -> float:
    """Uniform double in [0, 1): top 53 bits scaled by 2^-53."""
    return (sm64_next(state) >> 11) * _INV_2_53


# -- guided local search (TSP) -----------------------------------------


def _tour_length(dist, tour):
    n = len(tour)
    total = 0.0
    for i in range(n):
        total += dist[tour[i]][tour[(i + 1) % n]]
    return total


def _nn_tour(dist, n):
    visited = [False] * n
    tour = [0]
    visited[0] = True
    cur = 0
    for _ in range(n - 1):
        best = -1
        bd = float("inf")
        for j in range(n):
            if not visited[j] and dist[cur][j] < bd:
                bd = dist[cur][j]
                best = j
        tour.append(best)
        visited[best] = True
        cur = best
    return tour


def _local_search(dist, pen, lam, tour, true_len, best):
    """First-improvement 2-opt + single-node relocation on the augmented
    cost d + lam*penalty. Mutates tour; best = [best_len, best_tour]."""
    n = len(tour)
    improved = True
    while improved:
        improved = False
        i = 0
        while i < n - 1:
            j = i + 2
            while j < n:
                if not (i == 0 and j == n - 1):
                    a1 = tour[i]
                    b1 = tour[i + 1]
                    a2 = tour[j]
                    b2 = tour[(j + 1) % n]
                    d_aug = (
                        (dist[a1][a2] + lam * pen[a1][a2])
                        + (dist[b1][b2] + lam * pen[b1][b2])
                        - (dist[a1][b1] + lam * pen[a1][b1])
                        - (dist[a2][b2] + lam * pen[a2][b2])
                    )
                    if d_aug < -EPS:
                        d_true = (
                            dist[a1][a2]
                            + dist[b1][b2]
                            - dist[a1][b1]
                            - dist[a2][b2]
                        )
                        lo = i + 1
                        hi = j
                        while lo < hi:
                            tour[lo], tour[hi] = tour[hi], tour[lo]
                            lo += 1
                            hi -= 1
                        true_len += d_true
                        improved = True
                        if true_len < best[0]:
                            best[0] = true_len
                            best[1] = tour.copy()
                j += 1
            i += 1
        i = 0
        while i < n:
            ip = (i - 1) % n
            inx = (i + 1) % n
            x = tour[i]
            prv = tour[ip]
            nxt = tour[inx]
            remove_aug = (
                (dist[prv][nxt] + lam * pen[prv][nxt])
                - (dist[prv][x] + lam * pen[prv][x])
                - (dist[x][nxt] + lam * pen[x][nxt])
            )
            remove_true = dist[prv][nxt] - dist[prv][x] - dist[x][nxt]
            j = 0
            while j < n:
                jn = (j + 1) % n
                if j != i and jn != i:
                    y = tour[j]
                    z = tour[jn]
                    add_aug = (
                        (dist[y][x] + lam * pen[y][x])
                        + (dist[x][z] + lam * pen[x][z])
                        - (dist[y][z] + lam * pen[y][z])
                    )
                    if remove_aug + add_aug < -EPS:
                        add_true = dist[y][x] + dist[x][z] - dist[y][z]
                        del tour[i]
                        jj = j if j < i else j - 1
                        tour.insert(jj + 1, x)
                        true_len += remove_true + add_true
                        improved = True
                        if true_len < best[0]:
                            best[0] = true_len
                            best[1] = tour.copy()
                        break
                j += 1
            i += 1
    return true_len


def gls_run(dist_np, badness_np, rounds, a):
    """Guided local search. Returns (best_len, best_tour, best_by_round)
    where best_by_round[r] is the best true length after r penalty rounds.
    """
    n = int(dist_np.shape[0])
    dist = dist_np.tolist()
    badness = badness_np.tolist()
    pen = [[0.0] * n for _ in range(n)]
    tour = _nn_tour(dist, n)
    true_len = _tour_length(dist, tour)
    best = [true_len, tour.copy()]
    trajectory = [0.0] * (rounds + 1)

    # Penalties are all zero here, so the first descent runs on the true
    # cost; its local optimum calibrates the penalty weight.
    true_len = _local_search(dist, pen, 0.0, tour, true_len, best)
    trajectory[0] = best[0]
    lam = a * true_len / n

    for r in range(rounds):
        maxu = -1.0
        for idx in range(n):
            u = tour[idx]
            v = tour[(idx + 1) % n]
            util = badness[u][v] / (1.0 + pen[u][v])
            if util > maxu:
                maxu = util
        for idx in range(n):
            u = tour[idx]
            v = tour[(idx + 1) % n]
            util = badness[u][v] / (1.0 + pen[u][v])
            if util == maxu:
                pen[u][v] += 1.0
                pen[v][u] += 1.0
        true_len = _local_search(dist, pen, lam, tour, true_len, best)
        trajectory[r + 1] = best[0]

    return (
        best[0],
        np.array(best[1], dtype=np.int64),
        np.array(trajectory, dtype=np.float64),
    )


# -- ant colony construction: bin packing ------------------------------


def aco_bpp_run(demands_np, capacity, measure_np, n_ants, n_iters, rho, q, seed):
    """ACO for bin packing with a pairwise promise measure.

    Attractiveness of item j for the current bin is the mean pheromone
    times the mean measure over items already in the bin; an empty bin is
    neutral (both means = 1). Deposit is q / bins by the iteration-best
    ant. Returns (best_bins, best_assignment).
    """
    n = int(demands_np.shape[0])
    demands = [int(d) for d in demands_np.tolist()]
    measure = measure_np.tolist()
    capacity = int(capacity)
    tau = [[1.0] * n for _ in range(n)]
    state = [seed & _M64]
    best_bins = n + 1
    best_assign = [0] * n

    for _ in range(n_iters):
        iter_bins = n + 1
        iter_assign = [0] * n
        for _ant in range(n_ants):
            assign = [-1] * n
            remaining = n
            bin_idx = 0
            load = 0
            cnt = 0
            s_tau = [0.0] * n
            s_eta = [0.0] * n
            cum = [0.0] * n
            while remaining > 0:
                total = 0.0
                feas_count = 0
                for j in range(n):
                    w = 0.0
                    if assign[j] < 0 and demands[j] <= capacity - load:
                        if cnt == 0:
                            w = 1.0
                        else:
                            w = (s_tau[j] / cnt) * (s_eta[j] / cnt)
                            if w < 0.0:
                                w = 0.0
                        feas_count += 1
                    total += w
                    cum[j] = total
                if feas_count == 0:
                    bin_idx += 1
                    load = 0
                    cnt = 0
                    for j in range(n):
                        s_tau[j] = 0.0
                        s_eta[j] = 0.0
                    continue
                pick = -1
                if total > 0.0:
                    r = sm64_uniform(state) * total
                    for j in range(n):
                        if (
                            assign[j] < 0
                            and demands[j] <= capacity - load
                            and cum[j] > r
                        ):
                            pick = j
                            break
                    if pick < 0:
                        for j in range(n - 1, -1, -1):
                            if assign[j] < 0 and demands[j] <= capacity - load:
                                pick = j
                                break
                else:
                    k = int(sm64_uniform(state) * feas_count)
                    if k >= feas_count:
                        k = feas_count - 1
                    c = 0
                    for j in range(n):
                        if assign[j] < 0 and demands[j] <= capacity - load:
                            if c == k:
                                pick = j
                                break
                            c += 1
                assign[pick] = bin_idx
                load += demands[pick]
                cnt += 1
                remaining -= 1
                for k2 in range(n):
                    s_tau[k2] += tau[pick][k2]
                    s_eta[k2] += measure[pick][k2]
            bins = bin_idx + 1
            if bins < iter_bins:
                iter_bins = bins
                iter_assign = assign.copy()
        evap = 1.0 - rho
        for i in range(n):
            for j in range(n):
                tau[i][j] *= evap
        dep = q / iter_bins
        for i in range(n):
            for j in range(i + 1, n):
                if iter_assign[i] == iter_assign[j]:
                    tau[i][j] += dep
                    tau[j][i] += dep
        if iter_bins < best_bins:
            best_bins = iter_bins
            best_assign = iter_assign.copy()

    return best_bins, np.array(best_assign, dtype=np.int64)


# -- ant colony construction: multi-dimensional knapsack ----------------


def aco_mkp_run(
    values_np, weights_np, capacities_np, measure_np, n_ants, n_iters, rho, q, seed
):
    """ACO for the multi-constraint knapsack with a per-item desirability
    measure. Deposit is q * total_value by the iteration-best ant (more
    value, more pheromone). Returns (best_value, selection_mask).
    """
    n = int(values_np.shape[0])
    m = int(capacities_np.shape[0])
    values = values_np.tolist()
    weights = weights_np.tolist()
    capacities = capacities_np.tolist()
    measure = measure_np.tolist()
    tau = [1.0] * n
    state = [seed & _M64]
    best_value = -1.0
    best_sel = [0] * n

    for _ in range(n_iters):
        iter_value = -1.0
        iter_sel = [0] * n
        for _ant in range(n_ants):
            sel = [0] * n
            load = [0.0] * m
            active = [True] * n
            value = 0.0
            cum = [0.0] * n
            while True:
                total = 0.0
                feas_count = 0
                for j in range(n):
                    w = 0.0
                    if active[j]:
                        ok = True
                        for c in range(m):
                            if load[c] + weights[c][j] > capacities[c]:
                                ok = False
                                break
                        if ok:
                            w = tau[j] * measure[j]
                            if w < 0.0:
                                w = 0.0
                            feas_count += 1
                        else:
                            # Loads only grow, so infeasibility is permanent.
                            active[j] = False
                    total += w
                    cum[j] = total
                if feas_count == 0:
                    break
                pick = -1
                if total > 0.0:
                    r = sm64_uniform(state) * total
                    for j in range(n):
                        if active[j] and cum[j] > r:
                            pick = j
                            break
                    if pick < 0:
                        for j in range(n - 1, -1, -1):
                            if active[j]:
                                pick = j
                                break
                else:
                    k = int(sm64_uniform(state) * feas_count)
                    if k >= feas_count:
                        k = feas_count - 1
                    c2 = 0
                    for j in range(n):
                        if active[j]:
                            if c2 == k:
                                pick = j
                                break
                            c2 += 1
                sel[pick] = 1
                active[pick] = False
                value += values[pick]
                for c in range(m):
                    load[c] += weights[c][pick]
            if value > iter_value:
                iter_value = value
                iter_sel = sel.copy()
        evap = 1.0 - rho
        for j in range(n):
            tau[j] *= evap
        dep = q * iter_value
        for j in range(n):
            if iter_sel[j]:
                tau[j] += dep
        if iter_value > best_value:
            best_value = iter_value
            best_sel = iter_sel.copy()

    return best_value, np.array(best_sel, dtype=np.int64)
