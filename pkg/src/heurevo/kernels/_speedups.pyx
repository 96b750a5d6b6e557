# cython: language_level=3
"""Compiled kernel backend.

Line-by-line translation of heurevo.kernels.pure; the two must produce
bit-identical results. Keep arithmetic expression order and the explicit
splitmix64 stream in sync with pure.py, and keep the build free of
-ffast-math / -march=native (see setup.py).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()

cdef double EPS = 1e-10
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _sm64_next(uint64_t *state) nogil:
    cdef uint64_t s = state[0] + <uint64_t>0x9E3779B97F4A7C15
    state[0] = s
    cdef uint64_t z = s
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline double _sm64_uniform(uint64_t *state) nogil:
    return <double>(_sm64_next(state) >> 11) * INV_2_53


def sm64_next(state):
    """Python-visible stream step (state is a one-element list), so the
    backends' RNG streams can be compared directly in equivalence tests."""
    cdef uint64_t s = <uint64_t>(state[0] & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t out = _sm64_next(&s)
    state[0] = s
    return out


def sm64_uniform(state):
    cdef uint64_t s = <uint64_t>(state[0] & 0xFFFFFFFFFFFFFFFF)
    cdef double out = _sm64_uniform(&s)
    state[0] = s
    return out


# -- guided local search (TSP) -----------------------------------------


cdef double _tour_length(double[:, ::1] dist, int64_t[::1] tour, Py_ssize_t n) nogil:
    cdef double total = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        total += dist[tour[i], tour[(i + 1) % n]]
    return total


cdef void _nn_tour(
    double[:, ::1] dist, int64_t[::1] tour, int64_t[::1] visited, Py_ssize_t n
) nogil:
    cdef Py_ssize_t i, j, cur, best
    cdef double bd
    for j in range(n):
        visited[j] = 0
    tour[0] = 0
    visited[0] = 1
    cur = 0
    for i in range(n - 1):
        best = -1
        bd = INFINITY
        for j in range(n):
            if visited[j] == 0 and dist[cur, j] < bd:
                bd = dist[cur, j]
                best = j
        tour[i + 1] = best
        visited[best] = 1
        cur = best


cdef double _local_search(
    double[:, ::1] dist,
    double[:, ::1] pen,
    double lam,
    int64_t[::1] tour,
    double true_len,
    double *best_len,
    int64_t[::1] best_tour,
    Py_ssize_t n,
) nogil:
    cdef bint improved = True
    cdef Py_ssize_t i, j, lo, hi, ip, inx, jn, jj, k
    cdef int64_t a1, b1, a2, b2, x, prv, nxt, y, z, tmp
    cdef double d_aug, d_true, remove_aug, remove_true, add_aug, add_true
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
                        (dist[a1, a2] + lam * pen[a1, a2])
                        + (dist[b1, b2] + lam * pen[b1, b2])
                        - (dist[a1, b1] + lam * pen[a1, b1])
                        - (dist[a2, b2] + lam * pen[a2, b2])
                    )
                    if d_aug < -EPS:
                        d_true = (
                            dist[a1, a2]
                            + dist[b1, b2]
                            - dist[a1, b1]
                            - dist[a2, b2]
                        )
                        lo = i + 1
                        hi = j
                        while lo < hi:
                            tmp = tour[lo]
                            tour[lo] = tour[hi]
                            tour[hi] = tmp
                            lo += 1
                            hi -= 1
                        true_len += d_true
                        improved = True
                        if true_len < best_len[0]:
                            best_len[0] = true_len
                            for k in range(n):
                                best_tour[k] = tour[k]
                j += 1
            i += 1
        i = 0
        while i < n:
            ip = (i - 1 + n) % n
            inx = (i + 1) % n
            x = tour[i]
            prv = tour[ip]
            nxt = tour[inx]
            remove_aug = (
                (dist[prv, nxt] + lam * pen[prv, nxt])
                - (dist[prv, x] + lam * pen[prv, x])
                - (dist[x, nxt] + lam * pen[x, nxt])
            )
            remove_true = dist[prv, nxt] - dist[prv, x] - dist[x, nxt]
            j = 0
            while j < n:
                jn = (j + 1) % n
                if j != i and jn != i:
                    y = tour[j]
                    z = tour[jn]
                    add_aug = (
                        (dist[y, x] + lam * pen[y, x])
                        + (dist[x, z] + lam * pen[x, z])
                        - (dist[y, z] + lam * pen[y, z])
                    )
                    if remove_aug + add_aug < -EPS:
                        add_true = dist[y, x] + dist[x, z] - dist[y, z]
                        # Mirror of pure.py's del+insert on a list.
                        if j > i:
                            for k in range(i, j):
                                tour[k] = tour[k + 1]
                            tour[j] = x
                        else:
                            for k in range(i, j + 1, -1):
                                tour[k] = tour[k - 1]
                            tour[j + 1] = x
                        true_len += remove_true + add_true
                        improved = True
                        if true_len < best_len[0]:
                            best_len[0] = true_len
                            for k in range(n):
                                best_tour[k] = tour[k]
                        break
                j += 1
            i += 1
    return true_len


def gls_run(dist_np, badness_np, rounds, a):
    """Guided local search. Returns (best_len, best_tour, best_by_round)."""
    cdef double[:, ::1] dist = np.ascontiguousarray(dist_np, dtype=np.float64)
    cdef double[:, ::1] badness = np.ascontiguousarray(badness_np, dtype=np.float64)
    cdef Py_ssize_t n = dist.shape[0]
    pen_arr = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] pen = pen_arr
    tour_arr = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] tour = tour_arr
    best_arr = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] best_tour = best_arr
    visited_arr = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] visited = visited_arr
    cdef int n_rounds = int(rounds)
    traj_arr = np.zeros(n_rounds + 1, dtype=np.float64)
    cdef double[::1] trajectory = traj_arr
    cdef double true_len, best_len, lam, maxu, util, a_c = float(a)
    cdef Py_ssize_t idx, k, r
    cdef int64_t u, v

    _nn_tour(dist, tour, visited, n)
    true_len = _tour_length(dist, tour, n)
    best_len = true_len
    for k in range(n):
        best_tour[k] = tour[k]

    true_len = _local_search(dist, pen, 0.0, tour, true_len, &best_len, best_tour, n)
    trajectory[0] = best_len
    lam = a_c * true_len / n

    for r in range(n_rounds):
        maxu = -1.0
        for idx in range(n):
            u = tour[idx]
            v = tour[(idx + 1) % n]
            util = badness[u, v] / (1.0 + pen[u, v])
            if util > maxu:
                maxu = util
        for idx in range(n):
            u = tour[idx]
            v = tour[(idx + 1) % n]
            util = badness[u, v] / (1.0 + pen[u, v])
            if util == maxu:
                pen[u, v] += 1.0
                pen[v, u] += 1.0
        true_len = _local_search(dist, pen, lam, tour, true_len, &best_len, best_tour, n)
        trajectory[r + 1] = best_len

    return best_len, best_arr, traj_arr


# -- ant colony construction: bin packing ------------------------------


def aco_bpp_run(demands_np, capacity, measure_np, n_ants, n_iters, rho, q, seed):
    """ACO for bin packing; see the pure backend for the contract."""
    cdef int64_t[::1] demands = np.ascontiguousarray(demands_np, dtype=np.int64)
    cdef double[:, ::1] measure = np.ascontiguousarray(measure_np, dtype=np.float64)
    cdef Py_ssize_t n = demands.shape[0]
    cdef int64_t cap = int(capacity)
    tau_arr = np.ones((n, n), dtype=np.float64)
    cdef double[:, ::1] tau = tau_arr
    cdef uint64_t state = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef int64_t best_bins = n + 1
    best_assign_arr = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] best_assign = best_assign_arr

    assign_arr = np.zeros(n, dtype=np.int64)
    iter_assign_arr = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] assign = assign_arr
    cdef int64_t[::1] iter_assign = iter_assign_arr
    s_tau_arr = np.zeros(n, dtype=np.float64)
    s_eta_arr = np.zeros(n, dtype=np.float64)
    cum_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] s_tau = s_tau_arr
    cdef double[::1] s_eta = s_eta_arr
    cdef double[::1] cum = cum_arr

    cdef int n_ants_c = int(n_ants), n_iters_c = int(n_iters)
    cdef double rho_c = float(rho), q_c = float(q)
    cdef Py_ssize_t it, ant, j, i, k2
    cdef int64_t remaining, bin_idx, load, cnt, feas_count, pick, bins, iter_bins, kk, cc
    cdef double total, w, r_draw, evap, dep

    for it in range(n_iters_c):
        iter_bins = n + 1
        for ant in range(n_ants_c):
            for j in range(n):
                assign[j] = -1
            remaining = n
            bin_idx = 0
            load = 0
            cnt = 0
            for j in range(n):
                s_tau[j] = 0.0
                s_eta[j] = 0.0
            while remaining > 0:
                total = 0.0
                feas_count = 0
                for j in range(n):
                    w = 0.0
                    if assign[j] < 0 and demands[j] <= cap - load:
                        if cnt == 0:
                            w = 1.0
                        else:
                            w = (s_tau[j] / <double>cnt) * (s_eta[j] / <double>cnt)
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
                    r_draw = _sm64_uniform(&state) * total
                    for j in range(n):
                        if (
                            assign[j] < 0
                            and demands[j] <= cap - load
                            and cum[j] > r_draw
                        ):
                            pick = j
                            break
                    if pick < 0:
                        for j in range(n - 1, -1, -1):
                            if assign[j] < 0 and demands[j] <= cap - load:
                                pick = j
                                break
                else:
                    kk = <int64_t>(_sm64_uniform(&state) * feas_count)
                    if kk >= feas_count:
                        kk = feas_count - 1
                    cc = 0
                    for j in range(n):
                        if assign[j] < 0 and demands[j] <= cap - load:
                            if cc == kk:
                                pick = j
                                break
                            cc += 1
                assign[pick] = bin_idx
                load += demands[pick]
                cnt += 1
                remaining -= 1
                for k2 in range(n):
                    s_tau[k2] += tau[pick, k2]
                    s_eta[k2] += measure[pick, k2]
            bins = bin_idx + 1
            if bins < iter_bins:
                iter_bins = bins
                for j in range(n):
                    iter_assign[j] = assign[j]
        evap = 1.0 - rho_c
        for i in range(n):
            for j in range(n):
                tau[i, j] *= evap
        dep = q_c / <double>iter_bins
        for i in range(n):
            for j in range(i + 1, n):
                if iter_assign[i] == iter_assign[j]:
                    tau[i, j] += dep
                    tau[j, i] += dep
        if iter_bins < best_bins:
            best_bins = iter_bins
            for j in range(n):
                best_assign[j] = iter_assign[j]

    return int(best_bins), best_assign_arr


# -- ant colony construction: multi-dimensional knapsack ----------------


def aco_mkp_run(values_np, weights_np, capacities_np, measure_np,
                n_ants, n_iters, rho, q, seed):
    """ACO for the multi-constraint knapsack; see the pure backend."""
    cdef double[::1] values = np.ascontiguousarray(values_np, dtype=np.float64)
    cdef double[:, ::1] weights = np.ascontiguousarray(weights_np, dtype=np.float64)
    cdef double[::1] capacities = np.ascontiguousarray(capacities_np, dtype=np.float64)
    cdef double[::1] measure = np.ascontiguousarray(measure_np, dtype=np.float64)
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t m = capacities.shape[0]
    tau_arr = np.ones(n, dtype=np.float64)
    cdef double[::1] tau = tau_arr
    cdef uint64_t state = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef double best_value = -1.0
    best_sel_arr = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] best_sel = best_sel_arr

    sel_arr = np.zeros(n, dtype=np.int64)
    iter_sel_arr = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] sel = sel_arr
    cdef int64_t[::1] iter_sel = iter_sel_arr
    load_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] load = load_arr
    active_arr = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] active = active_arr
    cum_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] cum = cum_arr

    cdef int n_ants_c = int(n_ants), n_iters_c = int(n_iters)
    cdef double rho_c = float(rho), q_c = float(q)
    cdef Py_ssize_t it, ant, j, c
    cdef int64_t feas_count, pick, kk, cc2
    cdef bint ok
    cdef double total, w, r_draw, value, iter_value, evap, dep

    for it in range(n_iters_c):
        iter_value = -1.0
        for ant in range(n_ants_c):
            for j in range(n):
                sel[j] = 0
                active[j] = 1
            for c in range(m):
                load[c] = 0.0
            value = 0.0
            while True:
                total = 0.0
                feas_count = 0
                for j in range(n):
                    w = 0.0
                    if active[j] == 1:
                        ok = True
                        for c in range(m):
                            if load[c] + weights[c, j] > capacities[c]:
                                ok = False
                                break
                        if ok:
                            w = tau[j] * measure[j]
                            if w < 0.0:
                                w = 0.0
                            feas_count += 1
                        else:
                            active[j] = 0
                    total += w
                    cum[j] = total
                if feas_count == 0:
                    break
                pick = -1
                if total > 0.0:
                    r_draw = _sm64_uniform(&state) * total
                    for j in range(n):
                        if active[j] == 1 and cum[j] > r_draw:
                            pick = j
                            break
                    if pick < 0:
                        for j in range(n - 1, -1, -1):
                            if active[j] == 1:
                                pick = j
                                break
                else:
                    kk = <int64_t>(_sm64_uniform(&state) * feas_count)
                    if kk >= feas_count:
                        kk = feas_count - 1
                    cc2 = 0
                    for j in range(n):
                        if active[j] == 1:
                            if cc2 == kk:
                                pick = j
                                break
                            cc2 += 1
                sel[pick] = 1
                active[pick] = 0
                value += values[pick]
                for c in range(m):
                    load[c] += weights[c, pick]
            if value > iter_value:
                iter_value = value
                for j in range(n):
                    iter_sel[j] = sel[j]
        evap = 1.0 - rho_c
        for j in range(n):
            tau[j] *= evap
        dep = q_c * iter_value
        for j in range(n):
            if iter_sel[j]:
                tau[j] += dep
        if iter_value > best_value:
            best_value = iter_value
            for j in range(n):
                best_sel[j] = iter_sel[j]

    return best_value, best_sel_arr
