"""Ant colony construction for bin packing and multi-constraint knapsack.

The candidate heuristic supplies the attractiveness measure: pairwise
promise of co-binning two items for BPP, per-item desirability for MKP.
Objectives are returned in each problem's natural convention (bins to
minimize, total value to maximize); the caller canonicalizes via the
task's optimization sense.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from heurevo import kernels
from heurevo.engines.instances import BppInstance, MkpInstance
from heurevo.errors import InstanceError

ACO_DEFAULTS = {
    "n_ants": 20,
    "n_iterations": 50,
    "rho": 0.1,
    "q": 1.0,
}


@dataclass(frozen=True)
class AcoResult:
    objective: float  # bins (BPP) or total value (MKP)
    solution: np.ndarray  # bin assignment or selection mask


def aco_solve(
    task_id: str,
    instance: BppInstance | MkpInstance,
    measure: np.ndarray,
    params: dict | None = None,
    *,
    seed: int = 0,
) -> AcoResult:
    p = dict(ACO_DEFAULTS)
    if params:
        p.update(params)
    measure = np.ascontiguousarray(measure, dtype=np.float64)
    if not np.isfinite(measure).all():
        raise InstanceError("measure contains non-finite entries")
    if (measure < 0).any():
        raise InstanceError("measure contains negative entries")

    if task_id == "aco_bpp":
        if not isinstance(instance, BppInstance):
            raise InstanceError("aco_bpp requires a BppInstance")
        n = instance.n
        if measure.shape != (n, n):
            raise InstanceError(
                f"measure shape {measure.shape} does not match ({n}, {n})"
            )
        bins, assignment = kernels.aco_bpp_run(
            instance.demands,
            instance.capacity,
            measure,
            int(p["n_ants"]),
            int(p["n_iterations"]),
            float(p["rho"]),
            float(p["q"]),
            int(seed),
        )
        return AcoResult(objective=float(bins), solution=assignment)

    if task_id == "aco_mkp":
        if not isinstance(instance, MkpInstance):
            raise InstanceError("aco_mkp requires an MkpInstance")
        n = instance.n
        if measure.shape != (n,):
            raise InstanceError(f"measure shape {measure.shape} does not match ({n},)")
        value, selection = kernels.aco_mkp_run(
            instance.values,
            instance.weights,
            instance.capacities,
            measure,
            int(p["n_ants"]),
            int(p["n_iterations"]),
            float(p["rho"]),
            float(p["q"]),
            int(seed),
        )
        return AcoResult(objective=float(value), solution=selection)

    raise InstanceError(f"aco_solve does not handle task {task_id!r}")
