"""Conventional fitness evaluation of a candidate heuristic.

A candidate is executed (through the bridge) once per instance to obtain
its measure, the task's solver consumes that measure, and the fitness is
the canonical (minimization-scale) mean of the raw per-instance
objectives. Any failure on any instance — crash, timeout, wrong shape,
non-finite output — poisons the whole evaluation with the failure
sentinel rather than a partial average, so broken candidates can never
outrank working ones.
"""

from __future__ import annotations

import math
import time
from typing import Any

import numpy as np

from heurevo.bridge.pool import WorkerBridge
from heurevo.core.types import FAILURE_SENTINEL, FitnessRecord, Heuristic, TaskSpec
from heurevo.engines.aco import ACO_DEFAULTS, aco_solve
from heurevo.engines.constructive import constructive_tsp_solve
from heurevo.engines.gls import GLS_DEFAULTS, gls_tsp_solve
from heurevo.engines.instances import InstanceSet
from heurevo.errors import ConfigError, InstanceError

PHASES = ("train", "test")


def validate_heuristic_output(
    arr: np.ndarray,
    expected_shape: tuple[int, ...],
    *,
    clamp_negative: bool = True,
) -> tuple[np.ndarray, list[str]]:
    """Check a heuristic's output array; returns (array, warnings).

    Shape mismatches and non-finite entries raise InstanceError (the
    evaluation treats them as a candidate failure). Negative entries are
    clamped to zero with a warning when clamp_negative is set, because
    the downstream solvers require non-negative measures; score vectors
    for constructive search are left signed.
    """
    arr = np.asarray(arr, dtype=np.float64)
    if arr.shape != tuple(expected_shape):
        raise InstanceError(
            f"heuristic output has shape {arr.shape}, expected {tuple(expected_shape)}"
        )
    if not np.all(np.isfinite(arr)):
        raise InstanceError("heuristic output contains non-finite values")
    warnings: list[str] = []
    if clamp_negative and np.any(arr < 0):
        warnings.append(
            f"clamped {int(np.sum(arr < 0))} negative entries in heuristic output"
        )
        arr = np.maximum(arr, 0.0)
    return arr, warnings


def _solver_seed(params: dict[str, Any], index: int) -> int:
    base = int(params.get("solver_seed", 0))
    return int(np.random.SeedSequence([base, index]).generate_state(1, np.uint64)[0])


def _measure_from_bridge(
    bridge: WorkerBridge,
    heuristic: Heuristic,
    task: TaskSpec,
    payload: dict[str, Any],
    key: str,
    expected_shape: tuple[int, ...],
    clamp_negative: bool = True,
) -> tuple[np.ndarray, list[str]]:
    result = bridge.execute_candidate(
        heuristic.runtime_tag, heuristic.source, task.task_id, task.entry_point, payload
    )
    if not result.ok:
        raise InstanceError(f"{result.status}: {result.diagnostic}")
    return validate_heuristic_output(
        result.payload[key], expected_shape, clamp_negative=clamp_negative
    )


def _raw_objective(
    bridge: WorkerBridge,
    heuristic: Heuristic,
    task: TaskSpec,
    instance,
    index: int,
    params: dict[str, Any],
    phase: str,
) -> tuple[float, list[str]]:
    """Raw (natural-scale) objective of the candidate on one instance."""
    if task.task_id == "gls_tsp":
        measure, warnings = _measure_from_bridge(
            bridge, heuristic, task,
            {"distances": instance.dist},
            "matrix", (instance.n, instance.n),
        )
        rounds_key = "rounds_test" if phase == "test" else "rounds_train"
        result = gls_tsp_solve(instance, measure, params, rounds=int(params[rounds_key]))
        return float(result.length), warnings
    if task.task_id == "aco_bpp":
        measure, warnings = _measure_from_bridge(
            bridge, heuristic, task,
            {"demands": instance.demands, "capacity": instance.capacity},
            "matrix", (instance.n, instance.n),
        )
        result = aco_solve(
            task.task_id, instance, measure, params, seed=_solver_seed(params, index)
        )
        return float(result.objective), warnings
    if task.task_id == "aco_mkp":
        measure, warnings = _measure_from_bridge(
            bridge, heuristic, task,
            {
                "values": instance.values,
                "weights": instance.weights,
                "capacities": instance.capacities,
            },
            "vector", (instance.n,),
        )
        result = aco_solve(
            task.task_id, instance, measure, params, seed=_solver_seed(params, index)
        )
        return float(result.objective), warnings
    if task.task_id == "constructive_tsp":
        warnings: list[str] = []

        def scorer(current, candidates, inst):
            cand = np.asarray(candidates, dtype=np.int64)
            visited = np.ones(inst.n, dtype=np.int64)
            visited[cand] = 0
            scores, step_warnings = _measure_from_bridge(
                bridge, heuristic, task,
                {
                    "current": int(current),
                    "candidates": cand,
                    "distances": inst.dist,
                    "visited": visited,
                },
                "vector", (cand.shape[0],),
                clamp_negative=False,
            )
            warnings.extend(step_warnings)
            return scores

        result = constructive_tsp_solve(instance, scorer)
        return float(result.length), warnings
    raise ConfigError(f"unknown task {task.task_id!r}")


def evaluate_heuristic(
    heuristic: Heuristic,
    task: TaskSpec,
    instances: InstanceSet,
    bridge: WorkerBridge,
    *,
    iteration: int,
    phase: str = "train",
) -> tuple[FitnessRecord, dict[str, Any]]:
    """Evaluate a candidate on every instance in the set.

    Returns the fitness record (canonical-scale mean objective, or the
    failure sentinel) and a detail dict with raw per-instance
    objectives, accumulated warnings, and — on failure — the offending
    instance id and diagnostic.
    """
    if phase not in PHASES:
        raise ConfigError(f"unknown evaluation phase {phase!r}")
    if len(instances) == 0:
        raise ConfigError("cannot evaluate on an empty instance set")

    defaults = GLS_DEFAULTS if task.task_id == "gls_tsp" else ACO_DEFAULTS
    params: dict[str, Any] = {**defaults, **task.solver_params}

    objectives: list[float] = []
    warnings: list[str] = []
    detail: dict[str, Any] = {"phase": phase}
    started = time.perf_counter()
    for index in range(len(instances)):
        instance_id = instances.ids[index]
        try:
            raw, inst_warnings = _raw_objective(
                bridge, heuristic, task, instances.load(index), index, params, phase
            )
        except InstanceError as exc:
            elapsed = time.perf_counter() - started
            detail.update(
                {
                    "instance_objectives": objectives,
                    "warnings": warnings,
                    "failed_instance": instance_id,
                    "diagnostic": str(exc),
                }
            )
            record = FitnessRecord(
                value=FAILURE_SENTINEL,
                kind="evaluated",
                confidence=1.0,
                eval_seconds=elapsed,
                iteration=iteration,
            )
            return record, detail
        objectives.append(raw)
        warnings.extend(f"{instance_id}: {w}" for w in inst_warnings)

    elapsed = time.perf_counter() - started
    raw_mean = math.fsum(objectives) / len(objectives)
    detail.update(
        {
            "instance_objectives": objectives,
            "raw_mean": raw_mean,
            "warnings": warnings,
        }
    )
    record = FitnessRecord(
        value=task.canonical(raw_mean),
        kind="evaluated",
        confidence=1.0,
        eval_seconds=elapsed,
        iteration=iteration,
    )
    return record, detail
