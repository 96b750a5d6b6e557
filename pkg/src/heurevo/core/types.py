"""Domain types shared by every module.

All fitness values inside the framework live on a canonical minimization
scale: for maximize tasks the stored value is the negated raw objective,
so "lower is better" holds globally. Raw objectives are preserved in
journal event payloads.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from typing import Any

from heurevo.errors import ConfigError

# Worst finite fitness, assigned to candidates that crash, time out, or
# emit invalid output. Finite so that ranking stays total.
FAILURE_SENTINEL = sys.float_info.max

ORIGINS = ("seed", "init", "crossover", "mutation")
FITNESS_KINDS = ("evaluated", "predicted")
TASK_IDS = ("gls_tsp", "aco_bpp", "aco_mkp", "constructive_tsp")
SENSES = ("minimize", "maximize")

# Entry-point function name the candidate source must define, per task.
ENTRY_POINTS = {
    "gls_tsp": "heuristics",
    "aco_bpp": "heuristic",
    "aco_mkp": "heuristic",
    "constructive_tsp": "select_next_node_score",
}

# Optimization direction of the raw objective, per task.
DEFAULT_SENSES = {
    "gls_tsp": "minimize",
    "aco_bpp": "minimize",
    "aco_mkp": "maximize",
    "constructive_tsp": "minimize",
}

# Human-readable call shape shown to the model, per task.
CANDIDATE_SIGNATURES = {
    "gls_tsp": "heuristics(distance_matrix) -> edge badness matrix",
    "aco_bpp": "heuristic(demands, capacity) -> pairwise promise matrix",
    "aco_mkp": "heuristic(values, weights, capacities) -> item desirability vector",
    "constructive_tsp": (
        "select_next_node_score(current, candidates, distances, visited)"
        " -> candidate scores"
    ),
}


@dataclass(frozen=True)
class FitnessRecord:
    """Fitness of one heuristic: conventionally evaluated or LLM-predicted."""

    value: float
    kind: str
    confidence: float
    eval_seconds: float
    iteration: int

    def __post_init__(self):
        if self.kind not in FITNESS_KINDS:
            raise ConfigError(f"unknown fitness kind {self.kind!r}")
        if self.kind == "evaluated" and self.confidence != 1.0:
            raise ConfigError("evaluated fitness must carry confidence 1.0")
        if not 0.0 <= self.confidence <= 1.0:
            raise ConfigError(f"confidence {self.confidence} outside [0, 1]")
        if self.eval_seconds < 0:
            raise ConfigError("eval_seconds must be >= 0")
        if self.value != self.value or self.value in (float("inf"), float("-inf")):
            raise ConfigError("fitness value must be finite (use FAILURE_SENTINEL)")

    @property
    def is_failure(self) -> bool:
        return self.value == FAILURE_SENTINEL

    def to_dict(self) -> dict[str, Any]:
        return {
            "value": self.value,
            "kind": self.kind,
            "confidence": self.confidence,
            "eval_seconds": self.eval_seconds,
            "iteration": self.iteration,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> FitnessRecord:
        return cls(
            value=float(d["value"]),
            kind=str(d["kind"]),
            confidence=float(d["confidence"]),
            eval_seconds=float(d["eval_seconds"]),
            iteration=int(d["iteration"]),
        )


@dataclass(frozen=True)
class Heuristic:
    """One candidate program plus its provenance and (optional) fitness."""

    id: str
    source: str
    runtime_tag: str
    origin: str
    parent_ids: tuple[str, ...] = ()
    iteration_born: int = 0
    fitness: FitnessRecord | None = None

    def __post_init__(self):
        if not self.source:
            raise ConfigError(f"heuristic {self.id}: source is empty")
        if self.origin not in ORIGINS:
            raise ConfigError(f"heuristic {self.id}: unknown origin {self.origin!r}")
        expected = {"seed": 0, "init": 0, "crossover": 2, "mutation": 1}[self.origin]
        if len(self.parent_ids) != expected:
            raise ConfigError(
                f"heuristic {self.id}: origin {self.origin} requires "
                f"{expected} parent ids, got {len(self.parent_ids)}"
            )
        if self.origin == "crossover" and self.parent_ids[0] == self.parent_ids[1]:
            raise ConfigError(f"heuristic {self.id}: crossover parents must be distinct")
        if self.iteration_born < 0:
            raise ConfigError(f"heuristic {self.id}: iteration_born must be >= 0")
        object.__setattr__(self, "parent_ids", tuple(self.parent_ids))

    def with_fitness(self, rec: FitnessRecord) -> Heuristic:
        return replace(self, fitness=rec)

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "id": self.id,
            "source": self.source,
            "runtime_tag": self.runtime_tag,
            "origin": self.origin,
            "parent_ids": list(self.parent_ids),
            "iteration_born": self.iteration_born,
        }
        if self.fitness is not None:
            d["fitness"] = self.fitness.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> Heuristic:
        fitness = d.get("fitness")
        return cls(
            id=str(d["id"]),
            source=str(d["source"]),
            runtime_tag=str(d["runtime_tag"]),
            origin=str(d["origin"]),
            parent_ids=tuple(str(p) for p in d.get("parent_ids", ())),
            iteration_born=int(d.get("iteration_born", 0)),
            fitness=FitnessRecord.from_dict(fitness) if fitness else None,
        )


@dataclass(frozen=True)
class TaskSpec:
    """One heuristic-generation task: problem family, seed, instance sets."""

    task_id: str
    sense: str
    seed: Heuristic
    train_instances: str
    test_instances: str
    candidate_signature: str
    solver_params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.task_id not in TASK_IDS:
            raise ConfigError(f"unknown task_id {self.task_id!r}")
        if self.sense not in SENSES:
            raise ConfigError(f"unknown sense {self.sense!r}")

    @property
    def entry_point(self) -> str:
        return ENTRY_POINTS[self.task_id]

    def canonical(self, raw: float) -> float:
        """Map a raw objective onto the minimization scale."""
        return -raw if self.sense == "maximize" else raw

    def to_dict(self) -> dict[str, Any]:
        return {
            "task_id": self.task_id,
            "sense": self.sense,
            "seed": self.seed.to_dict(),
            "train_instances": self.train_instances,
            "test_instances": self.test_instances,
            "candidate_signature": self.candidate_signature,
            "solver_params": dict(self.solver_params),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> TaskSpec:
        return cls(
            task_id=str(d["task_id"]),
            sense=str(d["sense"]),
            seed=Heuristic.from_dict(d["seed"]),
            train_instances=str(d["train_instances"]),
            test_instances=str(d.get("test_instances", "")),
            candidate_signature=str(d["candidate_signature"]),
            solver_params=dict(d.get("solver_params", {})),
        )


@dataclass(frozen=True)
class RunConfig:
    """Search hyperparameters. Defaults are filled by validate_config."""

    population_size: int = 15
    max_evaluations: int = 100
    elite_k: int = 5
    lambda_frac: float = 0.7
    crossover_rate: float = 1.0
    mutation_rate: float = 0.5
    delta: float = 0.1
    alpha: float = 0.5
    beta: float = 0.8
    n_examples: int = 5
    temperature: float = 1.0
    init_temperature_boost: float = 0.3
    ppp_enabled: bool = False
    cap_enabled: bool = True
    rank_selection_enabled: bool = True
    cons_enabled: bool = True
    exemplar_mode: str = "exemplar"
    rng_seed: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "population_size": self.population_size,
            "max_evaluations": self.max_evaluations,
            "elite_k": self.elite_k,
            "lambda_frac": self.lambda_frac,
            "crossover_rate": self.crossover_rate,
            "mutation_rate": self.mutation_rate,
            "delta": self.delta,
            "alpha": self.alpha,
            "beta": self.beta,
            "n_examples": self.n_examples,
            "temperature": self.temperature,
            "init_temperature_boost": self.init_temperature_boost,
            "ppp_enabled": self.ppp_enabled,
            "cap_enabled": self.cap_enabled,
            "rank_selection_enabled": self.rank_selection_enabled,
            "cons_enabled": self.cons_enabled,
            "exemplar_mode": self.exemplar_mode,
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> RunConfig:
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class JournalEvent:
    """One append-only record of the run journal."""

    seq: int
    timestamp: float
    kind: str
    payload: dict[str, Any]

    KINDS = (
        "run_started",
        "population_initialized",
        "parents_selected",
        "components_abstracted",
        "direction_produced",
        "offspring_created",
        "prediction_made",
        "fitness_decided",
        "evaluation_performed",
        "population_updated",
        "best_updated",
        "run_finished",
        "error",
    )

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ConfigError(f"unknown journal event kind {self.kind!r}")
        if self.seq < 0:
            raise ConfigError("event seq must be >= 0")

    def to_dict(self) -> dict[str, Any]:
        return {
            "seq": self.seq,
            "timestamp": self.timestamp,
            "kind": self.kind,
            "payload": self.payload,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> JournalEvent:
        return cls(
            seq=int(d["seq"]),
            timestamp=float(d["timestamp"]),
            kind=str(d["kind"]),
            payload=dict(d["payload"]),
        )


def compute_gain(seed_perf: float, candidate_perf: float, sense: str) -> float:
    """Relative improvement of a candidate over the seed, on raw objectives.

    Positive gain always means "better than seed" regardless of sense.
    """
    if sense not in SENSES:
        raise ConfigError(f"unknown sense {sense!r}")
    if seed_perf == 0:
        raise ConfigError("gain undefined for seed performance 0")
    if sense == "minimize":
        return 1.0 - candidate_perf / seed_perf
    return candidate_perf / seed_perf - 1.0
