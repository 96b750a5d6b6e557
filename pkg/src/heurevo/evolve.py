"""The evolutionary loop: selection, variation operators, and orchestration.

Selection is rank-based over canonical fitness; variation happens in
prompt space (crossover between two parents, elitist mutation of the
best-so-far heuristic), each guided by a search direction. The driver
runs the whole search against an evaluation budget that counts only
conventional evaluations, journaling every step so a run can be resumed
or replayed byte-for-byte.
"""

from __future__ import annotations

import math
import re
import time
from dataclasses import dataclass, replace
from typing import Any, Callable, Sequence

import numpy as np

from heurevo import ppp
from heurevo.bridge.pool import WorkerBridge
from heurevo.cap import (
    CoreComponentSet,
    SearchDirection,
    abstract_core_components,
    component_source_for_iteration,
    produce_search_direction,
    request_with_reasks,
)
from heurevo.core.config import validate_config
from heurevo.core.journal import (
    Journal,
    digest_of,
    journal_replay,
    state_digest,
    truncate_to_cursor,
)
from heurevo.core.types import (
    FitnessRecord,
    Heuristic,
    JournalEvent,
    RunConfig,
    TaskSpec,
    compute_gain,
)
from heurevo.engines.evaluate import evaluate_heuristic
from heurevo.engines.instances import InstanceSet
from heurevo.errors import ConfigError, EvolutionError, GatewayError
from heurevo.llm.gateway import Gateway, usage_totals
from heurevo.llm.templates import render_template

MAX_SOURCE_REASKS = 2
SOURCE_NUDGE = "Reply with the complete heuristic inside one fenced code block."
DEFAULT_OFFSPRING_RUNTIME = "builtin:auto"

_CODE_BLOCK = re.compile(r"```[^\n`]*\n(.*?)```", re.DOTALL)


def extract_code_block(text: str) -> str | None:
    """First fenced code block of a response, or None."""
    m = _CODE_BLOCK.search(text)
    if m is None:
        return None
    body = m.group(1).strip()
    if not body:
        return None
    return body + "\n"


# ---------------------------------------------------------------------------
# population and state


@dataclass
class Population:
    """Current members (each with fitness), bounded by capacity."""

    members: list[Heuristic]
    capacity: int
    iteration: int = 0

    def __post_init__(self):
        if self.capacity < 1:
            raise ConfigError("population capacity must be >= 1")
        if len(self.members) > self.capacity:
            raise ConfigError(
                f"population of {len(self.members)} exceeds capacity {self.capacity}"
            )
        sources = [h.source for h in self.members]
        if len(set(sources)) != len(sources):
            raise ConfigError("population members must have distinct source text")


@dataclass
class SearchState:
    """Everything the driver mutates while a run is in flight."""

    population: Population
    registry: dict[str, Heuristic]
    history_ids: list[str]
    best: Heuristic | None
    evaluations_used: int
    iteration: int  # number of completed offspring cohorts = next t
    rng: np.random.Generator
    next_id: int = 1

    def allocate_id(self) -> str:
        hid = f"h{self.next_id:04d}"
        self.next_id += 1
        return hid

    def record(self, h: Heuristic) -> None:
        self.registry[h.id] = h
        self.history_ids.append(h.id)

    def attach_fitness(self, h: Heuristic, record: FitnessRecord) -> Heuristic:
        updated = h.with_fitness(record)
        self.registry[h.id] = updated
        return updated

    def evaluated_history(self) -> list[Heuristic]:
        """All conventionally evaluated, non-failed heuristics, oldest first."""
        out = []
        for hid in self.history_ids:
            h = self.registry[hid]
            if h.fitness is not None and h.fitness.kind == "evaluated" and not h.fitness.is_failure:
                out.append(h)
        return out


# ---------------------------------------------------------------------------
# selection


def _members_of(population: Population | Sequence[Heuristic]) -> list[Heuristic]:
    members = population.members if isinstance(population, Population) else list(population)
    if not members:
        raise ConfigError("selection over an empty population")
    for h in members:
        if h.fitness is None:
            raise ConfigError(f"member {h.id} has no fitness")
    return members


def rank_selection_probabilities(
    population: Population | Sequence[Heuristic],
) -> list[tuple[str, float]]:
    """Rank-based selection weights: p(x) = (1/(rank+N)) / sum_j 1/(rank_j+N).

    Rank 1 is the best canonical fitness; ties break toward the lower id,
    so probabilities depend only on fitness ordering, never on magnitude.
    """
    members = _members_of(population)
    n = len(members)
    ordered = sorted(members, key=lambda h: (h.fitness.value, h.id))
    weights = [1.0 / (rank + n) for rank in range(1, n + 1)]
    total = math.fsum(weights)
    return [(h.id, w / total) for h, w in zip(ordered, weights)]


def sample_parents(
    population: Population | Sequence[Heuristic],
    count: int,
    rng: np.random.Generator,
    *,
    uniform: bool = False,
    paired: bool = False,
) -> list[Heuristic]:
    """Draw parents by rank selection (or uniformly for the ablation).

    With paired=True, consecutive entries form crossover pairs and the
    two members of each pair are forced distinct by id.
    """
    if count < 1:
        raise ConfigError("parent count must be >= 1")
    if paired and count % 2 != 0:
        raise ConfigError("paired sampling needs an even count")
    members = _members_of(population)
    ordered = sorted(members, key=lambda h: (h.fitness.value, h.id))
    if paired and len(members) < 2:
        raise ConfigError("cannot form a distinct pair from a population of 1")
    if uniform:
        probs = None
    else:
        ranked = rank_selection_probabilities(members)
        probs = np.asarray([p for _, p in ranked], dtype=np.float64)

    def draw() -> Heuristic:
        if probs is None:
            return ordered[int(rng.integers(0, len(ordered)))]
        return ordered[int(rng.choice(len(ordered), p=probs))]

    out: list[Heuristic] = []
    for i in range(count):
        parent = draw()
        if paired and i % 2 == 1:
            mate = out[-1]
            attempts = 0
            while parent.id == mate.id and attempts < 100:
                parent = draw()
                attempts += 1
            if parent.id == mate.id:
                parent = next(h for h in ordered if h.id != mate.id)
        out.append(parent)
    return out


# ---------------------------------------------------------------------------
# variation operators


def _derive_source(
    messages: list[tuple[str, str]], gateway: Gateway, temperature: float
) -> tuple[str | None, list]:
    parsed, exchanges = request_with_reasks(
        gateway,
        messages,
        temperature,
        extract_code_block,
        max_reasks=MAX_SOURCE_REASKS,
        nudge=SOURCE_NUDGE,
    )
    return parsed, exchanges


def crossover_offspring(
    parent_a: Heuristic,
    parent_b: Heuristic,
    direction: SearchDirection,
    task: TaskSpec,
    gateway: Gateway,
    *,
    temperature: float,
    allocate_id: Callable[[], str],
    iteration: int,
    derivation_tag: str = "",
    runtime_tag: str = DEFAULT_OFFSPRING_RUNTIME,
    template_dir: str | None = None,
) -> Heuristic | None:
    """One crossover derivation; the better parent is the primary exemplar.

    The derivation tag makes each derivation's prompt digest unique, so
    two pairs that happen to share parents and direction still sample
    independent responses (and recordings replay one-to-one). Returns
    None (offspring dropped) when no code block can be extracted after
    the re-asks.
    """
    if parent_a.id == parent_b.id:
        raise ConfigError("crossover requires two distinct parents")
    if parent_a.fitness is None or parent_b.fitness is None:
        raise ConfigError("crossover parents must both have fitness")
    primary, secondary = sorted(
        (parent_a, parent_b), key=lambda h: (h.fitness.value, h.id)
    )
    messages = render_template(
        "crossover",
        {
            "task_description": task.candidate_signature,
            "primary_source": primary.source,
            "secondary_source": secondary.source,
            "primary_fitness": f"{primary.fitness.value:g}",
            "secondary_fitness": f"{secondary.fitness.value:g}",
            "direction": direction.text,
            "entry_point": task.entry_point,
            "derivation_tag": derivation_tag or f"iteration {iteration}",
        },
        template_dir,
    )
    source, _ = _derive_source(messages, gateway, temperature)
    if source is None:
        return None
    return Heuristic(
        id=allocate_id(),
        source=source,
        runtime_tag=runtime_tag,
        origin="crossover",
        parent_ids=(parent_a.id, parent_b.id),
        iteration_born=iteration,
    )


def elitist_mutation_offspring(
    best: Heuristic,
    direction: SearchDirection,
    task: TaskSpec,
    gateway: Gateway,
    *,
    temperature: float,
    allocate_id: Callable[[], str],
    iteration: int,
    derivation_tag: str = "",
    runtime_tag: str = DEFAULT_OFFSPRING_RUNTIME,
    template_dir: str | None = None,
) -> Heuristic | None:
    """One elitist-mutation derivation around the best-so-far heuristic."""
    if best.fitness is None:
        raise ConfigError("mutation operand must have fitness")
    messages = render_template(
        "elitist_mutation",
        {
            "task_description": task.candidate_signature,
            "best_source": best.source,
            "best_fitness": f"{best.fitness.value:g}",
            "direction": direction.text,
            "entry_point": task.entry_point,
            "derivation_tag": derivation_tag or f"iteration {iteration}",
        },
        template_dir,
    )
    source, _ = _derive_source(messages, gateway, temperature)
    if source is None:
        return None
    return Heuristic(
        id=allocate_id(),
        source=source,
        runtime_tag=runtime_tag,
        origin="mutation",
        parent_ids=(best.id,),
        iteration_born=iteration,
    )


def update_population(
    population: Population, offspring: Sequence[Heuristic]
) -> Population:
    """(mu + lambda) truncation with exact-source dedupe.

    Among textual duplicates a conventionally evaluated, non-failed copy
    beats a predicted one (ground truth wins); otherwise the earlier copy
    is kept.
    """
    for h in offspring:
        if h.fitness is None:
            raise ConfigError(f"offspring {h.id} has no fitness decided")

    def grounded(h: Heuristic) -> bool:
        return h.fitness.kind == "evaluated" and not h.fitness.is_failure

    chosen: dict[str, Heuristic] = {}
    for h in list(population.members) + list(offspring):
        held = chosen.get(h.source)
        if held is None or (grounded(h) and not grounded(held)):
            chosen[h.source] = h
    merged = sorted(chosen.values(), key=lambda h: (h.fitness.value, h.id))
    return Population(
        members=merged[: population.capacity],
        capacity=population.capacity,
        iteration=population.iteration + 1,
    )


# ---------------------------------------------------------------------------
# cohort arithmetic


def cohort_plan(cfg: RunConfig) -> tuple[int, int, int]:
    """(crossover pairs, mutation derivations, planned horizon T).

    One offspring per pair; mutation count is a fraction of the pair
    count. T is fixed from the budget so the elite/parent switch of the
    direction source has a stable boundary.
    """
    n_pairs = math.floor(cfg.population_size * cfg.crossover_rate / 2)
    n_mut = math.floor(n_pairs * cfg.mutation_rate)
    n_offspring = n_pairs + n_mut
    if n_offspring == 0:
        return 0, 0, 0
    horizon = math.ceil(
        max(0, cfg.max_evaluations - cfg.population_size) / n_offspring
    )
    return n_pairs, n_mut, horizon


# ---------------------------------------------------------------------------
# the orchestrator


class SearchDriver:
    """Runs the full search loop against a journal.

    One driver owns one journal file and all mutable state; every state
    change is journaled before the next step, so a crash at any point
    leaves a resumable journal behind.
    """

    def __init__(
        self,
        cfg: RunConfig,
        task: TaskSpec,
        gateway: Gateway,
        bridge: WorkerBridge,
        journal_path: str,
        *,
        template_dir: str | None = None,
    ):
        validate_config(cfg)
        self.cfg = cfg
        self.task = task
        self.gateway = gateway
        self.bridge = bridge
        self.journal_path = journal_path
        self.template_dir = template_dir
        self.train_set = InstanceSet(task.train_instances)
        self.test_set = InstanceSet(task.test_instances) if task.test_instances else None
        self.n_pairs, self.n_mut, self.horizon = cohort_plan(cfg)
        self.runtime_tag = task.solver_params.get(
            "offspring_runtime", DEFAULT_OFFSPRING_RUNTIME
        )
        self.journal: Journal | None = None
        self.state: SearchState | None = None
        # Cumulative usage carried over from a resumed run's earlier session;
        # the gateway only counts calls made through *this* session.
        self.usage_base: tuple[int, int, int] = (0, 0, 0)

    # -- journal helpers ------------------------------------------------

    def _emit(self, kind: str, payload: dict[str, Any]) -> None:
        assert self.journal is not None
        self.journal.append(
            JournalEvent(
                seq=self.journal.last_seq + 1,
                timestamp=time.time(),
                kind=kind,
                payload=payload,
            )
        )

    def _usage_snapshot(self) -> dict[str, int]:
        ctx, gen, calls = usage_totals(self.gateway)
        return {
            "context_tokens": self.usage_base[0] + ctx,
            "generation_tokens": self.usage_base[1] + gen,
            "calls": self.usage_base[2] + calls,
        }

    def _checkpoint(self) -> None:
        state = self.state
        member_ids = [h.id for h in state.population.members]
        rng_state = state.rng.bit_generator.state
        digest = state_digest(
            member_ids,
            state.registry,
            state.best.id if state.best else None,
            state.evaluations_used,
            state.iteration,
            rng_state,
        )
        self._emit(
            "population_updated",
            {
                "iteration": state.iteration,
                "member_ids": member_ids,
                "evaluations_used": state.evaluations_used,
                "rng_state": rng_state,
                "usage": self._usage_snapshot(),
                "state_digest": digest,
            },
        )

    # -- evaluation plumbing ----------------------------------------------

    def _evaluate(self, h: Heuristic, iteration: int, phase: str) -> Heuristic:
        """Run one conventional evaluation, journal it, update best."""
        state = self.state
        record, detail = evaluate_heuristic(
            h, self.task, self.train_set, self.bridge, iteration=iteration
        )
        state.evaluations_used += 1
        payload: dict[str, Any] = {
            "heuristic_id": h.id,
            "value": record.value,
            "eval_seconds": record.eval_seconds,
            "iteration": iteration,
            "phase": phase,
            "raw_objectives": detail.get("instance_objectives", []),
            "warnings": detail.get("warnings", []),
        }
        if record.is_failure:
            payload["failed_instance"] = detail.get("failed_instance")
            payload["diagnostic"] = detail.get("diagnostic")
        self._emit("evaluation_performed", payload)
        updated = state.attach_fitness(h, record)
        if not record.is_failure and (
            state.best is None or record.value < state.best.fitness.value
        ):
            state.best = updated
            self._emit(
                "best_updated",
                {
                    "heuristic_id": updated.id,
                    "value": record.value,
                    "iteration": iteration,
                    "phase": phase,
                },
            )
        return updated

    # -- initialization ---------------------------------------------------

    def _init_population(self) -> None:
        cfg, task, state = self.cfg, self.task, self.state
        seed = task.seed
        state.record(seed)
        seed = self._evaluate(seed, 0, "init")
        if seed.fitness.is_failure:
            diag = "seed heuristic failed evaluation"
            self._emit("error", {"where": "init", "message": diag, "iteration": 0})
            raise EvolutionError(diag)

        members = [seed]
        seen_sources = {seed.source}
        duplicates = 0
        dropped = 0
        init_temp = cfg.temperature + cfg.init_temperature_boost
        base_messages = render_template(
            "population_init",
            {
                "task_description": task.candidate_signature,
                "seed_source": seed.source,
                "entry_point": task.entry_point,
            },
            self.template_dir,
        )
        n_derivations = cfg.population_size - 1
        for i in range(1, n_derivations + 1):
            if state.evaluations_used >= cfg.max_evaluations:
                break
            messages = base_messages + [
                (
                    "user",
                    f"Produce initialization variant {i} of {n_derivations}. "
                    "Explore a meaningfully different design.",
                )
            ]
            source, _ = _derive_source(messages, self.gateway, init_temp)
            if source is None:
                dropped += 1
                self._emit(
                    "error",
                    {
                        "where": "init",
                        "message": f"initialization variant {i} dropped: "
                        "no code block after re-asks",
                        "iteration": 0,
                    },
                )
                continue
            if source in seen_sources:
                duplicates += 1
                continue
            seen_sources.add(source)
            h = Heuristic(
                id=state.allocate_id(),
                source=source,
                runtime_tag=self.runtime_tag,
                origin="init",
                parent_ids=(),
                iteration_born=0,
            )
            state.record(h)
            members.append(self._evaluate(h, 0, "init"))

        state.population = Population(
            members=[state.registry[h.id] for h in members],
            capacity=cfg.population_size,
            iteration=0,
        )
        self._emit(
            "population_initialized",
            {
                "members": [state.registry[h.id].to_dict() for h in members],
                "evaluations_used": state.evaluations_used,
                "iteration": 0,
                "phase": "init",
                "duplicates_dropped": duplicates,
                "derivations_dropped": dropped,
            },
        )
        self._checkpoint()

    # -- one cohort ---------------------------------------------------------

    def _abstract_components(
        self, t: int, parents: list[Heuristic]
    ) -> CoreComponentSet | None:
        cfg, state = self.cfg, self.state
        if not cfg.cap_enabled:
            return None
        source_kind = component_source_for_iteration(t, self.horizon, cfg.lambda_frac)
        if source_kind == "elite":
            pool = sorted(
                state.evaluated_history(), key=lambda h: (h.fitness.value, h.id)
            )[: cfg.elite_k]
        else:
            seen: set[str] = set()
            pool = []
            for p in parents:
                if p.id not in seen:
                    seen.add(p.id)
                    pool.append(p)
        if not pool:
            pool = sorted(
                state.evaluated_history(), key=lambda h: (h.fitness.value, h.id)
            )[: cfg.elite_k]
            source_kind = "elite"
        components, _ = abstract_core_components(
            pool,
            self.task,
            self.gateway,
            iteration=t,
            source_kind=source_kind,
            temperature=cfg.temperature,
            template_dir=self.template_dir,
        )
        self._emit(
            "components_abstracted",
            {
                "iteration": t,
                "source_kind": components.source_kind,
                "components": list(components.components),
                "source_heuristic_ids": list(components.source_heuristic_ids),
                "degraded": components.degraded,
            },
        )
        return components

    def _direction(
        self,
        components: CoreComponentSet | None,
        operator_kind: str,
        context: str,
        t: int,
    ) -> SearchDirection:
        direction, _ = produce_search_direction(
            components,
            operator_kind,
            self.task,
            context,
            self.gateway,
            temperature=self.cfg.temperature,
            template_dir=self.template_dir,
        )
        self._emit(
            "direction_produced",
            {
                "iteration": t,
                "operator": operator_kind,
                "text": direction.text,
                "fallback": direction.fallback,
                "component_source": components.source_kind if components else None,
            },
        )
        return direction

    def _run_cohort(self, t: int) -> None:
        cfg, task, state = self.cfg, self.task, self.state

        # parents and pair degradation
        n_pairs = self.n_pairs
        degraded = 0
        if n_pairs > 0 and len(state.population.members) < 2:
            degraded = n_pairs
            n_pairs = 0
        pairs: list[tuple[Heuristic, Heuristic]] = []
        parents: list[Heuristic] = []
        if n_pairs > 0:
            drawn = sample_parents(
                state.population,
                2 * n_pairs,
                state.rng,
                uniform=not cfg.rank_selection_enabled,
                paired=True,
            )
            pairs = [(drawn[2 * i], drawn[2 * i + 1]) for i in range(n_pairs)]
            parents = drawn
        n_mutations = self.n_mut + degraded
        self._emit(
            "parents_selected",
            {
                "iteration": t,
                "pairs": [[a.id, b.id] for a, b in pairs],
                "mutation_count": n_mutations,
                "degraded_to_mutation": degraded,
            },
        )

        # few-shot examples must be fixed before any offspring exist
        examples = None
        if cfg.ppp_enabled:
            examples = ppp.select_examples(
                state.evaluated_history(),
                parents,
                cfg.n_examples,
                cfg.exemplar_mode,
                iteration=t,
                population=state.population.members,
                rng=state.rng,
            )

        components = self._abstract_components(t, parents)

        # derive offspring
        offspring: list[Heuristic] = []
        for i, (a, b) in enumerate(pairs, start=1):
            better = min(a.fitness.value, b.fitness.value)
            worse = max(a.fitness.value, b.fitness.value)
            context = (
                f"iteration {t}, crossover {i}: primary parent fitness {better:g}, "
                f"secondary parent fitness {worse:g}"
            )
            direction = self._direction(components, "crossover", context, t)
            child = crossover_offspring(
                a,
                b,
                direction,
                task,
                self.gateway,
                temperature=cfg.temperature,
                allocate_id=state.allocate_id,
                iteration=t,
                derivation_tag=f"iteration {t}, crossover {i}",
                runtime_tag=self.runtime_tag,
                template_dir=self.template_dir,
            )
            if child is None:
                self._emit(
                    "error",
                    {
                        "where": "crossover",
                        "message": f"crossover {i} dropped: no code block after re-asks",
                        "iteration": t,
                    },
                )
                continue
            state.record(child)
            self._emit(
                "offspring_created",
                {"heuristic": child.to_dict(), "iteration": t, "operator": "crossover"},
            )
            offspring.append(child)
        for j in range(1, n_mutations + 1):
            context = (
                f"iteration {t}, mutation {j}: refining the best-so-far heuristic "
                f"with fitness {state.best.fitness.value:g}"
            )
            direction = self._direction(components, "mutation", context, t)
            child = elitist_mutation_offspring(
                state.best,
                direction,
                task,
                self.gateway,
                temperature=cfg.temperature,
                allocate_id=state.allocate_id,
                iteration=t,
                derivation_tag=f"iteration {t}, mutation {j}",
                runtime_tag=self.runtime_tag,
                template_dir=self.template_dir,
            )
            if child is None:
                self._emit(
                    "error",
                    {
                        "where": "mutation",
                        "message": f"mutation {j} dropped: no code block after re-asks",
                        "iteration": t,
                    },
                )
                continue
            state.record(child)
            self._emit(
                "offspring_created",
                {"heuristic": child.to_dict(), "iteration": t, "operator": "mutation"},
            )
            offspring.append(child)

        # decide fitness: predict + stratify, else conventional for all
        to_evaluate: list[Heuristic] = []
        decided: list[Heuristic] = []
        if cfg.ppp_enabled and examples is not None and offspring:
            predictions, _, warnings = ppp.predict_batch(
                offspring,
                examples,
                state.registry,
                task,
                self.gateway,
                temperature=cfg.temperature,
                template_dir=self.template_dir,
            )
            sane = []
            for p in predictions:
                if not math.isfinite(p.xi):
                    warnings = list(warnings) + [
                        f"{p.heuristic_id}: non-finite prediction forced to reevaluation"
                    ]
                    p = replace(p, xi=0.0, phi=0.0)
                sane.append(p)
            predictions = sane
            self._emit(
                "prediction_made",
                {
                    "iteration": t,
                    "predictions": [
                        {"heuristic_id": p.heuristic_id, "xi": p.xi, "phi": p.phi}
                        for p in predictions
                    ],
                    "example_ids": [hid for hid, _ in examples.members],
                    "lb": examples.lb_value,
                    "ub": examples.ub_value,
                    "warnings": list(warnings),
                },
            )
            m_t = ppp.acceptance_quota(
                t, cfg.alpha, cfg.beta, self.n_pairs + self.n_mut
            )
            outcomes = ppp.decide_fitness(
                predictions,
                cfg.delta,
                examples.lb_value,
                examples.ub_value,
                m_t,
                cfg.cons_enabled,
            )
            by_id = {p.heuristic_id: p for p in outcomes}
            self._emit(
                "fitness_decided",
                {
                    "iteration": t,
                    "m_t": m_t,
                    "lb": examples.lb_value,
                    "ub": examples.ub_value,
                    "decisions": [
                        {
                            "heuristic_id": p.heuristic_id,
                            "decision": p.decision,
                            "xi": p.xi,
                            "phi": p.phi,
                        }
                        for p in (by_id[h.id] for h in offspring)
                    ],
                },
            )
            for h in offspring:
                p = by_id[h.id]
                if p.decision.startswith("accepted"):
                    record = FitnessRecord(
                        value=p.xi,
                        kind="predicted",
                        confidence=p.phi,
                        eval_seconds=0.0,
                        iteration=t,
                    )
                    decided.append(state.attach_fitness(h, record))
                else:
                    to_evaluate.append(h)
        else:
            to_evaluate = list(offspring)

        for idx, h in enumerate(to_evaluate):
            if state.evaluations_used >= cfg.max_evaluations:
                self._emit(
                    "error",
                    {
                        "where": "budget",
                        "message": f"evaluation budget exhausted; "
                        f"{len(to_evaluate) - idx} offspring dropped",
                        "iteration": t,
                    },
                )
                break
            decided.append(self._evaluate(h, t, "search"))

        state.population = update_population(state.population, decided)
        state.iteration = t + 1
        self._checkpoint()

    # -- entry points -----------------------------------------------------

    def _finalize(self) -> Heuristic | None:
        cfg, task, state = self.cfg, self.task, self.state
        best = state.best
        seed = state.registry[task.seed.id]

        def raw(value: float) -> float:
            return -value if task.sense == "maximize" else value

        payload: dict[str, Any] = {
            "status": "completed",
            "best_id": best.id if best else None,
            "evaluations_used": state.evaluations_used,
            "iterations_completed": state.iteration,
            "horizon": self.horizon,
        }
        if best is not None:
            payload["best_train_value"] = best.fitness.value
            payload["seed_train_value"] = seed.fitness.value
            try:
                payload["gain_train"] = compute_gain(
                    raw(seed.fitness.value), raw(best.fitness.value), task.sense
                )
            except ConfigError:
                payload["gain_train"] = None
            if self.test_set is not None and len(self.test_set) > 0:
                best_test, _ = evaluate_heuristic(
                    best, task, self.test_set, self.bridge,
                    iteration=state.iteration, phase="test",
                )
                seed_test, _ = evaluate_heuristic(
                    seed, task, self.test_set, self.bridge,
                    iteration=state.iteration, phase="test",
                )
                payload["best_test_value"] = best_test.value
                payload["seed_test_value"] = seed_test.value
                if best_test.is_failure or seed_test.is_failure:
                    payload["gain_test"] = None
                else:
                    try:
                        payload["gain_test"] = compute_gain(
                            raw(seed_test.value), raw(best_test.value), task.sense
                        )
                    except ConfigError:
                        payload["gain_test"] = None
        payload["usage"] = self._usage_snapshot()
        payload["state_digest"] = state_digest(
            [h.id for h in state.population.members],
            state.registry,
            best.id if best else None,
            state.evaluations_used,
            state.iteration,
            state.rng.bit_generator.state,
        )
        self._emit("run_finished", payload)
        return best

    def _loop(self, start_iteration: int) -> Heuristic | None:
        state = self.state
        try:
            for t in range(start_iteration, self.horizon):
                if state.evaluations_used >= self.cfg.max_evaluations:
                    break
                self._run_cohort(t)
            return self._finalize()
        except GatewayError as exc:
            self._emit(
                "error",
                {
                    "where": "gateway",
                    "message": str(exc),
                    "iteration": state.iteration,
                },
            )
            raise

    def run(self) -> tuple[Heuristic | None, str]:
        """Fresh run: journal must not already exist with content."""
        cfg_dict = self.cfg.to_dict()
        self.journal = Journal(self.journal_path)
        self.state = SearchState(
            population=Population(members=[], capacity=self.cfg.population_size),
            registry={},
            history_ids=[],
            best=None,
            evaluations_used=0,
            iteration=0,
            rng=np.random.default_rng(self.cfg.rng_seed),
        )
        try:
            self._emit(
                "run_started",
                {
                    "config": cfg_dict,
                    "config_digest": digest_of(cfg_dict),
                    "task": self.task.to_dict(),
                },
            )
            self._init_population()
            best = self._loop(0)
        finally:
            self.journal.close()
        return best, self.journal_path

    def run_from(self, state: SearchState, checkpoint_seq: int) -> tuple[Heuristic | None, str]:
        """Continue a resumed run from its last checkpoint."""
        self.state = state
        self.journal = Journal(self.journal_path, resume_from_seq=checkpoint_seq)
        try:
            best = self._loop(state.iteration)
        finally:
            self.journal.close()
        return best, self.journal_path


def run_search(
    cfg: RunConfig,
    task: TaskSpec,
    gateway: Gateway,
    bridge: WorkerBridge,
    journal_path: str,
    *,
    template_dir: str | None = None,
) -> tuple[Heuristic | None, str]:
    """Execute one full search run; returns (best heuristic, journal path)."""
    driver = SearchDriver(
        cfg, task, gateway, bridge, journal_path, template_dir=template_dir
    )
    return driver.run()


def resume_search(
    journal_path: str,
    gateway: Gateway,
    bridge: WorkerBridge,
    *,
    template_dir: str | None = None,
) -> tuple[Heuristic | None, str]:
    """Resume an interrupted run from its last verified checkpoint.

    The journal tail past the checkpoint is discarded and the work redone;
    the gateway's recording makes redone model calls free and identical.
    """
    first = journal_replay(journal_path)
    if first.finished:
        return first.best, journal_path

    if first.checkpoint_seq < 0:
        # crashed before the first checkpoint: start over on the same path
        truncate_to_cursor(journal_path, 0)
        driver = SearchDriver(
            first.config, first.task, gateway, bridge, journal_path,
            template_dir=template_dir,
        )
        return driver.run()

    truncate_to_cursor(journal_path, first.checkpoint_cursor)
    rr = journal_replay(journal_path)
    rng = np.random.default_rng(rr.config.rng_seed)
    if rr.rng_state is not None:
        rng.bit_generator.state = rr.rng_state
    numeric_ids = [
        int(hid[1:]) for hid in rr.registry if hid.startswith("h") and hid[1:].isdigit()
    ]
    state = SearchState(
        population=Population(
            members=rr.population,
            capacity=rr.config.population_size,
            iteration=rr.iteration,
        ),
        registry=dict(rr.registry),
        history_ids=list(rr.history_ids),
        best=rr.best,
        evaluations_used=rr.evaluations_used,
        iteration=rr.iteration,
        rng=rng,
        next_id=max(numeric_ids, default=0) + 1,
    )
    driver = SearchDriver(
        rr.config, rr.task, gateway, bridge, journal_path, template_dir=template_dir
    )
    driver.usage_base = rr.usage
    return driver.run_from(state, rr.checkpoint_seq)
