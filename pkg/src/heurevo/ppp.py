"""Fitness prediction in place of conventional evaluation.

Example selection picks the historical boundary heuristics plus the best
distinct-fitness parents; a single batched prompt predicts fitness and
confidence for the whole offspring cohort; confidence stratification
accepts predictions by band or sends the offspring back to conventional
evaluation. All fitness values here live on the canonical minimization
scale, so lb < ub always means best < worst.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from heurevo.core.types import Heuristic, TaskSpec
from heurevo.errors import ConfigError
from heurevo.llm.gateway import ChatExchange, Gateway
from heurevo.llm.templates import render_template

DECISIONS = ("accepted_band1", "accepted_band2", "accepted_band3", "reevaluate")

_SCORE_LINE = re.compile(r"^\s*score\s*=\s*(\S+)\s+confidence\s*=\s*(\S+)\s*$")


@dataclass(frozen=True)
class ExampleSet:
    iteration: int
    members: tuple[tuple[str, float], ...]  # (heuristic id, canonical fitness)
    lb_heuristic: str
    ub_heuristic: str
    lb_value: float
    ub_value: float


@dataclass(frozen=True)
class Prediction:
    heuristic_id: str
    xi: float
    phi: float
    decision: str | None = None

    def __post_init__(self):
        if not 0.0 <= self.phi <= 1.0:
            raise ConfigError(f"phi {self.phi} outside [0, 1]")
        if self.decision is not None and self.decision not in DECISIONS:
            raise ConfigError(f"unknown decision {self.decision!r}")


def _finite_evaluated(history: Sequence[Heuristic]) -> list[Heuristic]:
    return [
        h
        for h in history
        if h.fitness is not None
        and h.fitness.kind == "evaluated"
        and not h.fitness.is_failure
    ]


def select_examples(
    history: Sequence[Heuristic],
    parents: Sequence[Heuristic],
    n_examples: int,
    mode: str,
    *,
    iteration: int,
    population: Sequence[Heuristic] = (),
    rng: np.random.Generator | None = None,
) -> ExampleSet | None:
    """Build the few-shot example set for one iteration.

    Returns None when fewer than two finite conventionally-evaluated
    heuristics exist, which disables prediction for the iteration.
    """
    pool = _finite_evaluated(history)
    if len(pool) < 2:
        return None

    lb = min(pool, key=lambda h: (h.fitness.value, h.id))
    worst_value = max(h.fitness.value for h in pool if h.id != lb.id)
    ub = min(
        (h for h in pool if h.id != lb.id and h.fitness.value == worst_value),
        key=lambda h: h.id,
    )

    if mode == "random":
        if rng is None:
            raise ConfigError("random example mode requires an rng")
        pop = [h for h in population if h.fitness is not None]
        if not pop:
            return None
        count = min(n_examples, len(pop))
        idx = rng.choice(len(pop), size=count, replace=False)
        members = tuple((pop[i].id, pop[i].fitness.value) for i in sorted(idx))
    elif mode in ("exemplar", "exemplar_u"):
        boundary_ids = {lb.id, ub.id}
        candidates = [h for h in _finite_evaluated(parents) if h.id not in boundary_ids]
        candidates.sort(key=lambda h: (h.fitness.value, h.id))
        chosen: list[Heuristic] = []
        seen_values = {lb.fitness.value, ub.fitness.value}
        for h in candidates:
            if len(chosen) >= n_examples - 2:
                break
            if mode == "exemplar":
                if h.fitness.value in seen_values:
                    continue
                seen_values.add(h.fitness.value)
            chosen.append(h)
        members = tuple(
            (h.id, h.fitness.value) for h in [lb, ub] + chosen
        )
    else:
        raise ConfigError(f"unknown exemplar mode {mode!r}")

    return ExampleSet(
        iteration=iteration,
        members=members,
        lb_heuristic=lb.id,
        ub_heuristic=ub.id,
        lb_value=lb.fitness.value,
        ub_value=ub.fitness.value,
    )


def acceptance_quota(t: int, alpha: float, beta: float, n_offspring: int) -> int:
    """Band-2 acceptance budget for iteration t: floor(alpha * beta^t * N_o)."""
    if not 0.0 < alpha < 1.0:
        raise ConfigError("alpha must lie in (0, 1)")
    if not 0.0 < beta < 1.0:
        raise ConfigError("beta must lie in (0, 1)")
    if n_offspring < 0:
        raise ConfigError("n_offspring must be >= 0")
    return math.floor(alpha * beta**t * n_offspring)


def _parse_score_lines(text: str) -> list[tuple[float, float] | None]:
    """Parse score/confidence lines in order; unparsable floats become None."""
    parsed: list[tuple[float, float] | None] = []
    for line in text.splitlines():
        m = _SCORE_LINE.match(line)
        if not m:
            continue
        try:
            xi = float(m.group(1))
            phi = float(m.group(2))
        except ValueError:
            parsed.append(None)
            continue
        if not math.isfinite(xi) or not math.isfinite(phi):
            parsed.append(None)
            continue
        parsed.append((xi, phi))
    return parsed


def predict_batch(
    targets: Sequence[Heuristic],
    examples: ExampleSet,
    lookup: dict[str, Heuristic],
    task: TaskSpec,
    gateway: Gateway,
    *,
    temperature: float,
    template_dir: str | None = None,
) -> tuple[list[Prediction], list[ChatExchange], list[str]]:
    """Predict fitness for a cohort in one prompt.

    Parse failures degrade per target to phi=0 (forcing reevaluation); a
    response with no parsable line at all is re-asked once, then the whole
    cohort degrades to phi=0. Returns (predictions, exchanges, warnings).
    """
    if not targets:
        return [], [], []
    example_blocks = []
    for i, (hid, value) in enumerate(examples.members):
        src = lookup[hid].source
        example_blocks.append(
            f"Example {i + 1} (fitness {value:g}):\n```python\n{src}\n```"
        )
    target_blocks = []
    for i, h in enumerate(targets):
        target_blocks.append(f"Target {i + 1}:\n```python\n{h.source}\n```")
    messages = render_template(
        "ppp_predict",
        {
            "task_description": task.candidate_signature,
            "examples": "\n\n".join(example_blocks),
            "targets": "\n\n".join(target_blocks),
            "n_targets": len(targets),
        },
        template_dir,
    )

    exchanges: list[ChatExchange] = []
    lines: list[tuple[float, float] | None] = []
    for attempt in range(2):  # initial + 1 re-ask on whole-response failure
        if attempt == 0:
            msgs = messages
        else:
            msgs = messages + [
                (
                    "user",
                    "Your previous response contained no parsable score line. "
                    "Respond again following the required format exactly. (attempt 2)",
                )
            ]
        exchange = gateway.complete_chat(msgs, temperature)
        exchanges.append(exchange)
        lines = _parse_score_lines(exchange.response)
        if any(line is not None for line in lines):
            break

    warnings: list[str] = []
    predictions: list[Prediction] = []
    for i, h in enumerate(targets):
        line = lines[i] if i < len(lines) else None
        if line is None:
            warnings.append(f"{h.id}: unparsable prediction, phi forced to 0")
            predictions.append(Prediction(heuristic_id=h.id, xi=0.0, phi=0.0))
            continue
        xi, phi = line
        if phi < 0.0 or phi > 1.0:
            clamped = min(max(phi, 0.0), 1.0)
            warnings.append(f"{h.id}: confidence {phi:g} clamped to {clamped:g}")
            phi = clamped
        predictions.append(Prediction(heuristic_id=h.id, xi=xi, phi=phi))
    return predictions, exchanges, warnings


def decide_fitness(
    preds: Sequence[Prediction],
    delta: float,
    lb_t: float,
    ub_t: float,
    m_t: int,
    cons_enabled: bool = True,
) -> list[Prediction]:
    """Confidence stratification: accept or reevaluate each prediction.

    Pure and order-independent: band-2 quota ranking uses (confidence
    descending, id ascending), never list position. lb_t >= ub_t disables
    stratification (everything reevaluates); cons_enabled=False accepts
    everything.
    """
    if not cons_enabled:
        return [replace(p, decision="accepted_band1") for p in preds]
    if lb_t >= ub_t:
        return [replace(p, decision="reevaluate") for p in preds]

    band1_floor = 1.0 - delta
    band2_floor = 1.0 - 2.0 * delta
    band3_floor = 1.0 - 3.0 * delta
    band3_threshold = lb_t + 3.0 * delta * (ub_t - lb_t)

    band2 = [p for p in preds if band2_floor <= p.phi < band1_floor]
    band2_ranked = sorted(band2, key=lambda p: (-p.phi, p.heuristic_id))
    band2_accepted = {p.heuristic_id for p in band2_ranked[:m_t]}

    decided = []
    for p in preds:
        if p.phi >= band1_floor:
            decision = "accepted_band1"
        elif band2_floor <= p.phi < band1_floor:
            decision = (
                "accepted_band2" if p.heuristic_id in band2_accepted else "reevaluate"
            )
        elif band3_floor <= p.phi < band2_floor:
            decision = "accepted_band3" if p.xi > band3_threshold else "reevaluate"
        else:
            decision = "reevaluate"
        decided.append(replace(p, decision=decision))
    return decided


def prediction_accuracy(
    pairs: Sequence[tuple[float, float]], delta: float, lb_t: float, ub_t: float
) -> float:
    """Fraction of (predicted, true) pairs with |error| strictly below
    delta * (ub_t - lb_t)."""
    if not pairs:
        raise ConfigError("prediction_accuracy undefined for an empty pair list")
    if lb_t >= ub_t:
        raise ConfigError("prediction_accuracy requires lb_t < ub_t")
    threshold = delta * (ub_t - lb_t)
    hits = sum(1 for xi, true in pairs if abs(xi - true) < threshold)
    return hits / len(pairs)


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pearson correlation of predictions vs true values (report helper)."""
    if len(xs) != len(ys) or len(xs) < 2:
        raise ConfigError("pearson requires two equal-length lists of >= 2 values")
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if np.std(x) == 0 or np.std(y) == 0:
        raise ConfigError("pearson undefined for constant input")
    return float(np.corrcoef(x, y)[0, 1])
