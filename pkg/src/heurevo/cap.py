"""Core-component abstraction, search directions, and information-gain analytics.

One abstraction call happens per iteration and is shared by crossover and
mutation. Components come from the elite set during the first part of the
run (t <= lambda_frac * T) and from the sampled parents afterwards. The
information-gain functions quantify how much a partition of the search
directions narrows the search; they are analytics over experimenter-supplied
probabilities, not part of the search loop.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable

from heurevo.core.types import Heuristic, TaskSpec
from heurevo.errors import ConfigError, GatewayError
from heurevo.llm.gateway import ChatExchange, Gateway
from heurevo.llm.templates import render_template

MAX_COMPONENTS = 12
MAX_REASKS = 2
FALLBACK_DIRECTION = "improve upon the better parent"

_BULLET = re.compile(r"^\s*(?:[-*•]|\d+[.)])\s+(.*\S)\s*$")


@dataclass(frozen=True)
class CoreComponentSet:
    iteration: int
    source_kind: str  # elite | parent
    components: tuple[str, ...]
    source_heuristic_ids: tuple[str, ...]
    degraded: bool = False

    def __post_init__(self):
        if self.source_kind not in ("elite", "parent"):
            raise ConfigError(f"unknown component source kind {self.source_kind!r}")
        if not self.components:
            raise ConfigError("component set must be non-empty")


@dataclass(frozen=True)
class SearchDirection:
    text: str
    produced_for: str  # crossover | mutation
    component_set_ref: int | None  # iteration of the component set used
    fallback: bool = False

    def __post_init__(self):
        if self.produced_for not in ("crossover", "mutation"):
            raise ConfigError(f"unknown operator kind {self.produced_for!r}")


def request_with_reasks(
    gateway: Gateway,
    messages: list[tuple[str, str]],
    temperature: float,
    parse: Callable[[str], object | None],
    max_reasks: int = MAX_REASKS,
    nudge: str = "Your previous response could not be parsed. "
    "Respond again following the required format exactly.",
) -> tuple[object | None, list[ChatExchange]]:
    """Ask, re-asking on parse failure with an attempt-tagged nudge appended.

    The nudge carries the attempt number so each re-ask has a distinct
    prompt digest; replay caches then reproduce the full ask sequence.
    Returns (parsed value or None, all exchanges made).
    """
    exchanges: list[ChatExchange] = []
    for attempt in range(1 + max_reasks):
        if attempt == 0:
            msgs = messages
        else:
            msgs = messages + [("user", f"{nudge} (attempt {attempt + 1})")]
        exchange = gateway.complete_chat(msgs, temperature)
        exchanges.append(exchange)
        parsed = parse(exchange.response)
        if parsed is not None:
            return parsed, exchanges
    return None, exchanges


def parse_components(text: str) -> tuple[str, ...] | None:
    """Extract bulleted or numbered lines; None when nothing parses."""
    components = []
    for line in text.splitlines():
        m = _BULLET.match(line)
        if m:
            components.append(m.group(1).strip())
    if not components:
        return None
    return tuple(components[:MAX_COMPONENTS])


def first_source_line(source: str) -> str:
    for line in source.splitlines():
        line = line.strip()
        if line:
            return line
    return source.strip()


def abstract_core_components(
    elites: list[Heuristic],
    task: TaskSpec,
    gateway: Gateway,
    *,
    iteration: int,
    source_kind: str,
    temperature: float,
    template_dir: str | None = None,
) -> tuple[CoreComponentSet, list[ChatExchange]]:
    """One zero-shot abstraction over the given heuristics (best first)."""
    if not elites:
        raise ConfigError("abstract_core_components requires at least one heuristic")
    blocks = []
    for i, h in enumerate(elites):
        fit = h.fitness.value if h.fitness else float("nan")
        blocks.append(f"# Heuristic {i + 1} (fitness {fit:g}):\n{h.source}")
    messages = render_template(
        "cap_abstraction",
        {
            "task_description": task.candidate_signature,
            "k": len(elites),
            "elite_sources": "\n\n".join(blocks),
        },
        template_dir,
    )
    parsed, exchanges = request_with_reasks(
        gateway, messages, temperature, parse_components
    )
    if parsed is None:
        # Degraded mode: stand in with one line per source so the run
        # continues; the journal flags it.
        components = tuple(first_source_line(h.source) for h in elites)
        degraded = True
    else:
        components = parsed
        degraded = False
    return (
        CoreComponentSet(
            iteration=iteration,
            source_kind=source_kind,
            components=components,
            source_heuristic_ids=tuple(h.id for h in elites),
            degraded=degraded,
        ),
        exchanges,
    )


def component_source_for_iteration(t: int, T: int, lambda_frac: float) -> str:
    """Elite-sourced components for t <= lambda_frac * T, parent-sourced after."""
    if not 0 <= t <= T:
        raise ConfigError(f"iteration {t} outside [0, {T}]")
    return "elite" if t <= lambda_frac * T else "parent"


def produce_search_direction(
    components: CoreComponentSet | None,
    operator_kind: str,
    task: TaskSpec,
    performance_context: str,
    gateway: Gateway,
    *,
    temperature: float,
    template_dir: str | None = None,
) -> tuple[SearchDirection, list[ChatExchange]]:
    """One search direction for one offspring derivation.

    components=None renders the reflection-style template instead (the
    no-abstraction ablation). An empty response after the re-asks falls
    back to a fixed direction, flagged for the journal.
    """
    if components is not None:
        messages = render_template(
            "cap_direction",
            {
                "task_description": task.candidate_signature,
                "components": "\n".join(f"- {c}" for c in components.components),
                "performance_context": performance_context,
                "operator_kind": operator_kind,
            },
            template_dir,
        )
    else:
        messages = render_template(
            "rp_direction",
            {
                "task_description": task.candidate_signature,
                "performance_context": performance_context,
                "operator_kind": operator_kind,
            },
            template_dir,
        )

    def parse(text: str) -> str | None:
        text = text.strip()
        return text or None

    parsed, exchanges = request_with_reasks(gateway, messages, temperature, parse)
    if parsed is None:
        direction = SearchDirection(
            text=FALLBACK_DIRECTION,
            produced_for=operator_kind,
            component_set_ref=components.iteration if components else None,
            fallback=True,
        )
    else:
        direction = SearchDirection(
            text=str(parsed),
            produced_for=operator_kind,
            component_set_ref=components.iteration if components else None,
        )
    return direction, exchanges


# -- information-gain analytics ---------------------------------------


@dataclass(frozen=True)
class DirectionPartition:
    """A partition of produced directions into k component-aligned subsets
    plus one residual subset: probabilities p_0..p_k."""

    k: int
    probabilities: tuple[float, ...]

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("partition requires k >= 1")
        if len(self.probabilities) != self.k + 1:
            raise ConfigError(
                f"partition with k={self.k} requires {self.k + 1} probabilities, "
                f"got {len(self.probabilities)}"
            )
        for p in self.probabilities:
            if p < 0:
                raise ConfigError(f"negative probability {p}")
        total = math.fsum(self.probabilities)
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"partition probabilities sum to {total!r}, not 1")


def shannon_entropy(probs) -> float:
    """-sum p ln p with 0 ln 0 := 0; natural logarithm."""
    probs = list(probs)
    for p in probs:
        if p < 0:
            raise ConfigError(f"negative probability {p}")
    total = math.fsum(probs)
    if abs(total - 1.0) > 1e-9:
        raise ConfigError(f"probabilities sum to {total!r}, not 1")
    # + 0.0 normalizes the -0.0 a degenerate distribution would produce
    return -math.fsum(p * math.log(p) for p in probs if p > 0) + 0.0


def information_gain(partition: DirectionPartition) -> float:
    """Expected entropy reduction from partitioning the direction space.

    Equals the Shannon entropy of the partition probabilities and lies in
    [0, ln(k+1)]: 0 only for a degenerate partition, the maximum at the
    uniform one.
    """
    ig = shannon_entropy(partition.probabilities)
    bound = math.log(partition.k + 1)
    if not -1e-12 <= ig <= bound + 1e-12:
        raise ConfigError(f"information gain {ig} outside [0, ln(k+1)={bound}]")
    return ig
