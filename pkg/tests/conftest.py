"""Shared fixtures: a scripted gateway, a small bin-packing task, helpers."""

from __future__ import annotations

import json
import pathlib

import pytest

from heurevo import corpus
from heurevo.bridge import WorkerBridge
from heurevo.core.types import FitnessRecord, Heuristic, TaskSpec
from heurevo.engines import generate_instances
from heurevo.llm.gateway import MockEntry, MockScript


def fenced(source: str) -> str:
    """Wrap a source like a chatty model reply with one code block."""
    return f"Here is the heuristic:\n```python\n{source}```\n"


def make_heuristic(
    hid: str,
    value: float | None = None,
    *,
    source: str | None = None,
    origin: str = "init",
    parent_ids: tuple[str, ...] = (),
    kind: str = "evaluated",
    confidence: float | None = None,
    iteration: int = 0,
) -> Heuristic:
    """A compact builder for population/selection unit tests."""
    h = Heuristic(
        id=hid,
        source=source or f"def heuristic():\n    return {hid!r}\n",
        runtime_tag="builtin:auto",
        origin=origin,
        parent_ids=parent_ids,
        iteration_born=iteration,
    )
    if value is None:
        return h
    if confidence is None:
        confidence = 1.0 if kind == "evaluated" else 0.5
    return h.with_fitness(
        FitnessRecord(
            value=value,
            kind=kind,
            confidence=confidence,
            eval_seconds=0.0,
            iteration=iteration,
        )
    )


# Healthy non-seed corpus entries used as scripted initialization variants.
INIT_VARIANTS = [
    "bpp_exp_decay", "bpp_threshold", "bpp_fill_ratio", "bpp_product",
    "bpp_softened_uniform", "bpp_squared_complement", "bpp_small_partner",
    "bpp_large_partner", "bpp_harmonic", "bpp_blend", "bpp_gaussian_fill",
]


def build_mock_script() -> MockScript:
    """Scripted responses driving a full 3-iteration bin-packing run.

    Initialization answers cycle through the healthy corpus (duplicates are
    dropped by the driver); crossover first produces two pathological
    candidates to exercise the failure paths, then settles on a healthy one;
    mutation produces one negative-valued candidate (clamp path) and then
    copies of the seed (duplicate path); predictions are uniformly confident.
    """
    entries = []
    for i in range(1, 15):
        name = INIT_VARIANTS[(i - 1) % len(INIT_VARIANTS)]
        entries.append(MockEntry(
            matcher="substring",
            pattern=f"initialization variant {i} of 14",
            response=fenced(corpus.corpus_source(name)),
            context_tokens=200, generation_tokens=80,
        ))
    entries.append(MockEntry(
        matcher="substring", pattern="Abstract the core components",
        response=(
            "- pairwise slack shaping\n- capacity-relative normalization\n"
            "- tie handling"
        ),
        context_tokens=300, generation_tokens=30,
    ))
    entries.append(MockEntry(
        matcher="substring", pattern="actionable search direction",
        response="Sharpen the promise peak around bin-filling pairs.",
        context_tokens=150, generation_tokens=20,
    ))
    entries.append(MockEntry(
        matcher="substring", pattern="Reflect on the relative performance",
        response="Prefer denser packings over loose ones.",
        context_tokens=120, generation_tokens=18,
    ))
    entries.append(MockEntry(
        matcher="substring", pattern="learns primarily from the primary parent",
        response=fenced(corpus.corpus_source("bpp_nan_promise")), max_uses=1,
        context_tokens=400, generation_tokens=90,
    ))
    entries.append(MockEntry(
        matcher="substring", pattern="learns primarily from the primary parent",
        response=fenced(corpus.corpus_source("bpp_wrong_shape")), max_uses=1,
        context_tokens=400, generation_tokens=90,
    ))
    entries.append(MockEntry(
        matcher="substring", pattern="learns primarily from the primary parent",
        response=fenced(corpus.corpus_source("bpp_exp_decay")),
        context_tokens=400, generation_tokens=90,
    ))
    entries.append(MockEntry(
        matcher="substring", pattern="Derive one mutated variant",
        response=fenced(corpus.corpus_source("bpp_negative_promise")), max_uses=1,
        context_tokens=350, generation_tokens=85,
    ))
    entries.append(MockEntry(
        matcher="substring", pattern="Derive one mutated variant",
        response=fenced(corpus.corpus_source("bpp_complementarity")),
        context_tokens=350, generation_tokens=85,
    ))
    entries.append(MockEntry(
        matcher="substring", pattern="Predict the fitness value",
        response="\n".join("score=12.0 confidence=0.95" for _ in range(10)),
        context_tokens=500, generation_tokens=60,
    ))
    return MockScript(entries)


def mock_script_toml(path: pathlib.Path) -> pathlib.Path:
    """The same scripted responses as a TOML file for CLI runs."""
    lines = []
    for e in build_mock_script().entries:
        lines.append("[[entries]]")
        lines.append(f"matcher = {json.dumps(e.matcher)}")
        lines.append(f"pattern = {json.dumps(e.pattern)}")
        lines.append(f"response = {json.dumps(e.response)}")
        if e.context_tokens:
            lines.append(f"context_tokens = {e.context_tokens}")
        if e.generation_tokens:
            lines.append(f"generation_tokens = {e.generation_tokens}")
        if e.max_uses is not None:
            lines.append(f"max_uses = {e.max_uses}")
        lines.append("")
    path.write_text("\n".join(lines), encoding="utf-8")
    return path


def make_bpp_task(root: pathlib.Path, *, with_test: bool = True) -> TaskSpec:
    train = root / "train"
    if not train.is_dir():
        generate_instances("aco_bpp", count=3, size=25, rng_seed=5,
                           out_dir=str(train))
    test = root / "test"
    if with_test and not test.is_dir():
        generate_instances("aco_bpp", count=3, size=25, rng_seed=6,
                           out_dir=str(test))
    return TaskSpec(
        task_id="aco_bpp", sense="minimize",
        seed=corpus.seed_heuristic("aco_bpp"),
        train_instances=str(train),
        test_instances=str(test) if with_test else "",
        candidate_signature="heuristic(demands, capacity) -> pairwise promise matrix",
        solver_params={"n_iterations": 10, "n_ants": 8},
    )


@pytest.fixture(scope="session")
def bpp_task(tmp_path_factory) -> TaskSpec:
    return make_bpp_task(tmp_path_factory.mktemp("bpp_task"))


@pytest.fixture(scope="session")
def bridge():
    with WorkerBridge() as b:
        yield b
