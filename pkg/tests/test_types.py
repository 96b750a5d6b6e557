"""Core domain types: fitness records, heuristics, tasks, gain."""

from __future__ import annotations

import math

import pytest

from heurevo.core.types import (
    FAILURE_SENTINEL,
    FitnessRecord,
    Heuristic,
    TaskSpec,
    compute_gain,
)
from heurevo.errors import ConfigError

from conftest import make_heuristic


def rec(value, kind="evaluated", confidence=1.0):
    return FitnessRecord(
        value=value, kind=kind, confidence=confidence, eval_seconds=0.1, iteration=0
    )


class TestFitnessRecord:
    def test_failure_sentinel_is_flagged(self):
        assert rec(FAILURE_SENTINEL).is_failure
        assert not rec(42.0).is_failure

    def test_nan_and_inf_rejected(self):
        with pytest.raises(ConfigError):
            rec(float("nan"))
        with pytest.raises(ConfigError):
            rec(float("inf"))

    def test_evaluated_requires_full_confidence(self):
        with pytest.raises(ConfigError):
            rec(1.0, confidence=0.9)
        assert rec(1.0, kind="predicted", confidence=0.9).confidence == 0.9

    def test_confidence_bounds(self):
        with pytest.raises(ConfigError):
            rec(1.0, kind="predicted", confidence=1.5)
        with pytest.raises(ConfigError):
            rec(1.0, kind="predicted", confidence=-0.1)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ConfigError):
            rec(1.0, kind="guessed")

    def test_round_trips_through_dict(self):
        r = rec(3.5, kind="predicted", confidence=0.7)
        assert FitnessRecord.from_dict(r.to_dict()) == r


class TestHeuristic:
    def test_empty_source_rejected(self):
        with pytest.raises(ConfigError):
            Heuristic(id="x", source="", runtime_tag="builtin:auto", origin="seed")

    def test_parent_arity_by_origin(self):
        with pytest.raises(ConfigError):
            make_heuristic("c", origin="crossover", parent_ids=("a",))
        with pytest.raises(ConfigError):
            make_heuristic("m", origin="mutation")
        ok = make_heuristic("c", origin="crossover", parent_ids=("a", "b"))
        assert ok.parent_ids == ("a", "b")

    def test_crossover_parents_distinct(self):
        with pytest.raises(ConfigError):
            make_heuristic("c", origin="crossover", parent_ids=("a", "a"))

    def test_with_fitness_is_functional(self):
        h = make_heuristic("h1")
        h2 = h.with_fitness(rec(5.0))
        assert h.fitness is None
        assert h2.fitness.value == 5.0

    def test_round_trips_through_dict(self):
        h = make_heuristic("h1", 2.5, origin="mutation", parent_ids=("h0",))
        assert Heuristic.from_dict(h.to_dict()) == h


class TestTaskSpec:
    def test_unknown_task_rejected(self, bpp_task):
        with pytest.raises(ConfigError):
            TaskSpec(
                task_id="sudoku", sense="minimize", seed=bpp_task.seed,
                train_instances="x", test_instances="",
                candidate_signature="f()",
            )

    def test_canonical_negates_only_maximization(self, bpp_task):
        assert bpp_task.canonical(7.0) == 7.0
        mkp_like = TaskSpec(
            task_id="aco_mkp", sense="maximize", seed=bpp_task.seed,
            train_instances="x", test_instances="",
            candidate_signature="f()",
        )
        assert mkp_like.canonical(7.0) == -7.0

    def test_entry_point_per_task(self, bpp_task):
        assert bpp_task.entry_point == "heuristic"

    def test_round_trips_through_dict(self, bpp_task):
        assert TaskSpec.from_dict(bpp_task.to_dict()) == bpp_task


class TestComputeGain:
    def test_minimization_gain_positive_when_smaller(self):
        assert compute_gain(10.0, 9.0, "minimize") == pytest.approx(0.1)
        assert compute_gain(10.0, 11.0, "minimize") == pytest.approx(-0.1)

    def test_maximization_gain_positive_when_larger(self):
        assert compute_gain(10.0, 11.0, "maximize") == pytest.approx(0.1)
        assert compute_gain(10.0, 9.0, "maximize") == pytest.approx(-0.1)

    def test_identical_performance_is_zero_gain(self):
        assert compute_gain(12.34, 12.34, "minimize") == 0.0
        assert compute_gain(12.34, 12.34, "maximize") == 0.0

    def test_zero_seed_undefined(self):
        with pytest.raises(ConfigError):
            compute_gain(0.0, 1.0, "minimize")

    def test_unknown_sense_rejected(self):
        with pytest.raises(ConfigError):
            compute_gain(1.0, 1.0, "sideways")

    def test_sign_symmetry(self):
        # the same 10% improvement reads as +0.1 under either sense
        assert math.isclose(
            compute_gain(100.0, 90.0, "minimize"),
            compute_gain(100.0, 110.0, "maximize"),
        )
