"""Example selection, batched fitness prediction, and confidence bands."""

from __future__ import annotations

import random

import numpy as np
import pytest
from conftest import make_heuristic

from heurevo.errors import ConfigError
from heurevo.core.types import TaskSpec
from heurevo.llm.gateway import Gateway, MockEntry, MockScript
from heurevo.ppp import (
    ExampleSet,
    Prediction,
    acceptance_quota,
    decide_fitness,
    pearson,
    predict_batch,
    prediction_accuracy,
    select_examples,
)


def exemplar(history, parents, n=4, *, mode="exemplar", **kw):
    return select_examples(history, parents, n, mode, iteration=1, **kw)


class TestPrediction:
    def test_phi_outside_unit_interval_rejected(self):
        with pytest.raises(ConfigError):
            Prediction(heuristic_id="h", xi=1.0, phi=1.2)
        with pytest.raises(ConfigError):
            Prediction(heuristic_id="h", xi=1.0, phi=-0.1)

    def test_unknown_decision_rejected(self):
        with pytest.raises(ConfigError):
            Prediction(heuristic_id="h", xi=1.0, phi=0.5, decision="maybe")

    def test_decision_defaults_to_none(self):
        assert Prediction(heuristic_id="h", xi=1.0, phi=0.5).decision is None


class TestSelectExamples:
    def test_needs_two_finite_evaluated(self):
        assert exemplar([], []) is None
        assert exemplar([make_heuristic("a", 1.0)], []) is None
        # A prediction does not count toward the minimum of two.
        history = [
            make_heuristic("a", 1.0),
            make_heuristic("p", 2.0, kind="predicted"),
        ]
        assert exemplar(history, history) is None

    def test_failure_sentinel_excluded_from_pool(self):
        import sys

        sentinel = sys.float_info.max
        history = [
            make_heuristic("a", 1.0),
            make_heuristic("bad", sentinel),
        ]
        assert exemplar(history, history) is None

    def test_boundaries_identified(self):
        history = [
            make_heuristic("a", 10.0),
            make_heuristic("b", 30.0),
            make_heuristic("c", 20.0),
        ]
        ex = exemplar(history, [])
        assert ex.lb_heuristic == "a" and ex.lb_value == 10.0
        assert ex.ub_heuristic == "b" and ex.ub_value == 30.0
        assert ex.members[0] == ("a", 10.0)
        assert ex.members[1] == ("b", 30.0)
        assert ex.iteration == 1

    def test_best_tie_broken_by_id(self):
        history = [make_heuristic("b", 10.0), make_heuristic("a", 10.0)]
        ex = exemplar(history, [])
        assert ex.lb_heuristic == "a"
        assert ex.ub_heuristic == "b"

    def test_worst_tie_broken_by_id(self):
        history = [
            make_heuristic("a", 10.0),
            make_heuristic("c", 30.0),
            make_heuristic("b", 30.0),
        ]
        ex = exemplar(history, [])
        assert ex.ub_heuristic == "b"

    def test_all_equal_fitness_uses_two_lowest_ids(self):
        history = [make_heuristic(i, 7.0) for i in ("c", "a", "b")]
        ex = exemplar(history, [])
        assert ex.lb_heuristic == "a"
        assert ex.ub_heuristic == "b"
        assert ex.lb_value == ex.ub_value == 7.0

    def test_exemplar_fills_with_best_distinct_parents(self):
        history = [
            make_heuristic("lb", 10.0),
            make_heuristic("ub", 30.0),
        ]
        parents = [
            make_heuristic("p1", 12.0),
            make_heuristic("p2", 12.0),  # duplicate fitness, dropped
            make_heuristic("p3", 15.0),
            make_heuristic("p4", 18.0),
        ]
        ex = exemplar(history + parents, parents, n=4)
        assert ex.members == (
            ("lb", 10.0),
            ("ub", 30.0),
            ("p1", 12.0),
            ("p3", 15.0),
        )

    def test_exemplar_skips_values_already_on_boundary(self):
        history = [make_heuristic("lb", 10.0), make_heuristic("ub", 30.0)]
        parents = [make_heuristic("p1", 10.0), make_heuristic("p2", 14.0)]
        ex = exemplar(history + parents, parents, n=4)
        assert ("p1", 10.0) not in ex.members
        assert ("p2", 14.0) in ex.members

    def test_exemplar_u_keeps_duplicate_fitness(self):
        history = [make_heuristic("lb", 10.0), make_heuristic("ub", 30.0)]
        parents = [make_heuristic("p1", 12.0), make_heuristic("p2", 12.0)]
        ex = exemplar(history + parents, parents, n=4, mode="exemplar_u")
        assert ex.members == (
            ("lb", 10.0),
            ("ub", 30.0),
            ("p1", 12.0),
            ("p2", 12.0),
        )

    def test_member_count_capped(self):
        history = [make_heuristic("lb", 1.0), make_heuristic("ub", 99.0)]
        parents = [make_heuristic(f"p{i}", 10.0 + i) for i in range(10)]
        ex = exemplar(history + parents, parents, n=5)
        assert len(ex.members) == 5

    def test_two_examples_means_boundaries_only(self):
        history = [make_heuristic("lb", 1.0), make_heuristic("ub", 2.0)]
        parents = [make_heuristic("p", 1.5)]
        ex = exemplar(history + parents, parents, n=2)
        assert ex.members == (("lb", 1.0), ("ub", 2.0))

    def test_predicted_parents_never_become_examples(self):
        history = [make_heuristic("lb", 10.0), make_heuristic("ub", 30.0)]
        parents = [
            make_heuristic("ghost", 11.0, kind="predicted"),
            make_heuristic("real", 14.0),
        ]
        ex = exemplar(history + parents, parents, n=4)
        ids = [hid for hid, _ in ex.members]
        assert "ghost" not in ids
        assert "real" in ids

    def test_predicted_history_never_on_boundary(self):
        history = [
            make_heuristic("a", 10.0),
            make_heuristic("b", 20.0),
            make_heuristic("ghost", 1.0, kind="predicted"),
        ]
        ex = exemplar(history, [])
        assert ex.lb_heuristic == "a"

    def test_random_mode_requires_rng(self):
        history = [make_heuristic("a", 1.0), make_heuristic("b", 2.0)]
        with pytest.raises(ConfigError):
            exemplar(history, [], mode="random", population=history)

    def test_random_mode_empty_population(self):
        history = [make_heuristic("a", 1.0), make_heuristic("b", 2.0)]
        rng = np.random.default_rng(0)
        assert exemplar(history, [], mode="random", population=[], rng=rng) is None

    def test_random_mode_samples_without_replacement(self):
        history = [make_heuristic(f"h{i}", float(i)) for i in range(8)]
        rng = np.random.default_rng(7)
        ex = exemplar(history, [], n=4, mode="random", population=history, rng=rng)
        ids = [hid for hid, _ in ex.members]
        assert len(ids) == 4
        assert len(set(ids)) == 4
        assert set(ids) <= {h.id for h in history}
        # Boundary bookkeeping still reflects the true extremes.
        assert ex.lb_heuristic == "h0" and ex.ub_heuristic == "h7"

    def test_random_mode_truncates_to_population(self):
        history = [make_heuristic("a", 1.0), make_heuristic("b", 2.0)]
        rng = np.random.default_rng(0)
        ex = exemplar(history, [], n=6, mode="random", population=history, rng=rng)
        assert len(ex.members) == 2

    def test_unknown_mode_rejected(self):
        history = [make_heuristic("a", 1.0), make_heuristic("b", 2.0)]
        with pytest.raises(ConfigError):
            exemplar(history, [], mode="nearest")


class TestAcceptanceQuota:
    def test_hand_schedule(self):
        got = [acceptance_quota(t, 0.5, 0.8, 10) for t in range(6)]
        assert got == [5, 4, 3, 2, 2, 1]

    def test_decays_to_zero(self):
        assert acceptance_quota(50, 0.5, 0.8, 10) == 0

    def test_monotone_nonincreasing(self):
        quotas = [acceptance_quota(t, 0.37, 0.91, 12) for t in range(40)]
        assert all(a >= b for a, b in zip(quotas, quotas[1:]))

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.5])
    def test_alpha_bounds(self, alpha):
        with pytest.raises(ConfigError):
            acceptance_quota(0, alpha, 0.8, 10)

    @pytest.mark.parametrize("beta", [0.0, 1.0, 2.0])
    def test_beta_bounds(self, beta):
        with pytest.raises(ConfigError):
            acceptance_quota(0, 0.5, beta, 10)

    def test_negative_offspring_rejected(self):
        with pytest.raises(ConfigError):
            acceptance_quota(0, 0.5, 0.8, -1)

    def test_zero_offspring(self):
        assert acceptance_quota(0, 0.5, 0.8, 0) == 0


def bpp_task() -> TaskSpec:
    return TaskSpec(
        task_id="aco_bpp",
        sense="minimize",
        seed=make_heuristic("seed"),
        train_instances="train",
        test_instances="test",
        candidate_signature="heuristic(demands, capacity) -> pairwise promise matrix",
    )


def example_set() -> tuple[ExampleSet, dict]:
    lb = make_heuristic("lb", 10.0)
    ub = make_heuristic("ub", 30.0)
    ex = ExampleSet(
        iteration=2,
        members=(("lb", 10.0), ("ub", 30.0)),
        lb_heuristic="lb",
        ub_heuristic="ub",
        lb_value=10.0,
        ub_value=30.0,
    )
    return ex, {"lb": lb, "ub": ub}


def predict_gateway(*entries: MockEntry) -> Gateway:
    return Gateway(mode="mock", script=MockScript(entries=list(entries)))


def scored(*lines: str) -> str:
    return "\n".join(lines)


class TestPredictBatch:
    def test_empty_targets_is_a_no_op(self):
        ex, lookup = example_set()
        gw = predict_gateway()
        assert predict_batch(
            [], ex, lookup, bpp_task(), gw, temperature=0.0
        ) == ([], [], [])

    def test_parses_scores_in_target_order(self):
        ex, lookup = example_set()
        gw = predict_gateway(
            MockEntry(
                matcher="substring",
                pattern="Predict the fitness",
                response=scored(
                    "score=12.5 confidence=0.9",
                    "score=3.0 confidence=0.4",
                ),
            )
        )
        targets = [make_heuristic("t1"), make_heuristic("t2")]
        preds, exchanges, warnings = predict_batch(
            targets, ex, lookup, bpp_task(), gw, temperature=0.0
        )
        assert [(p.heuristic_id, p.xi, p.phi) for p in preds] == [
            ("t1", 12.5, 0.9),
            ("t2", 3.0, 0.4),
        ]
        assert all(p.decision is None for p in preds)
        assert len(exchanges) == 1
        assert warnings == []

    def test_prompt_contains_examples_targets_and_signature(self):
        captured: list[str] = []

        class Spy(MockScript):
            def respond(self, digest, messages):
                captured.append("\n".join(content for _, content in messages))
                return super().respond(digest, messages)

        ex, lookup = example_set()
        gw = Gateway(
            mode="mock",
            script=Spy(
                entries=[
                    MockEntry(
                        matcher="substring",
                        pattern="Predict",
                        response="score=1 confidence=1",
                    )
                ]
            ),
        )
        target = make_heuristic("t1", source="def heuristic(d, c):\n    return d\n")
        predict_batch([target], ex, lookup, bpp_task(), gw, temperature=0.0)
        prompt = captured[0]
        assert "Example 1 (fitness 10):" in prompt
        assert "Example 2 (fitness 30):" in prompt
        assert lookup["lb"].source in prompt
        assert target.source in prompt
        assert "pairwise promise matrix" in prompt
        assert "each of the following 1 new heuristics" in prompt

    def test_out_of_range_confidence_clamped_with_warning(self):
        ex, lookup = example_set()
        gw = predict_gateway(
            MockEntry(
                matcher="substring",
                pattern="Predict",
                response=scored(
                    "score=5.0 confidence=1.3",
                    "score=6.0 confidence=-0.2",
                ),
            )
        )
        targets = [make_heuristic("t1"), make_heuristic("t2")]
        preds, _, warnings = predict_batch(
            targets, ex, lookup, bpp_task(), gw, temperature=0.0
        )
        assert preds[0].phi == 1.0
        assert preds[1].phi == 0.0
        assert len(warnings) == 2
        assert all("clamped" in w for w in warnings)

    def test_missing_line_degrades_that_target_only(self):
        ex, lookup = example_set()
        gw = predict_gateway(
            MockEntry(
                matcher="substring",
                pattern="Predict",
                response="score=5.0 confidence=0.9",
            )
        )
        targets = [make_heuristic("t1"), make_heuristic("t2")]
        preds, _, warnings = predict_batch(
            targets, ex, lookup, bpp_task(), gw, temperature=0.0
        )
        assert (preds[0].xi, preds[0].phi) == (5.0, 0.9)
        assert (preds[1].xi, preds[1].phi) == (0.0, 0.0)
        assert warnings == ["t2: unparsable prediction, phi forced to 0"]

    @pytest.mark.parametrize(
        "bad_line",
        ["score=abc confidence=0.5", "score=inf confidence=0.5", "score=1 confidence=nan"],
    )
    def test_bad_value_degrades_positionally(self, bad_line):
        ex, lookup = example_set()
        gw = predict_gateway(
            MockEntry(
                matcher="substring",
                pattern="Predict",
                response=scored(bad_line, "score=2.0 confidence=0.8"),
            )
        )
        targets = [make_heuristic("t1"), make_heuristic("t2")]
        preds, _, warnings = predict_batch(
            targets, ex, lookup, bpp_task(), gw, temperature=0.0
        )
        assert (preds[0].xi, preds[0].phi) == (0.0, 0.0)
        assert (preds[1].xi, preds[1].phi) == (2.0, 0.8)
        assert len(warnings) == 1

    def test_blank_response_is_reasked_once(self):
        ex, lookup = example_set()
        gw = predict_gateway(
            MockEntry(
                matcher="substring",
                pattern="attempt 2",
                response="score=4.0 confidence=0.7",
            ),
            MockEntry(
                matcher="substring",
                pattern="Predict",
                response="I cannot estimate these.",
            ),
        )
        preds, exchanges, warnings = predict_batch(
            [make_heuristic("t1")], ex, lookup, bpp_task(), gw, temperature=0.0
        )
        assert len(exchanges) == 2
        assert (preds[0].xi, preds[0].phi) == (4.0, 0.7)
        assert warnings == []

    def test_two_blank_responses_degrade_whole_cohort(self):
        ex, lookup = example_set()
        gw = predict_gateway(
            MockEntry(
                matcher="substring",
                pattern="Predict",
                response="no scores today",
            ),
        )
        targets = [make_heuristic("t1"), make_heuristic("t2")]
        preds, exchanges, warnings = predict_batch(
            targets, ex, lookup, bpp_task(), gw, temperature=0.0
        )
        assert len(exchanges) == 2
        assert all((p.xi, p.phi) == (0.0, 0.0) for p in preds)
        assert len(warnings) == 2

    def test_extra_lines_beyond_targets_ignored(self):
        ex, lookup = example_set()
        gw = predict_gateway(
            MockEntry(
                matcher="substring",
                pattern="Predict",
                response=scored(
                    "score=1.0 confidence=0.9",
                    "score=2.0 confidence=0.8",
                    "score=3.0 confidence=0.7",
                ),
            )
        )
        preds, _, warnings = predict_batch(
            [make_heuristic("t1")], ex, lookup, bpp_task(), gw, temperature=0.0
        )
        assert len(preds) == 1
        assert preds[0].xi == 1.0
        assert warnings == []


def pred(hid: str, xi: float, phi: float) -> Prediction:
    return Prediction(heuristic_id=hid, xi=xi, phi=phi)


def decisions(preds, **kw) -> dict[str, str]:
    kw.setdefault("delta", 0.1)
    kw.setdefault("lb_t", 10.0)
    kw.setdefault("ub_t", 20.0)
    kw.setdefault("m_t", 5)
    return {p.heuristic_id: p.decision for p in decide_fitness(preds, **kw)}


class TestDecideFitness:
    # delta=0.1, lb=10, ub=20: band floors at phi 0.9 / 0.8 / 0.7,
    # band-3 score threshold at 10 + 0.3 * 10 = 13.

    def test_band1_accepts_on_confidence_alone(self):
        got = decisions([pred("a", 999.0, 0.95)])
        assert got == {"a": "accepted_band1"}

    def test_band1_floor_is_inclusive(self):
        got = decisions([pred("a", 0.0, 0.9)])
        assert got == {"a": "accepted_band1"}

    def test_band2_accepts_within_quota(self):
        got = decisions([pred("a", 0.0, 0.85), pred("b", 0.0, 0.82)], m_t=1)
        assert got == {"a": "accepted_band2", "b": "reevaluate"}

    def test_band2_floor_is_inclusive(self):
        got = decisions([pred("a", 0.0, 0.8)], m_t=1)
        assert got == {"a": "accepted_band2"}

    def test_band2_quota_tie_broken_by_id(self):
        got = decisions([pred("b", 0.0, 0.85), pred("a", 0.0, 0.85)], m_t=1)
        assert got == {"a": "accepted_band2", "b": "reevaluate"}

    def test_band2_zero_quota_reevaluates(self):
        got = decisions([pred("a", 0.0, 0.85)], m_t=0)
        assert got == {"a": "reevaluate"}

    def test_band3_needs_clearly_nonelite_score(self):
        got = decisions([pred("good", 12.0, 0.75), pred("poor", 14.0, 0.75)])
        assert got == {"good": "reevaluate", "poor": "accepted_band3"}

    def test_band3_threshold_equality_reevaluates(self):
        got = decisions([pred("a", 13.0, 0.75)])
        assert got == {"a": "reevaluate"}

    def test_band3_floor_is_inclusive(self):
        got = decisions([pred("a", 19.0, 0.7)])
        assert got == {"a": "accepted_band3"}

    def test_below_band3_always_reevaluates(self):
        got = decisions([pred("a", 19.0, 0.69), pred("b", 19.0, 0.0)])
        assert got == {"a": "reevaluate", "b": "reevaluate"}

    def test_degenerate_bounds_disable_stratification(self):
        for lb, ub in [(20.0, 20.0), (20.0, 10.0)]:
            got = decisions([pred("a", 15.0, 1.0)], lb_t=lb, ub_t=ub)
            assert got == {"a": "reevaluate"}

    def test_stratification_disabled_accepts_everything(self):
        got = decisions(
            [pred("a", 0.0, 0.0), pred("b", 5.0, 0.5)], cons_enabled=False
        )
        assert got == {"a": "accepted_band1", "b": "accepted_band1"}

    def test_inputs_not_mutated(self):
        p = pred("a", 1.0, 0.95)
        decide_fitness([p], 0.1, 10.0, 20.0, 5)
        assert p.decision is None

    def test_order_independent(self):
        preds = [
            pred("a", 14.0, 0.95),
            pred("b", 14.0, 0.85),
            pred("c", 14.0, 0.85),
            pred("d", 12.0, 0.75),
            pred("e", 14.0, 0.75),
            pred("f", 14.0, 0.5),
        ]
        reference = decisions(list(preds), m_t=1)
        rng = random.Random(3)
        for _ in range(20):
            shuffled = list(preds)
            rng.shuffle(shuffled)
            assert decisions(shuffled, m_t=1) == reference

    def test_all_four_decisions_reachable_in_one_cohort(self):
        got = decisions(
            [
                pred("a", 14.0, 0.95),
                pred("b", 14.0, 0.85),
                pred("c", 14.0, 0.75),
                pred("d", 14.0, 0.1),
            ],
            m_t=1,
        )
        assert sorted(got.values()) == [
            "accepted_band1",
            "accepted_band2",
            "accepted_band3",
            "reevaluate",
        ]


class TestPredictionAccuracy:
    def test_threshold_is_strict(self):
        # delta * (ub - lb) = 1.0 exactly; an absolute error of 1.0 misses.
        assert prediction_accuracy([(14.0, 15.0)], 0.1, 10.0, 20.0) == 0.0
        assert prediction_accuracy([(14.05, 15.0)], 0.1, 10.0, 20.0) == 1.0

    def test_fraction(self):
        pairs = [(10.0, 10.0), (10.0, 10.5), (10.0, 11.0), (10.0, 13.0)]
        assert prediction_accuracy(pairs, 0.1, 10.0, 20.0) == 0.5

    def test_empty_pairs_rejected(self):
        with pytest.raises(ConfigError):
            prediction_accuracy([], 0.1, 10.0, 20.0)

    def test_degenerate_bounds_rejected(self):
        with pytest.raises(ConfigError):
            prediction_accuracy([(1.0, 1.0)], 0.1, 20.0, 20.0)


class TestPearson:
    def test_perfect_correlation(self):
        assert pearson([1, 2, 3], [10, 20, 30]) == pytest.approx(1.0)

    def test_perfect_anticorrelation(self):
        assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)

    def test_hand_value(self):
        assert pearson([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ConfigError):
            pearson([1, 2], [1, 2, 3])

    def test_too_short_rejected(self):
        with pytest.raises(ConfigError):
            pearson([1], [1])

    def test_constant_input_rejected(self):
        with pytest.raises(ConfigError):
            pearson([1, 1, 1], [1, 2, 3])
