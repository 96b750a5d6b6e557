"""Journal append/replay semantics: canonical lines, truncation, digests."""

from __future__ import annotations

import json

import pytest

from heurevo.core.journal import (
    Journal,
    canonical_json,
    digest_of,
    journal_replay,
    mask_timing,
    masked_lines,
    read_events,
    truncate_to_cursor,
)
from heurevo.core.types import JournalEvent
from heurevo.errors import JournalError


def ev(seq, kind="error", **payload):
    return JournalEvent(seq=seq, timestamp=123.456, kind=kind, payload=payload)


class TestCanonicalJson:
    def test_key_order_is_stable(self):
        assert canonical_json({"b": 1, "a": 2}) == '{"a":2,"b":1}'

    def test_no_whitespace(self):
        assert " " not in canonical_json({"a": [1, 2], "b": {"c": 3}})

    def test_floats_round_trip(self):
        x = 0.1 + 0.2
        assert json.loads(canonical_json({"x": x}))["x"] == x

    def test_unicode_not_escaped(self):
        assert canonical_json({"s": "héuristique"}) == '{"s":"héuristique"}'


class TestMasking:
    def test_timing_fields_zeroed_recursively(self):
        obj = {
            "timestamp": 9.9,
            "nested": [{"eval_seconds": 1.5, "value": 2.0}],
        }
        masked = mask_timing(obj)
        assert masked["timestamp"] == 0.0
        assert masked["nested"][0]["eval_seconds"] == 0.0
        assert masked["nested"][0]["value"] == 2.0

    def test_digest_ignores_timing_only(self):
        a = {"timestamp": 1.0, "value": 3}
        b = {"timestamp": 2.0, "value": 3}
        c = {"timestamp": 1.0, "value": 4}
        assert digest_of(a) == digest_of(b)
        assert digest_of(a) != digest_of(c)


class TestJournalAppend:
    def test_seq_must_increment_by_one(self, tmp_path):
        with Journal(str(tmp_path / "j.jsonl")) as j:
            j.append(ev(0, "run_started"))
            j.append(ev(1))
            with pytest.raises(JournalError):
                j.append(ev(3))

    def test_existing_nonempty_journal_refused(self, tmp_path):
        path = tmp_path / "j.jsonl"
        with Journal(str(path)) as j:
            j.append(ev(0, "run_started"))
        with pytest.raises(JournalError):
            Journal(str(path))

    def test_resume_seq_continues_numbering(self, tmp_path):
        path = tmp_path / "j.jsonl"
        with Journal(str(path)) as j:
            j.append(ev(0, "run_started"))
            j.append(ev(1))
        with Journal(str(path), resume_from_seq=1) as j:
            j.append(ev(2))
        events, truncated, _ = read_events(str(path))
        assert [e.seq for e in events] == [0, 1, 2]
        assert not truncated


class TestReadEvents:
    def write(self, path, events):
        with Journal(str(path)) as j:
            for e in events:
                j.append(e)

    def test_round_trip(self, tmp_path):
        path = tmp_path / "j.jsonl"
        self.write(path, [ev(0, "run_started", x=1), ev(1, "error", y=[1, 2])])
        events, truncated, cursor = read_events(str(path))
        assert len(events) == 2
        assert events[1].payload == {"y": [1, 2]}
        assert not truncated
        assert cursor == path.stat().st_size

    def test_truncated_tail_tolerated(self, tmp_path):
        path = tmp_path / "j.jsonl"
        self.write(path, [ev(0, "run_started"), ev(1), ev(2)])
        data = path.read_bytes()
        path.write_bytes(data[:-7])  # chop mid-line
        events, truncated, cursor = read_events(str(path))
        assert truncated
        assert [e.seq for e in events] == [0, 1]
        truncate_to_cursor(str(path), cursor)
        events2, truncated2, _ = read_events(str(path))
        assert not truncated2
        assert [e.seq for e in events2] == [0, 1]

    def test_seq_gap_is_corruption_not_truncation(self, tmp_path):
        path = tmp_path / "j.jsonl"
        lines = [
            canonical_json(ev(0, "run_started").to_dict()),
            canonical_json(ev(2).to_dict()),
        ]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        with pytest.raises(JournalError):
            read_events(str(path))

    def test_first_event_must_open_the_run(self, tmp_path):
        path = tmp_path / "j.jsonl"
        path.write_text(canonical_json(ev(0, "error").to_dict()) + "\n", "utf-8")
        with pytest.raises(JournalError):
            read_events(str(path))

    def test_missing_file(self):
        with pytest.raises(JournalError):
            read_events("/nonexistent/run.jsonl")

    def test_masked_lines_equal_for_differing_timestamps(self, tmp_path):
        p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        with Journal(str(p1)) as j:
            j.append(JournalEvent(0, 1.0, "run_started", {"eval_seconds": 0.5}))
        with Journal(str(p2)) as j:
            j.append(JournalEvent(0, 2.0, "run_started", {"eval_seconds": 0.9}))
        assert masked_lines(str(p1)) == masked_lines(str(p2))


class TestJournalReplay:
    """Replay over real run journals is exercised end-to-end in
    test_run_search; these cover the structural error paths."""

    def test_no_run_started(self, tmp_path):
        path = tmp_path / "j.jsonl"
        path.write_text("", encoding="utf-8")
        with pytest.raises(JournalError):
            journal_replay(str(path))

    def test_checkpoint_digest_mismatch_detected(self, tmp_path):
        path = tmp_path / "j.jsonl"
        cfg_payload = {
            "config": {"rng_seed": 0},
            "config_digest": "x",
            "task": {
                "task_id": "aco_bpp",
                "sense": "minimize",
                "seed": {
                    "id": "seed",
                    "source": "def heuristic():\n    pass\n",
                    "runtime_tag": "builtin:auto",
                    "origin": "seed",
                    "parent_ids": [],
                    "iteration_born": 0,
                    "fitness": None,
                },
                "train_instances": "t",
                "test_instances": "",
                "candidate_signature": "f()",
                "solver_params": {},
            },
        }
        with Journal(str(path)) as j:
            j.append(JournalEvent(0, 0.0, "run_started", cfg_payload))
            j.append(
                JournalEvent(
                    1,
                    0.0,
                    "population_updated",
                    {
                        "iteration": 0,
                        "member_ids": [],
                        "evaluations_used": 0,
                        "rng_state": None,
                        "state_digest": "not-the-right-digest",
                    },
                )
            )
        with pytest.raises(JournalError, match="digest"):
            journal_replay(str(path))
