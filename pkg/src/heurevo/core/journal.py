"""Append-only run journal: one JSON record per line, UTF-8.

The journal is the single source of truth for a run. The first line is
always run_started carrying the full config plus a config digest; every
iteration ends with a population_updated checkpoint carrying a state
digest, which replay verifies. Timing fields (timestamp, eval_seconds)
are masked in digests and in journal comparison so that identical runs
produce identical masked journals.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from typing import Any, Iterator

from heurevo.core.types import FitnessRecord, Heuristic, JournalEvent, RunConfig, TaskSpec
from heurevo.errors import JournalError

MASKED_KEYS = ("timestamp", "eval_seconds")


def canonical_json(obj: Any) -> str:
    """Deterministic JSON: sorted keys, no whitespace, exact float repr."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def mask_timing(obj: Any) -> Any:
    """Recursively zero out wall-clock fields."""
    if isinstance(obj, dict):
        return {
            k: (0.0 if k in MASKED_KEYS else mask_timing(v)) for k, v in obj.items()
        }
    if isinstance(obj, list):
        return [mask_timing(v) for v in obj]
    return obj


def digest_of(obj: Any) -> str:
    return hashlib.sha256(canonical_json(mask_timing(obj)).encode("utf-8")).hexdigest()


class Journal:
    """Single-owner append handle. Exactly one writer per run."""

    def __init__(self, path: str, resume_from_seq: int | None = None):
        self.path = path
        if resume_from_seq is None and os.path.exists(path) and os.path.getsize(path) > 0:
            raise JournalError(f"journal already exists: {path}")
        self._fh = open(path, "ab")
        self.last_seq = resume_from_seq if resume_from_seq is not None else -1

    def append(self, event: JournalEvent) -> None:
        if event.seq != self.last_seq + 1:
            raise JournalError(
                f"journal corruption: seq {event.seq} after {self.last_seq}, expected {self.last_seq + 1}"
            )
        line = canonical_json(event.to_dict()) + "\n"
        try:
            self._fh.write(line.encode("utf-8"))
            self._fh.flush()
            os.fsync(self._fh.fileno())
        except OSError as exc:
            raise JournalError(f"journal write failed for {self.path}: {exc}") from exc
        self.last_seq = event.seq

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> Journal:
        return self

    def __exit__(self, *exc) -> None:
        self.close()


@dataclass
class ReplayResult:
    """State reconstructed from a journal."""

    config: RunConfig
    task: TaskSpec
    population: list[Heuristic]
    best: Heuristic | None
    events: list[JournalEvent]
    truncated: bool
    byte_cursor: int  # offset just past the last complete event line
    finished: bool
    evaluations_used: int
    iteration: int
    rng_state: dict[str, Any] | None
    # every heuristic ever journaled, fitness attached where known
    registry: dict[str, Heuristic] = field(default_factory=dict)
    history_ids: list[str] = field(default_factory=list)
    checkpoint_seq: int = -1
    checkpoint_cursor: int = 0
    # cumulative model-call usage at the last checkpoint
    usage: tuple[int, int, int] = (0, 0, 0)


def _iter_lines(path: str) -> Iterator[tuple[int, bytes, bool]]:
    """Yield (start_offset, line_without_newline, complete) per physical line."""
    with open(path, "rb") as fh:
        offset = 0
        for raw in fh:
            complete = raw.endswith(b"\n")
            yield offset, raw.rstrip(b"\n"), complete
            offset += len(raw)


def read_events(path: str) -> tuple[list[JournalEvent], bool, int]:
    """Parse a journal file, tolerating a truncated tail.

    Returns (events, truncated, byte_cursor). A line that is incomplete or
    unparsable marks the truncation point; anything after it is ignored.
    A seq gap inside the complete region is corruption, not truncation.
    """
    if not os.path.exists(path):
        raise JournalError(f"journal not found: {path}")
    events: list[JournalEvent] = []
    truncated = False
    cursor = 0
    for offset, line, complete in _iter_lines(path):
        if not complete:
            truncated = True
            break
        try:
            event = JournalEvent.from_dict(json.loads(line.decode("utf-8")))
        except (ValueError, KeyError, TypeError):
            truncated = True
            break
        expected = events[-1].seq + 1 if events else 0
        if event.seq != expected:
            raise JournalError(
                f"journal corruption in {path}: seq {event.seq}, expected {expected}"
            )
        events.append(event)
        cursor = offset + len(line) + 1
    if not events:
        raise JournalError(f"no run_started event in {path}")
    if events[0].kind != "run_started":
        raise JournalError(f"first event in {path} is {events[0].kind}, not run_started")
    return events, truncated, cursor


def _state_digest_payload(
    member_ids: list[str],
    registry: dict[str, Heuristic],
    best_id: str | None,
    evaluations_used: int,
    iteration: int,
    rng_state: dict[str, Any] | None,
) -> dict[str, Any]:
    return {
        "population": [registry[i].to_dict() for i in member_ids],
        "best_id": best_id,
        "evaluations_used": evaluations_used,
        "iteration": iteration,
        "rng_state": rng_state,
    }


def state_digest(
    member_ids: list[str],
    registry: dict[str, Heuristic],
    best_id: str | None,
    evaluations_used: int,
    iteration: int,
    rng_state: dict[str, Any] | None,
) -> str:
    return digest_of(
        _state_digest_payload(member_ids, registry, best_id, evaluations_used, iteration, rng_state)
    )


def journal_replay(path: str) -> ReplayResult:
    """Reconstruct run state from a journal, verifying checkpoint digests."""
    events, truncated, cursor = read_events(path)

    config: RunConfig | None = None
    task: TaskSpec | None = None
    registry: dict[str, Heuristic] = {}
    history_ids: list[str] = []
    member_ids: list[str] = []
    best_id: str | None = None
    evaluations_used = 0
    iteration = 0
    last_iteration = 0
    rng_state: dict[str, Any] | None = None
    finished = False
    checkpoint_seq = -1
    checkpoint_cursor = 0
    usage = (0, 0, 0)
    byte_offset = 0

    for event in events:
        line_len = len(canonical_json(event.to_dict()).encode("utf-8")) + 1
        payload = event.payload
        it = payload.get("iteration")
        if it is not None:
            if it < last_iteration:
                raise JournalError(
                    f"journal corruption in {path}: iteration {it} after {last_iteration}"
                )
            last_iteration = it

        if event.kind == "run_started":
            config = RunConfig.from_dict(payload["config"])
            task = TaskSpec.from_dict(payload["task"])
            if payload.get("config_digest") != digest_of(payload["config"]):
                raise JournalError(f"config digest mismatch in {path}")
        elif event.kind == "population_initialized":
            for d in payload["members"]:
                h = Heuristic.from_dict(d)
                registry[h.id] = h
                history_ids.append(h.id)
            member_ids = [d["id"] for d in payload["members"]]
            evaluations_used = payload["evaluations_used"]
        elif event.kind == "offspring_created":
            h = Heuristic.from_dict(payload["heuristic"])
            registry[h.id] = h
            history_ids.append(h.id)
        elif event.kind == "evaluation_performed":
            rec = FitnessRecord(
                value=payload["value"],
                kind="evaluated",
                confidence=1.0,
                eval_seconds=payload.get("eval_seconds", 0.0),
                iteration=payload["iteration"],
            )
            hid = payload["heuristic_id"]
            if hid in registry:
                registry[hid] = registry[hid].with_fitness(rec)
            evaluations_used += 1
        elif event.kind == "fitness_decided":
            for d in payload["decisions"]:
                if d["decision"].startswith("accepted"):
                    hid = d["heuristic_id"]
                    rec = FitnessRecord(
                        value=d["xi"],
                        kind="predicted",
                        confidence=d["phi"],
                        eval_seconds=0.0,
                        iteration=payload["iteration"],
                    )
                    if hid in registry:
                        registry[hid] = registry[hid].with_fitness(rec)
        elif event.kind == "best_updated":
            best_id = payload["heuristic_id"]
        elif event.kind == "population_updated":
            member_ids = list(payload["member_ids"])
            evaluations_used = payload["evaluations_used"]
            rng_state = payload.get("rng_state")
            iteration = payload["iteration"]
            expected = state_digest(
                member_ids, registry, best_id, evaluations_used, iteration, rng_state
            )
            if payload["state_digest"] != expected:
                raise JournalError(
                    f"state digest mismatch at seq {event.seq} in {path}"
                )
            checkpoint_seq = event.seq
            checkpoint_cursor = byte_offset + line_len
            snap = payload.get("usage")
            if snap:
                usage = (
                    int(snap.get("context_tokens", 0)),
                    int(snap.get("generation_tokens", 0)),
                    int(snap.get("calls", 0)),
                )
        elif event.kind == "run_finished":
            finished = True
            if "state_digest" in payload:
                expected = state_digest(
                    member_ids, registry, best_id, evaluations_used, iteration, rng_state
                )
                if payload["state_digest"] != expected:
                    raise JournalError(
                        f"state digest mismatch at seq {event.seq} in {path}"
                    )
        byte_offset += line_len

    if config is None or task is None:
        raise JournalError(f"no run_started event in {path}")

    population = [registry[i] for i in member_ids]
    best = registry.get(best_id) if best_id else None
    return ReplayResult(
        config=config,
        task=task,
        population=population,
        best=best,
        events=events,
        truncated=truncated,
        byte_cursor=cursor,
        finished=finished,
        evaluations_used=evaluations_used,
        iteration=iteration,
        rng_state=rng_state,
        registry=registry,
        history_ids=history_ids,
        checkpoint_seq=checkpoint_seq,
        checkpoint_cursor=checkpoint_cursor,
        usage=usage,
    )


def truncate_to_cursor(path: str, cursor: int) -> None:
    """Drop an incomplete tail so the journal ends at a complete event."""
    with open(path, "r+b") as fh:
        fh.truncate(cursor)


def masked_lines(path: str) -> list[str]:
    """Journal lines with timing masked and canonical re-serialization.

    Two runs are considered identical when these line lists are equal.
    """
    events, _, _ = read_events(path)
    return [canonical_json(mask_timing(e.to_dict())) for e in events]
