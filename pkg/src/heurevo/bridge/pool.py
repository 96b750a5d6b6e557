"""Candidate execution: in-process builtins and external worker processes.

The bridge is the only component that runs heuristic code. Trusted
builtins are called directly; anything else goes to a worker subprocess
over the line protocol in heurevo.bridge.protocol, with a wall-clock
limit enforced by killing the process. A killed or crashed worker is
respawned transparently on the next request.
"""

from __future__ import annotations

import hashlib
import itertools
import queue
import subprocess
import threading
from collections import deque
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from heurevo.bridge import protocol
from heurevo.bridge.builtins import get_builtin
from heurevo.errors import WorkerError

try:
    import resource
except ImportError:  # pragma: no cover - non-POSIX platform
    resource = None  # type: ignore[assignment]

DEFAULT_WALL_SECONDS = 10.0
DEFAULT_MEMORY_BYTES = 512 * 1024 * 1024

# Expected output key and rank, per task family.
_TASK_OUTPUT: dict[str, tuple[str, int]] = {
    "gls_tsp": ("matrix", 2),
    "aco_bpp": ("matrix", 2),
    "aco_mkp": ("vector", 1),
    "constructive_tsp": ("vector", 1),
}


@dataclass(frozen=True)
class ExecutionLimits:
    wall_seconds: float = DEFAULT_WALL_SECONDS
    memory_bytes: int = DEFAULT_MEMORY_BYTES


@dataclass(frozen=True)
class BridgeResult:
    """Outcome of one candidate execution.

    status is "ok", "error", or "timeout"; payload maps output names to
    numpy arrays when status is "ok" and is None otherwise.
    """

    status: str
    payload: dict[str, np.ndarray] | None
    diagnostic: str | None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def source_digest(source: str) -> str:
    return hashlib.sha256(source.encode("utf-8")).hexdigest()


class _WorkerProcess:
    """One external worker subprocess with a line-reader thread."""

    def __init__(self, command: Sequence[str], limits: ExecutionLimits):
        self.command = list(command)
        self.limits = limits
        self.proc: subprocess.Popen | None = None
        self.lines: queue.Queue[bytes | None] = queue.Queue()
        self.stderr_tail: deque[str] = deque(maxlen=50)
        self.tasks: list[str] = []

    # -- lifecycle ------------------------------------------------------

    def _preexec(self):  # pragma: no cover - runs in the child
        if resource is not None and self.limits.memory_bytes > 0:
            resource.setrlimit(
                resource.RLIMIT_AS,
                (self.limits.memory_bytes, self.limits.memory_bytes),
            )

    def spawn(self) -> None:
        self.lines = queue.Queue()
        self.stderr_tail.clear()
        try:
            self.proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                preexec_fn=self._preexec if resource is not None else None,
            )
        except OSError as exc:
            raise WorkerError(f"cannot start worker {self.command!r}: {exc}") from None
        threading.Thread(
            target=self._read_stdout, args=(self.proc.stdout,), daemon=True
        ).start()
        threading.Thread(
            target=self._read_stderr, args=(self.proc.stderr,), daemon=True
        ).start()
        banner = self._next_line(self.limits.wall_seconds)
        if banner is None:
            self.kill()
            raise WorkerError(
                f"worker {self.command!r} exited before its capabilities handshake"
                + self._stderr_suffix()
            )
        self.tasks = protocol.check_capabilities(protocol.parse_line(banner))

    def _read_stdout(self, stream) -> None:
        for line in iter(stream.readline, b""):
            self.lines.put(line)
        self.lines.put(None)

    def _read_stderr(self, stream) -> None:
        for line in iter(stream.readline, b""):
            self.stderr_tail.append(line.decode("utf-8", errors="replace").rstrip())

    def _next_line(self, timeout: float) -> bytes | None:
        try:
            return self.lines.get(timeout=timeout)
        except queue.Empty:
            raise TimeoutError from None

    def _stderr_suffix(self) -> str:
        if not self.stderr_tail:
            return ""
        return "; worker stderr: " + " | ".join(self.stderr_tail)

    @property
    def alive(self) -> bool:
        return self.proc is not None and self.proc.poll() is None

    def kill(self) -> None:
        if self.proc is not None:
            try:
                self.proc.kill()
                self.proc.wait(timeout=5.0)
            except OSError:
                pass
            self.proc = None

    # -- requests -------------------------------------------------------

    def request(self, message: dict[str, Any], wall_seconds: float) -> dict[str, Any]:
        """Send one request line and wait for the response line.

        Raises TimeoutError when the wall clock expires (the caller kills
        and respawns) and WorkerError when the worker dies or misspeaks.
        """
        assert self.proc is not None and self.proc.stdin is not None
        try:
            self.proc.stdin.write(protocol.dump_line(message))
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError):
            raise WorkerError("worker pipe closed" + self._stderr_suffix()) from None
        line = self._next_line(wall_seconds)
        if line is None:
            raise WorkerError("worker exited mid-request" + self._stderr_suffix())
        return protocol.check_response(
            protocol.parse_line(line), message["request_id"]
        )


class WorkerBridge:
    """Routes candidate executions to builtins or external workers.

    worker_commands maps a worker alias (the part after "worker:" in a
    runtime tag) to the argv used to start that worker process.
    """

    def __init__(
        self,
        worker_commands: dict[str, Sequence[str]] | None = None,
        limits: ExecutionLimits | None = None,
    ):
        self.limits = limits or ExecutionLimits()
        self._commands = {k: list(v) for k, v in (worker_commands or {}).items()}
        self._procs: dict[str, _WorkerProcess] = {}
        self._request_ids = itertools.count(1)

    # -- worker management ----------------------------------------------

    def register_worker(self, alias: str, command: Sequence[str]) -> None:
        if alias in self._commands:
            raise WorkerError(f"worker alias {alias!r} already registered")
        self._commands[alias] = list(command)

    def _worker_for(self, alias: str, task_id: str) -> _WorkerProcess:
        if alias not in self._commands:
            raise WorkerError(f"no worker registered under alias {alias!r}")
        proc = self._procs.get(alias)
        if proc is None:
            proc = _WorkerProcess(self._commands[alias], self.limits)
            self._procs[alias] = proc
        if not proc.alive:
            proc.spawn()
        if task_id not in proc.tasks:
            raise WorkerError(
                f"worker {alias!r} does not support task {task_id!r} "
                f"(supports {proc.tasks})"
            )
        return proc

    def close(self) -> None:
        for proc in self._procs.values():
            proc.kill()
        self._procs.clear()

    def __enter__(self) -> "WorkerBridge":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    # -- execution --------------------------------------------------------

    def execute_candidate(
        self,
        runtime_tag: str,
        source: str,
        task_id: str,
        entry_point: str,
        payload: dict[str, Any],
    ) -> BridgeResult:
        if task_id not in _TASK_OUTPUT:
            raise WorkerError(f"unknown task {task_id!r}")
        if runtime_tag.startswith("builtin:"):
            return self._run_builtin(runtime_tag[len("builtin:"):], source, task_id, payload)
        if runtime_tag.startswith("worker:"):
            return self._run_external(
                runtime_tag[len("worker:"):], source, task_id, entry_point, payload
            )
        raise WorkerError(f"unknown runtime tag {runtime_tag!r}")

    def _run_builtin(
        self, name: str, source: str, task_id: str, payload: dict[str, Any]
    ) -> BridgeResult:
        if name == "auto":
            from heurevo import corpus

            fn = corpus.native_for_source(source)
            if fn is None:
                return BridgeResult(
                    "error",
                    None,
                    "runtime tag builtin:auto has no native stand-in for this source "
                    f"(digest {source_digest(source)[:12]})",
                )
        else:
            registered_task, _description, fn = get_builtin(name)
            if registered_task != task_id:
                return BridgeResult(
                    "error",
                    None,
                    f"builtin {name!r} targets task {registered_task!r}, "
                    f"not {task_id!r}",
                )
        try:
            out = _call_native(fn, task_id, payload)
        except Exception as exc:
            return BridgeResult("error", None, f"{type(exc).__name__}: {exc}")
        key, rank = _TASK_OUTPUT[task_id]
        arr = np.asarray(out, dtype=np.float64)
        if arr.ndim != rank:
            return BridgeResult(
                "error", None, f"heuristic returned a rank-{arr.ndim} array, expected rank {rank}"
            )
        return BridgeResult("ok", {key: arr}, None)

    def _run_external(
        self,
        alias: str,
        source: str,
        task_id: str,
        entry_point: str,
        payload: dict[str, Any],
    ) -> BridgeResult:
        request_id = f"q{next(self._request_ids)}"
        wire_payload = {
            k: protocol.encode_array(v) if isinstance(v, np.ndarray) else v
            for k, v in payload.items()
        }
        message = protocol.make_request(
            request_id, task_id, entry_point, source, wire_payload
        )
        proc = self._worker_for(alias, task_id)
        try:
            response = proc.request(message, self.limits.wall_seconds)
        except TimeoutError:
            proc.kill()
            return BridgeResult(
                "timeout",
                None,
                f"worker {alias!r} exceeded the wall clock limit of "
                f"{self.limits.wall_seconds:g}s",
            )
        except WorkerError as exc:
            proc.kill()
            return BridgeResult("error", None, str(exc))
        if response["status"] == "error":
            return BridgeResult(
                "error", None, str(response.get("diagnostic", "worker error"))
            )
        key, _rank = _TASK_OUTPUT[task_id]
        try:
            arr = protocol.decode_array(response["payload"].get(key))
        except WorkerError as exc:
            return BridgeResult("error", None, str(exc))
        return BridgeResult("ok", {key: arr}, None)


def _call_native(fn, task_id: str, payload: dict[str, Any]):
    if task_id == "gls_tsp":
        return fn(payload["distances"])
    if task_id == "aco_bpp":
        return fn(payload["demands"], payload["capacity"])
    if task_id == "aco_mkp":
        return fn(payload["values"], payload["weights"], payload["capacities"])
    if task_id == "constructive_tsp":
        return fn(
            payload["current"],
            payload["candidates"],
            payload["distances"],
            payload["visited"],
        )
    raise WorkerError(f"unknown task {task_id!r}")
