"""Wire protocol shared with external execution workers.

Everything on the wire is newline-delimited JSON (UTF-8, one object per
line). Numeric arrays travel as ``{"shape": [...], "data": [...]}`` with
``data`` flattened in row-major order. The handshake and message shapes
are documented in docs/worker_protocol.md; this module is the reference
implementation of the framing on the coordinator side.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from heurevo.errors import WorkerError

PROTOCOL_VERSION = 1

REQUEST_STATUSES = ("ok", "error")


def encode_array(arr: np.ndarray) -> dict[str, Any]:
    arr = np.asarray(arr)
    if arr.dtype.kind == "f":
        data = [float(x) for x in arr.ravel(order="C")]
    elif arr.dtype.kind in ("i", "u"):
        data = [int(x) for x in arr.ravel(order="C")]
    else:
        raise WorkerError(f"cannot encode array of dtype {arr.dtype}")
    return {"shape": list(arr.shape), "data": data}


def decode_array(obj: Any, dtype: str = "float64") -> np.ndarray:
    if not isinstance(obj, dict) or "shape" not in obj or "data" not in obj:
        raise WorkerError("array payload must be an object with 'shape' and 'data'")
    shape = tuple(int(s) for s in obj["shape"])
    expected = 1
    for s in shape:
        expected *= s
    data = obj["data"]
    if len(data) != expected:
        raise WorkerError(
            f"array payload has {len(data)} entries, shape {shape} needs {expected}"
        )
    return np.asarray(data, dtype=dtype).reshape(shape)


def make_request(
    request_id: str, task_id: str, entry_point: str, source: str, payload: dict
) -> dict[str, Any]:
    return {
        "type": "request",
        "protocol": PROTOCOL_VERSION,
        "request_id": request_id,
        "task_id": task_id,
        "entry_point": entry_point,
        "source": source,
        "payload": payload,
    }


def dump_line(message: dict[str, Any]) -> bytes:
    return (json.dumps(message, ensure_ascii=False) + "\n").encode("utf-8")


def parse_line(raw: bytes | str) -> dict[str, Any]:
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    try:
        message = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise WorkerError(f"worker sent malformed JSON: {exc}") from None
    if not isinstance(message, dict) or "type" not in message:
        raise WorkerError("worker message must be a JSON object with a 'type' field")
    return message


def check_capabilities(message: dict[str, Any]) -> list[str]:
    """Validate a handshake message, returning the supported task ids."""
    if message.get("type") != "capabilities":
        raise WorkerError(
            f"expected capabilities handshake, got type {message.get('type')!r}"
        )
    if message.get("protocol") != PROTOCOL_VERSION:
        raise WorkerError(
            f"worker speaks protocol {message.get('protocol')!r}, "
            f"coordinator requires {PROTOCOL_VERSION}"
        )
    tasks = message.get("tasks")
    if not isinstance(tasks, list) or not all(isinstance(t, str) for t in tasks):
        raise WorkerError("capabilities message must list supported tasks")
    return tasks


def check_response(message: dict[str, Any], request_id: str) -> dict[str, Any]:
    """Validate a response envelope and return it."""
    if message.get("type") != "response":
        raise WorkerError(f"expected response, got type {message.get('type')!r}")
    if message.get("request_id") != request_id:
        raise WorkerError(
            f"response for request {message.get('request_id')!r}, "
            f"expected {request_id!r}"
        )
    status = message.get("status")
    if status not in REQUEST_STATUSES:
        raise WorkerError(f"response has unknown status {status!r}")
    if status == "ok" and not isinstance(message.get("payload"), dict):
        raise WorkerError("ok response is missing its payload object")
    return message
