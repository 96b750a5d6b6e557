"""TSPLIB instance loader: EUC_2D and explicit distance matrices."""

from __future__ import annotations

import math

import numpy as np

from heurevo.engines.instances import TspInstance
from heurevo.errors import InstanceError

SUPPORTED_EDGE_WEIGHT_TYPES = ("EUC_2D", "EXPLICIT")
SUPPORTED_EDGE_WEIGHT_FORMATS = (
    "FULL_MATRIX",
    "UPPER_ROW",
    "UPPER_DIAG_ROW",
    "LOWER_DIAG_ROW",
)


def _euc_2d(coords: np.ndarray) -> np.ndarray:
    """TSPLIB convention: distances rounded to the nearest integer."""
    n = coords.shape[0]
    dist = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            dx = coords[i, 0] - coords[j, 0]
            dy = coords[i, 1] - coords[j, 1]
            d = int(math.sqrt(dx * dx + dy * dy) + 0.5)
            dist[i, j] = d
            dist[j, i] = d
    return dist


def load_tsplib(path: str) -> TspInstance:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise InstanceError(f"cannot read TSPLIB file {path}: {exc}") from exc

    header: dict[str, str] = {}
    body_start = None
    section = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line == "EOF":
            break
        if line in ("NODE_COORD_SECTION", "EDGE_WEIGHT_SECTION"):
            section = line
            body_start = lineno
            break
        if ":" in line:
            key, _, value = line.partition(":")
            header[key.strip().upper()] = value.strip()
        else:
            raise InstanceError(f"{path}:{lineno}: malformed header line {line!r}")

    if "DIMENSION" not in header:
        raise InstanceError(f"{path}: missing DIMENSION field")
    try:
        n = int(header["DIMENSION"])
    except ValueError as exc:
        raise InstanceError(f"{path}: bad DIMENSION {header['DIMENSION']!r}") from exc
    ewt = header.get("EDGE_WEIGHT_TYPE", "")
    if ewt not in SUPPORTED_EDGE_WEIGHT_TYPES:
        raise InstanceError(f"{path}: unsupported EDGE_WEIGHT_TYPE {ewt!r}")
    if section is None or body_start is None:
        raise InstanceError(f"{path}: missing data section")

    body = lines[body_start:]

    if ewt == "EUC_2D":
        if section != "NODE_COORD_SECTION":
            raise InstanceError(f"{path}: EUC_2D requires NODE_COORD_SECTION")
        coords = np.zeros((n, 2))
        seen = 0
        for lineno, raw in enumerate(body, start=body_start + 1):
            line = raw.strip()
            if not line or line == "EOF":
                continue
            parts = line.split()
            if len(parts) != 3:
                raise InstanceError(f"{path}:{lineno}: expected 'index x y'")
            try:
                idx = int(parts[0]) - 1
                coords[idx, 0] = float(parts[1])
                coords[idx, 1] = float(parts[2])
            except (ValueError, IndexError) as exc:
                raise InstanceError(f"{path}:{lineno}: {exc}") from exc
            seen += 1
        if seen != n:
            raise InstanceError(f"{path}: expected {n} coordinate lines, got {seen}")
        return TspInstance(coords=coords, dist=_euc_2d(coords))

    # EXPLICIT
    fmt = header.get("EDGE_WEIGHT_FORMAT", "")
    if fmt not in SUPPORTED_EDGE_WEIGHT_FORMATS:
        raise InstanceError(f"{path}: unsupported EDGE_WEIGHT_FORMAT {fmt!r}")
    if section != "EDGE_WEIGHT_SECTION":
        raise InstanceError(f"{path}: EXPLICIT requires EDGE_WEIGHT_SECTION")
    numbers: list[float] = []
    for lineno, raw in enumerate(body, start=body_start + 1):
        line = raw.strip()
        if not line or line == "EOF":
            continue
        try:
            numbers.extend(float(t) for t in line.split())
        except ValueError as exc:
            raise InstanceError(f"{path}:{lineno}: {exc}") from exc

    dist = np.zeros((n, n))
    if fmt == "FULL_MATRIX":
        need = n * n
        if len(numbers) != need:
            raise InstanceError(f"{path}: expected {need} weights, got {len(numbers)}")
        dist = np.array(numbers).reshape(n, n)
    elif fmt in ("UPPER_ROW", "UPPER_DIAG_ROW"):
        diag = fmt == "UPPER_DIAG_ROW"
        k = 0
        for i in range(n):
            start = i if diag else i + 1
            for j in range(start, n):
                if k >= len(numbers):
                    raise InstanceError(f"{path}: too few weights for {fmt}")
                dist[i, j] = numbers[k]
                dist[j, i] = numbers[k]
                k += 1
        if k != len(numbers):
            raise InstanceError(f"{path}: too many weights for {fmt}")
    else:  # LOWER_DIAG_ROW
        k = 0
        for i in range(n):
            for j in range(0, i + 1):
                if k >= len(numbers):
                    raise InstanceError(f"{path}: too few weights for {fmt}")
                dist[i, j] = numbers[k]
                dist[j, i] = numbers[k]
                k += 1
        if k != len(numbers):
            raise InstanceError(f"{path}: too many weights for {fmt}")
    np.fill_diagonal(dist, 0.0)
    return TspInstance(coords=None, dist=dist)
