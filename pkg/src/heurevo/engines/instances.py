"""Instance generation, file formats, and instance sets.

File formats (plain text, whitespace-separated):

    tsp <n>            followed by n lines "x y"
    bpp <n> <capacity> followed by n demand lines
    mkp <n> <m>        followed by one line of n values, m lines of n
                       weights, and one line of m capacities

Generation is deterministic given (task_id, count, size, rng_seed): each
file draws from its own seed sequence derived from (rng_seed, index), so
regenerating any subset reproduces identical bytes.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from heurevo.errors import InstanceError

BPP_CAPACITY = 150
BPP_DEMAND_LOW = 20
BPP_DEMAND_HIGH = 100
MKP_CONSTRAINTS = 5

_FAMILY = {
    "gls_tsp": "tsp",
    "constructive_tsp": "tsp",
    "aco_bpp": "bpp",
    "aco_mkp": "mkp",
}


@dataclass(frozen=True)
class TspInstance:
    coords: np.ndarray | None  # (n, 2), None for explicit-matrix instances
    dist: np.ndarray  # (n, n)

    @property
    def n(self) -> int:
        return int(self.dist.shape[0])


@dataclass(frozen=True)
class BppInstance:
    demands: np.ndarray  # (n,) int64
    capacity: int

    @property
    def n(self) -> int:
        return int(self.demands.shape[0])


@dataclass(frozen=True)
class MkpInstance:
    values: np.ndarray  # (n,)
    weights: np.ndarray  # (m, n)
    capacities: np.ndarray  # (m,)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])


Instance = TspInstance | BppInstance | MkpInstance


def euclidean_matrix(coords: np.ndarray) -> np.ndarray:
    diff = coords[:, None, :] - coords[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=-1))
    np.fill_diagonal(dist, 0.0)
    return dist


def _fmt(x: float) -> str:
    return repr(float(x))


def generate_instances(
    task_id: str, count: int, size: int, rng_seed: int, out_dir: str
) -> list[str]:
    """Write `count` instances of `size` items/nodes; returns file paths."""
    if task_id not in _FAMILY:
        raise InstanceError(f"unknown task_id {task_id!r}")
    if size < 4:
        raise InstanceError("instance size must be >= 4")
    family = _FAMILY[task_id]
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for i in range(count):
        rng = np.random.default_rng([rng_seed, i])
        name = f"{family}-n{size}-s{rng_seed}-{i:03d}.txt"
        path = os.path.join(out_dir, name)
        if family == "tsp":
            body = _gen_tsp(rng, size)
        elif family == "bpp":
            body = _gen_bpp(rng, size)
        else:
            body = _gen_mkp(rng, size)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(body)
        paths.append(path)
    return paths


def _gen_tsp(rng: np.random.Generator, n: int) -> str:
    coords = rng.random((n, 2))
    lines = [f"tsp {n}"]
    lines.extend(f"{_fmt(x)} {_fmt(y)}" for x, y in coords)
    return "\n".join(lines) + "\n"


def _gen_bpp(rng: np.random.Generator, n: int) -> str:
    demands = rng.integers(BPP_DEMAND_LOW, BPP_DEMAND_HIGH + 1, size=n)
    lines = [f"bpp {n} {BPP_CAPACITY}"]
    lines.extend(str(int(d)) for d in demands)
    return "\n".join(lines) + "\n"


def _gen_mkp(rng: np.random.Generator, n: int) -> str:
    m = MKP_CONSTRAINTS
    # Resample until every single item fits every constraint alone; the
    # loop is deterministic because draws come from the same stream.
    for _ in range(1000):
        values = rng.random(n)
        weights = rng.random((m, n))
        capacities = weights.sum(axis=1) / 2.0
        if (weights.max(axis=1) <= capacities).all():
            break
    else:
        raise InstanceError("could not generate a feasible MKP instance")
    lines = [f"mkp {n} {m}"]
    lines.append(" ".join(_fmt(v) for v in values))
    for c in range(m):
        lines.append(" ".join(_fmt(w) for w in weights[c]))
    lines.append(" ".join(_fmt(c) for c in capacities))
    return "\n".join(lines) + "\n"


def parse_instance(path: str) -> Instance:
    try:
        with open(path, encoding="utf-8") as fh:
            tokens = fh.read().split()
    except OSError as exc:
        raise InstanceError(f"cannot read instance {path}: {exc}") from exc
    if not tokens:
        raise InstanceError(f"empty instance file {path}")
    family = tokens[0]
    try:
        if family == "tsp":
            n = int(tokens[1])
            vals = np.array([float(t) for t in tokens[2 : 2 + 2 * n]], dtype=float)
            if vals.size != 2 * n:
                raise InstanceError(f"{path}: expected {2 * n} coordinates")
            coords = vals.reshape(n, 2)
            return TspInstance(coords=coords, dist=euclidean_matrix(coords))
        if family == "bpp":
            n = int(tokens[1])
            capacity = int(tokens[2])
            demands = np.array([int(t) for t in tokens[3 : 3 + n]], dtype=np.int64)
            if demands.size != n:
                raise InstanceError(f"{path}: expected {n} demands")
            if (demands > capacity).any():
                raise InstanceError(f"{path}: demand exceeds capacity")
            return BppInstance(demands=demands, capacity=capacity)
        if family == "mkp":
            n = int(tokens[1])
            m = int(tokens[2])
            flat = [float(t) for t in tokens[3:]]
            need = n + m * n + m
            if len(flat) != need:
                raise InstanceError(f"{path}: expected {need} numbers, got {len(flat)}")
            values = np.array(flat[:n])
            weights = np.array(flat[n : n + m * n]).reshape(m, n)
            capacities = np.array(flat[n + m * n :])
            return MkpInstance(values=values, weights=weights, capacities=capacities)
    except (ValueError, IndexError) as exc:
        raise InstanceError(f"malformed instance file {path}: {exc}") from exc
    raise InstanceError(f"{path}: unknown instance family {family!r}")


class InstanceSet:
    """Instances of one directory, ordered by filename for determinism."""

    def __init__(self, directory: str):
        if not os.path.isdir(directory):
            raise InstanceError(f"instance directory not found: {directory}")
        names = sorted(
            f for f in os.listdir(directory) if f.endswith(".txt")
        )
        if not names:
            raise InstanceError(f"no instances in {directory}")
        self.directory = directory
        self.names = names
        self.ids = [os.path.splitext(f)[0] for f in names]
        self._cache: dict[int, Instance] = {}

    def __len__(self) -> int:
        return len(self.names)

    def load(self, index: int) -> Instance:
        if index not in self._cache:
            self._cache[index] = parse_instance(
                os.path.join(self.directory, self.names[index])
            )
        return self._cache[index]


def check_disjoint(train: InstanceSet, test: InstanceSet) -> None:
    overlap = set(train.ids) & set(test.ids)
    if overlap:
        raise InstanceError(
            f"train/test instance sets overlap: {sorted(overlap)[:3]}"
        )
