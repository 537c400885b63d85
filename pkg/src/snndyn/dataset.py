"""Point storage, id management and the distance kernel."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class DatasetError(ValueError):
    """Raised for malformed input files or invalid update batches."""


@dataclass(frozen=True)
class Point:
    id: int
    coords: tuple[float, ...]

    @property
    def dim(self) -> int:
        return len(self.coords)


@dataclass
class UpdateBatch:
    additions: list[Sequence[float]]
    deletions: set[int]

    @classmethod
    def empty(cls) -> "UpdateBatch":
        return cls([], set())

    def __len__(self) -> int:
        return len(self.additions) + len(self.deletions)


def distance(p: Point, q: Point) -> float:
    if p.dim != q.dim:
        raise ValueError(f"dimension mismatch: {p.dim} vs {q.dim}")
    a = np.asarray(p.coords, dtype=np.float64)[None, :]
    b = np.asarray(q.coords, dtype=np.float64)[None, :]
    return float(pairwise_distances(a, b)[0, 0])


def pairwise_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Euclidean distances between rows of ``a`` (m, d) and ``b`` (n, d).

    Squared differences are accumulated dimension by dimension in a fixed
    order, so the value for a given pair is bit-identical no matter which
    batch shape it is computed in. Incremental and from-scratch paths rank
    neighbours with these values and must agree exactly.
    """
    m, d = a.shape
    n = b.shape[0]
    acc = np.zeros((m, n), dtype=np.float64)
    tmp = np.empty((m, n), dtype=np.float64)
    for j in range(d):
        np.subtract(a[:, j, None], b[None, :, j], out=tmp)
        np.multiply(tmp, tmp, out=tmp)
        acc += tmp
    return np.sqrt(acc, out=acc)


class Dataset:
    """Identified points with fixed-dimension float64 coordinates.

    Rows are always kept in ascending id order: ids are handed out in
    arrival order and never reused, and deletions only compact.
    """

    def __init__(self, dim: int, coords=None, ids=None, next_id: int | None = None):
        if dim < 1:
            raise ValueError("dim must be positive")
        self.dim = dim
        if coords is None:
            coords = np.empty((0, dim), dtype=np.float64)
        self.coords = np.ascontiguousarray(np.asarray(coords, dtype=np.float64).reshape(-1, dim))
        if ids is None:
            ids = np.arange(len(self.coords), dtype=np.int64)
        self.ids = np.asarray(ids, dtype=np.int64).copy()
        if len(self.ids) != len(self.coords):
            raise ValueError("ids and coords differ in length")
        if len(self.ids) > 1 and np.any(np.diff(self.ids) <= 0):
            raise ValueError("ids must be strictly increasing")
        top = int(self.ids[-1]) + 1 if len(self.ids) else 0
        self.next_id = top if next_id is None else int(next_id)
        if self.next_id < top:
            raise ValueError("next_id must exceed every present id")
        self._reindex()

    def _reindex(self) -> None:
        self._row = {int(i): r for r, i in enumerate(self.ids)}

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, pid: int) -> bool:
        return pid in self._row

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.next_id == other.next_id
            and np.array_equal(self.ids, other.ids)
            and np.array_equal(self.coords, other.coords)
        )

    def copy(self) -> "Dataset":
        return Dataset(self.dim, self.coords.copy(), self.ids.copy(), self.next_id)

    def row(self, pid: int) -> int:
        return self._row[pid]

    def rows(self, pids: Iterable[int]) -> np.ndarray:
        return np.fromiter((self._row[p] for p in pids), dtype=np.int64)

    def point(self, pid: int) -> Point:
        return Point(pid, tuple(float(x) for x in self.coords[self._row[pid]]))

    def points(self) -> list[Point]:
        return [Point(int(i), tuple(map(float, c))) for i, c in zip(self.ids, self.coords)]

    def append(self, coords) -> list[int]:
        block = np.asarray(coords, dtype=np.float64)
        if block.size == 0:
            return []
        if block.ndim != 2 or block.shape[1] != self.dim:
            raise DatasetError(f"additions must have dimension {self.dim}")
        new_ids = np.arange(self.next_id, self.next_id + len(block), dtype=np.int64)
        start = len(self.ids)
        self.coords = np.ascontiguousarray(np.vstack([self.coords, block]))
        self.ids = np.concatenate([self.ids, new_ids])
        self.next_id += len(block)
        for r, pid in enumerate(new_ids, start):
            self._row[int(pid)] = r
        return [int(p) for p in new_ids]

    def remove(self, pids: Iterable[int]) -> None:
        pids = set(pids)
        if not pids:
            return
        keep = np.fromiter((int(i) not in pids for i in self.ids), dtype=bool, count=len(self.ids))
        self.coords = np.ascontiguousarray(self.coords[keep])
        self.ids = self.ids[keep]
        self._reindex()


def apply_batch_ids(dataset: Dataset, batch: UpdateBatch) -> list[int]:
    """Validate ``batch`` against ``dataset`` and return the ids its additions will get.

    Nothing is mutated; the update phases do that.
    """
    new_ids = list(range(dataset.next_id, dataset.next_id + len(batch.additions)))
    for add in batch.additions:
        if len(add) != dataset.dim:
            raise DatasetError(f"addition has dimension {len(add)}, expected {dataset.dim}")
    fresh = set(new_ids)
    if any(d in fresh for d in batch.deletions):
        raise DatasetError("add-delete conflict in batch")
    missing = sorted(d for d in batch.deletions if d not in dataset)
    if missing:
        raise DatasetError(f"deletion ids not in dataset: {missing}")
    return new_ids


_SPLIT = re.compile(r"\s*,\s*|\s+")


def parse_rows(text: str, dim: int | None = None) -> np.ndarray:
    """Parse comma- or whitespace-separated numeric rows.

    Blank lines and ``#`` comments are skipped. When ``dim`` is None it is
    taken from the first data row.
    """
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = _SPLIT.split(line)
        if dim is None:
            dim = len(fields)
        if len(fields) != dim:
            raise DatasetError(f"line {lineno}: expected {dim} fields, got {len(fields)}")
        try:
            rows.append([float(f) for f in fields])
        except ValueError as exc:
            raise DatasetError(f"line {lineno}: non-numeric field ({exc})") from None
    if not rows:
        return np.empty((0, dim or 0), dtype=np.float64)
    return np.asarray(rows, dtype=np.float64)


def load_points(source: str, dim: int | None = None) -> Dataset:
    coords = parse_rows(source, dim)
    if len(coords) == 0:
        raise DatasetError("empty base dataset")
    return Dataset(coords.shape[1], coords)


def parse_ids(text: str) -> set[int]:
    out = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            out.add(int(line))
        except ValueError:
            raise DatasetError(f"line {lineno}: not an integer id: {line!r}") from None
    return out


def format_rows(coords: np.ndarray) -> str:
    return "".join(",".join(repr(float(x)) for x in row) + "\n" for row in coords)
