"""Extended nearest-neighbour lists w(P) and their incremental maintenance.

A list always holds an exact prefix of its owner's (distance, id) ranking
over the current dataset. Its first ``k`` ids form the KNN list used for
the SNN graph; that slice is never stored on its own.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .dataset import Dataset, pairwise_distances

# rows of the distance matrix materialised at once per worker
CHUNK_ROWS = 512


class NeighborError(ValueError):
    pass


def worker_count() -> int:
    env = os.environ.get("SNNDYN_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass
class ExtendedNeighborList:
    owner: int
    capacity: int
    ids: list[int] = field(default_factory=list)
    dists: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.ids)

    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.ids, self.dists))

    @property
    def last(self) -> tuple[float, int]:
        return self.dists[-1], self.ids[-1]


def topk(lst: ExtendedNeighborList, k: int) -> list[int]:
    if len(lst.ids) < k:
        raise NeighborError(f"list of {lst.owner} has {len(lst.ids)} entries, need {k}")
    return lst.ids[:k]


def select_prefix(drow: np.ndarray, ids: np.ndarray, length: int) -> tuple[list[int], list[float]]:
    # drow has +inf at the owner's own column
    if length < len(drow) - 1:
        thr = np.partition(drow, length - 1)[length - 1]
        cand = np.flatnonzero(drow <= thr)
    else:
        cand = np.flatnonzero(np.isfinite(drow))
    # cand is ascending in row order, which is ascending id order
    order = cand[np.argsort(drow[cand], kind="stable")][:length]
    return ids[order].tolist(), drow[order].tolist()


def _build_rows(dataset: Dataset, rows: np.ndarray, w: int) -> list[ExtendedNeighborList]:
    length = min(w, len(dataset) - 1)
    out = []
    for start in range(0, len(rows), CHUNK_ROWS):
        chunk = rows[start:start + CHUNK_ROWS]
        dmat = pairwise_distances(dataset.coords[chunk], dataset.coords)
        dmat[np.arange(len(chunk)), chunk] = np.inf
        for r, drow in zip(chunk, dmat):
            ids, dists = select_prefix(drow, dataset.ids, length)
            out.append(ExtendedNeighborList(int(dataset.ids[r]), w, ids, dists))
    return out


def build_wlists(
    dataset: Dataset,
    w: int,
    k: int,
    owners: Iterable[int] | None = None,
    workers: int | None = None,
) -> dict[int, ExtendedNeighborList]:
    """Brute-force w-lists for ``owners`` (all points by default)."""
    if len(dataset) - 1 < k:
        raise NeighborError("dataset too small for k")
    rows = np.arange(len(dataset)) if owners is None else dataset.rows(owners)
    workers = worker_count() if workers is None else workers
    step = CHUNK_ROWS
    if workers > 1 and len(rows) > CHUNK_ROWS:
        parts = [rows[i:i + step] for i in range(0, len(rows), step)]
        with ThreadPoolExecutor(workers) as pool:
            built = [lst for part in pool.map(lambda p: _build_rows(dataset, p, w), parts) for lst in part]
    else:
        built = _build_rows(dataset, rows, w)
    return {lst.owner: lst for lst in built}


def build_wlist(owner: int, dataset: Dataset, w: int, k: int) -> ExtendedNeighborList:
    return build_wlists(dataset, w, k, [owner], workers=1)[owner]


def merge_new_candidates(
    lst: ExtendedNeighborList, candidates: Sequence[tuple[int, float]], k: int
) -> tuple[ExtendedNeighborList, bool]:
    """Merge freshly inserted points into ``lst`` in place.

    The merged list is cut back to its pre-merge length: points ranked just
    past the old tail are unknown to the list, so growing it would break
    the exact-prefix property.
    """
    if not candidates:
        return lst, False
    before = lst.ids[:k]
    keep = min(lst.capacity, len(lst.ids))
    merged = sorted(
        [(d, i) for i, d in zip(lst.ids, lst.dists)] + [(d, i) for i, d in candidates]
    )[:keep]
    lst.ids = [i for _, i in merged]
    lst.dists = [d for d, _ in merged]
    return lst, lst.ids[:k] != before


def remove_deleted(
    lst: ExtendedNeighborList, deleted: set[int], k: int
) -> tuple[ExtendedNeighborList, bool, bool]:
    """Drop deleted members in place; returns (list, topk_changed, needs_rebuild)."""
    if deleted.isdisjoint(lst.ids):
        return lst, False, False
    before = lst.ids[:k]
    pairs = [(i, d) for i, d in zip(lst.ids, lst.dists) if i not in deleted]
    lst.ids = [i for i, _ in pairs]
    lst.dists = [d for _, d in pairs]
    needs_rebuild = len(lst.ids) < k
    return lst, lst.ids[:k] != before, needs_rebuild

