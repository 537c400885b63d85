"""Batch-incremental SNND.

A batch is applied as all insertions, then all deletions, then one
selective rebuild of the SNN graph and a single reclustering pass. The
result matches a from-scratch run on the final dataset exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import DatasetError, UpdateBatch, apply_batch_ids, pairwise_distances
from .graph import SnnGraph, incident_edges, edge_weight
from .neighbors import (
    ExtendedNeighborList,
    build_wlists,
    merge_new_candidates,
    remove_deleted,
    select_prefix,
)
from .snnd import EngineState, recluster


@dataclass
class AffectedSets:
    t1_add: set[int] = field(default_factory=set)
    t2_add: set[int] = field(default_factory=set)
    t1_del: set[int] = field(default_factory=set)
    t2_del: set[int] = field(default_factory=set)
    t1: set[int] = field(default_factory=set)
    t2: set[int] = field(default_factory=set)
    new_ids: list[int] = field(default_factory=list)
    deleted_ids: set[int] = field(default_factory=set)


class _KSets(dict):
    """Lazily materialised k(P) sets."""

    def __init__(self, wlists: dict[int, ExtendedNeighborList], k: int):
        super().__init__()
        self._wlists = wlists
        self._k = k

    def __missing__(self, p: int) -> set[int]:
        s = self[p] = set(self._wlists[p].ids[: self._k])
        return s


def _second_ring(wlists, k: int, t1: set[int], candidates) -> set[int]:
    if not t1:
        return set()
    return {p for p in candidates if p not in t1 and not t1.isdisjoint(wlists[p].ids[:k])}


def insertion_phase(state: EngineState, additions) -> tuple[set[int], set[int], list[int]]:
    """Append ``additions`` and fold them into every w-list.

    Returns (t1_add, t2_add, new_ids). t1_add holds pre-existing points whose
    KNN list changed; t2_add holds the remaining pre-existing points with a
    t1_add member in their (updated) KNN list.
    """
    if len(additions) == 0:
        return set(), set(), []
    ds, p = state.dataset, state.params
    block = np.asarray(additions, dtype=np.float64).reshape(len(additions), -1)
    if block.shape[1] != ds.dim:
        raise DatasetError(f"additions must have dimension {ds.dim}")
    n_old = len(ds)
    old_ids = ds.ids.tolist()
    new_ids = ds.append(block)
    n_new = len(new_ids)

    dmat = pairwise_distances(block, ds.coords)
    dmat[np.arange(n_new), n_old + np.arange(n_new)] = np.inf
    length = min(p.w, len(ds) - 1)
    for i, pid in enumerate(new_ids):
        ids, dists = select_prefix(dmat[i], ds.ids, length)
        state.wlists[pid] = ExtendedNeighborList(pid, p.w, ids, dists)

    wlists = state.wlists
    # a newcomer can only enter a list by beating its current tail; ties lose
    # because newcomer ids are larger than every existing id
    tail = np.fromiter((wlists[q].dists[-1] for q in old_ids), dtype=np.float64, count=n_old)
    beats = dmat[:, :n_old] < tail
    t1_add = set()
    for col in np.flatnonzero(beats.any(axis=0)).tolist():
        rows = np.flatnonzero(beats[:, col])
        cands = [(new_ids[r], float(dmat[r, col])) for r in rows]
        _, changed = merge_new_candidates(wlists[old_ids[col]], cands, p.k)
        if changed:
            t1_add.add(old_ids[col])
    t2_add = _second_ring(wlists, p.k, t1_add, old_ids)
    return t1_add, t2_add, new_ids


def deletion_phase(state: EngineState, deletions) -> tuple[set[int], set[int]]:
    """Remove ``deletions`` from the dataset and repair every surviving w-list.

    Lists that drop below k entries are rebuilt over the remaining points.
    Returns (t1_del, t2_del).
    """
    deletions = set(deletions)
    if not deletions:
        return set(), set()
    ds, p = state.dataset, state.params
    missing = sorted(d for d in deletions if d not in ds)
    if missing:
        raise DatasetError(f"deletion ids not in dataset: {missing}")
    if len(ds) - len(deletions) < p.k + 1:
        raise DatasetError("dataset too small after deletions")
    ds.remove(deletions)
    for d in deletions:
        del state.wlists[d]

    t1_del, rebuild = set(), []
    for owner, lst in state.wlists.items():
        _, changed, needs_rebuild = remove_deleted(lst, deletions, p.k)
        if needs_rebuild:
            rebuild.append(owner)
        if changed or needs_rebuild:
            t1_del.add(owner)
    if rebuild:
        state.wlists.update(build_wlists(ds, p.w, p.k, rebuild))
    t2_del = _second_ring(state.wlists, p.k, t1_del, state.wlists.keys())
    return t1_del, t2_del


def combine_affected(t1_add, t2_add, t1_del, t2_del, new_ids, deleted_ids) -> AffectedSets:
    deleted_ids = set(deleted_ids)
    t1 = (set(t1_add) | set(t1_del)) - deleted_ids
    t2 = ((set(t2_add) | set(t2_del)) - t1) - deleted_ids
    return AffectedSets(
        set(t1_add), set(t2_add), set(t1_del), set(t2_del), t1, t2, list(new_ids), deleted_ids
    )


def update_snn_graph(state: EngineState, affected: AffectedSets) -> SnnGraph:
    """Patch ``state.graph`` in place so it matches the current KNN lists."""
    graph, params = state.graph, state.params
    adj = graph.adjacency
    for d in affected.deleted_ids:
        graph.remove_vertex(d)
    for n in affected.new_ids:
        graph.add_vertex(n)

    ksets = _KSets(state.wlists, params.k)
    full = affected.t1 | set(affected.new_ids)
    for v in full:
        for q in list(adj[v]):
            graph.drop_edge(v, q)
    for v in full:
        for q, wt in incident_edges(v, ksets, params).items():
            graph.set_edge(v, q, wt)
    # second ring: only edges towards fully recomputed vertices can move
    for r in affected.t2:
        for s in ksets[r]:
            if s in full:
                wt = edge_weight(r, s, ksets, params)
                if wt is None:
                    graph.drop_edge(r, s)
                else:
                    graph.set_edge(r, s, wt)
    return graph


def _validate(state: EngineState, batch: UpdateBatch) -> None:
    apply_batch_ids(state.dataset, batch)
    n_after = len(state.dataset) + len(batch.additions) - len(batch.deletions)
    if n_after < state.params.k + 1:
        raise DatasetError("dataset too small after deletions")
    if state.params.core_threshold > n_after - 1:
        raise DatasetError("core_threshold exceeds n - 1 after update")


def apply_update(state: EngineState, batch: UpdateBatch) -> AffectedSets:
    """Apply ``batch`` to ``state`` in place and return the affected sets."""
    _validate(state, batch)
    t1_add, t2_add, new_ids = insertion_phase(state, batch.additions)
    t1_del, t2_del = deletion_phase(state, batch.deletions)
    affected = combine_affected(t1_add, t2_add, t1_del, t2_del, new_ids, batch.deletions)
    if len(batch):
        update_snn_graph(state, affected)
        state.assignment = recluster(state.graph, state.params, state.wlists.keys())
    return affected


def bisd_update(state: EngineState, batch: UpdateBatch) -> EngineState:
    """Apply ``batch`` incrementally. ``state`` is updated in place and returned."""
    apply_update(state, batch)
    return state
