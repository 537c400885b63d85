"""Shared-nearest-neighbour graph, core labelling and cluster extraction."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

OUTLIER = -1


@dataclass(frozen=True)
class Params:
    k: int
    w: int
    sim_threshold: int
    core_threshold: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.w < self.k:
            raise ValueError("w must be >= k")
        if not 0 <= self.sim_threshold <= self.k:
            raise ValueError("sim_threshold must lie in [0, k]")
        if self.core_threshold < 0:
            raise ValueError("core_threshold must be non-negative")

    def with_w(self, w: int) -> "Params":
        return Params(self.k, w, self.sim_threshold, self.core_threshold)


@dataclass
class SnnGraph:
    """Undirected weighted graph stored as mirrored adjacency maps.

    Every current point is a key, isolated ones included.
    """

    adjacency: dict[int, dict[int, int]] = field(default_factory=dict)

    def degree(self, p: int) -> int:
        return len(self.adjacency[p])

    def edges(self) -> list[tuple[int, int, int]]:
        return sorted(
            (p, q, wt) for p, nbrs in self.adjacency.items() for q, wt in nbrs.items() if p < q
        )

    def edge_count(self) -> int:
        return sum(len(n) for n in self.adjacency.values()) // 2

    def add_vertex(self, p: int) -> None:
        self.adjacency.setdefault(p, {})

    def remove_vertex(self, p: int) -> None:
        for q in self.adjacency.pop(p, {}):
            self.adjacency[q].pop(p, None)

    def set_edge(self, p: int, q: int, weight: int) -> None:
        self.adjacency[p][q] = weight
        self.adjacency[q][p] = weight

    def drop_edge(self, p: int, q: int) -> None:
        self.adjacency[p].pop(q, None)
        self.adjacency[q].pop(p, None)

    def check(self, sim_threshold: int) -> None:
        """Raise AssertionError unless the graph is symmetric, simple and thresholded."""
        for p, nbrs in self.adjacency.items():
            for q, wt in nbrs.items():
                assert q != p, f"self edge at {p}"
                assert self.adjacency.get(q, {}).get(p) == wt, f"asymmetric edge {p}-{q}"
                assert wt >= sim_threshold, f"edge {p}-{q} weight {wt} below threshold"


@dataclass
class ClusterAssignment:
    labels: dict[int, int]
    cores: frozenset[int]

    @property
    def core_flags(self) -> dict[int, bool]:
        return {p: p in self.cores for p in self.labels}

    def n_clusters(self) -> int:
        return len({lab for lab in self.labels.values() if lab != OUTLIER})

    def n_outliers(self) -> int:
        return sum(1 for lab in self.labels.values() if lab == OUTLIER)


def snn_similarity(kp: Sequence[int], kq: Sequence[int], p: int, q: int) -> int:
    shared = set(kp).intersection(kq)
    shared.discard(p)
    shared.discard(q)
    return len(shared)


def edge_weight(p: int, q: int, ksets: Mapping[int, set[int]], params: Params) -> int | None:
    # edge needs mutual KNN membership and enough shared neighbours
    if p not in ksets[q] or q not in ksets[p]:
        return None
    wt = len((ksets[p] & ksets[q]) - {p, q})
    return wt if wt >= params.sim_threshold else None


def incident_edges(p: int, ksets: Mapping[int, set[int]], params: Params) -> dict[int, int]:
    out = {}
    for q in ksets[p]:
        wt = edge_weight(p, q, ksets, params)
        if wt is not None:
            out[q] = wt
    return out


def build_snn_graph(klists: Mapping[int, Sequence[int]], params: Params) -> SnnGraph:
    ksets = {p: set(kp) for p, kp in klists.items()}
    graph = SnnGraph({p: {} for p in klists})
    for p, kp in ksets.items():
        for q in kp:
            if q > p:
                wt = edge_weight(p, q, ksets, params)
                if wt is not None:
                    graph.set_edge(p, q, wt)
    return graph


def label_cores(graph: SnnGraph, params: Params) -> set[int]:
    # "above" the threshold is read inclusively
    return {p for p, nbrs in graph.adjacency.items() if len(nbrs) >= params.core_threshold}


def cluster_graph(graph: SnnGraph, cores: Iterable[int], all_ids: Iterable[int]) -> ClusterAssignment:
    cores = frozenset(cores)
    adj = graph.adjacency
    labels = {p: OUTLIER for p in sorted(all_ids)}
    # scanning cores in ascending id order labels each component by its minimum core
    for seed in sorted(cores):
        if labels[seed] != OUTLIER:
            continue
        labels[seed] = seed
        queue = deque([seed])
        while queue:
            c = queue.popleft()
            for q in adj[c]:
                if q in cores and labels[q] == OUTLIER:
                    labels[q] = seed
                    queue.append(q)
    for p in labels:
        if p in cores:
            continue
        best = None
        for q, wt in adj.get(p, {}).items():
            if q in cores and (best is None or (-wt, q) < best):
                best = (-wt, q)
        if best is not None:
            labels[p] = labels[best[1]]
    return ClusterAssignment(labels, cores)


def labels_isomorphic(a: ClusterAssignment, b: ClusterAssignment) -> bool:
    if a.labels.keys() != b.labels.keys():
        raise ValueError("assignments cover different id sets")
    fwd: dict[int, int] = {}
    back: dict[int, int] = {}
    for p, la in a.labels.items():
        lb = b.labels[p]
        if (la == OUTLIER) != (lb == OUTLIER):
            return False
        if la == OUTLIER:
            continue
        if fwd.setdefault(la, lb) != lb or back.setdefault(lb, la) != la:
            return False
    return True


def format_labels(assignment: ClusterAssignment) -> str:
    return "".join(
        f"{p} {'OUTLIER' if lab == OUTLIER else lab}\n" for p, lab in sorted(assignment.labels.items())
    )
