"""From-scratch SNND: the benchmark baseline and the reference for incremental runs."""

from __future__ import annotations

from dataclasses import dataclass

from .dataset import Dataset
from .graph import ClusterAssignment, Params, SnnGraph, build_snn_graph, cluster_graph, label_cores
from .neighbors import ExtendedNeighborList, NeighborError, build_wlists, topk


@dataclass
class EngineState:
    dataset: Dataset
    params: Params
    wlists: dict[int, ExtendedNeighborList]
    graph: SnnGraph
    assignment: ClusterAssignment

    def klists(self) -> dict[int, list[int]]:
        k = self.params.k
        return {p: topk(lst, k) for p, lst in self.wlists.items()}

    def copy(self) -> "EngineState":
        return EngineState(
            self.dataset.copy(),
            self.params,
            {
                p: ExtendedNeighborList(p, lst.capacity, list(lst.ids), list(lst.dists))
                for p, lst in self.wlists.items()
            },
            SnnGraph({p: dict(n) for p, n in self.graph.adjacency.items()}),
            ClusterAssignment(dict(self.assignment.labels), self.assignment.cores),
        )


def recluster(graph: SnnGraph, params: Params, all_ids) -> ClusterAssignment:
    return cluster_graph(graph, label_cores(graph, params), all_ids)


def snnd_cluster(dataset: Dataset, params: Params, workers: int | None = None) -> EngineState:
    """Cluster ``dataset`` from scratch.

    Full w-length lists are kept (not just k) so the result can seed an
    incremental session.
    """
    if len(dataset) <= params.k:
        raise NeighborError("dataset too small for k")
    if params.core_threshold > len(dataset) - 1:
        raise ValueError("core_threshold exceeds n - 1")
    wlists = build_wlists(dataset, params.w, params.k, workers=workers)
    graph = build_snn_graph({p: lst.ids[: params.k] for p, lst in wlists.items()}, params)
    assignment = recluster(graph, params, wlists.keys())
    return EngineState(dataset, params, wlists, graph, assignment)
