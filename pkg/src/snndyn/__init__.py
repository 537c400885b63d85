"""Shared-nearest-neighbour density clustering with batch-incremental updates."""

from .bisd import AffectedSets, apply_update, bisd_update, combine_affected
from .dataset import Dataset, DatasetError, Point, UpdateBatch, distance, load_points
from .graph import OUTLIER, ClusterAssignment, Params, SnnGraph, labels_isomorphic
from .persistence import SnapshotError, load_state, save_state
from .sequential import sequential_update
from .snnd import EngineState, snnd_cluster

__all__ = [
    "AffectedSets", "ClusterAssignment", "Dataset", "DatasetError", "EngineState", "OUTLIER",
    "Params", "Point", "SnapshotError", "SnnGraph", "UpdateBatch", "apply_update", "bisd_update",
    "combine_affected", "distance", "labels_isomorphic", "load_points", "load_state", "save_state",
    "sequential_update", "snnd_cluster",
]
