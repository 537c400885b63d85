"""One-update-at-a-time baseline with a full recluster after every update."""

from __future__ import annotations

from .bisd import _validate, bisd_update
from .dataset import UpdateBatch
from .snnd import EngineState


def sequential_update(state: EngineState, batch: UpdateBatch) -> EngineState:
    """Apply each addition, then each deletion (ascending id), as its own batch."""
    _validate(state, batch)
    for coords in batch.additions:
        bisd_update(state, UpdateBatch([coords], set()))
    for pid in sorted(batch.deletions):
        bisd_update(state, UpdateBatch([], {pid}))
    return state
