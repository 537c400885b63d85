"""Benchmark harness: BISD against a from-scratch rerun and the one-at-a-time baseline."""

from __future__ import annotations

import csv
import math
import statistics
import time
from dataclasses import astuple, dataclass
from typing import TextIO

import numpy as np

from .bisd import bisd_update
from .dataset import Dataset, UpdateBatch
from .graph import Params
from .neighbors import worker_count
from .persistence import dumps, loads
from .sequential import sequential_update
from .snnd import EngineState, snnd_cluster

CSV_COLUMNS = (
    "dataset", "n", "fraction", "trial", "t_snnd", "t_bisd", "t_seq",
    "speedup_snnd", "speedup_seq", "mem_ratio", "verified",
)
WORKLOADS = ("add", "del", "mixed")


class VerificationError(RuntimeError):
    pass


@dataclass
class BenchRecord:
    dataset: str
    n: int
    fraction: float
    trial: int
    t_snnd: float
    t_bisd: float
    t_seq: float
    speedup_snnd: float
    speedup_seq: float
    mem_ratio: float
    verified: bool


def synthetic_blobs(n: int, dim: int, seed: int, centers: int = 25, spread: float = 2.0) -> np.ndarray:
    """Gaussian mixture in a 100-wide box; stand-in for the large synthetic datasets."""
    rng = np.random.default_rng(seed)
    mu = rng.uniform(0.0, 100.0, size=(centers, dim))
    which = rng.integers(0, centers, size=n)
    return mu[which] + rng.normal(scale=spread, size=(n, dim))


def synthesize_batch(
    dataset: Dataset, fraction: float, rng: np.random.Generator, workload: str = "mixed"
) -> UpdateBatch:
    """Draw ``fraction`` percent additions and/or deletions.

    Additions are jittered copies of random existing points (sigma = 1% of
    each dimension's range) so they land inside existing neighbourhoods.
    """
    if workload not in WORKLOADS:
        raise ValueError(f"workload must be one of {WORKLOADS}")
    count = max(1, round(len(dataset) * fraction / 100.0))
    adds: list = []
    dels: set[int] = set()
    if workload in ("add", "mixed"):
        span = dataset.coords.max(axis=0) - dataset.coords.min(axis=0)
        src = dataset.coords[rng.integers(0, len(dataset), size=count)]
        adds = list(src + rng.normal(size=src.shape) * (0.01 * span))
    if workload in ("del", "mixed"):
        dels = set(rng.choice(dataset.ids, size=count, replace=False).tolist())
    return UpdateBatch(adds, dels)


def apply_to_dataset(dataset: Dataset, batch: UpdateBatch) -> Dataset:
    out = dataset.copy()
    if batch.additions:
        out.append(np.asarray(batch.additions))
    out.remove(batch.deletions)
    return out


def same_clustering(a: EngineState, b: EngineState) -> bool:
    return (
        a.graph.adjacency == b.graph.adjacency
        and a.assignment.cores == b.assignment.cores
        and a.assignment.labels == b.assignment.labels
    )


def memory_ratio(state: EngineState) -> float:
    """Snapshot size with full w-lists over the size with lists cut to k."""
    k = state.params.k
    lean = state.copy()
    lean.params = state.params.with_w(k)
    for lst in lean.wlists.values():
        del lst.ids[k:], lst.dists[k:]
        lst.capacity = k
    return len(dumps(state)) / len(dumps(lean))


def _timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


def run_trial(
    name: str,
    base: EngineState,
    blob: bytes,
    fraction: float,
    trial: int,
    rng: np.random.Generator,
    workload: str = "mixed",
    sequential: bool = True,
) -> BenchRecord:
    """Time one batch three ways from the same saved starting state.

    With ``sequential=False`` the baseline is skipped and its columns are NaN.
    """
    params = base.params
    batch = synthesize_batch(base.dataset, fraction, rng, workload)
    ref, t_snnd = _timed(snnd_cluster, apply_to_dataset(base.dataset, batch), params)
    inc, t_bisd = _timed(bisd_update, loads(blob), batch)
    verified = same_clustering(inc, ref)
    t_seq = math.nan
    if sequential:
        seq, t_seq = _timed(sequential_update, loads(blob), batch)
        verified = verified and same_clustering(seq, ref)
    if not verified:
        raise VerificationError(f"incremental result differs from rerun (fraction={fraction}, trial={trial})")
    return BenchRecord(
        name, len(base.dataset), fraction, trial, t_snnd, t_bisd, t_seq,
        t_snnd / t_bisd, t_seq / t_bisd, memory_ratio(inc), verified,
    )


def run_bench(
    name: str,
    dataset: Dataset,
    params: Params,
    fractions,
    trials: int,
    seed: int,
    workload: str = "mixed",
    sequential: bool = True,
    progress=None,
) -> list[BenchRecord]:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if any(not 0 < f < 100 for f in fractions):
        raise ValueError("fractions must be percentages in (0, 100)")
    base = snnd_cluster(dataset, params)
    blob = dumps(base)
    records = []
    for fi, f in enumerate(fractions):
        for trial in range(trials):
            rng = np.random.default_rng([seed, fi, trial])
            rec = run_trial(name, base, blob, f, trial, rng, workload, sequential)
            records.append(rec)
            if progress:
                progress(rec)
    return records


def medians(records: list[BenchRecord]) -> dict[float, dict[str, float]]:
    out: dict[float, dict[str, float]] = {}
    for f in dict.fromkeys(r.fraction for r in records):
        rows = [r for r in records if r.fraction == f]
        out[f] = {
            col: statistics.median(getattr(r, col) for r in rows)
            for col in ("t_snnd", "t_bisd", "t_seq", "speedup_snnd", "speedup_seq", "mem_ratio")
        }
    return out


def write_csv(records: list[BenchRecord], out: TextIO, comment: str = "") -> None:
    out.write(f"# workers={worker_count()}{' ' + comment if comment else ''}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        row = list(astuple(rec))
        row[-1] = str(rec.verified).lower()
        writer.writerow(row)
