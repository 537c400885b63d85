import numpy as np
import pytest

from snndyn.dataset import Dataset, UpdateBatch, pairwise_distances
from snndyn.graph import Params
from snndyn.neighbors import build_wlists, merge_new_candidates, remove_deleted

# 1-D line dataset: A=0 B=1 C=2 D=10 E=11 F=12
LINE = [0.0, 1.0, 2.0, 10.0, 11.0, 12.0]
A, B, C, D, E, F = range(6)


@pytest.fixture
def line_dataset():
    return Dataset(1, np.array(LINE)[:, None])


@pytest.fixture
def line_params():
    return Params(k=2, w=4, sim_threshold=1, core_threshold=2)


def random_dataset(rng, n, dim):
    # clustered data so the graph has structure; a few distinct scales per axis
    centers = rng.uniform(0, 20, size=(max(2, n // 60), dim))
    pts = centers[rng.integers(0, len(centers), n)] + rng.normal(size=(n, dim))
    return Dataset(dim, pts * rng.uniform(0.5, 2.0, size=dim))


def random_params(rng):
    k = int(rng.integers(5, 16))
    w = int(rng.integers(k, 3 * k + 1))
    return Params(k, w, int(rng.integers(0, k + 1)), int(rng.integers(0, k + 1)))


def random_batch(rng, dataset, lo=0.01, hi=0.10):
    n = len(dataset)
    n_add = max(1, int(round(n * rng.uniform(lo, hi))))
    n_del = max(1, int(round(n * rng.uniform(lo, hi))))
    src = dataset.coords[rng.integers(0, n, n_add)]
    adds = src + rng.normal(scale=0.5, size=src.shape)
    dels = set(rng.choice(dataset.ids, n_del, replace=False).tolist())
    return UpdateBatch(list(adds), dels)


def maintain_lists(ds, lists, w, k, adds, dels):
    """Drive the list primitives through one insert+delete step."""
    n_old = len(ds)
    old = ds.ids.tolist()
    new_ids = ds.append(adds) if len(adds) else []
    if new_ids:
        dm = pairwise_distances(ds.coords[n_old:], ds.coords[:n_old])
        for col, p in enumerate(old):
            before = list(lists[p].ids[:k])
            cands = [(nid, float(dm[r, col])) for r, nid in enumerate(new_ids)]
            lst, changed = merge_new_candidates(lists[p], cands, k)
            assert changed == (lst.ids[:k] != before)
        lists.update(build_wlists(ds, w, k, new_ids))
    if dels:
        ds.remove(dels)
        for d in dels:
            del lists[d]
        rebuild = []
        for p, lst in lists.items():
            before = list(lst.ids[:k])
            _, changed, needs = remove_deleted(lst, dels, k)
            if not needs:
                assert changed == (lst.ids[:k] != before)
            else:
                rebuild.append(p)
        lists.update(build_wlists(ds, w, k, rebuild))


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    def emit(name, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
