import io
import math

import numpy as np

from snndyn.bench import (
    CSV_COLUMNS,
    BenchRecord,
    medians,
    memory_ratio,
    run_bench,
    synthesize_batch,
    write_csv,
)
from snndyn.dataset import Dataset
from snndyn.graph import Params
from snndyn.persistence import dumps
from snndyn.snnd import snnd_cluster


def test_record_fields_match_schema():
    assert tuple(BenchRecord.__dataclass_fields__) == CSV_COLUMNS


def test_batch_sizes_and_workloads():
    ds = Dataset(2, np.random.default_rng(0).normal(size=(1000, 2)))
    b = synthesize_batch(ds, 2, np.random.default_rng(1), "mixed")
    assert len(b.additions) == 20 and len(b.deletions) == 20
    assert synthesize_batch(ds, 2, np.random.default_rng(1), "add").deletions == set()
    assert synthesize_batch(ds, 2, np.random.default_rng(1), "del").additions == []


def test_batches_reproducible():
    ds = Dataset(2, np.random.default_rng(0).normal(size=(500, 2)))
    a = synthesize_batch(ds, 5, np.random.default_rng([7, 0, 0]))
    b = synthesize_batch(ds, 5, np.random.default_rng([7, 0, 0]))
    assert a.deletions == b.deletions
    assert np.array_equal(np.asarray(a.additions), np.asarray(b.additions))


def test_additions_near_data():
    ds = Dataset(2, np.random.default_rng(0).uniform(0, 100, size=(500, 2)))
    b = synthesize_batch(ds, 10, np.random.default_rng(2), "add")
    adds = np.asarray(b.additions)
    nearest = np.min(np.linalg.norm(adds[:, None, :] - ds.coords[None], axis=2), axis=1)
    assert nearest.max() < 10.0


def test_memory_ratio_bounds():
    ds = Dataset(3, np.random.default_rng(1).normal(size=(300, 3)))
    st = snnd_cluster(ds, Params(6, 12, 2, 3))
    r = memory_ratio(st)
    assert 1.0 < r <= 2.0
    assert memory_ratio(snnd_cluster(ds.copy(), Params(6, 6, 2, 3))) == 1.0
    # measuring must not disturb the state
    assert dumps(st) == dumps(snnd_cluster(ds.copy(), Params(6, 12, 2, 3)))


def test_run_bench_deterministic_outputs():
    ds = Dataset(2, np.random.default_rng(3).normal(size=(300, 2)))
    p = Params(5, 10, 1, 2)
    a = run_bench("x", ds, p, [2, 4], 2, seed=9)
    b = run_bench("x", ds.copy(), p, [2, 4], 2, seed=9)
    assert [r.mem_ratio for r in a] == [r.mem_ratio for r in b]
    assert all(r.verified for r in a)
    med = medians(a)
    assert set(med) == {2, 4}
    buf = io.StringIO()
    write_csv(a, buf, "note")
    assert buf.getvalue().splitlines()[1] == ",".join(CSV_COLUMNS)


def test_skip_sequential():
    ds = Dataset(2, np.random.default_rng(3).normal(size=(300, 2)))
    recs = run_bench("x", ds, Params(5, 10, 1, 2), [3], 1, seed=1, sequential=False)
    assert math.isnan(recs[0].t_seq) and recs[0].verified
