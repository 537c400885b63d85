import numpy as np
import pytest

from snndyn.dataset import Dataset
from snndyn.graph import OUTLIER, ClusterAssignment, Params, build_snn_graph, format_labels, labels_isomorphic
from snndyn.neighbors import NeighborError
from snndyn.snnd import snnd_cluster

import oracles
from conftest import A, D, random_dataset


def test_line_dataset(line_dataset, line_params):
    st = snnd_cluster(line_dataset, line_params)
    assert st.assignment.labels == {0: A, 1: A, 2: A, 3: D, 4: D, 5: D}
    assert all(len(lst) == 4 for lst in st.wlists.values())


def test_zero_thresholds():
    rng = np.random.default_rng(2)
    ds = random_dataset(rng, 200, 2)
    st = snnd_cluster(ds, Params(5, 5, 0, 0))
    assert st.assignment.n_outliers() == 0
    assert st.assignment.cores == frozenset(st.assignment.labels)
    for p, nbrs in st.graph.adjacency.items():
        if not nbrs:
            assert st.assignment.labels[p] == p


def test_deterministic():
    rng = np.random.default_rng(5)
    ds = random_dataset(rng, 300, 3)
    p = Params(8, 16, 3, 4)
    a, b = snnd_cluster(ds.copy(), p), snnd_cluster(ds.copy(), p)
    assert a == b
    assert format_labels(a.assignment) == format_labels(b.assignment)


def test_graph_consistent_with_lists():
    rng = np.random.default_rng(6)
    ds = random_dataset(rng, 250, 2)
    p = Params(7, 10, 2, 3)
    st = snnd_cluster(ds, p)
    assert st.graph == build_snn_graph(st.klists(), p)
    assert set(st.graph.edges()) == oracles.snn_edges(oracles.knn_lists(ds, 7), 2)


@pytest.mark.parametrize("seed", range(3))
def test_row_order_invariance(seed):
    rng = np.random.default_rng(seed)
    ds = random_dataset(rng, 300, 3)
    p = Params(8, 12, 3, 4)
    perm = rng.permutation(300)
    a = snnd_cluster(ds, p).assignment
    b = snnd_cluster(Dataset(3, ds.coords[perm]), p).assignment
    # translate b's ids (row positions in the permuted file) back to original ids
    back = {new: int(old) for new, old in enumerate(perm)}
    translated = ClusterAssignment(
        {back[q]: (OUTLIER if lab == OUTLIER else back[lab]) for q, lab in b.labels.items()},
        frozenset(back[q] for q in b.cores),
    )
    assert translated.cores == a.cores
    assert labels_isomorphic(a, translated)


def test_too_small(line_dataset):
    with pytest.raises(NeighborError, match="dataset too small for k"):
        snnd_cluster(line_dataset, Params(6, 6, 1, 1))


def test_core_threshold_bound(line_dataset):
    with pytest.raises(ValueError):
        snnd_cluster(line_dataset, Params(2, 2, 1, 6))


def test_params_validation():
    with pytest.raises(ValueError):
        Params(3, 2, 1, 1)
    with pytest.raises(ValueError):
        Params(3, 3, 4, 1)
    with pytest.raises(ValueError):
        Params(0, 1, 0, 0)
