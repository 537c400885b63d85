import io

import numpy as np
import pytest

from snndyn.bisd import bisd_update
from snndyn.graph import Params
from snndyn.persistence import SnapshotError, dumps, load_state, loads, save_state
from snndyn.snnd import snnd_cluster

from conftest import random_batch, random_dataset, random_params


def line_snapshot(line_dataset, line_params):
    return dumps(snnd_cluster(line_dataset, line_params)).decode()


def test_round_trip(line_dataset, line_params):
    st = snnd_cluster(line_dataset, line_params)
    buf = io.BytesIO()
    n = save_state(st, buf)
    assert n == len(buf.getvalue())
    assert load_state(io.BytesIO(buf.getvalue())) == st


def test_line_adjacency_section(line_dataset, line_params):
    text = line_snapshot(line_dataset, line_params)
    body = text.split("[adjacency]\n")[1].split("[labels]")[0]
    assert body.splitlines() == ["0 1 1", "0 2 1", "1 2 1", "3 4 1", "3 5 1", "4 5 1"]


def test_size_grows_with_w():
    rng = np.random.default_rng(0)
    ds = random_dataset(rng, 150, 2)
    sizes = [len(dumps(snnd_cluster(ds.copy(), Params(5, w, 2, 2)))) for w in (5, 8, 12)]
    assert sizes[0] < sizes[1] < sizes[2]


@pytest.mark.parametrize("seed", range(5))
def test_random_round_trip_after_updates(seed):
    rng = np.random.default_rng(seed)
    st = snnd_cluster(random_dataset(rng, 300, 3), random_params(rng))
    bisd_update(st, random_batch(rng, st.dataset))
    blob = dumps(st)
    back = loads(blob)
    assert back == st
    assert dumps(back) == blob


def test_save_propagates_write_failure(line_dataset, line_params):
    class Broken(io.BytesIO):
        def write(self, _):
            raise OSError("disk full")

    with pytest.raises(OSError, match="disk full"):
        save_state(snnd_cluster(line_dataset, line_params), Broken())


class TestRejects:
    @pytest.fixture
    def text(self, line_dataset, line_params):
        return line_snapshot(line_dataset, line_params)

    def reject(self, text, match):
        with pytest.raises(SnapshotError, match=match):
            loads(text.encode())

    def test_bad_magic(self, text):
        self.reject(text.replace("BISDSNAP", "NOTASNAP", 1), "unsupported snapshot")

    def test_bad_version(self, text):
        self.reject(text.replace("BISDSNAP 1", "BISDSNAP 9", 1), "unsupported snapshot")

    def test_truncated(self, text):
        for cut in (len(text) // 3, len(text) // 2, len(text) - 8):
            self.reject(text[:cut], "corrupt snapshot")

    def test_weight_below_threshold(self, text):
        self.reject(text.replace("0 1 1\n", "0 1 0\n", 1), r"corrupt snapshot: \[adjacency\] line \d+")

    def test_duplicate_edge(self, text):
        self.reject(text.replace("0 2 1\n", "0 1 1\n", 1), r"\[adjacency\]")

    def test_reversed_edge(self, text):
        self.reject(text.replace("0 2 1\n", "2 0 1\n", 1), r"\[adjacency\]")

    def test_unsorted_wlist(self, text):
        self.reject(text.replace("0 1:1.0 2:2.0", "0 2:2.0 1:1.0", 1), r"\[wlists\]")

    def test_short_wlist(self, text):
        self.reject(text.replace("0 1:1.0 2:2.0 3:10.0 4:11.0", "0 1:1.0", 1), r"\[wlists\]")

    def test_unknown_label_id(self, text):
        self.reject(text.replace("\n5 3 1\n", "\n9 3 1\n", 1), r"\[labels\]")

    def test_core_outlier(self, text):
        self.reject(text.replace("\n5 3 1\n", "\n5 OUTLIER 1\n", 1), r"\[labels\]")

    def test_trailing_garbage(self, text):
        self.reject(text + "junk\n", "corrupt snapshot")
