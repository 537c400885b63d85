"""Versioned line-oriented text snapshot of an engine state.

Layout::

    BISDSNAP <version>
    dim <d>
    count <n>
    params k=<k> w=<w> sim=<sim_threshold> core=<core_threshold>
    next_id <next_id>
    [points]
    <id> <x_1> ... <x_d>
    [wlists]
    <owner> <id>:<distance> ...
    [adjacency]
    <low id> <high id> <weight>
    [labels]
    <id> <label|OUTLIER> <core 0|1>
    [end]

Rows are sorted by id, list entries by rank and edges lexicographically, so
equal states give byte-identical files. Floats use ``repr`` and round-trip
exactly.
"""

from __future__ import annotations

import re
from typing import BinaryIO

import numpy as np

from .dataset import Dataset
from .graph import OUTLIER, ClusterAssignment, Params, SnnGraph
from .neighbors import ExtendedNeighborList
from .snnd import EngineState

MAGIC = "BISDSNAP"
VERSION = 1
SECTIONS = ("points", "wlists", "adjacency", "labels")


class SnapshotError(ValueError):
    pass


def dumps(state: EngineState) -> bytes:
    ds, p = state.dataset, state.params
    out = [
        f"{MAGIC} {VERSION}",
        f"dim {ds.dim}",
        f"count {len(ds)}",
        f"params k={p.k} w={p.w} sim={p.sim_threshold} core={p.core_threshold}",
        f"next_id {ds.next_id}",
        "[points]",
    ]
    for pid, row in zip(ds.ids.tolist(), ds.coords.tolist()):
        out.append(f"{pid} " + " ".join(map(repr, row)))
    out.append("[wlists]")
    for pid in ds.ids.tolist():
        lst = state.wlists[pid]
        out.append(f"{pid} " + " ".join(f"{i}:{d!r}" for i, d in zip(lst.ids, lst.dists)))
    out.append("[adjacency]")
    out.extend(f"{a} {b} {wt}" for a, b, wt in state.graph.edges())
    out.append("[labels]")
    cores = state.assignment.cores
    for pid, lab in sorted(state.assignment.labels.items()):
        out.append(f"{pid} {'OUTLIER' if lab == OUTLIER else lab} {int(pid in cores)}")
    out.append("[end]")
    return ("\n".join(out) + "\n").encode("utf-8")


def save_state(state: EngineState, sink: BinaryIO) -> int:
    data = dumps(state)
    try:
        sink.write(data)
    except OSError as exc:
        raise OSError(f"failed writing snapshot: {exc}") from exc
    return len(data)


class _Reader:
    def __init__(self, text: str):
        self.lines = text.split("\n")
        if self.lines and self.lines[-1] == "":
            self.lines.pop()
        self.pos = 0
        self.section = "header"

    def fail(self, msg: str, lineno: int | None = None):
        lineno = self.pos if lineno is None else lineno
        raise SnapshotError(f"corrupt snapshot: [{self.section}] line {lineno}: {msg}")

    def next(self) -> str:
        if self.pos >= len(self.lines):
            self.fail("unexpected end of file")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def keyed(self, key: str) -> str:
        parts = self.next().split(" ", 1)
        if len(parts) != 2 or parts[0] != key:
            self.fail(f"expected '{key}'")
        return parts[1]

    def body(self, name: str) -> list[tuple[int, str]]:
        if self.next() != f"[{name}]":
            self.fail(f"expected section [{name}]")
        self.section = name
        rows = []
        while self.pos < len(self.lines) and not self.lines[self.pos].startswith("["):
            rows.append((self.pos + 1, self.lines[self.pos]))
            self.pos += 1
        return rows


_PARAMS = re.compile(r"k=(\d+) w=(\d+) sim=(\d+) core=(\d+)$")


def loads(data: bytes) -> EngineState:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise SnapshotError("unsupported snapshot: not UTF-8 text") from None
    r = _Reader(text)
    first = r.lines[0].split() if r.lines else []
    if len(first) != 2 or first[0] != MAGIC or first[1] != str(VERSION):
        raise SnapshotError("unsupported snapshot: bad magic or version")
    r.pos = 1
    try:
        dim = int(r.keyed("dim"))
        count = int(r.keyed("count"))
        m = _PARAMS.match(r.keyed("params"))
        if not m:
            r.fail("malformed params")
        params = Params(*map(int, m.groups()))
        next_id = int(r.keyed("next_id"))
    except ValueError as exc:
        if isinstance(exc, SnapshotError):
            raise
        r.fail(str(exc))

    ids, coords = [], []
    for lineno, line in r.body("points"):
        f = line.split()
        if len(f) != dim + 1:
            r.fail(f"expected {dim + 1} fields", lineno)
        try:
            pid = int(f[0])
            coords.append([float(x) for x in f[1:]])
        except ValueError:
            r.fail("non-numeric field", lineno)
        if ids and pid <= ids[-1]:
            r.fail("ids not strictly increasing", lineno)
        ids.append(pid)
    if len(ids) != count:
        r.fail(f"expected {count} points, found {len(ids)}")
    if ids and ids[-1] >= next_id:
        r.fail("id not below next_id")
    present = set(ids)
    max_len = min(params.w, count - 1)

    wlists: dict[int, ExtendedNeighborList] = {}
    for lineno, line in r.body("wlists"):
        f = line.split()
        try:
            owner = int(f[0])
            pairs = [(int(a), float(b)) for a, b in (e.split(":") for e in f[1:])]
        except (ValueError, IndexError):
            r.fail("malformed entry", lineno)
        if owner not in present or owner in wlists:
            r.fail(f"unknown or repeated owner {owner}", lineno)
        if not params.k <= len(pairs) <= max_len:
            r.fail(f"list length {len(pairs)} outside [{params.k}, {max_len}]", lineno)
        keys = [(d, i) for i, d in pairs]
        if any(a >= b for a, b in zip(keys, keys[1:])):
            r.fail("entries not strictly sorted by (distance, id)", lineno)
        if any(i == owner or i not in present for i, _ in pairs):
            r.fail("entry refers to owner or unknown id", lineno)
        wlists[owner] = ExtendedNeighborList(
            owner, params.w, [i for i, _ in pairs], [d for _, d in pairs]
        )
    if len(wlists) != count:
        r.fail("not every point has a list")

    graph = SnnGraph({pid: {} for pid in ids})
    prev = None
    for lineno, line in r.body("adjacency"):
        try:
            a, b, wt = map(int, line.split())
        except ValueError:
            r.fail("malformed edge", lineno)
        if not (a < b and a in present and b in present):
            r.fail(f"bad endpoints {a} {b}", lineno)
        if prev is not None and (a, b) <= prev:
            r.fail("edges not strictly sorted (duplicate or asymmetric entry)", lineno)
        if not params.sim_threshold <= wt <= params.k:
            r.fail(f"weight {wt} outside [{params.sim_threshold}, {params.k}]", lineno)
        prev = (a, b)
        graph.set_edge(a, b, wt)

    labels, cores = {}, set()
    for lineno, line in r.body("labels"):
        f = line.split()
        if len(f) != 3 or f[2] not in ("0", "1"):
            r.fail("malformed label row", lineno)
        try:
            pid = int(f[0])
            lab = OUTLIER if f[1] == "OUTLIER" else int(f[1])
        except ValueError:
            r.fail("malformed label row", lineno)
        if pid not in present or pid in labels:
            r.fail(f"unknown or repeated id {pid}", lineno)
        if lab != OUTLIER and lab not in present:
            r.fail(f"label {lab} is not a point id", lineno)
        if f[2] == "1":
            if lab == OUTLIER:
                r.fail("core point labelled OUTLIER", lineno)
            cores.add(pid)
        labels[pid] = lab
    if len(labels) != count:
        r.fail("not every point has a label")
    if r.next() != "[end]" or r.pos != len(r.lines):
        r.fail("missing [end] marker or trailing data")

    dataset = Dataset(dim, np.asarray(coords, dtype=np.float64).reshape(-1, dim), ids, next_id)
    return EngineState(dataset, params, wlists, graph, ClusterAssignment(labels, frozenset(cores)))


def load_state(source: BinaryIO) -> EngineState:
    return loads(source.read())
