"""Command-line front end: cluster, update, verify, bench, synth."""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import bench
from .bisd import apply_update
from .dataset import DatasetError, UpdateBatch, format_rows, load_points, parse_ids, parse_rows
from .graph import Params, format_labels, labels_isomorphic
from .neighbors import NeighborError
from .persistence import SnapshotError, dumps, loads
from .sequential import sequential_update
from .snnd import EngineState, snnd_cluster

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _params(args, required: bool = True) -> Params | None:
    vals = (args.k, args.w, args.sim_th, args.core_th)
    if all(v is None for v in vals) and not required:
        return None
    if any(v is None for v in vals):
        raise UsageError("--k, --w, --sim-th and --core-th are all required")
    return Params(*vals)


def _read_state(path: str) -> EngineState:
    return loads(Path(path).read_bytes())


def _write_outputs(state: EngineState, state_out: str | None, labels: str | None) -> int:
    size = 0
    if state_out:
        data = dumps(state)
        Path(state_out).write_bytes(data)
        size = len(data)
    if labels:
        Path(labels).write_text(format_labels(state.assignment))
    return size


def _summary(state: EngineState) -> str:
    a = state.assignment
    return f"points={len(state.dataset)} clusters={a.n_clusters()} outliers={a.n_outliers()}"


def cmd_cluster(args) -> int:
    params = _params(args)
    dataset = load_points(Path(args.input).read_text())
    t0 = time.perf_counter()
    state = snnd_cluster(dataset, params)
    elapsed = time.perf_counter() - t0
    _write_outputs(state, args.state_out, args.labels)
    print(f"{_summary(state)} elapsed={elapsed:.4f}s")
    return EXIT_OK


def cmd_update(args) -> int:
    if not args.add and not args.delete:
        raise UsageError("update needs --add and/or --del")
    state = _read_state(args.state)
    flags = _params(args, required=False)
    if flags is not None and flags != state.params:
        raise UsageError(f"parameter mismatch: snapshot has {state.params}, flags give {flags}")
    adds = parse_rows(Path(args.add).read_text(), state.dataset.dim) if args.add else []
    dels = parse_ids(Path(args.delete).read_text()) if args.delete else set()
    batch = UpdateBatch(list(adds), dels)
    t0 = time.perf_counter()
    if args.mode == "sequential":
        sequential_update(state, batch)
        passes = len(batch)
        detail = ""
    else:
        affected = apply_update(state, batch)
        passes = 1 if len(batch) else 0
        detail = f" t1={len(affected.t1)} t2={len(affected.t2)}"
    elapsed = time.perf_counter() - t0
    _write_outputs(state, args.state_out, args.labels)
    print(
        f"mode={args.mode} added={len(batch.additions)} deleted={len(dels)} "
        f"recluster_passes={passes}{detail} {_summary(state)} elapsed={elapsed:.4f}s"
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    state = _read_state(args.state)
    if args.input:
        coords = parse_rows(Path(args.input).read_text(), state.dataset.dim)
        if coords.shape != state.dataset.coords.shape or (coords != state.dataset.coords).any():
            print("dataset mismatch: --input does not hold the snapshot's points", file=sys.stderr)
            return EXIT_MISMATCH
    ref = snnd_cluster(state.dataset.copy(), state.params)
    iso = labels_isomorphic(state.assignment, ref.assignment)
    got, want = set(state.graph.edges()), set(ref.graph.edges())
    edges_ok = got == want
    print(f"labels_isomorphic={str(iso).lower()} edges_equal={str(edges_ok).lower()}")
    if iso and edges_ok:
        return EXIT_OK
    bad_pts = [p for p in sorted(ref.assignment.labels) if state.assignment.labels[p] != ref.assignment.labels[p]]
    for p in bad_pts[:10]:
        print(f"point {p}: snapshot={state.assignment.labels[p]} rerun={ref.assignment.labels[p]}", file=sys.stderr)
    for e in sorted(got ^ want)[:10]:
        print(f"edge {e}: {'snapshot only' if e in got else 'rerun only'}", file=sys.stderr)
    return EXIT_MISMATCH


def cmd_bench(args) -> int:
    params = _params(args)
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    try:
        fractions = [float(x) for x in args.fractions.split(",")]
    except ValueError:
        raise UsageError(f"bad --fractions {args.fractions!r}") from None
    dataset = load_points(Path(args.input).read_text())
    name = args.name or Path(args.input).stem

    def progress(rec):
        print(
            f"fraction={rec.fraction:g} trial={rec.trial} t_snnd={rec.t_snnd:.3f} "
            f"t_bisd={rec.t_bisd:.3f} t_seq={rec.t_seq:.3f} speedup={rec.speedup_snnd:.1f}",
            file=sys.stderr,
        )

    try:
        records = bench.run_bench(
            name, dataset, params, fractions, args.trials, args.seed, args.workload, progress=progress
        )
    except bench.VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    comment = f"workload={args.workload} k={params.k} w={params.w} sim={params.sim_threshold} core={params.core_threshold} seed={args.seed}"
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            bench.write_csv(records, fh, comment)
    else:
        bench.write_csv(records, sys.stdout, comment)
    for f, med in bench.medians(records).items():
        print(
            f"median fraction={f:g}: speedup_snnd={med['speedup_snnd']:.2f} "
            f"speedup_seq={med['speedup_seq']:.2f} mem_ratio={med['mem_ratio']:.3f}",
            file=sys.stderr,
        )
    return EXIT_OK


def cmd_synth(args) -> int:
    coords = bench.synthetic_blobs(args.n, args.dim, args.seed, args.centers)
    Path(args.out).write_text(format_rows(coords))
    print(f"wrote {args.n} points of dimension {args.dim} to {args.out}")
    return EXIT_OK


def _add_params(p, required: bool = True):
    p.add_argument("--k", type=int, required=required)
    p.add_argument("--w", type=int, required=required)
    p.add_argument("--sim-th", dest="sim_th", type=int, required=required)
    p.add_argument("--core-th", dest="core_th", type=int, required=required)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="snndyn", description="Batch-incremental SNN density clustering")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="cluster a dataset from scratch")
    p.add_argument("--input", required=True)
    _add_params(p)
    p.add_argument("--state-out")
    p.add_argument("--labels")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("update", help="apply an insert/delete batch to a snapshot")
    p.add_argument("--state", required=True)
    p.add_argument("--add")
    p.add_argument("--del", dest="delete")
    _add_params(p, required=False)
    p.add_argument("--state-out")
    p.add_argument("--labels")
    p.add_argument("--mode", choices=("batch", "sequential"), default="batch")
    p.set_defaults(func=cmd_update)

    p = sub.add_parser("verify", help="check a snapshot against a from-scratch rerun")
    p.add_argument("--state", required=True)
    p.add_argument("--input")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="time incremental updates against reruns")
    p.add_argument("--input", required=True)
    p.add_argument("--name")
    _add_params(p)
    p.add_argument("--fractions", default="1,2,5,10")
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workload", choices=bench.WORKLOADS, default="mixed")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("synth", help="write a synthetic Gaussian-mixture dataset")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--centers", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, DatasetError, NeighborError, SnapshotError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
