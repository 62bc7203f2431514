"""Command line interface.

Subcommands: segment-graph, segment-grid, verify, bench, eval, baseline.
Exit codes: 0 success, 2 parse error, 3 shape error, 4 oracle-size error,
1 anything else. The environment variable SMW_THREADS caps internal
parallelism; the current implementation is sequential, so any value >= 1
is accepted and recorded without effect.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import io as smw_io
from .baselines import cc_affinity, cc_semantic, mws_max
from .errors import ParseError, ShapeMismatch, SMWError, TooLargeForOracle
from .grid import build_grid_graph
from .metrics import label_map_from_segmentation, panoptic_quality
from .oracle import (
    ORACLE_MAX_EDGES,
    brute_force_optimum,
    check_label_constraint,
    check_mutex_constraint,
    check_smwc_polytope,
    induced_segmentation,
    polytope_inputs,
)
from .prng import Xoshiro256StarStar
from .synthetic import bench_volume_graph, random_graph
from .watershed import run_smw

THREAD_CAP = 1


def _read_thread_cap():
    raw = os.environ.get("SMW_THREADS")
    if raw is None:
        return 1
    try:
        cap = int(raw)
        if cap < 1:
            raise ValueError
    except ValueError:
        print(f"ignoring invalid SMW_THREADS={raw!r}", file=sys.stderr)
        return 1
    return cap


def _write_json(path, payload):
    with open(path, "w", encoding="ascii") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def cmd_segment_graph(args):
    graph = smw_io.read_graph(args.graph)
    started = time.perf_counter()
    result = run_smw(graph, exact_energy=True)
    runtime_ms = (time.perf_counter() - started) * 1000.0
    smw_io.write_node_assignments(args.out_nodes, result)
    _write_json(
        args.out_summary,
        {
            "energy": result.energy,
            "exact_energy": str(result.exact_energy),
            "clusters": result.num_clusters,
            "runtime_ms": runtime_ms,
        },
    )
    print(f"nodes={graph.num_nodes} clusters={result.num_clusters} energy={result.energy!r}")
    return 0


def _load_grid_inputs(args):
    affinities = smw_io.load_tensor(args.affinities)
    pattern = smw_io.load_offsets(args.offsets)
    semantic = smw_io.load_tensor(args.semantic) if args.semantic else None
    return affinities, pattern, semantic


def cmd_segment_grid(args):
    affinities, pattern, semantic = _load_grid_inputs(args)
    graph = build_grid_graph(affinities, pattern, semantic)
    result = run_smw(graph)
    label_map = label_map_from_segmentation(result, affinities.shape[1:])
    smw_io.write_label_map(args.out_classes, args.out_instances, label_map)
    print(f"voxels={graph.num_nodes} edges={graph.num_edges} clusters={result.num_clusters}")
    return 0


def _verify_one(graph, constraints_only):
    result = run_smw(graph, exact_energy=True)
    mutex_ok = check_mutex_constraint(graph, result.active)
    label_ok = check_label_constraint(graph, result.active)
    dense_graph, cuts, exempt = polytope_inputs(graph, result)
    polytope_ok = check_smwc_polytope(dense_graph, cuts, unassigned_ok=exempt)

    optimal = None
    oracle_energy = None
    if not constraints_only:
        if graph.num_edges > ORACLE_MAX_EDGES:
            raise TooLargeForOracle(
                f"{graph.num_edges} edges exceed the {ORACLE_MAX_EDGES}-edge cap; "
                "use --constraints-only"
            )
        oracle_active, oracle_energy = brute_force_optimum(graph)
        oracle_partition = induced_segmentation(graph, oracle_active)
        smw_partition = (result.node_cluster, result.cluster_labels)
        optimal = (
            oracle_energy == result.exact_energy
            and np.array_equal(oracle_partition[0], smw_partition[0])
            and oracle_partition[1] == smw_partition[1]
        )
    return result, mutex_ok, label_ok, polytope_ok, len(exempt), optimal, oracle_energy


def cmd_verify(args):
    if args.random is not None:
        rng = Xoshiro256StarStar(args.seed)
        graphs = [random_graph(rng) for _ in range(args.random)]
    else:
        if args.graph is None:
            print("verify: need a graph file or --random N", file=sys.stderr)
            return 1
        graphs = [smw_io.read_graph(args.graph)]

    n_optimal = n_constraints = n_polytope = 0
    failed = False
    for index, graph in enumerate(graphs):
        result, mutex_ok, label_ok, polytope_ok, exempt, optimal, oracle_energy = _verify_one(
            graph, args.constraints_only
        )
        n_constraints += mutex_ok and label_ok
        n_polytope += polytope_ok
        if optimal:
            n_optimal += 1
        if len(graphs) == 1:
            verdict = "SKIPPED" if optimal is None else ("OPTIMAL" if optimal else "SUBOPTIMAL")
            print(
                f"edges={graph.num_edges} smw_exact_energy={result.exact_energy} "
                f"oracle_energy={oracle_energy} verdict={verdict}"
            )
            print(
                f"mutex_constraint={'PASS' if mutex_ok else 'FAIL'} "
                f"label_constraint={'PASS' if label_ok else 'FAIL'} "
                f"polytope={'PASS' if polytope_ok else 'FAIL'} "
                f"exempt_unlabeled_nodes={exempt}"
            )
            print(f"energy_float={result.energy!r}")
        elif optimal is False or not (mutex_ok and label_ok and polytope_ok):
            print(f"graph {index}: FAILED", file=sys.stderr)
        if optimal is False or not (mutex_ok and label_ok and polytope_ok):
            failed = True

    if len(graphs) > 1:
        print(
            f"graphs={len(graphs)} constraints_pass={n_constraints} "
            f"polytope_pass={n_polytope}"
        )
        if not args.constraints_only:
            print(f"{n_optimal}/{len(graphs)} OPTIMAL")
    return 1 if failed else 0


def bench_run(sizes, repeats, seed, num_labels=2):
    """Build one volume per size, time the greedy pass `repeats` times, and
    fit a log-log slope of the median runtime against the edge count."""
    rows = []
    medians = []
    edge_counts = []
    for index, side in enumerate(sizes):
        graph = bench_volume_graph(side, seed + index, num_labels=num_labels)
        times = []
        for _ in range(repeats):
            started = time.perf_counter()
            run_smw(graph)
            times.append(time.perf_counter() - started)
        for seconds in times:
            rows.append((side**3, graph.num_edges, seconds))
        medians.append(float(np.median(times)))
        edge_counts.append(graph.num_edges)
    slope = float(
        np.polyfit(np.log(np.asarray(edge_counts, float)), np.log(np.asarray(medians)), 1)[0]
    ) if len(sizes) > 1 else float("nan")
    return rows, edge_counts, medians, slope


def cmd_bench(args):
    sizes = [int(s) for s in args.sizes.split(",") if s]
    if sizes != sorted(sizes) or len(set(sizes)) != len(sizes):
        print("bench: sizes must be strictly ascending", file=sys.stderr)
        return 1
    rows, edge_counts, medians, slope = bench_run(
        sizes, args.repeats, args.seed, num_labels=args.labels
    )
    with open(args.out, "w", encoding="ascii") as handle:
        handle.write("voxels,edges,seconds\n")
        for voxels, edges, seconds in rows:
            handle.write(f"{voxels},{edges},{seconds!r}\n")
    for edges, median in zip(edge_counts, medians):
        print(f"edges={edges} median_seconds={median!r}")
    print(f"slope={slope!r}")
    if not args.no_figure:
        figure = args.figure or os.path.splitext(args.out)[0] + ".png"
        from .plots import save_bench_figure

        save_bench_figure(figure, edge_counts, medians, slope)
    if args.max_slope is not None and slope > args.max_slope:
        print(f"bench: slope {slope} exceeds limit {args.max_slope}", file=sys.stderr)
        return 1
    return 0


def cmd_eval(args):
    pred = smw_io.read_label_map(args.pred_classes, args.pred_instances)
    gt = smw_io.read_label_map(args.gt_classes, args.gt_instances)
    things, stuffs = smw_io.load_class_config(args.classes)
    report = panoptic_quality(pred, gt, things, stuffs)
    text = report.to_text()
    sys.stdout.write(text)
    if args.out_text:
        with open(args.out_text, "w", encoding="ascii") as handle:
            handle.write(text)
    if args.out_json:
        with open(args.out_json, "w", encoding="ascii") as handle:
            handle.write(report.to_json())
    figure = args.figure
    if figure is None and not args.no_figure and (args.out_json or args.out_text):
        figure = os.path.splitext(args.out_json or args.out_text)[0] + ".png"
    if figure and not args.no_figure:
        from .plots import save_pq_figure

        save_pq_figure(figure, report)
    return 0


def cmd_baseline(args):
    if args.which == "mws-max":
        graph = smw_io.read_graph(args.graph)
        if args.grid_shape:
            shape = tuple(int(s) for s in args.grid_shape.split(","))
        else:
            shape = (graph.num_nodes,)
        result = mws_max(graph)
        label_map = label_map_from_segmentation(result, shape)
    elif args.which == "cc-sem":
        semantic = smw_io.load_tensor(args.semantic)
        pattern = smw_io.load_offsets(args.offsets)
        label_map = cc_semantic(semantic, pattern)
    else:  # cc-aff
        affinities, pattern, semantic = _load_grid_inputs(args)
        if semantic is None:
            print("baseline cc-aff: --semantic is required", file=sys.stderr)
            return 1
        label_map = cc_affinity(affinities, pattern, args.threshold, semantic)
    smw_io.write_label_map(args.out_classes, args.out_instances, label_map)
    if args.out_summary:
        stuffs = []
        if args.classes:
            _things, stuff_set = smw_io.load_class_config(args.classes)
            stuffs = sorted(stuff_set)
        classes_present = sorted(int(c) for c in np.unique(label_map.classes) if c >= 0)
        _write_json(
            args.out_summary,
            {"classes": classes_present, "stuff_classes": stuffs, "baseline": args.which},
        )
    print(f"baseline={args.which} shape={'x'.join(str(s) for s in label_map.shape)}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="smw",
        description="Joint graph partitioning and labeling by greedy edge processing, "
        "with exact verification, baselines and panoptic evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment-graph", help="segment an SMWG graph file")
    p.add_argument("graph")
    p.add_argument("--out-nodes", required=True)
    p.add_argument("--out-summary", required=True)
    p.set_defaults(func=cmd_segment_graph)

    p = sub.add_parser("segment-grid", help="segment an affinity grid")
    p.add_argument("--affinities", required=True, help="tensor base path, (offsets, *grid)")
    p.add_argument("--offsets", required=True, help="offsets JSON file")
    p.add_argument("--semantic", help="tensor base path, (classes, *grid)")
    p.add_argument("--out-classes", required=True)
    p.add_argument("--out-instances", required=True)
    p.set_defaults(func=cmd_segment_grid)

    p = sub.add_parser("verify", help="check greedy output against the exhaustive oracle")
    p.add_argument("graph", nargs="?")
    p.add_argument("--constraints-only", action="store_true")
    p.add_argument("--random", type=int, metavar="N", help="verify N random graphs")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="runtime scaling on synthetic volumes")
    p.add_argument("--sizes", default="16,32,64", help="comma-separated cube side lengths")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--labels", type=int, default=2)
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--figure", help="figure path (default: CSV path with .png)")
    p.add_argument("--no-figure", action="store_true")
    p.add_argument("--max-slope", type=float, help="fail if the fitted slope exceeds this")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("eval", help="panoptic quality of a prediction")
    p.add_argument("--pred-classes", required=True)
    p.add_argument("--pred-instances", required=True)
    p.add_argument("--gt-classes", required=True)
    p.add_argument("--gt-instances", required=True)
    p.add_argument("--classes", required=True, help="JSON with thing/stuff class ids")
    p.add_argument("--out-text")
    p.add_argument("--out-json")
    p.add_argument("--figure")
    p.add_argument("--no-figure", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("baseline", help="separate-optimization baselines")
    p.add_argument("which", choices=["mws-max", "cc-sem", "cc-aff"])
    p.add_argument("--graph", help="SMWG file (mws-max)")
    p.add_argument("--grid-shape", help="comma-separated shape for mws-max label maps")
    p.add_argument("--affinities", help="tensor base path (cc-aff)")
    p.add_argument("--offsets", help="offsets JSON (cc-sem connectivity, cc-aff stencil)")
    p.add_argument("--semantic", help="tensor base path (cc-sem, cc-aff)")
    p.add_argument("--threshold", type=float, default=0.5, help="cc-aff binarization threshold")
    p.add_argument("--classes", help="JSON with thing/stuff class ids (stuff flagging)")
    p.add_argument("--out-classes", required=True)
    p.add_argument("--out-instances", required=True)
    p.add_argument("--out-summary")
    p.set_defaults(func=cmd_baseline)

    return parser


def main(argv=None):
    global THREAD_CAP
    THREAD_CAP = _read_thread_cap()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ShapeMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except TooLargeForOracle as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except SMWError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
