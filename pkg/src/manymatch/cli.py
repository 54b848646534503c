"""Command-line interface for generation, matching, benchmarks, and scoring.

Subcommands: ``gen`` writes a synthetic pair (and optional ground-truth
matching) to files, ``match`` matches two graph files, ``bench-size`` /
``bench-noise`` / ``bench-time`` run the CSV-emitting experiment sweeps,
and ``score-labels`` evaluates label transfer for a stored matching.
All I/O and parse failures exit nonzero with a message naming the file
(and line where applicable) without leaving partial output behind.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .bench import (
    METHODS,
    PROJECTIONS,
    run_experiment_a,
    run_experiment_b,
    run_experiment_c,
    run_method,
    score_label_transfer,
)
from .graph import Graph, format_graph, read_graph
from .matching import Matching, read_matching, serialize_matching
from .solver import SolverConfig, objective
from .synthetic import SyntheticConfig, generate_pair

_SIZE_GRID = (10, 20, 30, 40, 50, 60)
_SIGMA_GRID = (0.0, 0.05, 0.1, 0.15, 0.2)
_TIME_GRID = (20, 40, 60, 80)


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kmax", type=int, default=2, help="per-graph cluster capacity (default 2)")
    p.add_argument("--epsilon", type=float, default=1e-6, help="solver stopping threshold")
    p.add_argument("--lambda", dest="lam", type=float, default=0.0, help="vertex-similarity term weight")
    p.add_argument("--mu", type=float, default=0.0, help="neighbor-merging term weight")
    p.add_argument("--max-iters", type=int, default=1000, help="iteration cap per relaxed solve")
    p.add_argument("--seed", type=int, default=0, help="top-level seed")


def _add_bench_flags(p: argparse.ArgumentParser, default_reps: int, default_out: str) -> None:
    _add_solver_flags(p)
    p.add_argument("--reps", type=int, default=default_reps, help="repetitions per sweep point")
    p.add_argument(
        "--method",
        action="append",
        choices=METHODS,
        default=None,
        help="method to run (repeatable; default: all three)",
    )
    p.add_argument("--out", default=default_out, help="output CSV path")
    p.add_argument("--projection", choices=PROJECTIONS, default="incremental", help="grad discretization route")
    p.add_argument("--beam-width", type=int, default=3, help="beam width for the beam baseline")
    p.add_argument("--p", type=float, default=0.1, help="edge probability of the base graph")
    p.add_argument("--m", type=int, default=3, help="vertex splits per graph")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="manymatch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic graph pair")
    gen.add_argument("--n", type=int, required=True, help="base graph size")
    gen.add_argument("--p", type=float, default=0.1, help="edge probability")
    gen.add_argument("--m", type=int, default=3, help="vertex splits per graph")
    gen.add_argument("--sigma", type=float, default=0.05, help="noise level")
    gen.add_argument("--seed", type=int, default=0, help="generator seed")
    gen.add_argument("--out-g", required=True, help="output path for the first graph")
    gen.add_argument("--out-h", required=True, help="output path for the second graph")
    gen.add_argument("--out-truth", default=None, help="optional path for the ground-truth matching")

    match = sub.add_parser("match", help="match two graph files")
    match.add_argument("path_g", help="first graph file")
    match.add_argument("path_h", help="second graph file")
    _add_solver_flags(match)
    match.add_argument("--method", choices=METHODS, default="grad", help="matching method")
    match.add_argument("--projection", choices=PROJECTIONS, default="incremental", help="grad discretization route")
    match.add_argument("--beam-width", type=int, default=3, help="beam width for the beam baseline")
    match.add_argument(
        "--coords-similarity",
        action="store_true",
        help="build the vertex similarity from graph coordinates as exp(-squared distance)",
    )
    match.add_argument(
        "--negate-similarity",
        action="store_true",
        help="flip the similarity sign convention (treat C as a reward rather than a cost)",
    )
    match.add_argument("--out", default=None, help="write the matching here instead of stdout")

    size = sub.add_parser("bench-size", help="objective-versus-size sweep")
    _add_bench_flags(size, default_reps=30, default_out="experiment_a.csv")
    size.add_argument("--sizes", type=int, nargs="+", default=list(_SIZE_GRID), help="graph sizes to sweep")
    size.add_argument("--sigma", type=float, default=0.05, help="noise level")

    noise = sub.add_parser("bench-noise", help="objective-versus-noise sweep")
    _add_bench_flags(noise, default_reps=30, default_out="experiment_b.csv")
    noise.add_argument("--n", type=int, default=30, help="graph size")
    noise.add_argument("--sigmas", type=float, nargs="+", default=list(_SIGMA_GRID), help="noise levels to sweep")

    tim = sub.add_parser("bench-time", help="timing sweep with fitted log-log slopes")
    _add_bench_flags(tim, default_reps=10, default_out="experiment_c.csv")
    tim.add_argument("--sizes", type=int, nargs="+", default=list(_TIME_GRID), help="graph sizes to sweep")
    tim.add_argument("--sigma", type=float, default=0.05, help="noise level")

    score = sub.add_parser("score-labels", help="score label transfer across a stored matching")
    score.add_argument("path_g", help="first graph file (labeled)")
    score.add_argument("path_h", help="second graph file (labeled)")
    score.add_argument("path_matching", help="matching file")
    score.add_argument("--out", default=None, help="write the score as JSON here as well")

    return parser


def _cmd_gen(args) -> int:
    cfg = SyntheticConfig(n=args.n, p=args.p, m=args.m, sigma=args.sigma, seed=args.seed)
    g, h, truth = generate_pair(cfg)
    labeled_g = Graph(g.adj, labels=[str(i) for i in truth.origin_g])
    labeled_h = Graph(h.adj, labels=[str(i) for i in truth.origin_h])
    outputs = [
        (Path(args.out_g), format_graph(labeled_g)),
        (Path(args.out_h), format_graph(labeled_h)),
    ]
    if args.out_truth is not None:
        clusters = truth.clusters()
        matching = Matching.from_parts(clusters, 0.0)
        p1, p2 = matching.to_matrices(g.adj.shape[0], h.adj.shape[0])
        matching = Matching.from_parts(clusters, objective(g, h, p1, p2))
        outputs.append((Path(args.out_truth), serialize_matching(matching)))
    for path, text in outputs:
        path.write_text(text)
    print(f"wrote {' and '.join(str(p) for p, _ in outputs)}")
    return 0


def _coords_similarity(g: Graph, h: Graph, path_g: str, path_h: str) -> np.ndarray:
    for graph, path in ((g, path_g), (h, path_h)):
        if graph.coords is None:
            raise ValueError(f"{path}: --coords-similarity needs coordinates on every vertex")
    dx = g.coords[:, 0][:, None] - h.coords[:, 0][None, :]
    dy = g.coords[:, 1][:, None] - h.coords[:, 1][None, :]
    return np.exp(-(dx**2) - dy**2)


def _cmd_match(args) -> int:
    g = read_graph(args.path_g)
    h = read_graph(args.path_h)
    similarity = _coords_similarity(g, h, args.path_g, args.path_h) if args.coords_similarity else None
    cfg = SolverConfig(
        k_max=args.kmax,
        epsilon=args.epsilon,
        lam=args.lam,
        mu=args.mu,
        max_iters=args.max_iters,
        similarity=similarity,
        negate_similarity=args.negate_similarity,
        seed=args.seed,
    )
    matching, _, _ = run_method(
        args.method, g, h, cfg, projection=args.projection, beam_width=args.beam_width
    )
    text = serialize_matching(matching)
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    return 0


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        k_max=args.kmax,
        epsilon=args.epsilon,
        lam=args.lam,
        mu=args.mu,
        max_iters=args.max_iters,
        seed=args.seed,
    )


def _cmd_bench_size(args) -> int:
    methods = tuple(args.method) if args.method else METHODS
    records = run_experiment_a(
        reps=args.reps,
        sizes=tuple(args.sizes),
        p=args.p,
        sigma=args.sigma,
        m=args.m,
        methods=methods,
        out=args.out,
        seed=args.seed,
        cfg=_solver_config(args),
        projection=args.projection,
        beam_width=args.beam_width,
    )
    print(f"wrote {len(records)} rows to {args.out}")
    return 0


def _cmd_bench_noise(args) -> int:
    methods = tuple(args.method) if args.method else METHODS
    records = run_experiment_b(
        reps=args.reps,
        n=args.n,
        p=args.p,
        sigmas=tuple(args.sigmas),
        m=args.m,
        methods=methods,
        out=args.out,
        seed=args.seed,
        cfg=_solver_config(args),
        projection=args.projection,
        beam_width=args.beam_width,
    )
    print(f"wrote {len(records)} rows to {args.out}")
    return 0


def _cmd_bench_time(args) -> int:
    methods = tuple(args.method) if args.method else METHODS
    records, slopes = run_experiment_c(
        reps=args.reps,
        sizes=tuple(args.sizes),
        p=args.p,
        sigma=args.sigma,
        m=args.m,
        methods=methods,
        out=args.out,
        seed=args.seed,
        cfg=_solver_config(args),
        projection=args.projection,
        beam_width=args.beam_width,
    )
    print(f"wrote {len(records)} rows to {args.out}")
    for method in methods:
        print(f"slope {method} {slopes[method]:.3f}")
    return 0


def _cmd_score_labels(args) -> int:
    g = read_graph(args.path_g)
    h = read_graph(args.path_h)
    matching = read_matching(args.path_matching)
    for graph, path in ((g, args.path_g), (h, args.path_h)):
        if graph.labels is None:
            raise ValueError(f"{path}: score-labels needs a label on every vertex")
    score = score_label_transfer(matching, g.labels, h.labels)
    print(f"g_to_h_error {score.g_to_h_error!r}")
    print(f"h_to_g_error {score.h_to_g_error!r}")
    print(f"mean_error {score.mean_error!r}")
    if args.out is not None:
        payload = {
            "g_to_h_error": score.g_to_h_error,
            "h_to_g_error": score.h_to_g_error,
            "mean_error": score.mean_error,
            "confusion_g_to_h": {f"{t}->{p}": c for (t, p), c in sorted(score.confusion_g_to_h.items())},
            "confusion_h_to_g": {f"{t}->{p}": c for (t, p), c in sorted(score.confusion_h_to_g.items())},
        }
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n")
        print(f"wrote {args.out}")
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "match": _cmd_match,
    "bench-size": _cmd_bench_size,
    "bench-noise": _cmd_bench_noise,
    "bench-time": _cmd_bench_time,
    "score-labels": _cmd_score_labels,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
