"""Synthetic benchmark harness: experiment sweeps, CSV emission, label transfer.

Three experiment shapes over :func:`~manymatch.synthetic.generate_pair`
instances: a size sweep, a noise sweep, and a timing sweep with fitted
log-log slopes. Every run emits one data row per (instance, method) into
a fixed-schema CSV, mean/std rows into a ``.summary.csv`` sidecar, and
the full configuration into a ``.meta.json`` sidecar. Results are a pure
function of the top-level seed (timings excluded); the ``MTM_THREADS``
environment variable caps how many repetitions run concurrently.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import BeamConfig, SpectralConfig, beam_match, spectral_match
from .matching import Matching
from .projection import project_by_clustering, project_incremental
from .solver import SolverConfig, objective, solve_relaxed
from .synthetic import SyntheticConfig, generate_pair

__all__ = [
    "CSV_HEADER",
    "BenchmarkRecord",
    "LabelTransferScore",
    "score_label_transfer",
    "run_method",
    "run_experiment_a",
    "run_experiment_b",
    "run_experiment_c",
    "read_records_csv",
]

METHODS = ("grad", "spec", "beam")
PROJECTIONS = ("incremental", "clustering")
CSV_HEADER = "method,N,p,M,sigma,seed,F,time_s,iters"


@dataclass(frozen=True)
class BenchmarkRecord:
    """One benchmark measurement: a method's final objective on one instance.

    ``iters`` is the total relaxed-solver iteration count and is only
    meaningful for the gradient method; it is None for the baselines.
    """

    method: str
    n: int
    p: float
    m: int
    sigma: float
    seed: int
    objective: float
    time_s: float
    iters: int | None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.time_s > 0:
            raise ValueError(f"time_s must be positive, got {self.time_s}")
        if not math.isfinite(self.objective):
            raise ValueError(f"objective must be finite, got {self.objective}")

    def to_row(self) -> list[str]:
        return [
            self.method,
            str(self.n),
            repr(self.p),
            str(self.m),
            repr(self.sigma),
            str(self.seed),
            repr(self.objective),
            repr(self.time_s),
            "" if self.iters is None else str(self.iters),
        ]

    @classmethod
    def from_row(cls, row: list[str]) -> "BenchmarkRecord":
        if len(row) != 9:
            raise ValueError(f"benchmark row must have 9 fields, got {len(row)}")
        return cls(
            method=row[0],
            n=int(row[1]),
            p=float(row[2]),
            m=int(row[3]),
            sigma=float(row[4]),
            seed=int(row[5]),
            objective=float(row[6]),
            time_s=float(row[7]),
            iters=None if row[8] == "" else int(row[8]),
        )


@dataclass(frozen=True)
class LabelTransferScore:
    """Error rates of cluster-majority label prediction, both directions.

    ``confusion_g_to_h`` counts (true label, predicted label) pairs over
    G vertices; an empty string stands for "no prediction possible"
    (cluster had no partner vertices). Same for the other direction.
    """

    g_to_h_error: float
    h_to_g_error: float
    mean_error: float
    confusion_g_to_h: dict = field(default_factory=dict)
    confusion_h_to_g: dict = field(default_factory=dict)

    def __post_init__(self):
        for rate in (self.g_to_h_error, self.h_to_g_error, self.mean_error):
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"error rates must lie in [0, 1], got {rate}")


def _majority(labels: list[str]) -> str:
    counts = Counter(labels)
    top = max(counts.values())
    return min(lbl for lbl, c in counts.items() if c == top)


def _transfer_direction(clusters, labels_from, labels_to, own_index: int, other_index: int):
    errors = 0
    total = 0
    confusion: Counter = Counter()
    for cluster in clusters:
        own = cluster[own_index]
        other = cluster[other_index]
        predicted = _majority([labels_from[v] for v in other]) if other else ""
        for v in own:
            truth = labels_to[v]
            confusion[(truth, predicted)] += 1
            errors += predicted != truth
            total += 1
    return (errors / total if total else 0.0), dict(confusion)


def score_label_transfer(matching: Matching, labels_g, labels_h) -> LabelTransferScore:
    """Score how well cluster-majority voting transfers labels across a matching.

    Every G vertex is predicted to carry the majority label of the H
    vertices sharing its cluster (lexically smallest label on ties, an
    automatic error when the cluster has no H vertices), and vice versa.

    Parameters
    ----------
    matching : the Matching whose clusters define the vote.
    labels_g, labels_h : one label per vertex; every matched vertex must
        have a non-empty label.
    """
    labels_g = [str(x) for x in labels_g]
    labels_h = [str(x) for x in labels_h]
    if any(not x for x in labels_g) or any(not x for x in labels_h):
        raise ValueError("label transfer requires a non-empty label for every vertex")
    for gs, hs in matching.clusters:
        for i in gs:
            if i >= len(labels_g):
                raise ValueError(f"matching references G vertex {i} but only {len(labels_g)} labels given")
        for j in hs:
            if j >= len(labels_h):
                raise ValueError(f"matching references H vertex {j} but only {len(labels_h)} labels given")
    g_err, conf_g = _transfer_direction(matching.clusters, labels_h, labels_g, 0, 1)
    h_err, conf_h = _transfer_direction(matching.clusters, labels_g, labels_h, 1, 0)
    return LabelTransferScore(
        g_to_h_error=g_err,
        h_to_g_error=h_err,
        mean_error=(g_err + h_err) / 2.0,
        confusion_g_to_h=conf_g,
        confusion_h_to_g=conf_h,
    )


def run_method(
    method: str,
    g,
    h,
    cfg: SolverConfig | None = None,
    projection: str = "incremental",
    beam_width: int = 3,
    trace_sink: list | None = None,
) -> tuple[Matching, float, int | None]:
    """Run one method on one pair; return (matching, wall seconds, iterations).

    The reported objective is recomputed from the discretized matching by
    an independent evaluation, so a drifting solver cannot misreport.
    Timing covers the method call only. ``iters`` is the summed relaxed
    iteration count for ``grad`` and None for the baselines.
    """
    cfg = cfg if cfg is not None else SolverConfig()
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    if projection not in PROJECTIONS:
        raise ValueError(f"projection must be one of {PROJECTIONS}, got {projection!r}")
    sink: list = [] if trace_sink is None else trace_sink
    iters: int | None = None
    start = time.perf_counter()
    if method == "grad":
        before = len(sink)
        if projection == "incremental":
            matching = project_incremental(g, h, cfg, trace_sink=sink)
        else:
            trace = solve_relaxed(g, h, cfg)
            sink.append(trace)
            matching = project_by_clustering(g, h, trace.p1, trace.p2, cfg)
        iters = sum(t.iterations for t in sink[before:])
    elif method == "spec":
        matching = spectral_match(g, h, SpectralConfig(k_max=cfg.k_max))
    else:
        matching = beam_match(g, h, BeamConfig(beam_width=beam_width, k_max=cfg.k_max))
    elapsed = max(time.perf_counter() - start, 1e-9)

    n_g = g.adj.shape[0] if hasattr(g, "adj") else np.asarray(g).shape[0]
    n_h = h.adj.shape[0] if hasattr(h, "adj") else np.asarray(h).shape[0]
    p1, p2 = matching.to_matrices(n_g, n_h)
    checked = objective(g, h, p1, p2, cfg)
    return Matching.from_parts(matching.clusters, checked), elapsed, iters


def _threads() -> int:
    raw = os.environ.get("MTM_THREADS", "1")
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"MTM_THREADS must be an integer, got {raw!r}") from exc
    return max(1, value)


def _run_point(args) -> list[BenchmarkRecord]:
    n, p, m, sigma, seed, methods, cfg, projection, beam_width, trace_sink = args
    g, h, _ = generate_pair(SyntheticConfig(n=n, p=p, m=m, sigma=sigma, seed=seed))
    records = []
    for method in methods:
        matching, elapsed, iters = run_method(
            method, g, h, cfg, projection=projection, beam_width=beam_width, trace_sink=trace_sink
        )
        records.append(
            BenchmarkRecord(
                method=method,
                n=n,
                p=p,
                m=m,
                sigma=sigma,
                seed=seed,
                objective=matching.objective,
                time_s=elapsed,
                iters=iters,
            )
        )
    return records


def _run_grid(points, reps, methods, base_seed, cfg, projection, beam_width, trace_sink):
    tasks = []
    for index, (n, p, m, sigma) in enumerate(points):
        for rep in range(reps):
            seed = base_seed + 1000 * index + rep
            tasks.append((n, p, m, sigma, seed, tuple(methods), cfg, projection, beam_width, trace_sink))
    workers = _threads()
    if workers == 1:
        towers = [_run_point(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            towers = list(pool.map(_run_point, tasks))
    return [rec for tower in towers for rec in tower]


def _write_csv(path: Path, records: list[BenchmarkRecord]) -> None:
    lines = [CSV_HEADER]
    lines += [",".join(r.to_row()) for r in records]
    path.write_text("\n".join(lines) + "\n")


def read_records_csv(path) -> list[BenchmarkRecord]:
    """Parse a benchmark CSV written by the experiment runners."""
    text = Path(path).read_text().strip().splitlines()
    if not text or text[0] != CSV_HEADER:
        raise ValueError(f"{path}: expected header {CSV_HEADER!r}")
    return [BenchmarkRecord.from_row(line.split(",")) for line in text[1:]]


def _write_summary(path: Path, records: list[BenchmarkRecord]) -> None:
    groups: dict[tuple, list[BenchmarkRecord]] = {}
    order = []
    for r in records:
        key = (r.method, r.n, r.p, r.m, r.sigma)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(r)
    lines = ["method,N,p,M,sigma,F_mean,F_std,time_s_mean,time_s_std,reps"]
    for key in order:
        rs = groups[key]
        fs = np.array([r.objective for r in rs])
        ts = np.array([r.time_s for r in rs])
        lines.append(
            ",".join(
                [
                    key[0],
                    str(key[1]),
                    repr(key[2]),
                    str(key[3]),
                    repr(key[4]),
                    repr(float(fs.mean())),
                    repr(float(fs.std())),
                    repr(float(ts.mean())),
                    repr(float(ts.std())),
                    str(len(rs)),
                ]
            )
        )
    path.write_text("\n".join(lines) + "\n")


def _write_meta(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _emit(out, records, meta) -> None:
    out = Path(out)
    _write_csv(out, records)
    _write_summary(out.with_name(out.name + ".summary.csv"), records)
    _write_meta(out.with_name(out.name + ".meta.json"), meta)


def _common_meta(cfg: SolverConfig, methods, reps, base_seed, projection, beam_width) -> dict:
    return {
        "version": __version__,
        "methods": list(methods),
        "reps": reps,
        "seed": base_seed,
        "projection": projection,
        "beam_width": beam_width,
        "k_max": cfg.k_max,
        "epsilon": cfg.epsilon,
        "lambda": cfg.lam,
        "mu": cfg.mu,
        "max_iters": cfg.max_iters,
    }


def run_experiment_a(
    reps: int = 30,
    sizes=(10, 20, 30, 40, 50, 60),
    p: float = 0.1,
    sigma: float = 0.05,
    m: int = 3,
    methods=METHODS,
    out="experiment_a.csv",
    seed: int = 0,
    cfg: SolverConfig | None = None,
    projection: str = "incremental",
    beam_width: int = 3,
    trace_sink: list | None = None,
) -> list[BenchmarkRecord]:
    """Objective-versus-size sweep: every method on shared instances per size.

    Writes the data CSV to ``out``, per-(size, method) mean/std rows to
    ``out + '.summary.csv'`` and the configuration to ``out + '.meta.json'``.
    Returns the data records in emission order.
    """
    if reps < 1:
        raise ValueError(f"reps must be at least 1, got {reps}")
    cfg = cfg if cfg is not None else SolverConfig()
    points = [(int(n), p, m, sigma) for n in sizes]
    records = _run_grid(points, reps, methods, seed, cfg, projection, beam_width, trace_sink)
    meta = _common_meta(cfg, methods, reps, seed, projection, beam_width)
    meta.update({"experiment": "size", "sizes": [int(n) for n in sizes], "p": p, "sigma": sigma, "M": m})
    _emit(out, records, meta)
    return records


def run_experiment_b(
    reps: int = 30,
    n: int = 30,
    p: float = 0.1,
    sigmas=(0.0, 0.05, 0.1, 0.15, 0.2),
    m: int = 3,
    methods=METHODS,
    out="experiment_b.csv",
    seed: int = 0,
    cfg: SolverConfig | None = None,
    projection: str = "incremental",
    beam_width: int = 3,
    trace_sink: list | None = None,
) -> list[BenchmarkRecord]:
    """Objective-versus-noise sweep at fixed size; emission as experiment a."""
    if reps < 1:
        raise ValueError(f"reps must be at least 1, got {reps}")
    cfg = cfg if cfg is not None else SolverConfig()
    points = [(n, p, m, float(s)) for s in sigmas]
    records = _run_grid(points, reps, methods, seed, cfg, projection, beam_width, trace_sink)
    meta = _common_meta(cfg, methods, reps, seed, projection, beam_width)
    meta.update({"experiment": "noise", "N": n, "p": p, "sigmas": [float(s) for s in sigmas], "M": m})
    _emit(out, records, meta)
    return records


def run_experiment_c(
    reps: int = 10,
    sizes=(20, 40, 60, 80),
    p: float = 0.1,
    sigma: float = 0.05,
    m: int = 3,
    methods=METHODS,
    out="experiment_c.csv",
    seed: int = 0,
    cfg: SolverConfig | None = None,
    projection: str = "incremental",
    beam_width: int = 3,
    trace_sink: list | None = None,
) -> tuple[list[BenchmarkRecord], dict[str, float]]:
    """Timing sweep: like the size sweep, plus fitted log-log time slopes.

    Returns (records, slopes) where ``slopes[method]`` is the
    least-squares slope of log(mean wall time) against log(size); the
    slopes are also stored in the meta sidecar.
    """
    if len(set(int(s) for s in sizes)) < 3:
        raise ValueError("the timing sweep needs at least 3 distinct sizes")
    if reps < 1:
        raise ValueError(f"reps must be at least 1, got {reps}")
    cfg = cfg if cfg is not None else SolverConfig()
    points = [(int(n), p, m, sigma) for n in sizes]
    records = _run_grid(points, reps, methods, seed, cfg, projection, beam_width, trace_sink)
    slopes = fit_time_slopes(records)
    meta = _common_meta(cfg, methods, reps, seed, projection, beam_width)
    meta.update(
        {"experiment": "time", "sizes": [int(n) for n in sizes], "p": p, "sigma": sigma, "M": m, "slopes": slopes}
    )
    _emit(out, records, meta)
    return records, slopes


def fit_time_slopes(records: list[BenchmarkRecord]) -> dict[str, float]:
    """Least-squares slope of log mean time against log size, per method."""
    by_method: dict[str, dict[int, list[float]]] = {}
    for r in records:
        by_method.setdefault(r.method, {}).setdefault(r.n, []).append(r.time_s)
    slopes = {}
    for method, per_n in by_method.items():
        ns = sorted(per_n)
        if len(ns) < 2:
            raise ValueError(f"cannot fit a slope for {method!r} from {len(ns)} size(s)")
        xs = np.log([float(n) for n in ns])
        ys = np.log([float(np.mean(per_n[n])) for n in ns])
        slopes[method] = float(np.polyfit(xs, ys, 1)[0])
    return slopes
