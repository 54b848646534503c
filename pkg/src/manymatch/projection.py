"""Discretization of relaxed solutions into binary matchings.

Three routes to a :class:`~manymatch.matching.Matching`:

* ``project_by_clustering`` groups the column vectors of a solved relaxed
  pair with k-means and repairs capacity overflows.
* ``project_incremental`` alternates relaxed solves with pinning the two
  most similar unpinned columns to a shared row until everything is fixed.
* ``brute_force_optimum`` enumerates every feasible binary pair on small
  instances and is the test oracle for both.
"""

from __future__ import annotations

import itertools
from dataclasses import replace

import numpy as np

from ._kmeans import capped_clusters, kmeans_restarts
from ._validation import as_adjacency, check_pair_shapes
from .assignment import solve_semi_assignment
from .matching import Matching
from .solver import (
    Pins,
    SolverConfig,
    _effective_similarity,
    _objective_arrays,
    _pin_and_repair,
    initialize,
    objective,
    solve_relaxed,
)

_CANDIDATE_CAP = 64
_SMALL_TOTAL = 32
_LOOKAHEAD = 2
_REFINE_MAX_ITERS = 60
_FAST_REFINE_ITERS = 30

__all__ = [
    "column_similarity",
    "project_by_clustering",
    "project_incremental",
    "brute_force_optimum",
]


def column_similarity(p1, p2) -> np.ndarray:
    """Dot products between all columns of the stacked pair (P1, P2).

    Returns the symmetric (N_G + N_H) square Gram matrix whose diagonal
    holds squared column norms. Entry (a, b) measures how much columns a
    and b agree on their cluster-row distribution.
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    if p1.ndim != 2 or p2.ndim != 2 or p1.shape[0] != p2.shape[0]:
        raise ValueError("p1 and p2 must be matrices sharing their row count")
    x = np.hstack([p1, p2])
    return x.T @ x


def _matching_with_objective(g, h, clusters, cfg: SolverConfig) -> Matching:
    n_g = as_adjacency(g).shape[0]
    n_h = as_adjacency(h).shape[0]
    m = Matching.from_parts(clusters, 0.0)
    p1, p2 = m.to_matrices(n_g, n_h)
    return Matching.from_parts(m.clusters, objective(g, h, p1, p2, cfg))


def _cluster_matrices(clusters, n_g: int, n_h: int, n_k: int) -> tuple[np.ndarray, np.ndarray]:
    """Binary assignment pair on exactly ``n_k`` rows (trailing rows empty)."""
    p1 = np.zeros((n_k, n_g))
    p2 = np.zeros((n_k, n_h))
    for r, (gs, hs) in enumerate(clusters):
        for i in gs:
            p1[r, i] = 1.0
        for j in hs:
            p2[r, j] = 1.0
    return p1, p2


def _finish_matrices(g, h, G, H, p1, p2, cfg: SolverConfig, polish: bool = True) -> Matching:
    """Optionally polish a binary pair on small instances, then wrap it."""
    if polish and p1.shape[1] + p2.shape[1] <= _SMALL_TOTAL:
        p1, p2 = _polish(G, H, p1, p2, cfg)
    clusters = [
        (tuple(np.flatnonzero(p1[r] > 0.5)), tuple(np.flatnonzero(p2[r] > 0.5)))
        for r in range(p1.shape[0])
    ]
    return _matching_with_objective(g, h, clusters, cfg)


def project_by_clustering(g, h, p1, p2, cfg: SolverConfig | None = None) -> Matching:
    """Cluster the relaxed column vectors into a feasible binary matching.

    Runs seeded k-means (20 restarts, from ``cfg.seed``) with
    ``min(N_G, N_H)`` centers on the pooled columns of (p1, p2), evicts
    the farthest members of any cluster that exceeds the per-side cap,
    and reports the matching with its exact binary objective. Binary
    feasible inputs pass through unchanged: their one-hot columns are
    already separated, so the clusters reproduce the row structure.
    """
    cfg = cfg if cfg is not None else SolverConfig()
    G = as_adjacency(g, "g")
    H = as_adjacency(h, "h")
    n_g, n_h = G.shape[0], H.shape[0]
    p1, p2 = check_pair_shapes(p1, p2, n_g, n_h)
    n_k = min(n_g, n_h)
    points = np.hstack([p1, p2]).T
    rng = np.random.default_rng(cfg.seed)
    labels, _, _ = kmeans_restarts(points, n_k, rng)
    clusters = capped_clusters(points, labels, n_g, cfg.k_max, n_k)
    q1, q2 = _cluster_matrices(clusters, n_g, n_h, n_k)
    return _finish_matrices(g, h, G, H, q1, q2, cfg, polish=False)


def _pair_eligibility(side, pin_state, cap_g, cap_h) -> np.ndarray:
    """Boolean matrix over column pairs that may still be pinned together."""
    n = side.size
    unpinned = pin_state < 0
    ok = np.zeros((n, n), dtype=bool)

    gg = bool(np.any(cap_g >= 2))
    hh = bool(np.any(cap_h >= 2))
    gh = bool(np.any((cap_g >= 1) & (cap_h >= 1)))
    both = np.outer(unpinned, unpinned)
    is_h = side.astype(bool)
    type_ok = np.where(
        np.outer(~is_h, ~is_h), gg, np.where(np.outer(is_h, is_h), hh, gh)
    )
    ok |= both & type_ok

    for a in np.flatnonzero(~unpinned):
        r = pin_state[a]
        can = unpinned & np.where(is_h, cap_h[r] >= 1, cap_g[r] >= 1)
        ok[a, can] = True
        ok[can, a] = True
    np.fill_diagonal(ok, False)
    return ok


def project_incremental(
    g,
    h,
    cfg: SolverConfig | None = None,
    trace_sink: list | None = None,
    n_starts: int = 3,
) -> Matching:
    """Discretize by repeatedly pinning the least damaging column pair.

    Runs the pinning procedure from ``n_starts`` starting points (the
    default initialization, then seeded blends of it with random
    assignment vertices) and returns the best matching found, stopping
    early when one reaches the structural optimum of exactly zero.

    Each start first solves the relaxation in full, then repeatedly pins
    one capacity-eligible pair: a cross-graph pair matches two vertices,
    a same-graph pair merges them, and pairs land on the row where they
    already carry the most mass. Candidates are ranked by the objective
    right after pin-and-repair (only the 64 most similar column pairs
    are considered on large instances); the few best are then re-solved
    on their pinned face (warm started, capped at 100 iterations) and
    the pin whose re-solve stays lowest is committed together with that
    solution. When no pair is eligible the leftover vertices are pinned
    as singletons. Solver traces along the committed paths of all starts
    accumulate into ``trace_sink`` when given.
    """
    cfg = cfg if cfg is not None else SolverConfig()
    G = as_adjacency(g, "g")
    H = as_adjacency(h, "h")
    if n_starts < 1:
        raise ValueError(f"n_starts must be at least 1, got {n_starts}")
    best = None
    for start in range(n_starts):
        m = _incremental_once(g, h, G, H, cfg, _start_init(G, H, cfg, start), trace_sink)
        if best is None or m.objective < best.objective:
            best = m
        if best.objective == 0.0 and cfg.lam == 0.0 and cfg.mu == 0.0:
            break
    return best


def _start_init(G, H, cfg: SolverConfig, start: int):
    """Starting point for one projection start: the default initialization
    first, then seeded half-blends with random assignment vertices."""
    if start == 0:
        return cfg.init
    n_g, n_h = G.shape[0], H.shape[0]
    n_k = min(n_g, n_h)
    p1, p2 = initialize(n_g, n_h, cfg)
    rng = np.random.default_rng((cfg.seed, start))
    r1, _ = solve_semi_assignment(rng.random((n_k, n_g)), cfg.k_max)
    r2, _ = solve_semi_assignment(rng.random((n_k, n_h)), cfg.k_max)
    return 0.5 * (p1 + r1), 0.5 * (p2 + r2)


def _incremental_once(g, h, G, H, cfg: SolverConfig, init, trace_sink: list | None) -> Matching:
    n_g, n_h = G.shape[0], H.shape[0]
    n_k = min(n_g, n_h)
    if n_k * cfg.k_max < max(n_g, n_h):
        raise ValueError(f"k_max={cfg.k_max} cannot place {max(n_g, n_h)} vertices on {n_k} rows")
    side = np.concatenate([np.zeros(n_g, dtype=int), np.ones(n_h, dtype=int)])
    pins = Pins()
    trace = solve_relaxed(G, H, replace(cfg, pins=pins, init=init))
    if trace_sink is not None:
        trace_sink.append(trace)
    small = side.size <= _SMALL_TOTAL
    lookahead = _LOOKAHEAD if small else 1
    refine_iters = min(cfg.max_iters, _REFINE_MAX_ITERS if small else _FAST_REFINE_ITERS)

    while len(pins.g_rows) < n_g or len(pins.h_rows) < n_h:
        pin_state = np.full(n_g + n_h, -1, dtype=int)
        for v, r in pins.g_rows.items():
            pin_state[v] = r
        for v, r in pins.h_rows.items():
            pin_state[n_g + v] = r
        cap_g = np.full(n_k, cfg.k_max, dtype=int)
        cap_h = np.full(n_k, cfg.k_max, dtype=int)
        for r in pins.g_rows.values():
            cap_g[r] -= 1
        for r in pins.h_rows.values():
            cap_h[r] -= 1

        ok = _pair_eligibility(side, pin_state, cap_g, cap_h)
        if not ok.any():
            _pin_singletons(pins, trace, side, pin_state, cap_g, cap_h, n_g, cfg.k_max)
            break

        sim = column_similarity(trace.p1, trace.p2)
        shortlist = _rank_pins(G, H, trace, side, pin_state, cap_g, cap_h, n_g, cfg, pins, sim, ok, lookahead)
        best_value = np.inf
        best_pins = None
        best_trace = None
        for a, b, row in shortlist:
            cand = Pins(dict(pins.g_rows), dict(pins.h_rows))
            for col in (a, b):
                if pin_state[col] < 0:
                    _add_pin(cand, side, n_g, col, row)
            run_cfg = replace(cfg, pins=cand, init=(trace.p1, trace.p2), max_iters=refine_iters)
            cand_trace = solve_relaxed(G, H, run_cfg)
            if cand_trace.final_objective < best_value:
                best_value = cand_trace.final_objective
                best_pins = cand
                best_trace = cand_trace
        pins = best_pins
        trace = best_trace
        if trace_sink is not None:
            trace_sink.append(trace)

    p1 = np.zeros((n_k, n_g))
    p2 = np.zeros((n_k, n_h))
    for v, r in pins.g_rows.items():
        p1[r, v] = 1.0
    for v, r in pins.h_rows.items():
        p2[r, v] = 1.0
    return _finish_matrices(g, h, G, H, p1, p2, cfg)


def _column_mass(trace, side, n_g: int, col: int) -> np.ndarray:
    return trace.p1[:, col] if side[col] == 0 else trace.p2[:, col - n_g]


def _add_pin(pins: Pins, side, n_g: int, col: int, row: int) -> None:
    if side[col] == 0:
        pins.g_rows[col] = row
    else:
        pins.h_rows[col - n_g] = row


def _pair_row(trace, side, pin_state, cap_g, cap_h, n_g, a: int, b: int) -> int:
    """Row a candidate pair would be pinned to: the anchor's row when one
    column is already pinned, otherwise the allowed row carrying the most
    combined mass."""
    if pin_state[a] >= 0:
        return int(pin_state[a])
    if pin_state[b] >= 0:
        return int(pin_state[b])
    need_g = int(side[a] == 0) + int(side[b] == 0)
    need_h = int(side[a] == 1) + int(side[b] == 1)
    allowed = (cap_g >= need_g) & (cap_h >= need_h)
    mass = _column_mass(trace, side, n_g, a) + _column_mass(trace, side, n_g, b)
    return int(np.argmax(np.where(allowed, mass, -np.inf)))


def _score_pin(G, H, trace, side, n_g, cfg, C, pins: Pins, a: int, b: int, row: int) -> float:
    """Objective after forcing the candidate pins and repairing feasibility."""
    g_rows = dict(pins.g_rows)
    h_rows = dict(pins.h_rows)
    for col in (a, b):
        if side[col] == 0:
            g_rows[col] = row
        else:
            h_rows[col - n_g] = row
    p1 = _pin_and_repair(trace.p1, g_rows, cfg.k_max) if len(g_rows) > len(pins.g_rows) else trace.p1
    p2 = _pin_and_repair(trace.p2, h_rows, cfg.k_max) if len(h_rows) > len(pins.h_rows) else trace.p2
    return _objective_arrays(G, H, p1, p2, cfg.lam, cfg.mu, C)


def _rank_pins(G, H, trace, side, pin_state, cap_g, cap_h, n_g, cfg, pins: Pins, sim, ok, limit: int) -> list[tuple[int, int, int]]:
    """Shortlist the eligible pairs (with target rows) whose pins hurt least.

    Candidates are the eligible pairs ranked by descending column
    similarity, capped at 64 when more than 32 columns exist; each is
    scored by the objective after pin-and-repair and the best ``limit``
    are returned, ties going to similarity order.
    """
    C = _effective_similarity(cfg)
    total = side.size
    upper = np.triu(ok, 1)
    ranked = np.argsort(np.where(upper, -sim, np.inf), axis=None, kind="stable")
    count = int(upper.sum())
    if total > _SMALL_TOTAL:
        count = min(count, _CANDIDATE_CAP)
    scored = []
    for pos, idx in enumerate(ranked[:count]):
        a, b = divmod(int(idx), total)
        row = _pair_row(trace, side, pin_state, cap_g, cap_h, n_g, a, b)
        value = _score_pin(G, H, trace, side, n_g, cfg, C, pins, a, b, row)
        scored.append((value, pos, a, b, row))
    scored.sort()
    return [(a, b, row) for _, _, a, b, row in scored[:limit]]


def _polish(G, H, p1, p2, cfg: SolverConfig) -> tuple[np.ndarray, np.ndarray]:
    """Best-improvement local search on a binary assignment pair.

    Repeatedly applies the single-vertex row move or same-side row swap
    that lowers the objective most (evaluated exactly) until no candidate
    improves. Moves respect the per-row capacity; column sums stay one.
    """
    C = _effective_similarity(cfg)
    n_k = p1.shape[0]
    value = _objective_arrays(G, H, p1, p2, cfg.lam, cfg.mu, C)
    for _ in range(500):
        best_delta = -1e-12 * (1.0 + abs(value))
        best_apply = None
        for p in (p1, p2):
            rows = p.argmax(axis=0)
            counts = p.sum(axis=1)
            n = p.shape[1]
            for v in range(n):
                r = int(rows[v])
                for t in range(n_k):
                    if t == r or counts[t] >= cfg.k_max:
                        continue
                    p[r, v], p[t, v] = 0.0, 1.0
                    cand = _objective_arrays(G, H, p1, p2, cfg.lam, cfg.mu, C)
                    p[r, v], p[t, v] = 1.0, 0.0
                    if cand - value < best_delta:
                        best_delta = cand - value
                        best_apply = (p, ((r, v, 0.0), (t, v, 1.0)))
            for v in range(n):
                r = int(rows[v])
                for w in range(v + 1, n):
                    t = int(rows[w])
                    if t == r:
                        continue
                    p[r, v], p[t, v], p[t, w], p[r, w] = 0.0, 1.0, 0.0, 1.0
                    cand = _objective_arrays(G, H, p1, p2, cfg.lam, cfg.mu, C)
                    p[r, v], p[t, v], p[t, w], p[r, w] = 1.0, 0.0, 1.0, 0.0
                    if cand - value < best_delta:
                        best_delta = cand - value
                        best_apply = (p, ((r, v, 0.0), (t, v, 1.0), (t, w, 0.0), (r, w, 1.0)))
        if best_apply is None:
            break
        p, updates = best_apply
        for r, v, x in updates:
            p[r, v] = x
        value = _objective_arrays(G, H, p1, p2, cfg.lam, cfg.mu, C)
    return p1, p2


def _pin_singletons(pins, trace, side, pin_state, cap_g, cap_h, n_g, k_max: int) -> None:
    """Pin leftover columns one by one, preferring rows no pin has touched."""
    for col in np.flatnonzero(pin_state < 0):
        caps = cap_g if side[col] == 0 else cap_h
        open_rows = caps >= 1
        if not open_rows.any():
            raise ValueError("no row has capacity left for an unpinned vertex")
        fresh = open_rows & (cap_g == k_max) & (cap_h == k_max)
        pool = fresh if fresh.any() else open_rows
        mass = _column_mass(trace, side, n_g, int(col))
        row = int(np.argmax(np.where(pool, mass, -np.inf)))
        _add_pin(pins, side, n_g, int(col), row)
        caps[row] -= 1


def brute_force_optimum(g, h, cfg: SolverConfig | None = None) -> Matching:
    """Global minimizer of the configured objective by exhaustive enumeration.

    Enumerates P1 as canonical set partitions of the G vertices (block
    count at most ``min(N_G, N_H)``, block size at most ``k_max``; row
    order is a symmetry of the objective, so one representative per
    partition suffices) against every capped row assignment of the H
    vertices. Only intended for instances with at most 6 vertices per
    graph and ``k_max`` at most 3.
    """
    cfg = cfg if cfg is not None else SolverConfig()
    G = as_adjacency(g, "g")
    H = as_adjacency(h, "h")
    n_g, n_h = G.shape[0], H.shape[0]
    if n_g > 6 or n_h > 6:
        raise ValueError(f"brute force is limited to 6 vertices per graph, got {n_g} and {n_h}")
    if cfg.k_max > 3:
        raise ValueError(f"brute force is limited to k_max <= 3, got {cfg.k_max}")
    n_k = min(n_g, n_h)
    if n_k * cfg.k_max < max(n_g, n_h):
        raise ValueError(f"k_max={cfg.k_max} cannot place {max(n_g, n_h)} vertices on {n_k} rows")
    C = None
    if cfg.similarity is not None:
        C = np.asarray(cfg.similarity, dtype=float)
        if cfg.negate_similarity:
            C = -C

    grids = np.array(list(itertools.product(range(n_k), repeat=n_h)), dtype=int)
    onehot = (grids[:, :, None] == np.arange(n_k)[None, None, :]).astype(float)
    feasible = (onehot.sum(axis=1) <= cfg.k_max).all(axis=1)
    grids, onehot = grids[feasible], onehot[feasible]
    b_stack = np.einsum("kir,ij,kjs->krs", onehot, H, onehot)
    b_flat = b_stack.reshape(b_stack.shape[0], -1)
    norm_b = (b_flat**2).sum(axis=1)
    trace_b = np.trace(b_stack, axis1=1, axis2=2)

    best_value = np.inf
    best = None
    cols = np.arange(n_h)
    for blocks in _capped_partitions(n_g, cfg.k_max, n_k):
        p1 = np.zeros((n_k, n_g))
        for r, block in enumerate(blocks):
            p1[r, block] = 1.0
        a = p1 @ G @ p1.T
        values = (1.0 - cfg.lam) * (float(np.vdot(a, a)) + norm_b - 2.0 * (b_flat @ a.ravel()))
        if cfg.lam != 0.0:
            cc = p1 @ C
            values = values + cfg.lam * cc[grids, cols].sum(axis=1)
        if cfg.mu != 0.0:
            values = values - cfg.mu * (float(np.vdot(G, p1.T @ p1)) + trace_b)
        idx = int(np.argmin(values))
        if values[idx] < best_value:
            best_value = float(values[idx])
            best = (blocks, grids[idx])

    blocks, assign = best
    clusters = []
    for r in range(n_k):
        gs = blocks[r] if r < len(blocks) else ()
        hs = tuple(int(j) for j in np.flatnonzero(assign == r))
        clusters.append((gs, hs))
    return _matching_with_objective(g, h, clusters, cfg)


def _capped_partitions(n: int, cap: int, max_blocks: int):
    """Yield set partitions of range(n) with block sizes <= cap and <= max_blocks blocks.

    Blocks are emitted in first-occurrence order, the canonical
    representative of each partition under row permutation.
    """
    blocks: list[list[int]] = []

    def rec(v: int):
        if v == n:
            yield tuple(tuple(b) for b in blocks)
            return
        for b in blocks:
            if len(b) < cap:
                b.append(v)
                yield from rec(v + 1)
                b.pop()
        if len(blocks) < max_blocks:
            blocks.append([v])
            yield from rec(v + 1)
            blocks.pop()

    yield from rec(0)
