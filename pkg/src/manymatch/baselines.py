"""Comparison matchers: spectral embedding and beam search.

Both return the same :class:`~manymatch.matching.Matching` type as the
gradient pipeline and report the structural objective
``||P1 G P1^T - P2 H P2^T||_F^2`` of their result, so all methods are
scored on the same quantity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kmeans import capped_clusters, kmeans_maximin
from ._validation import as_adjacency
from .matching import Matching
from .solver import objective

__all__ = ["SpectralConfig", "BeamConfig", "spectral_match", "beam_match"]


@dataclass
class SpectralConfig:
    """Spectral matcher parameters.

    ``num_eigenvectors`` leading eigenvectors embed each vertex;
    ``n_clusters`` defaults to ``min(N_G, N_H)``; ``k_max`` caps the
    per-side cluster size of the returned matching.
    """

    num_eigenvectors: int = 2
    n_clusters: int | None = None
    k_max: int = 2

    def __post_init__(self):
        if self.num_eigenvectors < 1:
            raise ValueError(f"num_eigenvectors must be positive, got {self.num_eigenvectors}")
        if self.k_max < 1:
            raise ValueError(f"k_max must be positive, got {self.k_max}")


@dataclass
class BeamConfig:
    """Beam-search matcher parameters.

    ``beam_width`` states survive each depth. ``match_cost`` is added when
    a cross-graph pair opens a cluster and ``merge_cost`` when a vertex
    joins an existing cluster; both default to 0 so the search ranks
    states purely by the structural objective restricted to the vertices
    placed so far.
    """

    beam_width: int = 3
    k_max: int = 2
    match_cost: float = 0.0
    merge_cost: float = 0.0

    def __post_init__(self):
        if self.beam_width < 1:
            raise ValueError(f"beam_width must be at least 1, got {self.beam_width}")
        if self.k_max < 1:
            raise ValueError(f"k_max must be positive, got {self.k_max}")


def _finish(g, h, clusters, k_max: int) -> Matching:
    n_g = as_adjacency(g).shape[0]
    n_h = as_adjacency(h).shape[0]
    m = Matching.from_parts(clusters, 0.0)
    p1, p2 = m.to_matrices(n_g, n_h)
    m = Matching.from_parts(m.clusters, objective(g, h, p1, p2))
    m.validate(n_g, n_h, k_max)
    return m


def _spectral_coords(adj: np.ndarray, k: int) -> np.ndarray:
    """Rows of the k leading eigenvectors, sign-fixed and unit-normalized."""
    w, v = np.linalg.eigh(adj)
    order = np.argsort(-w, kind="stable")[:k]
    v = v[:, order]
    for col in range(v.shape[1]):
        peak = int(np.argmax(np.abs(v[:, col])))
        if v[peak, col] < 0:
            v[:, col] = -v[:, col]
    norms = np.linalg.norm(v, axis=1)
    keep = norms > 0
    v[keep] = v[keep] / norms[keep, None]
    return v


def spectral_match(g, h, cfg: SpectralConfig | None = None) -> Matching:
    """Match by clustering spectral vertex embeddings of both graphs.

    Each adjacency matrix is eigendecomposed; every vertex becomes the
    row of the leading eigenvectors (descending eigenvalue, sign fixed by
    making each eigenvector's largest-magnitude entry positive) scaled to
    unit norm. The pooled points of both graphs are clustered by
    deterministic k-means and capacity repaired. Only defined for
    symmetric adjacency.

    The result does not depend on vertex numbering as long as the leading
    eigenvalues are simple and each eigenvector's largest-magnitude entry
    is unique. When either tie occurs (repeated eigenvalues, or symmetric
    graphs whose automorphisms duplicate entry magnitudes) the embedding
    itself is basis-dependent, so reordering vertices may select another
    equally-scored matching.
    """
    cfg = cfg if cfg is not None else SpectralConfig()
    G = as_adjacency(g, "g")
    H = as_adjacency(h, "h")
    if not np.array_equal(G, G.T) or not np.array_equal(H, H.T):
        raise ValueError("spectral matching requires symmetric adjacency matrices")
    n_g, n_h = G.shape[0], H.shape[0]
    n_k = min(n_g, n_h)
    if cfg.num_eigenvectors > n_k:
        raise ValueError(f"num_eigenvectors={cfg.num_eigenvectors} exceeds min graph size {n_k}")
    n_clusters = cfg.n_clusters if cfg.n_clusters is not None else n_k
    if not 1 <= n_clusters <= n_k:
        raise ValueError(f"n_clusters must lie in [1, {n_k}], got {n_clusters}")
    if n_k * cfg.k_max < max(n_g, n_h):
        raise ValueError(f"k_max={cfg.k_max} cannot place {max(n_g, n_h)} vertices on {n_k} rows")

    points = np.vstack([_spectral_coords(G, cfg.num_eigenvectors), _spectral_coords(H, cfg.num_eigenvectors)])
    labels, _, _ = kmeans_maximin(points, n_clusters)
    clusters = capped_clusters(points, labels, n_g, cfg.k_max, n_k)
    return _finish(g, h, clusters, cfg.k_max)


class _BeamState:
    """Partial matching: cluster members, H-vertex usage, restricted objective."""

    __slots__ = ("clusters", "placed_h", "f", "op_sum", "cost")

    def __init__(self, clusters, placed_h, f, op_sum):
        self.clusters = clusters  # tuple of (g-tuple, h-tuple)
        self.placed_h = placed_h  # bitmask over H vertices
        self.f = f
        self.op_sum = op_sum
        self.cost = f + op_sum


def _cluster_arrays(clusters, n_k: int, n_g: int, n_h: int) -> tuple[np.ndarray, np.ndarray]:
    p1 = np.zeros((n_k, n_g))
    p2 = np.zeros((n_k, n_h))
    for r, (gs, hs) in enumerate(clusters):
        for v in gs:
            p1[r, v] = 1.0
        for u in hs:
            p2[r, u] = 1.0
    return p1, p2


def _restricted_objective(G, H, p1, p2) -> float:
    # Unplaced vertices have all-zero columns, so this equals the structural
    # objective restricted to the vertices placed so far.
    d = p1 @ G @ p1.T - p2 @ H @ p2.T
    return float(np.vdot(d, d))


def _child(state: _BeamState, c: int, v: int, h_side: bool, op_cost: float, f: float) -> _BeamState:
    """New state with vertex v added to cluster index c (possibly a fresh one)."""
    if c == len(state.clusters):
        new_cluster = ((), (v,)) if h_side else ((v,), ())
        clusters = state.clusters + (new_cluster,)
    else:
        gs, hs = state.clusters[c]
        new_cluster = (gs, hs + (v,)) if h_side else (gs + (v,), hs)
        clusters = state.clusters[:c] + (new_cluster,) + state.clusters[c + 1 :]
    placed = state.placed_h | (1 << v) if h_side else state.placed_h
    return _BeamState(clusters, placed, f, state.op_sum + op_cost)


def _prune(children: list[_BeamState], width: int) -> list[_BeamState]:
    if len(children) <= width:
        return children
    order = np.argsort([s.cost for s in children], kind="stable")[:width]
    return [children[i] for i in order]


def _beam_once(G, H, g_order, h_order, n_k: int, cfg: BeamConfig, width: int) -> _BeamState:
    """Run one plain beam search at the given width; return the best terminal."""
    n_g, n_h = G.shape[0], H.shape[0]
    states = [_BeamState((), 0, 0.0, 0.0)]

    for v in g_order:
        children: list[_BeamState] = []
        for s in states:
            p1, p2 = _cluster_arrays(s.clusters, n_k, n_g, n_h)
            if len(s.clusters) < n_k:
                c = len(s.clusters)
                p1[c, v] = 1.0
                f_open = _restricted_objective(G, H, p1, p2)
                children.append(_child(s, c, v, False, 0.0, f_open))
                opened = _child(s, c, v, False, cfg.match_cost, f_open)
                for u in range(n_h):
                    if not s.placed_h & (1 << u):
                        p2[c, u] = 1.0
                        f_pair = _restricted_objective(G, H, p1, p2)
                        p2[c, u] = 0.0
                        children.append(_child(opened, c, u, True, 0.0, f_pair))
                p1[c, v] = 0.0
            for c, (gs, _) in enumerate(s.clusters):
                if len(gs) < cfg.k_max:
                    p1[c, v] = 1.0
                    f_join = _restricted_objective(G, H, p1, p2)
                    p1[c, v] = 0.0
                    children.append(_child(s, c, v, False, cfg.merge_cost, f_join))
        states = _prune(children, width)

    for u in h_order:
        children = []
        for s in states:
            if s.placed_h & (1 << u):
                children.append(s)
                continue
            p1, p2 = _cluster_arrays(s.clusters, n_k, n_g, n_h)
            if len(s.clusters) < n_k:
                c = len(s.clusters)
                p2[c, u] = 1.0
                children.append(_child(s, c, u, True, 0.0, _restricted_objective(G, H, p1, p2)))
                p2[c, u] = 0.0
            for c, (_, hs) in enumerate(s.clusters):
                if len(hs) < cfg.k_max:
                    p2[c, u] = 1.0
                    f_join = _restricted_objective(G, H, p1, p2)
                    p2[c, u] = 0.0
                    children.append(_child(s, c, u, True, cfg.merge_cost, f_join))
        states = _prune(children, width)

    return min(states, key=lambda s: s.cost)


_WIDTH_SWEEP_CAP = 8


def beam_match(g, h, cfg: BeamConfig | None = None) -> Matching:
    """Beam search over cluster-building moves.

    G vertices are processed in descending-degree order; each may open a
    cluster, join an existing one, or open a cluster paired with an unused
    H vertex. Remaining H vertices follow in the same order with open/join
    moves. States are ranked by the structural objective restricted to the
    vertices placed so far (plus any configured operation costs) and only
    ``beam_width`` states survive per depth.

    A single pruned beam is not monotone in its width: widening can evict
    the narrow beam's trajectory mid-search and finish worse. To keep the
    guarantee that extra width never hurts, ``beam_width=w`` also runs
    every narrower beam (up to a sweep cap of 8) and returns the best
    terminal state found across the runs.
    """
    cfg = cfg if cfg is not None else BeamConfig()
    G = as_adjacency(g, "g")
    H = as_adjacency(h, "h")
    n_g, n_h = G.shape[0], H.shape[0]
    if n_g == 0 or n_h == 0:
        raise ValueError("both graphs must be non-empty")
    n_k = min(n_g, n_h)
    if n_k * cfg.k_max < max(n_g, n_h):
        raise ValueError(f"k_max={cfg.k_max} cannot place {max(n_g, n_h)} vertices on {n_k} rows")

    deg_g = (G != 0).sum(axis=1)
    deg_h = (H != 0).sum(axis=1)
    g_order = sorted(range(n_g), key=lambda v: (-deg_g[v], v))
    h_order = sorted(range(n_h), key=lambda v: (-deg_h[v], v))

    widths = list(range(1, min(cfg.beam_width, _WIDTH_SWEEP_CAP) + 1))
    if cfg.beam_width > _WIDTH_SWEEP_CAP:
        widths.append(cfg.beam_width)
    best: _BeamState | None = None
    for width in widths:
        cand = _beam_once(G, H, g_order, h_order, n_k, cfg, width)
        if best is None or cand.cost < best.cost:
            best = cand
    return _finish(g, h, best.clusters, cfg.k_max)
