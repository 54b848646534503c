"""Synthetic benchmark pairs: a random graph, a permuted copy, vertex splits, edge noise.

An instance starts from an Erdos-Renyi graph G(n, p). Its vertex-permuted
copy H is then perturbed the same way G is: m vertices are split in two
(each incident edge goes to exactly one child, chosen by a fair coin, and
the children are not connected to each other), and floor(sigma * p * n^2)
edge-presence toggles are applied at uniformly random vertex pairs. Splits
and toggles are drawn independently for the two graphs, so corresponding
vertices are generally split differently. The returned ground truth maps
every final vertex back to the original vertex it descends from.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph

__all__ = ["SyntheticConfig", "GroundTruth", "generate_pair"]


@dataclass(frozen=True)
class SyntheticConfig:
    """Parameters of one synthetic instance.

    Attributes
    ----------
    n : int
        Base graph size, at least 2.
    p : float
        Edge probability in [0, 1].
    m : int
        Number of vertex splits applied to each graph, in [0, n]. Split
        targets are distinct original vertices, so no vertex is split twice.
    sigma : float
        Noise level; each graph receives floor(sigma * p * n^2) edge toggles.
    seed : int
        Seed for the generator; identical seeds give identical instances.
    """

    n: int
    p: float
    m: int = 0
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be at least 2, got {self.n}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if not 0 <= self.m <= self.n:
            raise ValueError(f"m must lie in [0, n], got {self.m}")
        if self.sigma < 0.0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")

    @property
    def toggles(self) -> int:
        """Number of edge toggles applied to each graph."""
        return int(np.floor(self.sigma * self.p * self.n**2))


@dataclass(frozen=True)
class GroundTruth:
    """Maps each final vertex to the original vertex it descends from.

    ``origin_g[i]`` (resp. ``origin_h[j]``) is the original vertex, in
    ``range(n_original)``, from which vertex ``i`` of the first output
    graph (resp. ``j`` of the second) descends.
    """

    n_original: int
    origin_g: np.ndarray
    origin_h: np.ndarray

    def clusters(self) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        """Ground-truth correspondence as (G-vertices, H-vertices) per original vertex."""
        out = []
        for c in range(self.n_original):
            gs = tuple(int(i) for i in np.flatnonzero(self.origin_g == c))
            hs = tuple(int(j) for j in np.flatnonzero(self.origin_h == c))
            out.append((gs, hs))
        return out


def _split_vertices(adj: np.ndarray, origin: np.ndarray, n_base: int, m: int, rng) -> tuple[np.ndarray, np.ndarray]:
    """Split m distinct vertices of range(n_base); children are appended at the end."""
    n_out = adj.shape[0] + m
    out = np.zeros((n_out, n_out))
    out[: adj.shape[0], : adj.shape[0]] = adj
    origin = np.concatenate([origin, np.zeros(m, dtype=int)])
    cur = adj.shape[0]
    targets = rng.choice(n_base, size=m, replace=False)
    for t in targets:
        neighbors = np.flatnonzero(out[t])
        move = neighbors[rng.random(neighbors.size) < 0.5]
        for u in move:
            out[cur, u] = out[u, cur] = out[t, u]
            out[t, u] = out[u, t] = 0.0
        origin[cur] = origin[t]
        cur += 1
    return out, origin


def _toggle_edges(adj: np.ndarray, count: int, rng) -> None:
    """Flip edge presence at `count` uniformly random vertex pairs, in place."""
    n = adj.shape[0]
    ii, jj = np.triu_indices(n, k=1)
    for _ in range(count):
        k = rng.integers(ii.size)
        i, j = ii[k], jj[k]
        w = 0.0 if adj[i, j] != 0.0 else 1.0
        adj[i, j] = adj[j, i] = w


def generate_pair(cfg: SyntheticConfig) -> tuple[Graph, Graph, GroundTruth]:
    """Generate a matched graph pair and its ground-truth correspondence.

    Returns
    -------
    (Graph, Graph, GroundTruth)
        Two undirected graphs of ``cfg.n + cfg.m`` vertices each and the
        origin maps tying their vertices back to the base graph.

    Raises
    ------
    ValueError
        If the toggle count exceeds the number of available vertex pairs.
    """
    n, rng = cfg.n, np.random.default_rng(cfg.seed)
    n_pairs_final = (n + cfg.m) * (n + cfg.m - 1) // 2
    if cfg.toggles > n_pairs_final:
        raise ValueError(
            f"{cfg.toggles} toggles exceed the {n_pairs_final} vertex pairs available; lower sigma"
        )

    base = np.zeros((n, n))
    iu, ju = np.triu_indices(n, k=1)
    present = rng.random(iu.size) < cfg.p
    base[iu[present], ju[present]] = 1.0
    base += base.T

    perm = rng.permutation(n)
    adj_h = np.empty_like(base)
    adj_h[np.ix_(perm, perm)] = base
    origin_h = np.empty(n, dtype=int)
    origin_h[perm] = np.arange(n)

    adj_g, origin_g = _split_vertices(base, np.arange(n), n, cfg.m, rng)
    adj_h, origin_h = _split_vertices(adj_h, origin_h, n, cfg.m, rng)

    _toggle_edges(adj_g, cfg.toggles, rng)
    _toggle_edges(adj_h, cfg.toggles, rng)

    return Graph(adj_g), Graph(adj_h), GroundTruth(n, origin_g, origin_h)
