"""Deterministic Lloyd clustering with capacity repair.

Two seeding schemes are provided. ``kmeans_restarts`` samples distinct
starting points with a seeded generator and keeps the best of 20 runs;
``kmeans_maximin`` seeds by farthest-point traversal with all ties broken
on coordinate values, so its result depends only on the multiset of
points, not on their order. ``capped_clusters`` turns labels into
per-side-capped clusters by evicting the points farthest from their
centroid into new or slack clusters.
"""

from __future__ import annotations

import numpy as np

__all__ = ["lloyd", "kmeans_restarts", "kmeans_maximin", "capped_clusters"]


def _assign(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d, axis=1)


def lloyd(points: np.ndarray, centers: np.ndarray, tol: float = 1e-8, max_iters: int = 300):
    """Run Lloyd iterations until every center moves less than ``tol``.

    Empty clusters keep their previous center. Returns
    ``(labels, centers, inertia)``.
    """
    centers = centers.copy()
    labels = _assign(points, centers)
    for _ in range(max_iters):
        moved = 0.0
        for c in range(centers.shape[0]):
            members = points[labels == c]
            if members.shape[0] == 0:
                continue
            new = members.mean(axis=0)
            moved = max(moved, float(np.linalg.norm(new - centers[c])))
            centers[c] = new
        labels = _assign(points, centers)
        if moved < tol:
            break
    inertia = float(((points - centers[labels]) ** 2).sum())
    return labels, centers, inertia


def kmeans_restarts(points: np.ndarray, k: int, rng, n_restarts: int = 20, tol: float = 1e-8):
    """Best of ``n_restarts`` seeded Lloyd runs; returns (labels, centers, inertia)."""
    n = points.shape[0]
    if k >= n:
        return np.arange(n), points.copy(), 0.0
    best = None
    for _ in range(n_restarts):
        idx = rng.choice(n, size=k, replace=False)
        labels, centers, inertia = lloyd(points, points[idx], tol=tol)
        if best is None or inertia < best[2]:
            best = (labels, centers, inertia)
    return best


def _lex_smallest(points: np.ndarray, candidates: np.ndarray) -> int:
    """Index (within candidates) of the lexicographically smallest point."""
    sub = points[candidates]
    order = np.lexsort(sub.T[::-1])
    return int(candidates[order[0]])


def kmeans_maximin(points: np.ndarray, k: int, tol: float = 1e-8):
    """Lloyd seeded by deterministic farthest-point traversal.

    The first center is the lexicographically smallest point and each next
    center the point farthest from the chosen set, ties again broken
    lexicographically. The outcome is invariant under any reordering of
    the input points.
    """
    n = points.shape[0]
    k = min(k, n)
    chosen = [_lex_smallest(points, np.arange(n))]
    dist = ((points - points[chosen[0]]) ** 2).sum(axis=1)
    while len(chosen) < k:
        far = np.flatnonzero(dist >= dist.max() - 1e-12 * (1.0 + dist.max()))
        nxt = _lex_smallest(points, far)
        chosen.append(nxt)
        dist = np.minimum(dist, ((points - points[nxt]) ** 2).sum(axis=1))
    return lloyd(points, points[np.array(chosen)], tol=tol)


def capped_clusters(points: np.ndarray, labels: np.ndarray, n_g: int, k_max: int, n_k: int):
    """Build per-side-capped clusters from point labels.

    Points ``0..n_g-1`` belong to the G side, the rest to the H side. A
    cluster holding more than ``k_max`` points of one side sheds its
    farthest-from-centroid members: into a fresh cluster while fewer than
    ``n_k`` exist, afterwards into the nearest cluster with room on that
    side. Returns a list of (G-vertex list, H-vertex list) pairs with
    empty clusters removed.
    """
    n = points.shape[0]
    if n - n_g > n_k * k_max or n_g > n_k * k_max:
        raise ValueError("k_max and cluster budget cannot hold all vertices")
    members: list[list[int]] = [[] for _ in range(n_k)]
    relabel = {lab: i for i, lab in enumerate(sorted(set(int(l) for l in labels)))}
    for i, lab in enumerate(labels):
        members[relabel[int(lab)]].append(i)
    used = len(relabel)

    def side_count(cluster: list[int], side: int) -> int:
        if side == 0:
            return sum(1 for i in cluster if i < n_g)
        return sum(1 for i in cluster if i >= n_g)

    def centroid(cluster: list[int]) -> np.ndarray:
        return points[cluster].mean(axis=0)

    progress = True
    while progress:
        progress = False
        for c in range(used):
            for side in (0, 1):
                while side_count(members[c], side) > k_max:
                    progress = True
                    on_side = [i for i in members[c] if (i < n_g) == (side == 0)]
                    cen = centroid(members[c])
                    dists = ((points[on_side] - cen) ** 2).sum(axis=1)
                    order = sorted(range(len(on_side)), key=lambda t: (-dists[t], on_side[t]))
                    evict = on_side[order[0]]
                    members[c].remove(evict)
                    if used < n_k:
                        members[used].append(evict)
                        used += 1
                        continue
                    best, best_d = None, np.inf
                    for d in range(used):
                        if d == c or side_count(members[d], side) >= k_max:
                            continue
                        dd = float(((points[evict] - centroid(members[d])) ** 2).sum()) if members[d] else 0.0
                        if dd < best_d:
                            best, best_d = d, dd
                    if best is None:
                        raise ValueError("no cluster can absorb an evicted vertex")
                    members[best].append(evict)

    out = []
    for cluster in members:
        if cluster:
            out.append(
                (sorted(i for i in cluster if i < n_g), sorted(i - n_g for i in cluster if i >= n_g))
            )
    return out
