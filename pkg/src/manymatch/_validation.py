"""Shared input checks for adjacency and assignment matrices."""

from __future__ import annotations

import numpy as np

from .graph import Graph


def as_adjacency(g, name: str = "graph") -> np.ndarray:
    """Return a validated square float adjacency matrix for a Graph or array."""
    if isinstance(g, Graph):
        return g.adj
    arr = np.asarray(g, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} adjacency must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} adjacency entries must be finite")
    return arr


def check_pair_shapes(p1, p2, n_g: int, n_h: int) -> tuple[np.ndarray, np.ndarray]:
    """Validate that (p1, p2) are assignment matrices for graph sizes (n_g, n_h)."""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    if p1.ndim != 2 or p1.shape[1] != n_g:
        raise ValueError(f"p1 must have {n_g} columns, got shape {p1.shape}")
    if p2.ndim != 2 or p2.shape[1] != n_h:
        raise ValueError(f"p2 must have {n_h} columns, got shape {p2.shape}")
    if p1.shape[0] != p2.shape[0]:
        raise ValueError(f"p1 and p2 must share their row count, got {p1.shape[0]} and {p2.shape[0]}")
    return p1, p2
