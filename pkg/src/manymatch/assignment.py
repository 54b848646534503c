"""Exact linear assignment and capacitated semi-assignment.

``solve_semi_assignment`` minimizes a linear cost over binary matrices whose
columns each sum to 1 and whose row sums are capped. It reduces to a square
assignment problem by replicating each row up to its capacity and padding
with zero-cost dummy columns; the reduction is exact because the feasible
set is a transportation polytope whose vertices are integral.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

__all__ = ["hungarian", "solve_semi_assignment"]


def _check_cost(cost, name: str = "cost") -> np.ndarray:
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2:
        raise ValueError(f"{name} must be a 2-d matrix, got ndim={cost.ndim}")
    if not np.all(np.isfinite(cost)):
        raise ValueError(f"{name} entries must be finite")
    return cost


def hungarian(cost) -> tuple[np.ndarray, float]:
    """Solve the square linear assignment problem exactly.

    Parameters
    ----------
    cost : array-like of shape (n, n)
        Finite cost matrix.

    Returns
    -------
    perm : ndarray of shape (n,)
        ``perm[i]`` is the column assigned to row ``i``; a minimizer of
        ``sum(cost[i, perm[i]])``.
    value : float
        The minimal total cost.
    """
    cost = _check_cost(cost)
    if cost.shape[0] != cost.shape[1]:
        raise ValueError(f"cost must be square, got shape {cost.shape}")
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(cost.shape[0], dtype=int)
    perm[rows] = cols
    return perm, float(cost[rows, cols].sum())


def solve_semi_assignment(cost, k_max) -> tuple[np.ndarray, float]:
    """Minimize a linear cost over column-stochastic, row-capped binary matrices.

    Parameters
    ----------
    cost : array-like of shape (L, n)
        Finite cost matrix: rows are capacity-bearing slots, columns are
        items that must each be placed exactly once.
    k_max : int or sequence of int
        Row capacity; either one bound shared by all rows or a
        per-row vector of non-negative bounds.

    Returns
    -------
    assignment : ndarray of shape (L, n)
        Binary matrix with unit column sums and row sums within capacity,
        minimizing ``(cost * assignment).sum()``.
    value : float
        The minimal objective.

    Raises
    ------
    ValueError
        If the capacities cannot cover all columns (``sum(caps) < n``).
    """
    cost = _check_cost(cost)
    n_rows, n_cols = cost.shape
    caps = np.asarray(k_max, dtype=int)
    if caps.ndim == 0:
        if caps < 1:
            raise ValueError(f"k_max must be positive, got {int(caps)}")
        caps = np.full(n_rows, int(caps))
    elif caps.shape != (n_rows,) or np.any(caps < 0):
        raise ValueError("per-row capacities must be a non-negative vector of length L")
    total = int(caps.sum())
    if total < n_cols:
        raise ValueError(f"infeasible: capacity {total} cannot cover {n_cols} columns")

    owner = np.repeat(np.arange(n_rows), caps)
    big = np.zeros((total, total))
    big[:, :n_cols] = cost[owner]
    perm, _ = hungarian(big)

    assignment = np.zeros((n_rows, n_cols))
    real = perm < n_cols
    assignment[owner[real], perm[real]] = 1.0
    return assignment, float((cost * assignment).sum())
