"""Many-to-many matching objective and its Frank-Wolfe solver.

Two cluster-assignment matrices P1 (rows-by-N_G) and P2 (rows-by-N_H) map the
vertices of both graphs onto shared cluster rows; the structural objective is

    F(P1, P2) = || P1 G P1^T - P2 H P2^T ||_F^2

minimized over binary matrices with unit column sums and row sums at most
k_max. Two optional terms extend it: a vertex-similarity coupling
``lam * tr(C^T P1^T P2)`` and a neighbor-merge reward
``-mu * (tr(G^T P1^T P1) + tr(H^T P2^T P2))`` that pays for clustering
adjacent vertices together.

The solver relaxes the binary constraint to [0, 1] and runs conditional
gradient: linearize, find the best feasible vertex with a capacitated
semi-assignment solve, then step by an exact line search. The objective
restricted to the segment is a polynomial of degree at most four, so the
step is found from the roots of its derivative. Columns may be pinned to
fixed rows, which restricts every step to that face of the polytope.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import as_adjacency, check_pair_shapes
from .assignment import solve_semi_assignment

__all__ = [
    "Pins",
    "SolverConfig",
    "SolveTrace",
    "LineSearchResult",
    "initialize",
    "objective",
    "gradient",
    "fw_direction",
    "line_search",
    "solve_relaxed",
]

# Interpolation nodes used to recover the quartic line-search polynomial.
_NODES = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
_VANDER_INV = np.linalg.inv(np.vander(_NODES, 5, increasing=True))


@dataclass
class Pins:
    """Columns constrained to fixed cluster rows, one map per graph side.

    ``g_rows[v] = r`` forces column ``v`` of P1 to the one-hot vector for
    row ``r``; ``h_rows`` does the same for P2. Pinned columns are held
    exact through initialization, direction finding, and line search.
    """

    g_rows: dict[int, int] = field(default_factory=dict)
    h_rows: dict[int, int] = field(default_factory=dict)

    def total(self) -> int:
        return len(self.g_rows) + len(self.h_rows)


@dataclass
class SolverConfig:
    """Solver parameters.

    Attributes
    ----------
    k_max : int
        Row capacity: at most this many vertices of one graph per cluster.
    epsilon : float
        Stopping tolerance on ``|dF| + ||dP1||_F + ||dP2||_F``.
    lam : float
        Weight in [0, 1] of the vertex-similarity term. Requires
        ``similarity``.
    mu : float
        Non-negative weight of the neighbor-merge reward; 0 disables it.
    max_iters : int
        Iteration cap; hitting it is reported, not raised.
    init : "uniform" or (P1, P2)
        Starting point. The default is the uniform/round-robin pair from
        :func:`initialize`.
    similarity : array-like of shape (N_G, N_H), optional
        Vertex dissimilarity matrix C. The similarity term adds
        ``lam * tr(C^T P1^T P2)`` to the minimized objective, so C should
        score unlike vertex pairs high. If your C measures likeness
        instead, set ``negate_similarity``.
    negate_similarity : bool
        Use ``-C`` in place of C.
    pins : Pins, optional
        Columns locked to rows; the solve runs on that face.
    seed : int
        Seed consumed by downstream randomized steps (clustering
        projection); the solve itself is deterministic.
    """

    k_max: int = 2
    epsilon: float = 1e-6
    lam: float = 0.0
    mu: float = 0.0
    max_iters: int = 1000
    init: object = "uniform"
    similarity: object = None
    negate_similarity: bool = False
    pins: Pins | None = None
    seed: int = 0

    def __post_init__(self):
        if int(self.k_max) != self.k_max or self.k_max < 1:
            raise ValueError(f"k_max must be a positive integer, got {self.k_max}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lam must lie in [0, 1], got {self.lam}")
        if self.mu < 0:
            raise ValueError(f"mu must be non-negative, got {self.mu}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValueError(f"max_iters must be a positive integer, got {self.max_iters}")
        if self.lam > 0 and self.similarity is None:
            raise ValueError("lam > 0 requires a similarity matrix")
        if self.similarity is not None:
            sim = np.asarray(self.similarity, dtype=float)
            if sim.ndim != 2 or not np.all(np.isfinite(sim)):
                raise ValueError("similarity must be a finite 2-d matrix")


@dataclass
class LineSearchResult:
    alpha: float
    value: float
    stalled: bool


@dataclass
class SolveTrace:
    """Record of one relaxed solve.

    ``objectives[0]`` is the starting value and ``objectives[t]`` the value
    after iteration ``t``; ``alphas``, ``gaps`` and ``stalls`` hold the step
    size, linearized gap ``<grad, P - Q>`` and stall flag of each iteration.
    """

    objectives: list[float]
    alphas: list[float]
    gaps: list[float]
    stalls: list[bool]
    p1: np.ndarray
    p2: np.ndarray
    reason: str

    @property
    def iterations(self) -> int:
        return len(self.alphas)

    @property
    def final_objective(self) -> float:
        return self.objectives[-1]


def _effective_similarity(cfg: SolverConfig):
    if cfg.similarity is None:
        return None
    sim = np.asarray(cfg.similarity, dtype=float)
    return -sim if cfg.negate_similarity else sim


def _objective_arrays(G, H, p1, p2, lam, mu, C) -> float:
    d = p1 @ G @ p1.T - p2 @ H @ p2.T
    value = (1.0 - lam) * float(np.vdot(d, d))
    if lam != 0.0:
        value += lam * float(np.vdot(C, p1.T @ p2))
    if mu != 0.0:
        value -= mu * (float(np.vdot(G, p1.T @ p1)) + float(np.vdot(H, p2.T @ p2)))
    return value


def initialize(n_g: int, n_h: int, cfg: SolverConfig | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Build the default starting point on min(n_g, n_h) cluster rows.

    P1 is the uninformative uniform matrix (every entry ``1/rows``) and P2
    the round-robin binary matrix ``P2[i, j] = 1 iff i == j mod rows``,
    which is the identity when ``n_h`` equals the row count.

    Raises
    ------
    ValueError
        If ``k_max * min(n_g, n_h) < max(n_g, n_h)``, in which case no
        feasible assignment pair exists at all.
    """
    cfg = cfg if cfg is not None else SolverConfig()
    if n_g < 1 or n_h < 1:
        raise ValueError("both graphs must be non-empty")
    rows = min(n_g, n_h)
    if rows * cfg.k_max < max(n_g, n_h):
        raise ValueError(
            f"k_max={cfg.k_max} cannot place {max(n_g, n_h)} vertices on {rows} rows"
        )
    p1 = np.full((rows, n_g), 1.0 / rows)
    p2 = np.zeros((rows, n_h))
    p2[np.arange(n_h) % rows, np.arange(n_h)] = 1.0
    return p1, p2


def objective(g, h, p1, p2, cfg: SolverConfig | None = None) -> float:
    """Evaluate the configured objective at an assignment pair.

    ``g`` and ``h`` may be Graph instances or adjacency arrays; ``p1`` and
    ``p2`` must have matching row counts and one column per vertex. With
    the default config this is exactly the structural term
    ``||P1 G P1^T - P2 H P2^T||_F^2``.
    """
    cfg = cfg if cfg is not None else SolverConfig()
    G = as_adjacency(g, "g")
    H = as_adjacency(h, "h")
    p1, p2 = check_pair_shapes(p1, p2, G.shape[0], H.shape[0])
    C = _effective_similarity(cfg)
    if C is not None and C.shape != (G.shape[0], H.shape[0]):
        raise ValueError(f"similarity must have shape {(G.shape[0], H.shape[0])}, got {C.shape}")
    return _objective_arrays(G, H, p1, p2, cfg.lam, cfg.mu, C)


def _gradient_arrays(G, H, p1, p2, lam, mu, C) -> tuple[np.ndarray, np.ndarray]:
    d = p1 @ G @ p1.T - p2 @ H @ p2.T
    w = 2.0 * (1.0 - lam)
    g1 = w * (d @ p1 @ G.T + d.T @ p1 @ G)
    g2 = -w * (d @ p2 @ H.T + d.T @ p2 @ H)
    if lam != 0.0:
        g1 = g1 + lam * (p2 @ C.T)
        g2 = g2 + lam * (p1 @ C)
    if mu != 0.0:
        g1 = g1 - mu * (p1 @ (G + G.T))
        g2 = g2 - mu * (p2 @ (H + H.T))
    return g1, g2


def gradient(g, h, p1, p2, cfg: SolverConfig | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Partial derivatives of :func:`objective` with respect to (p1, p2)."""
    cfg = cfg if cfg is not None else SolverConfig()
    G = as_adjacency(g, "g")
    H = as_adjacency(h, "h")
    p1, p2 = check_pair_shapes(p1, p2, G.shape[0], H.shape[0])
    C = _effective_similarity(cfg)
    if C is not None and C.shape != (G.shape[0], H.shape[0]):
        raise ValueError(f"similarity must have shape {(G.shape[0], H.shape[0])}, got {C.shape}")
    return _gradient_arrays(G, H, p1, p2, cfg.lam, cfg.mu, C)


def _pin_capacities(rows: int, k_max: int, pinned: dict[int, int]) -> np.ndarray:
    caps = np.full(rows, k_max, dtype=int)
    for r in pinned.values():
        caps[r] -= 1
    if np.any(caps < 0):
        raise ValueError("pins exceed the k_max capacity of some row")
    return caps


def _direction_one_side(grad: np.ndarray, k_max: int, pinned: dict[int, int]) -> np.ndarray:
    rows, n = grad.shape
    q = np.zeros((rows, n))
    for col, r in pinned.items():
        q[r, col] = 1.0
    free = [c for c in range(n) if c not in pinned]
    if free:
        caps = _pin_capacities(rows, k_max, pinned)
        sub, _ = solve_semi_assignment(grad[:, free], caps)
        q[:, free] = sub
    return q


def fw_direction(grad1, grad2, cfg: SolverConfig | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Minimize the linearized objective over the feasible polytope.

    Solves one capacitated semi-assignment per side (the two constraint
    sets are independent, so the joint linear problem decouples) and
    returns integral vertices. Pinned columns are held at their rows.
    """
    cfg = cfg if cfg is not None else SolverConfig()
    grad1 = np.asarray(grad1, dtype=float)
    grad2 = np.asarray(grad2, dtype=float)
    if grad1.shape[0] != grad2.shape[0]:
        raise ValueError("gradient blocks must share their row count")
    pins = cfg.pins if cfg.pins is not None else Pins()
    q1 = _direction_one_side(grad1, cfg.k_max, pins.g_rows)
    q2 = _direction_one_side(grad2, cfg.k_max, pins.h_rows)
    return q1, q2


def _combine(p, q, alpha: float, pinned_cols) -> np.ndarray:
    """Convex combination that keeps pinned columns bitwise exact."""
    out = (1.0 - alpha) * p + alpha * q
    if len(pinned_cols):
        out[:, pinned_cols] = p[:, pinned_cols]
    return out


def line_search(g, h, p1, p2, q1, q2, cfg: SolverConfig | None = None) -> LineSearchResult:
    """Exact step size for the segment from (p1, p2) toward (q1, q2).

    The objective along the segment is a polynomial of degree at most four;
    its coefficients are recovered from five evaluations via a fixed
    Vandermonde solve, the derivative's real roots inside [0, 1] join the
    endpoints as candidates, and every candidate is scored with a fresh
    objective evaluation, so the step never increases the true objective.
    A near-constant polynomial reports ``alpha = 0`` with ``stalled`` set.
    """
    cfg = cfg if cfg is not None else SolverConfig()
    G = as_adjacency(g, "g")
    H = as_adjacency(h, "h")
    C = _effective_similarity(cfg)
    pins = cfg.pins if cfg.pins is not None else Pins()
    cols1 = np.fromiter(pins.g_rows.keys(), dtype=int) if pins.g_rows else np.empty(0, dtype=int)
    cols2 = np.fromiter(pins.h_rows.keys(), dtype=int) if pins.h_rows else np.empty(0, dtype=int)

    def phi(alpha: float) -> float:
        return _objective_arrays(
            G, H, _combine(p1, q1, alpha, cols1), _combine(p2, q2, alpha, cols2), cfg.lam, cfg.mu, C
        )

    values = np.array([phi(a) for a in _NODES])
    scale = float(np.max(np.abs(values))) + 1.0
    coeffs = _VANDER_INV @ values
    deriv = coeffs[1:] * np.array([1.0, 2.0, 3.0, 4.0])
    if float(np.max(np.abs(values - values[0]))) <= 1e-13 * scale:
        return LineSearchResult(alpha=0.0, value=float(values[0]), stalled=True)

    candidates = [0.0, 1.0]
    if np.any(deriv != 0.0):
        for root in np.roots(deriv[::-1]):
            if abs(root.imag) <= 1e-9 * (1.0 + abs(root.real)) and 0.0 < root.real < 1.0:
                candidates.append(float(root.real))

    best_alpha, best_value = 0.0, float(values[0])
    for alpha in sorted(candidates):
        value = float(values[0]) if alpha == 0.0 else (float(values[-1]) if alpha == 1.0 else phi(alpha))
        if value < best_value:
            best_alpha, best_value = alpha, value
    return LineSearchResult(alpha=best_alpha, value=best_value, stalled=best_alpha == 0.0)


def _pin_and_repair(p: np.ndarray, pinned: dict[int, int], k_max: int) -> np.ndarray:
    """Force pinned columns one-hot and restore feasibility of the rest.

    Overloaded rows have their free mass scaled down, and the resulting
    column deficits are refilled from rows with spare capacity. Falls back
    to spreading each free column proportionally to residual capacity when
    the incremental repair cannot close the books.
    """
    rows, n = p.shape
    p = p.copy()
    for col, r in pinned.items():
        p[:, col] = 0.0
        p[r, col] = 1.0
    if not pinned:
        return p

    fixed = np.zeros(rows)
    for r in pinned.values():
        fixed[r] += 1.0
    if np.any(fixed > k_max):
        raise ValueError("pins exceed the k_max capacity of some row")
    free_cols = np.array([c for c in range(n) if c not in pinned], dtype=int)
    if free_cols.size == 0:
        return p

    free = p[:, free_cols]
    free_load = free.sum(axis=1)
    over = fixed + free_load > k_max
    for r in np.flatnonzero(over):
        budget = k_max - fixed[r]
        free[r] *= 0.0 if free_load[r] == 0.0 else budget / free_load[r]

    deficits = 1.0 - free.sum(axis=0)
    room = k_max - fixed - free.sum(axis=1)
    for idx in np.flatnonzero(deficits > 1e-15):
        need = deficits[idx]
        for r in np.argsort(-room, kind="stable"):
            if need <= 1e-15:
                break
            give = min(need, room[r], 1.0 - free[r, idx])
            if give > 0.0:
                free[r, idx] += give
                room[r] -= give
                need -= give
        if need > 1e-12:
            resid = np.maximum(k_max - fixed, 0.0)
            if resid.sum() <= 0:
                raise ValueError("pins leave no capacity for free columns")
            free[:, idx] = resid / resid.sum()
            room = k_max - fixed - free.sum(axis=1)
    p[:, free_cols] = free
    return p


def solve_relaxed(g, h, cfg: SolverConfig | None = None) -> SolveTrace:
    """Run conditional gradient on the relaxed polytope until the move is tiny.

    Starts from ``cfg.init``, repairs it onto the pinned face if pins are
    present, and iterates gradient / direction / exact line search until
    ``|dF| + ||dP1||_F + ||dP2||_F < cfg.epsilon`` or ``cfg.max_iters``.
    The returned trace is non-increasing in its objective values.
    """
    cfg = cfg if cfg is not None else SolverConfig()
    G = as_adjacency(g, "g")
    H = as_adjacency(h, "h")
    n_g, n_h = G.shape[0], H.shape[0]
    if n_g == 0 or n_h == 0:
        raise ValueError("both graphs must be non-empty")
    C = _effective_similarity(cfg)
    if C is not None and C.shape != (n_g, n_h):
        raise ValueError(f"similarity must have shape {(n_g, n_h)}, got {C.shape}")

    if isinstance(cfg.init, str):
        if cfg.init != "uniform":
            raise ValueError(f"unknown init {cfg.init!r}")
        p1, p2 = initialize(n_g, n_h, cfg)
    else:
        p1_in, p2_in = cfg.init
        p1, p2 = check_pair_shapes(np.array(p1_in, dtype=float), np.array(p2_in, dtype=float), n_g, n_h)

    pins = cfg.pins if cfg.pins is not None else Pins()
    if pins.g_rows:
        p1 = _pin_and_repair(p1, pins.g_rows, cfg.k_max)
    if pins.h_rows:
        p2 = _pin_and_repair(p2, pins.h_rows, cfg.k_max)
    cols1 = np.fromiter(pins.g_rows.keys(), dtype=int) if pins.g_rows else np.empty(0, dtype=int)
    cols2 = np.fromiter(pins.h_rows.keys(), dtype=int) if pins.h_rows else np.empty(0, dtype=int)

    value = _objective_arrays(G, H, p1, p2, cfg.lam, cfg.mu, C)
    objectives = [value]
    alphas: list[float] = []
    gaps: list[float] = []
    stalls: list[bool] = []
    reason = "max_iters"

    for _ in range(cfg.max_iters):
        g1, g2 = _gradient_arrays(G, H, p1, p2, cfg.lam, cfg.mu, C)
        q1, q2 = fw_direction(g1, g2, cfg)
        gaps.append(float(np.vdot(g1, p1 - q1) + np.vdot(g2, p2 - q2)))

        step = line_search(G, H, p1, p2, q1, q2, cfg)
        new_p1 = _combine(p1, q1, step.alpha, cols1)
        new_p2 = _combine(p2, q2, step.alpha, cols2)
        move = float(np.linalg.norm(new_p1 - p1) + np.linalg.norm(new_p2 - p2))
        delta = abs(step.value - value)
        p1, p2, value = new_p1, new_p2, step.value
        objectives.append(value)
        alphas.append(step.alpha)
        stalls.append(step.stalled)

        if delta + move < cfg.epsilon:
            reason = "converged"
            break

    return SolveTrace(
        objectives=objectives,
        alphas=alphas,
        gaps=gaps,
        stalls=stalls,
        p1=p1,
        p2=p2,
        reason=reason,
    )
