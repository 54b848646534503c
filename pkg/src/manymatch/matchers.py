"""Estimator-style facade over the matching pipelines.

Each matcher follows the scikit-learn convention: hyperparameters are
constructor arguments stored verbatim, ``fit(g, h)`` computes a matching
for one graph pair and exposes it through trailing-underscore
attributes, and ``get_params``/``set_params`` work for grid search and
cloning. ``g`` and ``h`` may be :class:`~manymatch.graph.Graph`
instances or square adjacency arrays.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator

from .baselines import BeamConfig, SpectralConfig, beam_match, spectral_match
from .projection import project_by_clustering, project_incremental
from .solver import SolverConfig, solve_relaxed

__all__ = ["GradMatcher", "SpectralMatcher", "BeamMatcher"]


class GradMatcher(BaseEstimator):
    """Relax-and-project matcher: conditional-gradient descent, then discretization.

    Parameters
    ----------
    k_max : per-graph capacity of every cluster.
    epsilon : stop when objective and iterate movement fall below this.
    lam : weight of the vertex-similarity term (requires ``similarity``).
    mu : weight of the neighbor-merging reward.
    max_iters : iteration cap per relaxed solve.
    projection : "incremental" (pin and re-solve) or "clustering" (k-means
        on relaxed columns).
    n_starts : number of seeded starts for the incremental projection.
    similarity : optional vertex-pair similarity matrix, shape (N_G, N_H).
    negate_similarity : flip the sign convention of ``similarity``.
    seed : seed for every randomized sub-step.

    Attributes
    ----------
    matching_ : the discretized :class:`~manymatch.matching.Matching`.
    objective_ : its exact objective value.
    traces_ : solver traces along the committed solve path.
    n_iter_ : total relaxed iterations across those traces.
    """

    def __init__(
        self,
        k_max: int = 2,
        epsilon: float = 1e-6,
        lam: float = 0.0,
        mu: float = 0.0,
        max_iters: int = 1000,
        projection: str = "incremental",
        n_starts: int = 3,
        similarity=None,
        negate_similarity: bool = False,
        seed: int = 0,
    ):
        self.k_max = k_max
        self.epsilon = epsilon
        self.lam = lam
        self.mu = mu
        self.max_iters = max_iters
        self.projection = projection
        self.n_starts = n_starts
        self.similarity = similarity
        self.negate_similarity = negate_similarity
        self.seed = seed

    def fit(self, g, h):
        """Match the pair (g, h) and store the result on the estimator."""
        if self.projection not in ("incremental", "clustering"):
            raise ValueError(f"projection must be 'incremental' or 'clustering', got {self.projection!r}")
        cfg = SolverConfig(
            k_max=self.k_max,
            epsilon=self.epsilon,
            lam=self.lam,
            mu=self.mu,
            max_iters=self.max_iters,
            similarity=self.similarity,
            negate_similarity=self.negate_similarity,
            seed=self.seed,
        )
        sink: list = []
        if self.projection == "incremental":
            matching = project_incremental(g, h, cfg, trace_sink=sink, n_starts=self.n_starts)
        else:
            trace = solve_relaxed(g, h, cfg)
            sink.append(trace)
            matching = project_by_clustering(g, h, trace.p1, trace.p2, cfg)
        self.matching_ = matching
        self.objective_ = matching.objective
        self.traces_ = sink
        self.n_iter_ = sum(t.iterations for t in sink)
        return self


class SpectralMatcher(BaseEstimator):
    """Baseline matcher clustering pooled spectral embeddings of both graphs.

    Parameters mirror :class:`~manymatch.baselines.SpectralConfig`; see
    :func:`~manymatch.baselines.spectral_match` for the algorithm.

    Attributes
    ----------
    matching_ : the resulting :class:`~manymatch.matching.Matching`.
    objective_ : its exact structural objective value.
    """

    def __init__(self, num_eigenvectors: int = 2, n_clusters: int | None = None, k_max: int = 2):
        self.num_eigenvectors = num_eigenvectors
        self.n_clusters = n_clusters
        self.k_max = k_max

    def fit(self, g, h):
        """Match the pair (g, h) and store the result on the estimator."""
        cfg = SpectralConfig(
            num_eigenvectors=self.num_eigenvectors,
            n_clusters=self.n_clusters,
            k_max=self.k_max,
        )
        self.matching_ = spectral_match(g, h, cfg)
        self.objective_ = self.matching_.objective
        return self


class BeamMatcher(BaseEstimator):
    """Baseline matcher building clusters vertex-by-vertex under a beam.

    Parameters mirror :class:`~manymatch.baselines.BeamConfig`; see
    :func:`~manymatch.baselines.beam_match` for the move set.

    Attributes
    ----------
    matching_ : the resulting :class:`~manymatch.matching.Matching`.
    objective_ : its exact structural objective value.
    """

    def __init__(
        self,
        beam_width: int | float = 3,
        k_max: int = 2,
        match_cost: float = 0.0,
        merge_cost: float = 0.0,
    ):
        self.beam_width = beam_width
        self.k_max = k_max
        self.match_cost = match_cost
        self.merge_cost = merge_cost

    def fit(self, g, h):
        """Match the pair (g, h) and store the result on the estimator."""
        cfg = BeamConfig(
            beam_width=self.beam_width,
            k_max=self.k_max,
            match_cost=self.match_cost,
            merge_cost=self.merge_cost,
        )
        self.matching_ = beam_match(g, h, cfg)
        self.objective_ = self.matching_.objective
        return self
