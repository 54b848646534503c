"""Many-to-many graph matching via conditional gradient over cluster assignments."""

__version__ = "0.1.0"

from .assignment import hungarian, solve_semi_assignment
from .baselines import BeamConfig, SpectralConfig, beam_match, spectral_match
from .bench import (
    CSV_HEADER,
    BenchmarkRecord,
    LabelTransferScore,
    fit_time_slopes,
    read_records_csv,
    run_experiment_a,
    run_experiment_b,
    run_experiment_c,
    run_method,
    score_label_transfer,
)
from .graph import Graph, GraphFormatError, format_graph, parse_graph, permute, read_graph, write_graph
from .matchers import BeamMatcher, GradMatcher, SpectralMatcher
from .matching import Matching, parse_matching, read_matching, serialize_matching, write_matching
from .projection import brute_force_optimum, column_similarity, project_by_clustering, project_incremental
from .solver import (
    LineSearchResult,
    Pins,
    SolveTrace,
    SolverConfig,
    fw_direction,
    gradient,
    initialize,
    line_search,
    objective,
    solve_relaxed,
)
from .synthetic import GroundTruth, SyntheticConfig, generate_pair

__all__ = [
    "Graph",
    "GraphFormatError",
    "parse_graph",
    "format_graph",
    "read_graph",
    "write_graph",
    "permute",
    "SyntheticConfig",
    "GroundTruth",
    "generate_pair",
    "hungarian",
    "solve_semi_assignment",
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
    "Matching",
    "serialize_matching",
    "parse_matching",
    "read_matching",
    "write_matching",
    "column_similarity",
    "project_by_clustering",
    "project_incremental",
    "brute_force_optimum",
    "SpectralConfig",
    "BeamConfig",
    "spectral_match",
    "beam_match",
    "GradMatcher",
    "SpectralMatcher",
    "BeamMatcher",
    "BenchmarkRecord",
    "LabelTransferScore",
    "CSV_HEADER",
    "score_label_transfer",
    "run_method",
    "run_experiment_a",
    "run_experiment_b",
    "run_experiment_c",
    "fit_time_slopes",
    "read_records_csv",
    "__version__",
]
