"""Unsupervised graph purification: score edges, judge candidates, filter
deletions, and retrain on the cleaned graph."""

from .attacks import (
    AttackSpec,
    attack_dice,
    attack_grad_saliency,
    attack_random_insert,
)
from .data import (
    Dataset,
    ResultRow,
    Split,
    load_dataset,
    load_results,
    make_split,
    largest_component,
    save_dataset,
    write_results,
)
from .errors import (
    BudgetInfeasibleError,
    ConfigError,
    DimensionMismatchError,
    DisconnectedError,
    EmptyMaskError,
    GraphPurifyError,
    IndexOutOfRangeError,
    MissingEdgeError,
    MissingFileError,
    NegativeEntryError,
    NonBinaryFeaturesError,
    ParseError,
    RankOutOfRangeError,
    SelfLoopError,
    ZeroProbabilityError,
)
from .gcn import (
    GcnParams,
    TrainConfig,
    TrainHistory,
    accuracy,
    load_model,
    predict,
    save_model,
    train_surrogate,
)
from .graph import (
    Graph,
    WeightedGraph,
    build_graph,
    canonicalize_edges,
    connected_components,
    induced_subgraph,
    minimum_spanning_tree,
    remove_edges,
)
from .judge_filter import (
    DEFAULT_TAU,
    FilterSpec,
    JudgeSpec,
    apply_judge_filter,
    filter_connectivity,
    filter_singleton,
    judge_percentage,
    judge_threshold,
)
from .pipeline import (
    IterationRecord,
    PurifyConfig,
    PurifyReport,
    purify,
)
from .scorers import (
    EdgeScores,
    minmax_normalize,
    node_entropy,
    score_cosine,
    score_entropy,
    score_jaccard,
    score_kld,
    score_svd,
    truncated_svd,
)
from .synth import synthetic_dataset

__version__ = "0.1.0"

__all__ = [
    "AttackSpec",
    "attack_dice",
    "attack_grad_saliency",
    "attack_random_insert",
    "Dataset",
    "ResultRow",
    "Split",
    "load_dataset",
    "load_results",
    "make_split",
    "largest_component",
    "save_dataset",
    "write_results",
    "BudgetInfeasibleError",
    "ConfigError",
    "DimensionMismatchError",
    "DisconnectedError",
    "EmptyMaskError",
    "GraphPurifyError",
    "IndexOutOfRangeError",
    "MissingEdgeError",
    "MissingFileError",
    "NegativeEntryError",
    "NonBinaryFeaturesError",
    "ParseError",
    "RankOutOfRangeError",
    "SelfLoopError",
    "ZeroProbabilityError",
    "GcnParams",
    "TrainConfig",
    "TrainHistory",
    "accuracy",
    "load_model",
    "predict",
    "save_model",
    "train_surrogate",
    "Graph",
    "WeightedGraph",
    "build_graph",
    "canonicalize_edges",
    "connected_components",
    "induced_subgraph",
    "minimum_spanning_tree",
    "remove_edges",
    "DEFAULT_TAU",
    "FilterSpec",
    "JudgeSpec",
    "apply_judge_filter",
    "filter_connectivity",
    "filter_singleton",
    "judge_percentage",
    "judge_threshold",
    "IterationRecord",
    "PurifyConfig",
    "PurifyReport",
    "purify",
    "EdgeScores",
    "minmax_normalize",
    "node_entropy",
    "score_cosine",
    "score_entropy",
    "score_jaccard",
    "score_kld",
    "score_svd",
    "truncated_svd",
    "synthetic_dataset",
    "__version__",
]
