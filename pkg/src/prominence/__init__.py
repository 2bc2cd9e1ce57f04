"""Node prominence profiles and future degree-centrality prediction on temporal graphs."""

from .census import (
    NppVector,
    balance_rate,
    npp_census,
    position_conditional_prob,
    triad_evolution_rate,
    triangles_per_node,
)
from .centrality import CentralityScores, compute_centrality
from .cohort import FEATURE_SETS, build_cohort, label_nodes
from .evaluate import aupr, auroc, transfer_matrix
from .influence import average_action_delay, detect_influence_events, event_distribution, link_actions
from .learn import Dataset, bagging_train, predict_proba, standardize, train_logistic, wald_test
from .tgraph import (
    GraphSnapshot,
    TemporalGraph,
    cohort_join,
    induced_subgraph,
    ingest_edge_stream,
    snapshot_at,
)

__version__ = "0.1.0"

__all__ = [
    "CentralityScores",
    "Dataset",
    "FEATURE_SETS",
    "GraphSnapshot",
    "NppVector",
    "TemporalGraph",
    "aupr",
    "auroc",
    "average_action_delay",
    "bagging_train",
    "balance_rate",
    "build_cohort",
    "cohort_join",
    "compute_centrality",
    "detect_influence_events",
    "event_distribution",
    "induced_subgraph",
    "ingest_edge_stream",
    "label_nodes",
    "link_actions",
    "npp_census",
    "position_conditional_prob",
    "predict_proba",
    "snapshot_at",
    "standardize",
    "train_logistic",
    "transfer_matrix",
    "triad_evolution_rate",
    "triangles_per_node",
    "wald_test",
]
