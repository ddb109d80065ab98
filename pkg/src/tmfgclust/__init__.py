"""tmfgclust: parallel TMFG construction and DBHT hierarchical clustering.

Build a Triangular Maximally Filtered Graph from a similarity matrix,
cluster it with the directed-bubble-hierarchy-tree method over exact or
hub-approximated shortest-path distances, and score the result with the
Adjusted Rand Index.
"""

from .apsp import (
    ApspParams,
    DistanceOracle,
    ExactOracle,
    HubOracle,
    WeightedTmfg,
    apsp_exact,
    apsp_hub,
    query,
    to_weighted,
)
from .dbht import (
    BubbleAssignment,
    BubbleTree,
    DirectedBubbleTree,
    assign_vertices,
    build_bubble_tree,
    build_hierarchy,
    converging_bubbles,
    orient_edges,
)
from .datasets import generate_cbf, generate_class_dataset, write_ucr
from .linkage import Dendrogram, complete_linkage, cut, load_dendrogram, save_dendrogram
from .metrics import ari, edge_sum_delta
from .pipeline import PipelineConfig, RunReport, StageError, compare_variants, run_pipeline
from .simmatrix import (
    Dataset,
    DataError,
    SortedNeighborLists,
    load_matrix,
    load_ucr_dataset,
    pearson_similarity,
    save_matrix,
    sort_neighbor_lists,
)
from .tmfg import (
    BuildConfig,
    TmfgGraph,
    TmfgState,
    build_tmfg,
    build_tmfg_corr,
    build_tmfg_exact,
    build_tmfg_heap,
    edge_sum,
    gain,
    load_tmfg,
    refresh_max_corr,
    replay_trace,
    save_tmfg,
    select_initial_clique,
)

__version__ = "0.1.0"

__all__ = [
    "ApspParams", "BubbleAssignment", "BubbleTree", "BuildConfig", "Dataset",
    "DataError", "Dendrogram", "DirectedBubbleTree", "DistanceOracle",
    "ExactOracle", "HubOracle", "PipelineConfig", "RunReport",
    "SortedNeighborLists", "StageError", "TmfgGraph", "TmfgState",
    "WeightedTmfg", "apsp_exact", "apsp_hub", "ari", "assign_vertices",
    "build_bubble_tree", "build_hierarchy", "build_tmfg", "build_tmfg_corr",
    "build_tmfg_exact", "build_tmfg_heap", "compare_variants",
    "complete_linkage", "converging_bubbles", "cut", "edge_sum",
    "edge_sum_delta", "gain", "generate_cbf", "generate_class_dataset",
    "load_dendrogram", "load_matrix", "load_tmfg", "load_ucr_dataset",
    "orient_edges", "pearson_similarity", "query", "refresh_max_corr",
    "replay_trace", "run_pipeline", "save_dendrogram", "save_matrix",
    "save_tmfg", "select_initial_clique", "sort_neighbor_lists",
    "to_weighted", "write_ucr",
]
