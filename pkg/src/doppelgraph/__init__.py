"""doppelgraph: degree-preserving look-alike graph generation.

Given a single undirected graph, learn node embeddings and a link
predictor, model the embedding distribution with a WGAN-GP, and realize the
original degree sequence on freshly sampled nodes with a probability-guided
greedy algorithm.  Ships with a full graph-statistics suite and classical
baseline generators.
"""

from .graph import (
    ContractViolation,
    DegreeSequence,
    EdgeListParseError,
    Graph,
    degree_sequence,
    edge_overlap,
    from_edge_list,
    identity_correspondence,
    is_graphic,
    largest_connected_component,
    read_edge_list,
    to_edge_list,
    write_edge_list,
)
from .metrics import (
    GLOBAL_METRICS,
    MMD_METRICS,
    PropertyReport,
    characteristic_path_length,
    claw_count,
    degree_distribution,
    gini_coefficient,
    global_clustering_coefficient,
    lcc_size,
    local_clustering_distribution,
    local_square_clustering_distribution,
    mmd,
    powerlaw_exponent,
    powerlaw_exponent_of_degrees,
    property_report,
    relative_edge_distribution_entropy,
    report_distance,
    square_count,
    triangle_count,
    wedge_count,
)
from .realization import (
    ConstantOracle,
    MatrixOracle,
    NonGraphicSequenceError,
    RealizationResult,
    RealizationTrace,
    assign_degree_sequence,
    havel_hakimi,
    improved_hh,
    initial_graph_from_predictor,
)
from .embedding import (
    CyclingSchedule,
    LinkPredictionEncoder,
    LinkPredictor,
    evaluate_predictor,
    oracle_from,
    predict_link,
)
from .gan import (
    EmbeddingGan,
    distance_cdf_ks,
    embedding_mmd,
    pairwise_distance_cdf,
    sample_embeddings,
)
from .baselines import RewiringFailure, ba_graph, chung_lu, conf_model, er_graph
from .pipeline import DoppelgangerGraphGenerator, DoppelgangerSample
from ._util import derive_seed

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
