"""Mini-bucket heuristics for MPE search in belief networks."""

from .elimination import AugmentedBuckets, MemoryLimitError, approx_mpe, elim_mpe
from .generators import (
    CodingSpec,
    NoisyOrSpec,
    bit_error_rate,
    gen_coding,
    gen_noisy_or,
    random_network,
)
from .heuristic import build_tables, child_scores, extend_score
from .network import (
    NEG_INF,
    BeliefNetwork,
    Evidence,
    Factor,
    NetworkError,
    ParseError,
    joint_log_probability,
    parse_evidence,
    parse_network,
    serialize_evidence,
    serialize_network,
)
from .oracle import brute_force_mpe
from .ordering import MoralGraph, Ordering, induced_width, min_degree_ordering, moralize
from .propagation import build_factor_graph, ibp
from .search import SearchConfig, SearchResult, Status, bbmb, bfmb, preprocess

__all__ = [
    "AugmentedBuckets", "BeliefNetwork", "CodingSpec", "Evidence", "Factor",
    "MemoryLimitError", "MoralGraph", "NEG_INF", "NetworkError", "NoisyOrSpec",
    "Ordering", "ParseError", "SearchConfig", "SearchResult", "Status",
    "approx_mpe", "bbmb", "bfmb", "bit_error_rate", "brute_force_mpe",
    "build_factor_graph", "build_tables", "child_scores", "elim_mpe", "extend_score",
    "gen_coding", "gen_noisy_or", "ibp", "induced_width", "joint_log_probability",
    "min_degree_ordering", "moralize", "parse_evidence", "parse_network",
    "preprocess", "random_network", "serialize_evidence", "serialize_network",
]
