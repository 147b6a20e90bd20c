"""Query-efficient learners for hidden hypergraphs behind an edge-detecting oracle."""

from .bounds import (
    ProgramParams,
    canonical_p,
    estimate_unique_containment,
    f_bullet,
    failure_bound,
    lp_bullet,
    verify_inequality_chain,
)
from .core import (
    BudgetRefusedError,
    Edge,
    EdgeOracle,
    Hypergraph,
    LearnOutcome,
    LedgerSnapshot,
    QueryLedger,
    RoundLimitExceeded,
    is_unique_edge_cover,
)
from .generators import (
    GenerationError,
    LowDegreeSpec,
    MatchingSpec,
    gen_low_degree,
    gen_matching,
)
from .hardness import (
    THREE_PART,
    TOWER,
    ThreePartInstance,
    TowerInstance,
    gen_three_part,
    gen_tower,
    indistinguishability_experiment,
    round_limited_attack,
    tower_factor,
)
from .lowdeg import LowDegreeParams, find_low_degree_edges, plan_budget
from .matching import (
    SubroutineKind,
    default_alpha,
    find_disjoint_edges,
    find_edge_adaptive,
    find_edge_parallel,
    find_matching,
    find_singletons,
    quantized_probability,
)
from .reference import brute_force_learn

__version__ = "0.1.0"

__all__ = [
    "BudgetRefusedError",
    "Edge",
    "EdgeOracle",
    "GenerationError",
    "Hypergraph",
    "LearnOutcome",
    "LedgerSnapshot",
    "LowDegreeParams",
    "LowDegreeSpec",
    "MatchingSpec",
    "ProgramParams",
    "QueryLedger",
    "RoundLimitExceeded",
    "SubroutineKind",
    "THREE_PART",
    "TOWER",
    "ThreePartInstance",
    "TowerInstance",
    "brute_force_learn",
    "canonical_p",
    "default_alpha",
    "estimate_unique_containment",
    "f_bullet",
    "failure_bound",
    "find_disjoint_edges",
    "find_edge_adaptive",
    "find_edge_parallel",
    "find_low_degree_edges",
    "find_matching",
    "find_singletons",
    "gen_low_degree",
    "gen_matching",
    "gen_three_part",
    "gen_tower",
    "indistinguishability_experiment",
    "is_unique_edge_cover",
    "lp_bullet",
    "plan_budget",
    "quantized_probability",
    "round_limited_attack",
    "tower_factor",
    "verify_inequality_chain",
]
