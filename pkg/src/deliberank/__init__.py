"""Sorting methods and simulations for proposal lists on deliberation platforms."""

from .baseline import (
    RandomPolicy,
    random_order,
    sort_by_approvals,
    sort_by_comments,
    sort_by_cost,
    sort_by_date,
    sort_by_ratio,
    sort_most_active,
)
from .estimators import (
    ApprovalCountRanker,
    GreedyCoverageRanker,
    IntegratedRanker,
    RatioRanker,
    SeqPAVRanker,
    SeqPhragmenRanker,
)
from .holistic import (
    HolisticMethod,
    exact_coverage_prefix,
    pav_prefix_score,
    rank_greedy_coverage,
    rank_seq_pav,
    rank_seq_phragmen,
)
from .integrated import IntegratedConfig, diversify, exposure_adjusted_score, integrated_rank
from .methods import METHODS, MethodSpec
from .metrics import (
    Geometric,
    TopK,
    attention_gini,
    attention_weights,
    coverage_at_k,
    first_hit_positions,
    proportionality_deviation,
)
from .model import (
    ApprovalProfile,
    EvaluationEvent,
    InspectionStats,
    Proposal,
    RankedList,
    SortContext,
    TieBreak,
    build_profile,
    scenario_s100,
)

__version__ = "0.1.0"
