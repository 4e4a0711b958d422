"""Named sorting methods with their options bundled, as used by the CLI and simulator."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

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
from .holistic import rank_greedy_coverage, rank_seq_pav, rank_seq_phragmen
from .integrated import IntegratedConfig, integrated_rank
from .model import (
    ApprovalProfile,
    EvaluationEvent,
    InspectionStats,
    Proposal,
    RankedList,
    SortContext,
    TieBreak,
)

METHODS = (
    "date",
    "approvals",
    "ratio",
    "active",
    "cost",
    "comments",
    "random",
    "seqpav",
    "seqphragmen",
    "coverage",
    "integrated",
)


@dataclass(frozen=True)
class MethodSpec:
    name: str
    tiebreak: TieBreak = TieBreak.BY_ID
    newest_first: bool = True
    highest_first: bool = True
    prior_approvals: float = 1.0
    prior_total: float = 2.0
    window: float = 3 * 86400.0
    random_policy: RandomPolicy = RandomPolicy.PER_VIEW
    reset_on_saturation: bool = True
    integrated: IntegratedConfig = field(default_factory=IntegratedConfig)

    def __post_init__(self):
        if self.name not in METHODS:
            raise ValueError(f"unknown method {self.name!r}; expected one of {', '.join(METHODS)}")
        object.__setattr__(self, "tiebreak", TieBreak(self.tiebreak))
        object.__setattr__(self, "random_policy", RandomPolicy(self.random_policy))

    @property
    def is_random(self) -> bool:
        return self.name == "random"

    def rank(
        self,
        proposals: Iterable[Proposal],
        profile: ApprovalProfile | None = None,
        events: Sequence[EvaluationEvent] = (),
        inspections: InspectionStats | None = None,
        ctx: SortContext | None = None,
    ) -> RankedList:
        proposals = list(proposals)
        ctx = ctx or SortContext()
        if profile is None:
            profile = ApprovalProfile.from_ballots([p.id for p in proposals], {})
        tb = self.tiebreak
        name = self.name
        if name == "date":
            return sort_by_date(proposals, self.newest_first, tb, ctx=ctx)
        if name == "approvals":
            return sort_by_approvals(profile, proposals, tb, ctx=ctx)
        if name == "ratio":
            return sort_by_ratio(profile, proposals, self.prior_approvals, self.prior_total, tb, ctx=ctx)
        if name == "active":
            return sort_most_active(events, proposals, self.window, ctx.now, tb, ctx=ctx)
        if name == "cost":
            return sort_by_cost(proposals, self.highest_first, tb, ctx=ctx)
        if name == "comments":
            return sort_by_comments(proposals, tb, ctx=ctx)
        if name == "random":
            return random_order(proposals, self.random_policy, ctx)
        if name == "seqpav":
            return rank_seq_pav(profile, proposals, tb, ctx=ctx)
        if name == "seqphragmen":
            return rank_seq_phragmen(profile, proposals, tb, ctx=ctx)
        if name == "coverage":
            return rank_greedy_coverage(profile, proposals, tb, self.reset_on_saturation, ctx=ctx)
        return integrated_rank(
            profile, proposals, inspections or InspectionStats(), self.integrated, tb, ctx=ctx
        )
