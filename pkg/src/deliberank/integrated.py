"""Approval ranking that accounts for exposure, content and authorship."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable

from .holistic import HolisticMethod, rank_holistic
from .model import (
    ApprovalProfile,
    InspectionStats,
    Proposal,
    RankedList,
    SortContext,
    TieBreak,
    index_proposals,
)

__all__ = [
    "APPROVAL_COUNT",
    "EXPLORATION_SHARE",
    "IntegratedConfig",
    "exposure_adjusted_score",
    "integrated_rank",
    "diversify",
]

logger = logging.getLogger(__name__)

APPROVAL_COUNT = "approvals"
EXPLORATION_SHARE = 0.25


@dataclass(frozen=True)
class IntegratedConfig:
    """Parameters of :func:`integrated_rank`.

    ``base`` is a :class:`HolisticMethod` or ``"approvals"``, which ranks by
    the exposure-adjusted score. ``author_cap=None`` disables the author
    constraint.
    """

    min_views: int = 10
    z: float = 1.96
    base: object = APPROVAL_COUNT
    tag_window: int = 1
    author_cap: int | None = None

    def __post_init__(self):
        if self.min_views < 0:
            raise ValueError("min_views must be non-negative")
        if not self.z > 0:
            raise ValueError("z must be positive")
        if self.tag_window < 1:
            raise ValueError("tag_window must be >= 1")
        if self.author_cap is not None and self.author_cap < 1:
            raise ValueError("author_cap must be >= 1")
        if self.base != APPROVAL_COUNT:
            object.__setattr__(self, "base", HolisticMethod(self.base))


def exposure_adjusted_score(approvals: int, views: int, z: float = 1.96) -> float:
    """Wilson lower confidence bound of the approval rate per view.

    Returns 0 without views. Approvals exceeding views are treated as data
    lag: views is raised to the approval count and a warning is logged.
    """
    if not z > 0:
        raise ValueError(f"z must be positive, got {z!r}")
    if approvals < 0 or views < 0:
        raise ValueError("approvals and views must be non-negative")
    if approvals > views:
        logger.warning("approvals (%d) exceed views (%d); clamping views", approvals, views)
        views = approvals
    if views == 0:
        return 0.0
    n = views
    phat = approvals / n
    z2 = z * z
    centre = phat + z2 / (2 * n)
    spread = z * math.sqrt(phat * (1 - phat) / n + z2 / (4 * n * n))
    return max(0.0, (centre - spread) / (1 + z2 / n))


def diversify(
    ranked: RankedList | Iterable[str],
    proposals: Iterable[Proposal],
    tag_window: int = 1,
    author_cap: int | None = None,
) -> RankedList:
    """Greedy re-ordering that spreads primary tags and authors out.

    At each position, take the best remaining proposal whose primary tag is
    not among the previous ``tag_window - 1`` picks and whose author would
    not exceed ``author_cap`` picks in that span. If nobody qualifies, drop
    the tag rule, then the author rule.
    """
    if tag_window < 1:
        raise ValueError("tag_window must be >= 1")
    if author_cap is not None and author_cap < 1:
        raise ValueError("author_cap must be >= 1")
    ps = index_proposals(proposals)
    remaining = list(ranked)
    method = ranked.method if isinstance(ranked, RankedList) else "custom"
    span = tag_window - 1
    out: list[str] = []
    while remaining:
        recent = [ps[p] for p in out[len(out) - span:]] if span else []
        recent_tags = {p.primary_tag for p in recent} - {None}
        authors = {}
        for p in recent:
            authors[p.author] = authors.get(p.author, 0) + 1

        def tag_ok(pid):
            return ps[pid].primary_tag not in recent_tags

        def author_ok(pid):
            return author_cap is None or authors.get(ps[pid].author, 0) + 1 <= author_cap

        pick = next((p for p in remaining if tag_ok(p) and author_ok(p)), None)
        if pick is None:
            pick = next((p for p in remaining if author_ok(p)), remaining[0])
        remaining.remove(pick)
        out.append(pick)
    if isinstance(ranked, RankedList):
        return RankedList(out, method, ranked.seed, ranked.context, ranked.produced_at)
    return RankedList(out, method)


def _interleave(ranked: list[str], explore: list[str], share: float) -> list[str]:
    step = math.ceil(1 / share)
    out: list[str] = []
    ranked, explore = list(ranked), list(explore)
    while ranked or explore:
        if explore and (not ranked or (len(out) + 1) % step == 0):
            out.append(explore.pop(0))
        else:
            out.append(ranked.pop(0))
    return out


def integrated_rank(
    profile: ApprovalProfile,
    proposals: Iterable[Proposal],
    inspections: InspectionStats,
    cfg: IntegratedConfig = IntegratedConfig(),
    tiebreak: TieBreak = TieBreak.BY_ID,
    ctx: SortContext | None = None,
) -> RankedList:
    """Rank well-inspected proposals, then interleave the under-inspected ones.

    Proposals with at least ``cfg.min_views`` views are ranked by
    ``cfg.base`` and diversified. The rest are ordered by fewest views and
    fill every fourth position, so no proposal is starved of attention.
    """
    ps = index_proposals(proposals)
    views = {pid: inspections[pid] for pid in ps}
    inspected = [p for pid, p in ps.items() if views[pid] >= cfg.min_views]
    under = [p for pid, p in ps.items() if views[pid] < cfg.min_views]

    if cfg.base == APPROVAL_COUNT:
        def key(p):
            return (-exposure_adjusted_score(profile.n_approvals(p.id), views[p.id], cfg.z), tiebreak.key(p))

        ranked = [p.id for p in sorted(inspected, key=key)]
    else:
        ranked = list(rank_holistic(cfg.base, profile, inspected, tiebreak))
    ranked = list(diversify(ranked, inspected, cfg.tag_window, cfg.author_cap))
    explore = [p.id for p in sorted(under, key=lambda p: (views[p.id], tiebreak.key(p)))]
    order = _interleave(ranked, explore, EXPLORATION_SHARE)
    base = cfg.base if cfg.base == APPROVAL_COUNT else cfg.base.value
    return RankedList(
        order=tuple(order),
        method=f"integrated:{base}",
        seed=ctx.seed if ctx else None,
        context=ctx.summary() if ctx else None,
        produced_at=ctx.now if ctx else None,
    )
