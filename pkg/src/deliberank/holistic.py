"""Holistic list construction: proportional and coverage-maximising rankings.

Each position depends on the set of proposals already placed above it, so all
rules here build the list greedily from the top. Scores of the proportional
rules are exact rationals; tie-breaking never depends on float rounding.

The greedy loops use lazy evaluation. PAV marginals and coverage gains only
shrink as the list grows and Phragmén candidate loads only grow, so a stale
heap entry is always an optimistic bound and an entry that still beats the
heap top after re-evaluation is the true optimum.
"""

from __future__ import annotations

import enum
import heapq
import itertools
from collections import Counter
from fractions import Fraction
from typing import Iterable, Sequence

from .model import ApprovalProfile, Proposal, RankedList, SortContext, TieBreak, index_proposals

try:
    from gmpy2 import mpq as _rational
except ImportError:
    _rational = Fraction

__all__ = [
    "HolisticMethod",
    "rank_seq_pav",
    "rank_seq_phragmen",
    "rank_greedy_coverage",
    "rank_holistic",
    "exact_coverage_prefix",
    "pav_prefix_score",
    "pav_marginal",
    "EXACT_MAX_PROPOSALS",
    "EXACT_MAX_K",
]

EXACT_MAX_PROPOSALS = 20
EXACT_MAX_K = 6


class HolisticMethod(enum.Enum):
    SEQ_PAV = "seqpav"
    SEQ_PHRAGMEN = "seqphragmen"
    GREEDY_COVERAGE = "coverage"


def _prepare(profile: ApprovalProfile, proposals: Iterable[Proposal], tiebreak: TieBreak):
    ps = index_proposals(proposals)
    ranked = sorted(ps.values(), key=tiebreak.key)
    tie_rank = {p.id: i for i, p in enumerate(ranked)}
    approvers = {pid: profile.approvers.get(pid, frozenset()) for pid in ps}
    return tie_rank, approvers


def _result(order, method, ctx):
    return RankedList(
        order=tuple(order),
        method=method,
        seed=ctx.seed if ctx else None,
        context=ctx.summary() if ctx else None,
        produced_at=ctx.now if ctx else None,
    )


def pav_marginal(voters: Iterable[str], satisfaction: dict[str, int]) -> Fraction:
    """Sum of 1/(1+k) over ``voters``, where k is each voter's satisfaction."""
    counts = Counter(satisfaction.get(u, 0) for u in voters)
    return sum((Fraction(c, k + 1) for k, c in counts.items()), Fraction(0))


def rank_seq_pav(
    profile: ApprovalProfile,
    proposals: Iterable[Proposal],
    tiebreak: TieBreak = TieBreak.BY_ID,
    ctx: SortContext | None = None,
) -> RankedList:
    tie_rank, approvers = _prepare(profile, proposals, tiebreak)
    satisfaction: dict[str, int] = {}
    heap = [(-Fraction(len(approvers[p])), tie_rank[p], p, 0) for p in approvers]
    heapq.heapify(heap)
    order: list[str] = []
    while heap:
        neg, rank, pid, stamp = heapq.heappop(heap)
        if stamp != len(order):
            fresh = -pav_marginal(approvers[pid], satisfaction)
            if heap and (fresh, rank) > heap[0][:2]:
                heapq.heappush(heap, (fresh, rank, pid, len(order)))
                continue
        order.append(pid)
        for u in approvers[pid]:
            satisfaction[u] = satisfaction.get(u, 0) + 1
    return _result(order, "seqpav", ctx)


def rank_seq_phragmen(
    profile: ApprovalProfile,
    proposals: Iterable[Proposal],
    tiebreak: TieBreak = TieBreak.BY_ID,
    ctx: SortContext | None = None,
) -> RankedList:
    """Sequential Phragmén: place the proposal whose approvers end up with the
    lowest equalised load after jointly paying one unit for it."""
    tie_rank, approvers = _prepare(profile, proposals, tiebreak)
    zero = _rational(0)
    load: dict[str, object] = {}
    approved = [p for p in approvers if approvers[p]]
    # spent[p]: current total load of p's approvers, kept exact incrementally
    spent = {p: zero for p in approved}

    def candidate_load(pid):
        return (1 + spent[pid]) / len(approvers[pid])

    heap = [(candidate_load(p), tie_rank[p], p) for p in approved]
    heapq.heapify(heap)
    order: list[str] = []
    while heap:
        value, rank, pid = heapq.heappop(heap)
        if pid not in spent:
            continue
        current = candidate_load(pid)
        if current != value:
            heapq.heappush(heap, (current, rank, pid))
            continue
        order.append(pid)
        del spent[pid]
        for u in approvers[pid]:
            delta = value - load.get(u, zero)
            load[u] = value
            for q in profile.approved_by_user.get(u, ()):
                if q in spent:
                    spent[q] += delta
    order.extend(sorted((p for p in approvers if not approvers[p]), key=tie_rank.__getitem__))
    return _result(order, "seqphragmen", ctx)


def rank_greedy_coverage(
    profile: ApprovalProfile,
    proposals: Iterable[Proposal],
    tiebreak: TieBreak = TieBreak.BY_ID,
    reset_on_saturation: bool = True,
    ctx: SortContext | None = None,
) -> RankedList:
    """Greedy maximum coverage, one list position at a time.

    Ties on newly covered users go to the proposal with more approvers, then
    to ``tiebreak``. Once no remaining proposal covers anybody new, either the
    covered set is emptied and a new layer starts (``reset_on_saturation``),
    or the rest follows by approval count.
    """
    tie_rank, approvers = _prepare(profile, proposals, tiebreak)
    remaining = set(approvers)
    covered: set[str] = set()
    order: list[str] = []

    def build_heap():
        h = [(-len(approvers[p]), -len(approvers[p]), tie_rank[p], p, len(order)) for p in remaining]
        heapq.heapify(h)
        return h

    heap = build_heap()
    while heap:
        neg, neg_size, rank, pid, stamp = heapq.heappop(heap)
        if stamp != len(order):
            neg = -len(approvers[pid] - covered)
            if heap and (neg, neg_size, rank) > heap[0][:3]:
                heapq.heappush(heap, (neg, neg_size, rank, pid, len(order)))
                continue
        if neg == 0:
            # saturated: nobody left to cover with the remaining proposals
            if reset_on_saturation and covered:
                covered.clear()
                heap = build_heap()
                continue
            order.extend(sorted(remaining, key=lambda p: (-len(approvers[p]), tie_rank[p])))
            break
        order.append(pid)
        remaining.discard(pid)
        covered |= approvers[pid]
    return _result(order, "coverage", ctx)


def rank_holistic(
    method: HolisticMethod,
    profile: ApprovalProfile,
    proposals: Iterable[Proposal],
    tiebreak: TieBreak = TieBreak.BY_ID,
    ctx: SortContext | None = None,
) -> RankedList:
    method = HolisticMethod(method)
    if method is HolisticMethod.SEQ_PAV:
        return rank_seq_pav(profile, proposals, tiebreak, ctx=ctx)
    if method is HolisticMethod.SEQ_PHRAGMEN:
        return rank_seq_phragmen(profile, proposals, tiebreak, ctx=ctx)
    return rank_greedy_coverage(profile, proposals, tiebreak, ctx=ctx)


def exact_coverage_prefix(
    profile: ApprovalProfile,
    proposals: Iterable[Proposal],
    k: int,
) -> tuple[frozenset, int]:
    """Best size-``k`` set by exhaustive enumeration (small instances only)."""
    ids = sorted(index_proposals(proposals))
    if len(ids) > EXACT_MAX_PROPOSALS or k > EXACT_MAX_K:
        raise ValueError(
            f"exact coverage is limited to {EXACT_MAX_PROPOSALS} proposals and "
            f"k <= {EXACT_MAX_K}; got {len(ids)} proposals and k={k}"
        )
    if k < 0:
        raise ValueError("k must be non-negative")
    k = min(k, len(ids))
    best, best_value = frozenset(), -1
    for combo in itertools.combinations(ids, k):
        value = len(set().union(*(profile.approvers.get(p, ()) for p in combo)))
        if value > best_value:
            best, best_value = frozenset(combo), value
    return best, best_value


def pav_prefix_score(profile: ApprovalProfile, prefix: Sequence[str]) -> Fraction:
    """PAV objective of a list prefix: sum over users of H(#approved in prefix)."""
    if len(set(prefix)) != len(prefix):
        raise ValueError("prefix contains duplicate proposal ids")
    hits = Counter(u for p in prefix for u in profile.approvers.get(p, ()))
    total = Fraction(0)
    for k in hits.values():
        total += sum((Fraction(1, j) for j in range(1, k + 1)), Fraction(0))
    return total
