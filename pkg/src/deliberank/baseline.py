"""Single-parameter sorting methods found on deliberation platforms."""

from __future__ import annotations

import enum
import hashlib
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .model import (
    ApprovalProfile,
    EvaluationEvent,
    Proposal,
    RankedList,
    SortContext,
    TieBreak,
    index_proposals,
)

__all__ = [
    "RandomPolicy",
    "derive_seed",
    "sort_by_date",
    "sort_by_approvals",
    "sort_by_ratio",
    "sort_most_active",
    "sort_by_cost",
    "sort_by_comments",
    "random_order",
]


class RandomPolicy(enum.Enum):
    PER_VIEW = "per-view"
    PER_SESSION = "per-session"
    DAILY_SHARED = "daily"


def _ranked(order, method, ctx: SortContext | None, seed=None) -> RankedList:
    return RankedList(
        order=tuple(order),
        method=method,
        seed=seed if seed is not None else (ctx.seed if ctx else None),
        context=ctx.summary() if ctx else None,
        produced_at=ctx.now if ctx else None,
    )


def _sorted_ids(proposals: Iterable[Proposal], key) -> list[str]:
    ps = index_proposals(proposals).values()
    return [p.id for p in sorted(ps, key=key)]


def sort_by_date(
    proposals: Iterable[Proposal],
    newest_first: bool = True,
    tiebreak: TieBreak = TieBreak.BY_ID,
    ctx: SortContext | None = None,
) -> RankedList:
    sign = -1 if newest_first else 1
    order = _sorted_ids(proposals, lambda p: (sign * p.submitted_at, tiebreak.key(p)))
    return _ranked(order, "date", ctx)


def sort_by_approvals(
    profile: ApprovalProfile,
    proposals: Iterable[Proposal],
    tiebreak: TieBreak = TieBreak.BY_ID,
    ctx: SortContext | None = None,
) -> RankedList:
    order = _sorted_ids(proposals, lambda p: (-profile.n_approvals(p.id), tiebreak.key(p)))
    return _ranked(order, "approvals", ctx)


def ratio_score(approvals: int, disapprovals: int, prior_approvals=1, prior_total=2) -> Fraction:
    """Pseudo-count smoothed share of approvals among all evaluations."""
    a, t = Fraction(prior_approvals), Fraction(prior_total)
    return (approvals + a) / (approvals + disapprovals + t)


def sort_by_ratio(
    profile: ApprovalProfile,
    proposals: Iterable[Proposal],
    prior_approvals: float = 1,
    prior_total: float = 2,
    tiebreak: TieBreak = TieBreak.BY_ID,
    ctx: SortContext | None = None,
) -> RankedList:
    if not prior_total > 0:
        raise ValueError(f"prior_total must be positive, got {prior_total!r}")
    if not 0 <= prior_approvals <= prior_total:
        raise ValueError(
            f"prior_approvals must lie in [0, prior_total], got {prior_approvals!r}"
        )

    def key(p):
        score = ratio_score(
            profile.n_approvals(p.id), profile.n_disapprovals(p.id), prior_approvals, prior_total
        )
        return (-score, tiebreak.key(p))

    return _ranked(_sorted_ids(proposals, key), "ratio", ctx)


def sort_most_active(
    events: Sequence[EvaluationEvent],
    proposals: Iterable[Proposal],
    window: float,
    now: float,
    tiebreak: TieBreak = TieBreak.BY_ID,
    ctx: SortContext | None = None,
) -> RankedList:
    """Rank by approvals received in the half-open window ``(now - window, now]``.

    Only +1 events are counted; later retractions or reversals are ignored.
    """
    if not window > 0:
        raise ValueError(f"window must be positive, got {window!r}")
    counts: dict[str, int] = {}
    for ev in events:
        if ev.polarity > 0 and now - window < ev.at <= now:
            counts[ev.proposal] = counts.get(ev.proposal, 0) + 1
    order = _sorted_ids(proposals, lambda p: (-counts.get(p.id, 0), tiebreak.key(p)))
    return _ranked(order, "active", ctx)


def sort_by_cost(
    proposals: Iterable[Proposal],
    highest_first: bool = True,
    tiebreak: TieBreak = TieBreak.BY_ID,
    ctx: SortContext | None = None,
) -> RankedList:
    """Sort by cost; proposals without a cost go last whichever the direction."""
    sign = -1 if highest_first else 1

    def key(p):
        if p.cost is None:
            return (1, 0, tiebreak.key(p))
        return (0, sign * p.cost, tiebreak.key(p))

    return _ranked(_sorted_ids(proposals, key), "cost", ctx)


def sort_by_comments(
    proposals: Iterable[Proposal],
    tiebreak: TieBreak = TieBreak.BY_ID,
    ctx: SortContext | None = None,
) -> RankedList:
    order = _sorted_ids(proposals, lambda p: (-p.comment_count, tiebreak.key(p)))
    return _ranked(order, "comments", ctx)


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from arbitrary printable parts."""
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        h.update(repr(part).encode("utf-8"))
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "big")


def random_order(
    proposals: Iterable[Proposal],
    policy: RandomPolicy,
    ctx: SortContext,
) -> RankedList:
    """Uniform random permutation fully determined by a policy-derived seed.

    ``PER_VIEW`` treats ``ctx.seed`` as a per-call nonce. ``PER_SESSION``
    keys on ``ctx.session_key`` and ``DAILY_SHARED`` on the UTC day of
    ``ctx.now``; both mix in ``ctx.seed`` as the global seed.
    """
    if policy is RandomPolicy.PER_VIEW:
        seed = derive_seed("per-view", ctx.seed)
    elif policy is RandomPolicy.PER_SESSION:
        if not ctx.session_key:
            raise ValueError("per-session random order requires a session_key")
        seed = derive_seed("per-session", ctx.session_key, ctx.seed)
    elif policy is RandomPolicy.DAILY_SHARED:
        seed = derive_seed("daily", ctx.day_key, ctx.seed)
    else:
        raise ValueError(f"unknown random policy {policy!r}")
    ids = sorted(index_proposals(proposals))
    perm = np.random.default_rng(seed).permutation(len(ids))
    return _ranked([ids[i] for i in perm], f"random:{policy.value}", ctx, seed=seed)
