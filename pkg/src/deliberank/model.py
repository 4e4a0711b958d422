"""Domain types for proposal lists and approval snapshots.

Identifiers are plain ``str``. Python compares strings by code point, which
coincides with byte-lexicographic order of their UTF-8 encoding, so sorting
ids with ``sorted`` gives the documented total order used for tie-breaking.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

__all__ = [
    "Proposal",
    "EvaluationEvent",
    "ApprovalProfile",
    "InspectionStats",
    "SortContext",
    "RankedList",
    "TieBreak",
    "build_profile",
    "index_proposals",
    "scenario_s100",
    "s100_events",
]


@dataclass(frozen=True)
class Proposal:
    id: str
    title: str = ""
    body: str = ""
    tags: frozenset = frozenset()
    cost: float | None = None
    author: str = ""
    submitted_at: float = 0.0
    comment_count: int = 0

    def __post_init__(self):
        if not self.id:
            raise ValueError("proposal id must be non-empty")
        if not math.isfinite(self.submitted_at):
            raise ValueError(f"proposal {self.id!r}: submitted_at must be finite")
        if self.cost is not None and not self.cost >= 0:
            raise ValueError(f"proposal {self.id!r}: cost must be non-negative")
        if self.comment_count < 0:
            raise ValueError(f"proposal {self.id!r}: comment_count must be non-negative")
        if not isinstance(self.tags, frozenset):
            object.__setattr__(self, "tags", frozenset(self.tags))

    @property
    def primary_tag(self) -> str | None:
        """Lexicographically smallest tag, or None for an untagged proposal."""
        return min(self.tags) if self.tags else None


@dataclass(frozen=True)
class EvaluationEvent:
    user: str
    proposal: str
    polarity: int
    at: float = 0.0

    def __post_init__(self):
        if self.polarity not in (1, -1) or isinstance(self.polarity, bool):
            raise ValueError(
                f"event ({self.user!r}, {self.proposal!r}): polarity must be +1 or -1, "
                f"got {self.polarity!r}"
            )


def _freeze(mapping: Mapping[str, Iterable[str]]) -> Mapping[str, frozenset]:
    return MappingProxyType({k: frozenset(v) for k, v in sorted(mapping.items())})


@dataclass(frozen=True, eq=True)
class ApprovalProfile:
    """Immutable snapshot of who approves and disapproves which proposal.

    Use :meth:`from_ballots` or :func:`build_profile` rather than the raw
    constructor; they derive the transpose index and validate references.
    """

    approvers: Mapping[str, frozenset]
    disapprovers: Mapping[str, frozenset]
    approved_by_user: Mapping[str, frozenset]
    users: frozenset = field(default_factory=frozenset)

    __hash__ = None  # type: ignore[assignment]

    @classmethod
    def from_ballots(
        cls,
        proposal_ids: Iterable[str],
        approvals: Mapping[str, Iterable[str]],
        disapprovals: Mapping[str, Iterable[str]] | None = None,
        users: Iterable[str] | None = None,
    ) -> "ApprovalProfile":
        """Build a profile from per-user approval (and disapproval) ballots."""
        pids = list(proposal_ids)
        known = set(pids)
        if len(known) != len(pids):
            raise ValueError("duplicate proposal ids")
        disapprovals = disapprovals or {}
        approvers = {p: set() for p in pids}
        disapprovers = {p: set() for p in pids}
        for table, target in ((approvals, approvers), (disapprovals, disapprovers)):
            for user, ballot in table.items():
                for p in ballot:
                    if p not in known:
                        raise ValueError(f"ballot of user {user!r} references unknown proposal {p!r}")
                    target[p].add(user)
        for p in pids:
            both = approvers[p] & disapprovers[p]
            if both:
                raise ValueError(f"user {min(both)!r} both approves and disapproves {p!r}")
        all_users = set(approvals) | set(disapprovals) | set(users or ())
        by_user = {u: set() for u in all_users}
        for p, us in approvers.items():
            for u in us:
                by_user[u].add(p)
        return cls(_freeze(approvers), _freeze(disapprovers), _freeze(by_user), frozenset(all_users))

    @property
    def proposal_ids(self) -> list[str]:
        return list(self.approvers)

    def n_approvals(self, proposal_id: str) -> int:
        return len(self.approvers.get(proposal_id, ()))

    def n_disapprovals(self, proposal_id: str) -> int:
        return len(self.disapprovers.get(proposal_id, ()))

    def restrict(self, proposal_ids: Iterable[str]) -> "ApprovalProfile":
        """Profile over a subset of proposals; the user population is kept."""
        keep = set(proposal_ids)
        approvals = {u: [p for p in ps if p in keep] for u, ps in self.approved_by_user.items()}
        disapprovals: dict[str, list[str]] = {}
        for p in keep:
            for u in self.disapprovers.get(p, ()):
                disapprovals.setdefault(u, []).append(p)
        return ApprovalProfile.from_ballots(sorted(keep), approvals, disapprovals, self.users)

    def check_transpose(self) -> bool:
        forward = {(u, p) for p, us in self.approvers.items() for u in us}
        backward = {(u, p) for u, ps in self.approved_by_user.items() for p in ps}
        return forward == backward


@dataclass(frozen=True)
class InspectionStats:
    """Per-proposal view counts; missing proposals count as zero views."""

    views: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        for p, v in self.views.items():
            if v < 0:
                raise ValueError(f"negative view count for {p!r}")
        object.__setattr__(self, "views", MappingProxyType(dict(self.views)))

    __hash__ = None  # type: ignore[assignment]

    def __getitem__(self, proposal_id: str) -> int:
        return self.views.get(proposal_id, 0)


@dataclass(frozen=True)
class SortContext:
    now: float = 0.0
    seed: int = 0
    session_key: str | None = None
    viewer: str | None = None

    @property
    def day_key(self) -> str:
        return datetime.fromtimestamp(self.now, timezone.utc).date().isoformat()

    def summary(self) -> dict:
        return {
            "now": self.now,
            "seed": self.seed,
            "session_key": self.session_key,
            "viewer": self.viewer,
            "day_key": self.day_key,
        }


@dataclass(frozen=True)
class RankedList:
    order: tuple
    method: str
    seed: int | None = None
    context: Mapping | None = None
    produced_at: float | None = None

    def __post_init__(self):
        order = tuple(self.order)
        if len(set(order)) != len(order):
            raise ValueError("ranked list contains duplicate ids")
        object.__setattr__(self, "order", order)

    __hash__ = None  # type: ignore[assignment]

    def __len__(self) -> int:
        return len(self.order)

    def __iter__(self):
        return iter(self.order)

    def __getitem__(self, i):
        return self.order[i]

    def position(self, proposal_id: str) -> int:
        """1-based position of a proposal."""
        return self.order.index(proposal_id) + 1

    def to_dict(self) -> dict:
        return {
            "order": list(self.order),
            "method": self.method,
            "seed": self.seed,
            "context": dict(self.context) if self.context is not None else None,
            "produced_at": self.produced_at,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "RankedList":
        return cls(
            order=tuple(data["order"]),
            method=data["method"],
            seed=data.get("seed"),
            context=data.get("context"),
            produced_at=data.get("produced_at"),
        )


class TieBreak(enum.Enum):
    BY_ID = "id"
    OLDEST_FIRST = "oldest"
    NEWEST_FIRST = "newest"

    def key(self, proposal: Proposal):
        if self is TieBreak.OLDEST_FIRST:
            return (proposal.submitted_at, proposal.id)
        if self is TieBreak.NEWEST_FIRST:
            return (-proposal.submitted_at, proposal.id)
        return (proposal.id,)


def index_proposals(proposals: Iterable[Proposal]) -> dict[str, Proposal]:
    """Map id -> proposal, rejecting duplicate ids."""
    out: dict[str, Proposal] = {}
    for p in proposals:
        if p.id in out:
            raise ValueError(f"duplicate proposal id {p.id!r}")
        out[p.id] = p
    return out


def build_profile(
    events: Sequence[EvaluationEvent],
    proposals: Iterable[Proposal],
    users: Iterable[str] | None = None,
) -> ApprovalProfile:
    """Snapshot an event log into an approval profile.

    For each (user, proposal) pair only the latest event counts; equal
    timestamps are resolved by position in ``events``.
    """
    pids = list(index_proposals(proposals))
    known = set(pids)
    latest: dict[tuple[str, str], tuple[float, int, int]] = {}
    for seq, ev in enumerate(events):
        if ev.polarity not in (1, -1):
            raise ValueError(f"malformed polarity {ev.polarity!r} in event #{seq}")
        if ev.proposal not in known:
            raise ValueError(f"event #{seq} references unknown proposal {ev.proposal!r}")
        key = (ev.user, ev.proposal)
        stamp = (ev.at, seq, ev.polarity)
        if key not in latest or stamp[:2] > latest[key][:2]:
            latest[key] = stamp
    approvals: dict[str, list[str]] = {}
    disapprovals: dict[str, list[str]] = {}
    for (user, pid), (_, _, polarity) in latest.items():
        (approvals if polarity > 0 else disapprovals).setdefault(user, []).append(pid)
    everyone = {u for u, _ in latest} | set(users or ())
    return ApprovalProfile.from_ballots(pids, approvals, disapprovals, everyone)


S100_GROUPS = (("x", 45), ("y", 35), ("z", 20))


def _s100_layout():
    proposals = []
    members: dict[str, list[str]] = {}
    uid = 0
    for prefix, size in S100_GROUPS:
        members[prefix] = [f"u{uid + i + 1:03d}" for i in range(size)]
        uid += size
        for i in range(1, 11):
            proposals.append(Proposal(id=f"{prefix}{i:02d}", title=f"{prefix}{i}", author=f"author-{prefix}"))
    return proposals, members


def s100_events() -> list[EvaluationEvent]:
    """One approval per group member per proposal of the group's pool."""
    proposals, members = _s100_layout()
    return [
        EvaluationEvent(user=u, proposal=p.id, polarity=1, at=0)
        for p in proposals
        for u in members[p.id[0]]
    ]


def scenario_s100() -> tuple[tuple[Proposal, ...], ApprovalProfile]:
    """100 users in disjoint groups of 45, 35 and 20 approving x, y and z proposals."""
    proposals, members = _s100_layout()
    approvals = {u: [f"{prefix}{i:02d}" for i in range(1, 11)] for prefix, us in members.items() for u in us}
    profile = ApprovalProfile.from_ballots([p.id for p in proposals], approvals)
    return tuple(proposals), profile
