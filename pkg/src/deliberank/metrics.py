"""Measures of what a ranked list does for users and proposals."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .model import ApprovalProfile

__all__ = [
    "TopK",
    "Geometric",
    "coverage_at_k",
    "first_hit_positions",
    "attention_weights",
    "attention_gini",
    "disjoint_groups",
    "proportionality_deviation",
]


@dataclass(frozen=True)
class TopK:
    """Users look at the first ``k`` positions and nothing else."""

    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("TopK requires k >= 1")


@dataclass(frozen=True)
class Geometric:
    """Attention at position i (0-based) decays as ``p ** i``."""

    p: float = 0.7

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise ValueError("Geometric requires 0 < p < 1")


def _check_k(order: Sequence[str], k: int):
    if not 1 <= k <= len(order):
        raise ValueError(f"k must lie in [1, {len(order)}], got {k}")


def coverage_at_k(profile: ApprovalProfile, order: Sequence[str], k: int) -> float:
    """Fraction of all users approving at least one of the first ``k`` proposals."""
    order = list(order)
    _check_k(order, k)
    if not profile.users:
        return 0.0
    covered = set().union(*(profile.approvers.get(p, ()) for p in order[:k]))
    return len(covered) / len(profile.users)


def first_hit_positions(profile: ApprovalProfile, order: Sequence[str]) -> dict[str, int | None]:
    hits: dict[str, int | None] = {u: None for u in profile.users}
    for pos, pid in enumerate(order, start=1):
        for u in profile.approvers.get(pid, ()):
            if hits.get(u) is None:
                hits[u] = pos
    return hits


def attention_weights(list_length: int, model) -> np.ndarray:
    if list_length < 1:
        raise ValueError("list_length must be >= 1")
    if isinstance(model, TopK):
        w = np.zeros(list_length)
        m = min(model.k, list_length)
        w[:m] = 1.0 / model.k
        # k longer than the list: renormalise over what is shown
        return w / w.sum()
    if isinstance(model, Geometric):
        w = model.p ** np.arange(list_length, dtype=float)
        return w / w.sum()
    raise TypeError(f"unknown attention model {model!r}")


def attention_gini(weights) -> float:
    """Gini coefficient of non-negative weights (0 = equal, (n-1)/n = one holds all)."""
    x = np.sort(np.asarray(list(weights.values()) if isinstance(weights, Mapping) else weights, dtype=float))
    if x.size == 0 or np.any(x < 0):
        raise ValueError("weights must be a non-empty vector of non-negative numbers")
    total = x.sum()
    if total == 0:
        raise ValueError("weights are all zero; Gini is undefined")
    n = x.size
    # mean absolute difference via the sorted-rank identity
    ranks = np.arange(1, n + 1)
    return float(np.sum((2 * ranks - n - 1) * x) / (n * total))


def disjoint_groups(profile: ApprovalProfile) -> dict[frozenset, frozenset]:
    """Group users by ballot, requiring any two ballots to be equal or disjoint.

    Returns ballot -> users. Users without approvals are not in any group.
    """
    groups: dict[frozenset, set] = {}
    for u, ballot in profile.approved_by_user.items():
        if ballot:
            groups.setdefault(ballot, set()).add(u)
    owner: dict[str, frozenset] = {}
    for ballot in groups:
        for p in ballot:
            if p in owner:
                raise ValueError(
                    f"profile is not a disjoint-group profile: proposal {p!r} is approved "
                    "by users with different ballots"
                )
            owner[p] = ballot
    return {b: frozenset(us) for b, us in groups.items()}


def proportionality_deviation(profile: ApprovalProfile, order: Sequence[str], k: int) -> float:
    """Total-variation distance between top-``k`` slot shares and group sizes.

    Population shares are taken over users with a non-empty ballot; slots
    holding a proposal no group approves count against every group.
    """
    order = list(order)
    _check_k(order, k)
    groups = disjoint_groups(profile)
    population = sum(len(us) for us in groups.values())
    if population == 0:
        raise ValueError("profile has no approvals")
    slots = {b: 0 for b in groups}
    unowned = 0
    for pid in order[:k]:
        ballot = next((b for b in groups if pid in b), None)
        if ballot is None:
            unowned += 1
        else:
            slots[ballot] += 1
    dev = sum(abs(slots[b] / k - len(us) / population) for b, us in groups.items())
    return 0.5 * (dev + unowned / k)
