"""Instance generators and brute-force reference implementations for tests."""

import itertools
from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

from deliberank import ApprovalProfile, Proposal


def make_instance(ballots, proposal_ids=None):
    """(proposals, profile) from {user: [proposal ids]}."""
    if proposal_ids is None:
        proposal_ids = sorted({p for ps in ballots.values() for p in ps})
    proposals = [Proposal(id=p) for p in proposal_ids]
    return proposals, ApprovalProfile.from_ballots(proposal_ids, ballots)


def random_instance(rng, max_users=12, max_proposals=12, density=0.3):
    n_users = int(rng.integers(1, max_users + 1))
    n_props = int(rng.integers(1, max_proposals + 1))
    pids = [f"p{i:02d}" for i in range(n_props)]
    ballots = {
        f"u{u:02d}": [p for p in pids if rng.random() < density] for u in range(n_users)
    }
    return make_instance(ballots, pids)


@st.composite
def instances(draw, max_users=8, max_proposals=8):
    n_props = draw(st.integers(1, max_proposals))
    pids = [f"p{i:02d}" for i in range(n_props)]
    n_users = draw(st.integers(1, max_users))
    ballots = {
        f"u{u:02d}": draw(st.lists(st.sampled_from(pids), unique=True, max_size=n_props))
        for u in range(n_users)
    }
    return make_instance(ballots, pids)


def disjoint_instance(rng, n_groups=None):
    """Users split into groups with distinct sizes, each approving its own pool."""
    m = n_groups or int(rng.integers(1, 5))
    sizes = sorted(rng.choice(np.arange(1, 30), size=m, replace=False).tolist(), reverse=True)
    ballots, pids, uid = {}, [], 0
    order = rng.permutation(m)
    for g in order:
        pool = [f"g{g}p{i}" for i in range(int(rng.integers(1, 4)))]
        pids += pool
        for _ in range(sizes[g]):
            ballots[f"u{uid:03d}"] = pool
            uid += 1
    return make_instance(ballots, sorted(pids)), sizes


def synthetic_profile(n_proposals, n_users, n_approvals, seed=0):
    """Distinct (user, proposal) approvals with a mild popularity skew."""
    rng = np.random.default_rng(seed)
    w = 1.0 / np.sqrt(np.arange(1, n_proposals + 1))
    w /= w.sum()
    flat = np.empty(0, dtype=np.int64)
    while flat.size < n_approvals:
        batch = rng.integers(n_users, size=n_approvals) * n_proposals + rng.choice(
            n_proposals, size=n_approvals, p=w
        )
        flat = np.unique(np.concatenate([flat, batch]))
    flat = rng.permutation(flat)[:n_approvals]
    pids = [f"p{i:04d}" for i in range(n_proposals)]
    ballots = {}
    for f in flat.tolist():
        ballots.setdefault(f"u{f // n_proposals:05d}", []).append(pids[f % n_proposals])
    return make_instance(ballots, pids)


def brute_pav_step_order(profile, proposals):
    """Sequential PAV recomputed from the harmonic objective at every step."""
    def objective(prefix):
        hits = {}
        for p in prefix:
            for u in profile.approvers[p]:
                hits[u] = hits.get(u, 0) + 1
        return sum(sum(Fraction(1, j) for j in range(1, k + 1)) for k in hits.values())

    remaining = sorted(p.id for p in proposals)
    order = []
    while remaining:
        base = objective(order)
        best = min(remaining, key=lambda p: (base - objective(order + [p]), p))
        order.append(best)
        remaining.remove(best)
    return order


def brute_phragmen_order(profile, proposals):
    """Sequential Phragmén with loads recomputed from scratch each step."""
    loads = {}
    remaining = sorted(p.id for p in proposals)
    approved = [p for p in remaining if profile.approvers[p]]
    order = []
    while approved:
        def cand(p):
            voters = profile.approvers[p]
            return (1 + sum(loads.get(u, Fraction(0)) for u in voters)) / len(voters)
        best = min(approved, key=lambda p: (cand(p), p))
        value = cand(best)
        for u in profile.approvers[best]:
            loads[u] = value
        order.append(best)
        approved.remove(best)
    return order + [p for p in remaining if not profile.approvers[p] and p not in order]


def brute_coverage_order(profile, proposals, reset=True):
    """Plain (non-lazy) greedy coverage."""
    remaining = sorted(p.id for p in proposals)
    covered, order = set(), []
    while remaining:
        gains = {p: len(profile.approvers[p] - covered) for p in remaining}
        best = min(remaining, key=lambda p: (-gains[p], -len(profile.approvers[p]), p))
        if gains[best] == 0:
            if reset and covered:
                covered = set()
                continue
            order += sorted(remaining, key=lambda p: (-len(profile.approvers[p]), p))
            break
        order.append(best)
        remaining.remove(best)
        covered |= profile.approvers[best]
    return order


def best_coverage(profile, ids, k):
    return max(
        (len(set().union(*(profile.approvers[p] for p in c))) for c in itertools.combinations(ids, k)),
        default=0,
    )
