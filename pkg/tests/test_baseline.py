from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from deliberank import (
    ApprovalProfile,
    EvaluationEvent,
    Proposal,
    RandomPolicy,
    SortContext,
    TieBreak,
    build_profile,
    random_order,
    sort_by_approvals,
    sort_by_comments,
    sort_by_cost,
    sort_by_date,
    sort_by_ratio,
    sort_most_active,
)
from deliberank.baseline import ratio_score

from helpers import instances, make_instance

DAY = 86400
S100_ID_ORDER = [f"{g}{i:02d}" for g in "xyz" for i in range(1, 11)]


def test_date_newest_first():
    ps = [Proposal("t10", submitted_at=10), Proposal("t20", submitted_at=20), Proposal("t15", submitted_at=15)]
    assert sort_by_date(ps, newest_first=True).order == ("t20", "t15", "t10")
    assert sort_by_date(ps, newest_first=False).order == ("t10", "t15", "t20")


def test_date_singleton():
    assert sort_by_date([Proposal("only")]).order == ("only",)


def test_date_s100_is_id_order(s100):
    proposals, _ = s100
    assert list(sort_by_date(proposals, True, TieBreak.BY_ID)) == S100_ID_ORDER


def test_approvals_s100(s100):
    proposals, prof = s100
    assert list(sort_by_approvals(prof, proposals)) == S100_ID_ORDER


def test_approvals_counts():
    proposals, prof = make_instance({"u1": ["a", "b", "c"], "u2": ["a", "b", "c"], "u3": ["b"]})
    assert sort_by_approvals(prof, proposals).order == ("b", "a", "c")


def test_approvals_all_zero_falls_back_to_tiebreak():
    ps = [Proposal("b", submitted_at=1), Proposal("a", submitted_at=3), Proposal("c", submitted_at=2)]
    prof = ApprovalProfile.from_ballots(["a", "b", "c"], {})
    assert sort_by_approvals(prof, ps, TieBreak.BY_ID).order == ("a", "b", "c")
    assert sort_by_approvals(prof, ps, TieBreak.OLDEST_FIRST).order == ("b", "c", "a")
    assert sort_by_approvals(prof, ps, TieBreak.NEWEST_FIRST).order == ("a", "c", "b")


def test_ratio_prior_only():
    assert ratio_score(0, 0, 1, 2) == 0.5


def test_ratio_smoothing_example():
    approvals = {f"a{i}": ["p1"] for i in range(9)}
    approvals["b"] = ["p2"]
    prof = ApprovalProfile.from_ballots(["p1", "p2"], approvals, {"d": ["p1"]})
    assert ratio_score(9, 1) == pytest.approx(10 / 12)
    assert ratio_score(1, 0) == pytest.approx(2 / 3)
    assert sort_by_ratio(prof, [Proposal("p1"), Proposal("p2")]).order == ("p1", "p2")


def test_ratio_rejects_bad_prior():
    prof = ApprovalProfile.from_ballots(["p"], {})
    with pytest.raises(ValueError):
        sort_by_ratio(prof, [Proposal("p")], prior_approvals=1, prior_total=0)
    with pytest.raises(ValueError):
        sort_by_ratio(prof, [Proposal("p")], prior_approvals=3, prior_total=2)


@given(instances())
def test_ratio_equals_approvals_without_disapprovals(inst):
    proposals, prof = inst
    ratio = list(sort_by_ratio(prof, proposals))
    # pairwise comparison oracle: with no disapprovals, (a+1)/(a+2) is increasing in a
    for i, p in enumerate(ratio):
        for q in ratio[i + 1:]:
            assert prof.n_approvals(p) > prof.n_approvals(q) or (
                prof.n_approvals(p) == prof.n_approvals(q) and p < q
            )
    assert ratio == list(sort_by_approvals(prof, proposals))


def test_most_active_empty_window_is_tiebreak():
    ps = [Proposal("b"), Proposal("a")]
    events = [EvaluationEvent("u", "b", 1, 0)]
    assert sort_most_active(events, ps, window=DAY, now=10 * DAY).order == ("a", "b")


def test_most_active_window_counts():
    now = 100 * DAY
    events = [EvaluationEvent(f"a{i}", "p1", 1, now - 2 * DAY) for i in range(5)]
    events += [EvaluationEvent(f"b{i}", "p2", 1, now - 3600) for i in range(3)]
    ps = [Proposal("p1"), Proposal("p2")]
    assert sort_most_active(events, ps, window=DAY, now=now).order == ("p2", "p1")


def test_most_active_window_boundaries():
    ps = [Proposal("in"), Proposal("out")]
    events = [EvaluationEvent("u", "in", 1, 100), EvaluationEvent("u", "out", 1, 90)]
    # (now - window, now] excludes the left edge, includes the right
    assert sort_most_active(events, ps, window=10, now=100).order == ("in", "out")


def test_most_active_ignores_disapprovals():
    ps = [Proposal("a"), Proposal("b")]
    events = [EvaluationEvent("u1", "a", -1, 5), EvaluationEvent("u2", "a", -1, 5), EvaluationEvent("u1", "b", 1, 5)]
    assert sort_most_active(events, ps, window=10, now=10).order == ("b", "a")


@given(st.lists(st.tuples(st.integers(0, 5), st.sampled_from("abcd"), st.integers(0, 50)), max_size=40))
def test_most_active_full_window_equals_approvals(raw):
    # one approval per (user, proposal) pair; all positive
    seen, events = set(), []
    for u, p, t in raw:
        if (u, p) not in seen:
            seen.add((u, p))
            events.append(EvaluationEvent(f"u{u}", p, 1, t))
    ps = [Proposal(p) for p in "abcd"]
    prof = build_profile(events, ps)
    active = sort_most_active(events, ps, window=1000, now=50)
    assert active.order == sort_by_approvals(prof, ps).order


def test_window_must_be_positive():
    with pytest.raises(ValueError):
        sort_most_active([], [Proposal("a")], window=0, now=0)


def test_cost():
    ps = [Proposal("a", cost=5), Proposal("b", cost=2), Proposal("c", cost=9)]
    assert sort_by_cost(ps, highest_first=True).order == ("c", "a", "b")


def test_cost_missing_goes_last_both_ways():
    ps = [Proposal("a", cost=5), Proposal("n"), Proposal("b", cost=2)]
    assert sort_by_cost(ps, highest_first=False).order == ("b", "a", "n")
    assert sort_by_cost(ps, highest_first=True).order == ("a", "b", "n")


def test_cost_all_equal_is_tiebreak():
    ps = [Proposal("c", cost=1), Proposal("a", cost=1), Proposal("b", cost=1)]
    assert sort_by_cost(ps).order == ("a", "b", "c")


def test_comments():
    assert sort_by_comments([Proposal("b"), Proposal("a"), Proposal("c")]).order == ("a", "b", "c")
    assert sort_by_comments([Proposal("a", comment_count=1), Proposal("b", comment_count=4)]).order == ("b", "a")


def test_comments_s100_is_id_order(s100):
    assert list(sort_by_comments(s100[0])) == S100_ID_ORDER


def _ps(n):
    return [Proposal(f"p{i}") for i in range(n)]


def test_daily_shared_is_viewer_independent():
    a = random_order(_ps(20), RandomPolicy.DAILY_SHARED, SortContext(now=3 * DAY + 10, seed=1, viewer="alice"))
    b = random_order(_ps(20), RandomPolicy.DAILY_SHARED, SortContext(now=3 * DAY + 5000, seed=1, viewer="bob"))
    assert a.order == b.order


def test_daily_shared_changes_with_day():
    orders = {random_order(_ps(20), RandomPolicy.DAILY_SHARED, SortContext(now=d * DAY, seed=1)).order
              for d in range(5)}
    assert len(orders) == 5


def test_per_session_stable_and_distinct():
    ctx = SortContext(now=0, seed=3, session_key="s1")
    assert random_order(_ps(20), RandomPolicy.PER_SESSION, ctx).order == random_order(
        _ps(20), RandomPolicy.PER_SESSION, SortContext(now=9 * DAY, seed=3, session_key="s1")
    ).order
    other = random_order(_ps(20), RandomPolicy.PER_SESSION, SortContext(now=0, seed=3, session_key="s2"))
    assert other.order != random_order(_ps(20), RandomPolicy.PER_SESSION, ctx).order


def test_per_session_requires_key():
    with pytest.raises(ValueError, match="session_key"):
        random_order(_ps(3), RandomPolicy.PER_SESSION, SortContext())


def test_per_view_varies_with_nonce():
    orders = {random_order(_ps(20), RandomPolicy.PER_VIEW, SortContext(seed=n)).order for n in range(10)}
    assert len(orders) == 10


@pytest.mark.parametrize("policy", list(RandomPolicy))
def test_random_singleton(policy):
    ctx = SortContext(seed=1, session_key="k")
    assert random_order([Proposal("only")], policy, ctx).order == ("only",)


def test_random_ignores_input_order():
    ps = _ps(15)
    ctx = SortContext(seed=4)
    assert random_order(ps, RandomPolicy.PER_VIEW, ctx).order == random_order(ps[::-1], RandomPolicy.PER_VIEW, ctx).order


def test_per_view_uniformity():
    ps = _ps(5)
    firsts = Counter(random_order(ps, RandomPolicy.PER_VIEW, SortContext(seed=n)).order[0] for n in range(10_000))
    for p in ps:
        assert abs(firsts[p.id] / 10_000 - 0.2) <= 0.02


def _fuzz_proposals(draw_ids, times, costs, comments):
    return [
        Proposal(i, submitted_at=t, cost=c, comment_count=m)
        for i, t, c, m in zip(draw_ids, times, costs, comments)
    ]


proposal_lists = st.integers(1, 12).flatmap(
    lambda n: st.builds(
        _fuzz_proposals,
        st.just([f"p{i:02d}" for i in range(n)]),
        st.lists(st.integers(0, 5), min_size=n, max_size=n),
        st.lists(st.one_of(st.none(), st.integers(0, 4)), min_size=n, max_size=n),
        st.lists(st.integers(0, 3), min_size=n, max_size=n),
    )
)


@settings(max_examples=60)
@given(proposal_lists, st.sampled_from(list(TieBreak)), st.integers(0, 2**63 - 1))
def test_all_baseline_sorters_permute_and_are_deterministic(ps, tb, seed):
    ids = sorted(p.id for p in ps)
    approvals = {f"u{i}": [p.id for p in ps[: i + 1]] for i in range(len(ps))}
    prof = ApprovalProfile.from_ballots(ids, approvals)
    events = [EvaluationEvent(u, p, 1, 1) for u, pl in approvals.items() for p in pl]
    ctx = SortContext(now=2, seed=seed, session_key="s")
    runs = [
        lambda: sort_by_date(ps, True, tb, ctx),
        lambda: sort_by_approvals(prof, ps, tb, ctx),
        lambda: sort_by_ratio(prof, ps, 1, 2, tb, ctx),
        lambda: sort_most_active(events, ps, 10, 2, tb, ctx),
        lambda: sort_by_cost(ps, True, tb, ctx),
        lambda: sort_by_comments(ps, tb, ctx),
        *[lambda pol=pol: random_order(ps, pol, ctx) for pol in RandomPolicy],
    ]
    for run in runs:
        first, second = run(), run()
        assert sorted(first.order) == ids
        assert first == second


@given(proposal_lists)
def test_comparator_consistency(ps):
    by_id = {p.id: p for p in ps}
    date = [by_id[i].submitted_at for i in sort_by_date(ps)]
    assert date == sorted(date, reverse=True)
    comments = [by_id[i].comment_count for i in sort_by_comments(ps)]
    assert comments == sorted(comments, reverse=True)
    costs = [by_id[i].cost for i in sort_by_cost(ps, highest_first=False)]
    known = [c for c in costs if c is not None]
    assert known == sorted(known) and costs[len(known):] == [None] * (len(costs) - len(known))


@given(instances(), st.data())
def test_approval_monotonicity(inst, data):
    proposals, prof = inst
    target = data.draw(st.sampled_from([p.id for p in proposals]))
    before = sort_by_approvals(prof, proposals).position(target)
    ballots = {u: set(ps) for u, ps in prof.approved_by_user.items()}
    ballots["newcomer"] = {target}
    bumped = ApprovalProfile.from_ballots(list(prof.approvers), ballots)
    assert sort_by_approvals(bumped, proposals).position(target) <= before


@given(instances())
def test_approval_comparator(inst):
    proposals, prof = inst
    counts = [prof.n_approvals(p) for p in sort_by_approvals(prof, proposals)]
    assert counts == sorted(counts, reverse=True)


def test_seed_recorded():
    r = random_order(_ps(3), RandomPolicy.PER_VIEW, SortContext(seed=5))
    assert isinstance(r.seed, int) and 0 <= r.seed < 2**64
    assert r.context["seed"] == 5
