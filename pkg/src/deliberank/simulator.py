"""Seeded tick-based simulation of users browsing and approving a sorted list.

Each tick new proposals may arrive, the list is re-sorted on schedule, and a
number of sessions is played: a uniformly drawn user inspects positions
according to an attention model, every inspection counts as a view, and the
user approves proposals of their own group's pool with the group's
probability the first time they inspect them. Each approval decision is a
coin fixed per (seed, user, proposal), so it does not depend on where the
list happened to place the proposal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .baseline import RandomPolicy, derive_seed
from .integrated import APPROVAL_COUNT, IntegratedConfig
from .methods import MethodSpec
from .metrics import Geometric, TopK, attention_gini, attention_weights, coverage_at_k
from .model import (
    ApprovalProfile,
    EvaluationEvent,
    InspectionStats,
    Proposal,
    RankedList,
    SortContext,
)

__all__ = [
    "GroupSpec",
    "AllAtStart",
    "UniformOverHorizon",
    "Burst",
    "Scenario",
    "SimReport",
    "TimingSummary",
    "FeedbackSummary",
    "run_simulation",
    "experiment_timing",
    "experiment_feedback_loop",
    "default_timing_scenario",
    "default_feedback_scenario",
    "s100_static_scenario",
]

DAY = 86400.0
# session key of the shared list (resorts and the final list) under per-session random
SYSTEM_SESSION = "_list"


@dataclass(frozen=True)
class GroupSpec:
    size: int
    pool_size: int
    approval_prob: float
    prefix: str | None = None

    def __post_init__(self):
        if self.size < 0 or self.pool_size < 0:
            raise ValueError("group size and pool size must be non-negative")
        if not 0 <= self.approval_prob <= 1:
            raise ValueError(f"approval_prob must lie in [0, 1], got {self.approval_prob!r}")


@dataclass(frozen=True)
class AllAtStart:
    pass


@dataclass(frozen=True)
class UniformOverHorizon:
    pass


@dataclass(frozen=True)
class Burst:
    times: tuple = (0,)

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(int(t) for t in self.times))
        if not self.times:
            raise ValueError("Burst needs at least one arrival tick")


@dataclass(frozen=True)
class Scenario:
    """Generative model of a deliberation phase.

    ``preseed`` makes every group member approve (and view) their whole pool
    before the first tick, as in a fully inspected static setting.
    ``coverage_k`` is the prefix length used for the per-resort coverage
    series.
    """

    n_users: int
    groups: tuple
    arrivals: object = AllAtStart()
    horizon: int = 30
    sessions_per_tick: int = 20
    attention: object = Geometric(0.7)
    resort_every: int = 1
    ticks_per_day: int = 1
    preseed: bool = False
    coverage_k: int = 10

    def __post_init__(self):
        groups = tuple(g if isinstance(g, GroupSpec) else GroupSpec(*g) for g in self.groups)
        object.__setattr__(self, "groups", groups)
        if self.n_users < 1:
            raise ValueError("n_users must be positive")
        if sum(g.size for g in groups) != self.n_users:
            raise ValueError(
                f"group sizes sum to {sum(g.size for g in groups)}, expected n_users={self.n_users}"
            )
        if self.horizon < 1:
            raise ValueError("horizon must be at least one tick")
        if self.sessions_per_tick < 0:
            raise ValueError("sessions_per_tick must be non-negative")
        if self.resort_every < 1 or self.ticks_per_day < 1 or self.coverage_k < 1:
            raise ValueError("resort_every, ticks_per_day and coverage_k must be positive")
        if not isinstance(self.attention, (TopK, Geometric)):
            raise ValueError(f"unknown attention model {self.attention!r}")
        if not isinstance(self.arrivals, (AllAtStart, UniformOverHorizon, Burst)):
            raise ValueError(f"unknown arrival process {self.arrivals!r}")
        if isinstance(self.arrivals, Burst) and not all(0 <= t < self.horizon for t in self.arrivals.times):
            raise ValueError("burst times must lie within the horizon")
        prefixes = [self._prefix(i) for i in range(len(groups))]
        if len(set(prefixes)) != len(prefixes):
            raise ValueError("group prefixes must be distinct")

    def _prefix(self, index: int) -> str:
        g = self.groups[index]
        if g.prefix:
            return g.prefix
        return chr(ord("a") + index) if index < 26 else f"g{index}-"

    def with_(self, **changes) -> "Scenario":
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update(changes)
        return Scenario(**fields)


@dataclass
class SimReport:
    scenario: Scenario
    method: str
    seed: int
    final_profile: ApprovalProfile
    final_views: InspectionStats
    final_list: RankedList
    coverage_series: list = field(default_factory=list)
    gini_series: list = field(default_factory=list)
    rank_vs_arrival_correlation: float | None = None
    rank_vs_early_exposure_correlation: float | None = None
    arrival_ticks: dict = field(default_factory=dict)
    early_views: dict = field(default_factory=dict)
    views_per_tick: list = field(default_factory=list)
    fair_share_views: dict = field(default_factory=dict)

    def relative_exposure(self, proposal_id: str) -> float | None:
        """Views over the views an even split among live proposals would give."""
        fair = self.fair_share_views.get(proposal_id, 0.0)
        return self.final_views[proposal_id] / fair if fair > 0 else None

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "seed": self.seed,
            "final_list": self.final_list.to_dict(),
            "final_views": dict(sorted(self.final_views.views.items())),
            "final_approvals": {
                p: sorted(us) for p, us in self.final_profile.approvers.items()
            },
            "coverage_series": self.coverage_series,
            "gini_series": self.gini_series,
            "views_per_tick": self.views_per_tick,
            "rank_vs_arrival_correlation": self.rank_vs_arrival_correlation,
            "rank_vs_early_exposure_correlation": self.rank_vs_early_exposure_correlation,
            "arrival_ticks": dict(sorted(self.arrival_ticks.items())),
            "early_views": dict(sorted(self.early_views.items())),
            "fair_share_views": dict(sorted(self.fair_share_views.items())),
        }


def _defined(x: Sequence[float], y: Sequence[float]) -> bool:
    return len(x) >= 2 and np.ptp(x) > 0 and np.ptp(y) > 0


def spearman(x: Sequence[float], y: Sequence[float]) -> float | None:
    """Spearman rank correlation, or None when either side is constant."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    if not _defined(x, y):
        return None
    return float(stats.spearmanr(x, y).statistic)


def pearson(x: Sequence[float], y: Sequence[float]) -> float | None:
    x, y = np.asarray(x, float), np.asarray(y, float)
    if not _defined(x, y):
        return None
    return float(np.corrcoef(x, y)[0, 1])


def _layout(scenario: Scenario, rng: np.random.Generator):
    width = len(str(scenario.n_users))
    users: list[str] = []
    group_of: dict[str, int] = {}
    proposals: list[Proposal] = []
    arrival: dict[str, int] = {}
    pools: list[frozenset] = []
    spt = DAY / scenario.ticks_per_day
    for gi, g in enumerate(scenario.groups):
        for _ in range(g.size):
            uid = f"u{len(users) + 1:0{width}d}"
            users.append(uid)
            group_of[uid] = gi
        prefix = scenario._prefix(gi)
        pwidth = max(2, len(str(g.pool_size)))
        pool = []
        for i in range(1, g.pool_size + 1):
            pid = f"{prefix}{i:0{pwidth}d}"
            if isinstance(scenario.arrivals, UniformOverHorizon):
                tick = int(rng.integers(scenario.horizon))
            elif isinstance(scenario.arrivals, Burst):
                tick = scenario.arrivals.times[int(rng.integers(len(scenario.arrivals.times)))]
            else:
                tick = 0
            arrival[pid] = tick
            pool.append(pid)
            proposals.append(
                Proposal(
                    id=pid,
                    title=pid,
                    tags=frozenset({f"group-{prefix}"}),
                    author=f"author-{pid}",
                    submitted_at=tick * spt,
                )
            )
        pools.append(frozenset(pool))
    return users, group_of, proposals, arrival, pools


def _coin(seed: int, user: str, pid: str) -> float:
    """Uniform [0, 1) draw fixed per (user, proposal), independent of list order."""
    return derive_seed("approve", seed, user, pid) / 2.0**64


def _inspect(n: int, attention, rng: np.random.Generator) -> np.ndarray:
    if n == 0:
        return np.zeros(0, dtype=int)
    if isinstance(attention, TopK):
        return np.arange(min(attention.k, n))
    mask = rng.random(n) < attention.p ** np.arange(n)
    return np.flatnonzero(mask)


def run_simulation(scenario: Scenario, method: MethodSpec | str, seed: int = 0) -> SimReport:
    """Play one seeded deliberation phase under ``method``.

    Deterministic in ``(scenario, method, seed)``.
    """
    if isinstance(method, str):
        method = MethodSpec(method)
    rng = np.random.default_rng(seed)
    users, group_of, proposals, arrival, pools = _layout(scenario, rng)
    spt = DAY / scenario.ticks_per_day
    by_tick: dict[int, list[Proposal]] = {}
    for p in proposals:
        by_tick.setdefault(arrival[p.id], []).append(p)
    # who would approve what, used for the coverage series
    interest = {u: pools[g] for u, g in group_of.items()}

    approvals: dict[str, list[str]] = {u: [] for u in users}
    decided: set[tuple[str, str]] = set()
    events: list[EvaluationEvent] = []
    views: dict[str, int] = {p.id: 0 for p in proposals}
    if scenario.preseed:
        for u in users:
            pool = sorted(pools[group_of[u]])
            approvals[u].extend(pool)
            decided.update((u, p) for p in pool)
            events.extend(EvaluationEvent(u, p, 1, 0.0) for p in pool)
        for p in proposals:
            views[p.id] = scenario.n_users

    early_ticks = max(1, math.ceil(0.1 * scenario.horizon))
    early_views: dict[str, int] = {}
    live: list[Proposal] = []
    live_ids: set[str] = set()
    current: list[str] = []
    coverage_series: list = []
    gini_series: list = []
    views_per_tick: list[int] = []
    fair_share = {p.id: 0.0 for p in proposals}

    def snapshot():
        ids = [p.id for p in live]
        return ApprovalProfile.from_ballots(ids, {u: a for u, a in approvals.items() if a}, users=users)

    for t in range(scenario.horizon):
        now = t * spt
        for p in by_tick.get(t, ()):
            live.append(p)
            live_ids.add(p.id)
        if t % scenario.resort_every == 0:
            ctx = SortContext(now=now, seed=seed, session_key=SYSTEM_SESSION)
            current = list(method.rank(live, snapshot(), events, InspectionStats(views), ctx))
            if current:
                latent = ApprovalProfile.from_ballots(
                    current, {u: [p for p in ps if p in live_ids] for u, ps in interest.items()}
                )
                coverage_series.append(coverage_at_k(latent, current, min(scenario.coverage_k, len(current))))
                gini_series.append(attention_gini(attention_weights(len(current), scenario.attention)))
            else:
                coverage_series.append(None)
                gini_series.append(None)
        else:
            listed = set(current)
            current = current + [p.id for p in live if p.id not in listed]

        tick_views = 0
        for s in range(scenario.sessions_per_tick):
            user = users[int(rng.integers(len(users)))]
            if method.is_random:
                if method.random_policy is RandomPolicy.PER_VIEW:
                    ctx = SortContext(now=now, seed=derive_seed(seed, t, s), viewer=user)
                else:
                    ctx = SortContext(now=now, seed=seed, session_key=user, viewer=user)
                shown = list(method.rank(live, None, events, None, ctx))
            else:
                shown = current
            pool = pools[group_of[user]]
            prob = scenario.groups[group_of[user]].approval_prob
            for pos in _inspect(len(shown), scenario.attention, rng):
                pid = shown[pos]
                views[pid] += 1
                tick_views += 1
                if pid in pool and (user, pid) not in decided:
                    decided.add((user, pid))
                    if _coin(seed, user, pid) < prob:
                        approvals[user].append(pid)
                        events.append(EvaluationEvent(user, pid, 1, now))
        views_per_tick.append(tick_views)
        if live:
            share = tick_views / len(live)
            for p in live:
                fair_share[p.id] += share
        if t + 1 == early_ticks:
            early_views = dict(views)

    final_ctx = SortContext(now=scenario.horizon * spt, seed=seed, session_key=SYSTEM_SESSION)
    final_profile = snapshot()
    final_views = InspectionStats(views)
    final_list = method.rank(live, final_profile, events, final_views, final_ctx)
    quality = {pid: -pos for pos, pid in enumerate(final_list, start=1)}
    ids = list(final_list)
    return SimReport(
        scenario=scenario,
        method=method.name,
        seed=seed,
        final_profile=final_profile,
        final_views=final_views,
        final_list=final_list,
        coverage_series=coverage_series,
        gini_series=gini_series,
        rank_vs_arrival_correlation=spearman([arrival[p] for p in ids], [quality[p] for p in ids]),
        rank_vs_early_exposure_correlation=spearman(
            [early_views.get(p, 0) for p in ids], [quality[p] for p in ids]
        ),
        arrival_ticks=dict(arrival),
        early_views=early_views,
        views_per_tick=views_per_tick,
        fair_share_views=fair_share,
    )


def _run_seeds(seed: int, n_runs: int) -> list[int]:
    return [derive_seed("run", seed, i) for i in range(n_runs)]


def _mean(values):
    values = [v for v in values if v is not None]
    return float(np.mean(values)) if values else None


@dataclass
class TimingSummary:
    method: str
    n_runs: int
    arrival_vs_views: float | None
    arrival_vs_views_per_tick_alive: float | None
    arrival_vs_relative_exposure: float | None
    per_run_views: list = field(default_factory=list)
    per_run_views_per_tick_alive: list = field(default_factory=list)
    per_run_relative_exposure: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def experiment_timing(
    template: Scenario,
    method: MethodSpec | str,
    seed: int = 0,
    n_runs: int = 20,
) -> TimingSummary:
    """Correlate arrival tick with accumulated views, averaged over seeded runs.

    Three exposure measures are reported: total views, views per tick alive,
    and relative exposure (views over an even split of each tick's views
    among the proposals live at that tick). Only the last one is free of
    both lifetime and list-growth effects.
    """
    if not isinstance(template.arrivals, UniformOverHorizon):
        raise ValueError("timing experiment needs UniformOverHorizon arrivals")
    if isinstance(method, str):
        method = MethodSpec(method)
    per_views, per_rate, per_rel = [], [], []
    for run_seed in _run_seeds(seed, n_runs):
        rep = run_simulation(template, method, run_seed)
        ids = sorted(rep.arrival_ticks)
        ticks = [rep.arrival_ticks[p] for p in ids]
        total = [rep.final_views[p] for p in ids]
        rate = [rep.final_views[p] / (template.horizon - rep.arrival_ticks[p]) for p in ids]
        per_views.append(pearson(ticks, total))
        per_rate.append(pearson(ticks, rate))
        per_rel.append(pearson(ticks, [rep.relative_exposure(p) or 0.0 for p in ids]))
    return TimingSummary(
        method=method.name,
        n_runs=n_runs,
        arrival_vs_views=_mean(per_views),
        arrival_vs_views_per_tick_alive=_mean(per_rate),
        arrival_vs_relative_exposure=_mean(per_rel),
        per_run_views=per_views,
        per_run_views_per_tick_alive=per_rate,
        per_run_relative_exposure=per_rel,
    )


@dataclass
class FeedbackSummary:
    n_runs: int
    raw: list
    integrated: list
    share_raw_larger: float | None
    mean_raw: float | None
    mean_integrated: float | None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def experiment_feedback_loop(
    template: Scenario,
    seed: int = 0,
    n_runs: int = 50,
    integrated: IntegratedConfig | None = None,
) -> FeedbackSummary:
    """Compare how much early exposure decides final rank, raw vs integrated.

    Each pair runs approval-count sorting and exposure-adjusted integrated
    sorting on the same seed.
    """
    probs = {g.approval_prob for g in template.groups}
    if len(probs) > 1:
        raise ValueError("feedback experiment needs equal approval_prob across groups")
    cfg = integrated or IntegratedConfig(base=APPROVAL_COUNT)
    if cfg.base != APPROVAL_COUNT:
        raise ValueError("feedback experiment compares against the approval-count base")
    raw_method = MethodSpec("approvals")
    int_method = MethodSpec("integrated", integrated=cfg)
    raw, integ = [], []
    for run_seed in _run_seeds(seed, n_runs):
        raw.append(run_simulation(template, raw_method, run_seed).rank_vs_early_exposure_correlation)
        integ.append(run_simulation(template, int_method, run_seed).rank_vs_early_exposure_correlation)
    pairs = [(r, i) for r, i in zip(raw, integ) if r is not None and i is not None]
    share = sum(r > i for r, i in pairs) / len(pairs) if pairs else None
    return FeedbackSummary(n_runs, raw, integ, share, _mean(raw), _mean(integ))


def default_timing_scenario() -> Scenario:
    return Scenario(
        n_users=200,
        groups=(GroupSpec(200, 20, 0.3),),
        arrivals=UniformOverHorizon(),
        horizon=30,
        sessions_per_tick=20,
        attention=Geometric(0.7),
    )


def default_feedback_scenario() -> Scenario:
    return Scenario(
        n_users=200,
        groups=(GroupSpec(200, 40, 0.3),),
        arrivals=AllAtStart(),
        horizon=30,
        sessions_per_tick=20,
        attention=Geometric(0.7),
    )


def s100_static_scenario() -> Scenario:
    return Scenario(
        n_users=100,
        groups=(GroupSpec(45, 10, 1.0, "x"), GroupSpec(35, 10, 1.0, "y"), GroupSpec(20, 10, 1.0, "z")),
        arrivals=AllAtStart(),
        horizon=1,
        sessions_per_tick=0,
        preseed=True,
    )
