"""scikit-learn compatible wrappers around the sorting methods.

Rankers take a users x proposals matrix with +1 for an approval, -1 for a
disapproval and 0 otherwise. ``fit`` computes the list; ``transform``
reorders columns into list order, so a ranker can sit in a ``Pipeline``
in front of anything that consumes proposal columns.

>>> import numpy as np
>>> X = np.array([[1, 1, 0], [1, 0, 0], [0, 0, 1]])
>>> SeqPAVRanker().fit(X).get_feature_names_out().tolist()
['p00', 'p02', 'p01']
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .baseline import sort_by_approvals, sort_by_ratio
from .holistic import rank_greedy_coverage, rank_seq_pav, rank_seq_phragmen
from .integrated import IntegratedConfig, integrated_rank
from .model import InspectionStats
from .validation import (
    check_polarity_values,
    check_proposal_ids,
    check_tiebreak,
    default_ids,
    profile_from_matrix,
    proposals_from_ids,
)

__all__ = [
    "ApprovalCountRanker",
    "RatioRanker",
    "SeqPAVRanker",
    "SeqPhragmenRanker",
    "GreedyCoverageRanker",
    "IntegratedRanker",
]


class _BaseRanker(TransformerMixin, BaseEstimator):
    """Shared fit/transform plumbing.

    Fitted attributes
    -----------------
    ranking_ : RankedList
    order_ : ndarray of int
        Column indices in list order.
    positions_ : ndarray of int
        1-based list position of every column.
    proposal_ids_ : ndarray of str
    """

    def _rank(self, profile, proposals, tiebreak, **fit_params):
        raise NotImplementedError

    def fit(self, X, y=None, proposal_ids=None, submitted_at=None, **fit_params):
        X = validate_data(self, X, accept_sparse="csr", dtype=None, reset=True)
        check_polarity_values(X)
        tiebreak = check_tiebreak(self.tiebreak)
        n = X.shape[1]
        if proposal_ids is not None:
            ids = check_proposal_ids(proposal_ids, n)
        elif hasattr(self, "feature_names_in_"):
            ids = check_proposal_ids(self.feature_names_in_, n)
        else:
            ids = default_ids("p", n)
        profile = profile_from_matrix(X, ids)
        proposals = proposals_from_ids(ids, submitted_at)
        self.ranking_ = self._rank(profile, proposals, tiebreak, **fit_params)
        column = {pid: j for j, pid in enumerate(ids)}
        self.order_ = np.array([column[p] for p in self.ranking_.order], dtype=int)
        self.positions_ = np.empty(n, dtype=int)
        self.positions_[self.order_] = np.arange(1, n + 1)
        self.proposal_ids_ = np.asarray(ids, dtype=object)
        return self

    def transform(self, X):
        check_is_fitted(self)
        X = validate_data(self, X, accept_sparse="csr", dtype=None, reset=False)
        return X[:, self.order_]

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self)
        return self.proposal_ids_[self.order_]


class ApprovalCountRanker(_BaseRanker):
    def __init__(self, tiebreak="id"):
        self.tiebreak = tiebreak

    def _rank(self, profile, proposals, tiebreak):
        return sort_by_approvals(profile, proposals, tiebreak)


class RatioRanker(_BaseRanker):
    def __init__(self, prior_approvals=1.0, prior_total=2.0, tiebreak="id"):
        self.prior_approvals = prior_approvals
        self.prior_total = prior_total
        self.tiebreak = tiebreak

    def _rank(self, profile, proposals, tiebreak):
        return sort_by_ratio(profile, proposals, self.prior_approvals, self.prior_total, tiebreak)


class SeqPAVRanker(_BaseRanker):
    def __init__(self, tiebreak="id"):
        self.tiebreak = tiebreak

    def _rank(self, profile, proposals, tiebreak):
        return rank_seq_pav(profile, proposals, tiebreak)


class SeqPhragmenRanker(_BaseRanker):
    def __init__(self, tiebreak="id"):
        self.tiebreak = tiebreak

    def _rank(self, profile, proposals, tiebreak):
        return rank_seq_phragmen(profile, proposals, tiebreak)


class GreedyCoverageRanker(_BaseRanker):
    def __init__(self, reset_on_saturation=True, tiebreak="id"):
        self.reset_on_saturation = reset_on_saturation
        self.tiebreak = tiebreak

    def _rank(self, profile, proposals, tiebreak):
        return rank_greedy_coverage(profile, proposals, tiebreak, self.reset_on_saturation)


class IntegratedRanker(_BaseRanker):
    """Exposure-aware ranking; pass per-column view counts as ``views`` to fit."""

    def __init__(self, min_views=10, z=1.96, base="approvals", tag_window=1, author_cap=None, tiebreak="id"):
        self.min_views = min_views
        self.z = z
        self.base = base
        self.tag_window = tag_window
        self.author_cap = author_cap
        self.tiebreak = tiebreak

    def _rank(self, profile, proposals, tiebreak, views=None):
        cfg = IntegratedConfig(self.min_views, self.z, self.base, self.tag_window, self.author_cap)
        if views is None:
            stats = InspectionStats()
        else:
            views = np.asarray(views)
            if views.shape != (len(proposals),):
                raise ValueError(f"views must have shape ({len(proposals)},), got {views.shape}")
            stats = InspectionStats({p.id: int(v) for p, v in zip(proposals, views)})
        return integrated_rank(profile, proposals, stats, cfg, tiebreak)
