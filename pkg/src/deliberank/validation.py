"""Input checks shared by the estimator wrappers."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .model import ApprovalProfile, Proposal, TieBreak


def check_polarity_values(X) -> None:
    """Raise unless every entry of ``X`` is -1, 0 or +1."""
    values = X.data if sp.issparse(X) else np.asarray(X)
    if values.size and not np.isin(values, (-1, 0, 1)).all():
        bad = values[~np.isin(values, (-1, 0, 1))][0]
        raise ValueError(f"approval matrix entries must be -1, 0 or 1; found {bad!r}")


def check_tiebreak(tiebreak) -> TieBreak:
    try:
        return TieBreak(tiebreak)
    except ValueError:
        raise ValueError(
            f"tiebreak must be one of {[t.value for t in TieBreak]}, got {tiebreak!r}"
        ) from None


def default_ids(prefix: str, n: int) -> list[str]:
    width = max(2, len(str(n)))
    return [f"{prefix}{i:0{width}d}" for i in range(n)]


def check_proposal_ids(ids, n_features: int) -> list[str]:
    ids = [str(i) for i in ids]
    if len(ids) != n_features:
        raise ValueError(f"expected {n_features} proposal ids, got {len(ids)}")
    if len(set(ids)) != len(ids) or not all(ids):
        raise ValueError("proposal ids must be unique and non-empty")
    return ids


def check_timestamps(submitted_at, n_features: int) -> np.ndarray:
    if submitted_at is None:
        return np.zeros(n_features)
    ts = np.asarray(submitted_at, dtype=float)
    if ts.shape != (n_features,):
        raise ValueError(f"submitted_at must have shape ({n_features},), got {ts.shape}")
    if not np.isfinite(ts).all():
        raise ValueError("submitted_at must be finite")
    return ts


def profile_from_matrix(X, proposal_ids, user_ids=None) -> ApprovalProfile:
    """Approval profile from a users x proposals matrix of -1/0/+1 entries."""
    X = sp.csr_matrix(X)
    n_users = X.shape[0]
    user_ids = default_ids("u", n_users) if user_ids is None else [str(u) for u in user_ids]
    approvals: dict[str, list[str]] = {}
    disapprovals: dict[str, list[str]] = {}
    for i in range(n_users):
        start, end = X.indptr[i], X.indptr[i + 1]
        for j, v in zip(X.indices[start:end], X.data[start:end]):
            if v > 0:
                approvals.setdefault(user_ids[i], []).append(proposal_ids[j])
            elif v < 0:
                disapprovals.setdefault(user_ids[i], []).append(proposal_ids[j])
    return ApprovalProfile.from_ballots(proposal_ids, approvals, disapprovals, user_ids)


def proposals_from_ids(proposal_ids, submitted_at=None) -> list[Proposal]:
    ts = check_timestamps(submitted_at, len(proposal_ids))
    return [Proposal(id=pid, submitted_at=float(t)) for pid, t in zip(proposal_ids, ts)]
