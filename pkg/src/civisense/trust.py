"""Trust engine: report scores, the validation state machine, reputation updates.

Everything here is a pure function over immutable values; the service layer
owns persistence and applies the returned reputation deltas. The score of a
report is always recomputed left-to-right from its parts (author weight plus
each rating's signed, reputation-weighted vote), never maintained
incrementally, so a replayed log reproduces every score bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import datetime
from enum import Enum

from . import errors
from .model import (
    ANONYMOUS,
    Provenance,
    ReporterProfile,
    Role,
    StatusState,
    ValidationStatus,
)

DEFAULT_THRESHOLD = 1.5
INITIAL_REPUTATION = 0.5
#: Fixed author weight for reports submitted under the anonymous principal.
ANONYMOUS_AUTHOR_WEIGHT = 0.3

VALIDATED_AUTHOR_DELTA = 0.05
REJECTED_AUTHOR_DELTA = -0.10
RATER_AGREE_DELTA = 0.02
RATER_DISAGREE_DELTA = -0.02


class Verdict(str, Enum):
    confirm = "confirm"
    reject = "reject"


@dataclass(frozen=True)
class Rating:
    """One user's support (+1) or dispute (-1) on one report.

    ``rater_reputation_at_vote`` is captured when the vote lands; later
    reputation changes never retroactively move already-cast votes.
    """

    report_id: int
    rater_id: str
    vote: int
    rater_reputation_at_vote: float
    time: datetime


@dataclass(frozen=True)
class TrustState:
    """Everything needed to recompute one report's trust score."""

    report_id: int
    author: str
    author_reputation_at_submit: float
    ratings: tuple[Rating, ...] = ()
    status: ValidationStatus = ValidationStatus()

    @property
    def score(self) -> float:
        return trust_score(self)


@dataclass(frozen=True)
class EvaluationResult:
    state: TrustState
    validated: bool
    reputation_deltas: dict[str, float]


@dataclass(frozen=True)
class VerdictResult:
    state: TrustState
    reputation_deltas: dict[str, float]


def clamp_reputation(value: float) -> float:
    return min(1.0, max(0.0, value))


def trust_score(state: TrustState) -> float:
    """Author weight at submit plus the reputation-weighted sum of votes."""
    score = state.author_reputation_at_submit
    for rating in state.ratings:
        score += rating.vote * rating.rater_reputation_at_vote
    return score


def apply_rating(state: TrustState, rating: Rating) -> TrustState:
    """Add or replace one rater's vote; never touches the status.

    A rater voting again replaces their earlier vote in place (latest vote
    wins, one rating per rater). Authors cannot rate their own reports, and
    rejected reports take no further community action.
    """
    if rating.vote not in (1, -1):
        raise errors.BadVote(f"vote must be +1 or -1, got {rating.vote}")
    if rating.rater_id == state.author:
        raise errors.SelfRating("authors cannot rate their own reports")
    if state.status.state is StatusState.rejected:
        raise errors.ReportRejected("rejected reports cannot be rated")
    ratings = list(state.ratings)
    for i, existing in enumerate(ratings):
        if existing.rater_id == rating.rater_id:
            ratings[i] = rating
            break
    else:
        ratings.append(rating)
    return replace(state, ratings=tuple(ratings))


def evaluate(state: TrustState, threshold: float = DEFAULT_THRESHOLD) -> EvaluationResult:
    """Community evaluation: validate iff the score has reached ``threshold``.

    Community evaluation never rejects; a below-threshold report simply stays
    pending. Validation rewards the author (clamped into [0, 1]); anonymous
    authors have no profile, so no delta is emitted for them.
    """
    if state.status.state is not StatusState.pending:
        raise errors.NotPending(f"report {state.report_id} is not pending")
    if trust_score(state) >= threshold:
        new_state = replace(
            state,
            status=ValidationStatus(StatusState.validated, Provenance.community),
        )
        deltas = {}
        if state.author != ANONYMOUS:
            deltas[state.author] = VALIDATED_AUTHOR_DELTA
        return EvaluationResult(state=new_state, validated=True, reputation_deltas=deltas)
    return EvaluationResult(state=state, validated=False, reputation_deltas={})


def admin_verdict(
    state: TrustState, verdict: Verdict, admin: ReporterProfile
) -> VerdictResult:
    """Apply an admin's confirm/reject, overriding community status.

    Confirm moves pending (or community-validated) reports to
    validated(admin) and rewards the author; reject moves pending or
    validated reports to rejected(admin) and penalizes the author. Raters
    whose vote sign agrees with the verdict gain, disagreeing raters lose.
    Rejected is terminal: no verdict applies after it.
    """
    if admin.role is not Role.admin:
        raise errors.NotAdmin(f"user {admin.user_id} lacks the admin role")
    if state.status.state is StatusState.rejected:
        raise errors.ReportRejected(f"report {state.report_id} is already rejected")

    if verdict is Verdict.confirm:
        new_status = ValidationStatus(StatusState.validated, Provenance.admin)
        author_delta = VALIDATED_AUTHOR_DELTA
        agreeing_vote = 1
    else:
        new_status = ValidationStatus(StatusState.rejected, Provenance.admin)
        author_delta = REJECTED_AUTHOR_DELTA
        agreeing_vote = -1

    deltas: dict[str, float] = {}
    if state.author != ANONYMOUS:
        deltas[state.author] = author_delta
    for rating in state.ratings:
        if rating.vote == agreeing_vote:
            deltas[rating.rater_id] = RATER_AGREE_DELTA
        else:
            deltas[rating.rater_id] = RATER_DISAGREE_DELTA

    return VerdictResult(state=replace(state, status=new_status), reputation_deltas=deltas)
