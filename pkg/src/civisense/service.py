"""Service core: every platform operation behind a framework-free facade.

The HTTP layer is a thin adapter over this class. All mutations funnel
through one lock and the single-writer event log; the in-memory view is
always the fold of that log (the same ``StateView.apply`` replay uses), so
live state and replayed state cannot diverge. Handlers validate with the
pure domain functions *before* appending, which keeps invalid operations out
of the log entirely.
"""

from __future__ import annotations

import base64
import hashlib
import hmac
import queue
import secrets
import threading
from collections import deque
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path
from typing import Callable, Optional

from . import errors, geo, trust
from .encoding import utc_now
from .model import (
    ANONYMOUS,
    Category,
    PublicReport,
    ReporterProfile,
    Role,
    StatusState,
    draft_from_wire,
    redact,
)
from .store import BlobStore, EventKind, EventLog, StateView, StreamEvent, replay

MAX_BATCH = 100
MAX_PAGE_SIZE = 100
MIN_CREDENTIAL_LEN = 8
NAME_LIMIT = 64


@dataclass
class ServiceConfig:
    data_dir: Path
    threshold: float = trust.DEFAULT_THRESHOLD
    cell_size: float = geo.DEFAULT_CELL_SIZE
    anon_rate_limit_per_min: int = 10
    session_ttl_hours: float = 24.0
    kdf_iterations: int = 100_000
    fsync: bool = True
    admin_name: Optional[str] = None
    admin_credential: Optional[str] = None


@dataclass(frozen=True)
class Session:
    token: str
    user_id: str
    expiry: datetime


@dataclass
class _RateWindow:
    hits: deque = field(default_factory=deque)


class Service:
    """One process-wide instance owning the log, the view, and sessions."""

    def __init__(self, config: ServiceConfig, clock: Callable[[], datetime] = utc_now):
        self.config = config
        self.clock = clock
        data_dir = Path(config.data_dir)
        self.log = EventLog(data_dir / "events.log", fsync=config.fsync)
        self.blobs = BlobStore(data_dir / "blobs")
        self.view: StateView = replay(self.log.read_all())
        self._lock = threading.RLock()
        self._sessions: dict[str, Session] = {}
        self._rate: dict[str, _RateWindow] = {}
        self._subscribers: list[queue.Queue] = []
        if config.admin_name and config.admin_credential:
            self.ensure_admin(config.admin_name, config.admin_credential)

    def close(self):
        self.log.close()

    # -- event plumbing ---------------------------------------------------

    def _append(self, kind: EventKind, payload: dict) -> list[StreamEvent]:
        """Append, fold into the live view, and publish derived stream events."""
        event = self.log.append(kind, payload, server_time=self.clock())
        before = len(self.view.stream_events)
        self.view.apply(event)
        fresh = self.view.stream_events[before:]
        for q in list(self._subscribers):
            for stream_event in fresh:
                q.put(stream_event)
        return fresh

    # -- identity ----------------------------------------------------------

    def register(self, name: str, credential: str, role: Role = Role.citizen) -> str:
        name = (name or "").strip()
        if not 1 <= len(name) <= NAME_LIMIT:
            raise errors.MalformedBody(f"name must be 1..{NAME_LIMIT} characters")
        if len(credential or "") < MIN_CREDENTIAL_LEN:
            raise errors.WeakCredential(
                f"credential must be at least {MIN_CREDENTIAL_LEN} characters"
            )
        with self._lock:
            if self.view.profile_by_name(name) is not None:
                raise errors.NameTaken(f"name {name!r} is already registered")
            salt = secrets.token_hex(16)
            digest = self._kdf(credential, salt)
            user_id = "u-" + secrets.token_hex(8)
            self._append(
                EventKind.user_registered,
                {
                    "user_id": user_id,
                    "name": name,
                    "role": role.value,
                    "reputation": trust.INITIAL_REPUTATION,
                    "credential": {
                        "salt": salt,
                        "hash": digest,
                        "iterations": self.config.kdf_iterations,
                        "algorithm": "pbkdf2-sha256",
                    },
                },
            )
            return user_id

    def ensure_admin(self, name: str, credential: str) -> Optional[str]:
        """Create the configured admin account if the name is still free."""
        with self._lock:
            if self.view.profile_by_name(name) is not None:
                return None
            return self.register(name, credential, role=Role.admin)

    def login(self, name: str, credential: str) -> Session:
        with self._lock:
            profile = self.view.profile_by_name((name or "").strip())
            if profile is None:
                raise errors.Unauthorized("unknown name or bad credential")
            record = self.view.credentials[profile.user_id]
            candidate = self._kdf(credential or "", record.salt, record.iterations)
            if not hmac.compare_digest(candidate, record.hash):
                raise errors.Unauthorized("unknown name or bad credential")
            session = Session(
                token=secrets.token_hex(16),
                user_id=profile.user_id,
                expiry=self.clock() + timedelta(hours=self.config.session_ttl_hours),
            )
            self._sessions[session.token] = session
            return session

    def authenticate(self, token: Optional[str]) -> ReporterProfile:
        with self._lock:
            session = self._sessions.get(token or "")
            if session is None or session.expiry <= self.clock():
                raise errors.Unauthorized("missing, unknown, or expired token")
            return self.view.profiles[session.user_id]

    def _kdf(self, credential: str, salt: str, iterations: Optional[int] = None) -> str:
        return hashlib.pbkdf2_hmac(
            "sha256",
            credential.encode("utf-8"),
            bytes.fromhex(salt),
            iterations or self.config.kdf_iterations,
        ).hex()

    # -- submission -----------------------------------------------------------

    def submit(
        self,
        draft_wire: dict,
        token: Optional[str] = None,
        source_addr: str = "",
    ) -> tuple[PublicReport, bool]:
        """Accept one draft; returns (public view, created?).

        Idempotent on (scope, client_key): a resubmission returns the original
        report and appends nothing. Anonymous drafts are the only write
        allowed without a session, rate-limited per source address.
        """
        draft_wire = dict(draft_wire or {})
        attachment_data = None
        if isinstance(draft_wire.get("attachment"), dict):
            draft_wire["attachment"] = dict(draft_wire["attachment"])
            attachment_data = draft_wire["attachment"].pop("data", None)
        draft = draft_from_wire(draft_wire)

        if token is not None:
            profile = self.authenticate(token)
            author = ANONYMOUS if draft.anonymous else profile.user_id
        elif draft.anonymous:
            self._check_anonymous_rate(source_addr)
            author = ANONYMOUS
        else:
            raise errors.Unauthorized("registered submissions require a session token")

        with self._lock:
            existing = self.view.lookup_client_key(author, draft.client_key)
            if existing is not None:
                report = self.view.reports[existing]
                return redact(report, self.view.display_name), False

            stored_wire = draft.to_wire()
            if draft.attachment is not None:
                content_hash = draft.attachment.content_hash
                if attachment_data is not None:
                    try:
                        blob = base64.b64decode(attachment_data, validate=True)
                    except Exception:
                        raise errors.BadAttachment("attachment data is not valid base64") from None
                    if len(blob) != draft.attachment.size_bytes:
                        raise errors.BadAttachment(
                            f"attachment is {len(blob)} bytes, draft says {draft.attachment.size_bytes}"
                        )
                    self.blobs.put(blob, expected_hash=content_hash)
                elif not self.blobs.exists(content_hash):
                    raise errors.BadAttachment("attachment data missing and blob unknown")
                stored_wire["attachment"]["media_ref"] = f"blob:{content_hash}"

            report_id = self.view.next_report_id
            self._append(
                EventKind.report_submitted,
                {"report_id": report_id, "author": author, "draft": stored_wire},
            )
            self._evaluate_if_due(report_id)
            report = self.view.reports[report_id]
            return redact(report, self.view.display_name), True

    def _check_anonymous_rate(self, source_addr: str):
        limit = self.config.anon_rate_limit_per_min
        if limit <= 0:
            return
        now = self.clock()
        with self._lock:
            window = self._rate.setdefault(source_addr or "unknown", _RateWindow())
            cutoff = now - timedelta(seconds=60)
            while window.hits and window.hits[0] <= cutoff:
                window.hits.popleft()
            if len(window.hits) >= limit:
                raise errors.RateLimited(
                    f"anonymous submission limit is {limit}/minute per address"
                )
            window.hits.append(now)

    def _evaluate_if_due(self, report_id: int):
        """Record a CommunityValidated event iff the pending score clears τ."""
        state = self.view.trust_states[report_id]
        if state.status.state is not StatusState.pending:
            return
        result = trust.evaluate(state, self.config.threshold)
        if result.validated:
            self._append(EventKind.community_validated, {"report_id": report_id})

    # -- ratings and verdicts ----------------------------------------------------

    def rate(self, token: str, report_id: int, vote: int) -> dict:
        profile = self.authenticate(token)
        with self._lock:
            state = self.view.trust_states.get(report_id)
            if state is None:
                raise errors.UnknownReport(f"no report {report_id}")
            rating = trust.Rating(
                report_id=report_id,
                rater_id=profile.user_id,
                vote=vote,
                rater_reputation_at_vote=profile.reputation,
                time=self.clock(),
            )
            trust.apply_rating(state, rating)  # validate before touching the log
            self._append(
                EventKind.rating_applied,
                {
                    "report_id": report_id,
                    "rater_id": profile.user_id,
                    "vote": vote,
                    "rater_reputation_at_vote": profile.reputation,
                },
            )
            self._evaluate_if_due(report_id)
            state = self.view.trust_states[report_id]
            return {
                "report_id": report_id,
                "score": trust.trust_score(state),
                "status": state.status.to_wire(),
            }

    def admin_verdict(self, token: str, report_id: int, verdict: str) -> dict:
        profile = self.authenticate(token)
        try:
            parsed = trust.Verdict(verdict)
        except ValueError:
            raise errors.MalformedBody(f"verdict must be confirm or reject, got {verdict!r}") from None
        with self._lock:
            state = self.view.trust_states.get(report_id)
            if state is None:
                raise errors.UnknownReport(f"no report {report_id}")
            trust.admin_verdict(state, parsed, profile)  # validate before append
            self._append(
                EventKind.admin_verdict,
                {"report_id": report_id, "verdict": parsed.value, "admin_id": profile.user_id},
            )
            return {
                "report_id": report_id,
                "status": self.view.reports[report_id].status.to_wire(),
            }

    # -- reads ----------------------------------------------------------------

    def _validated_reports(self):
        return [
            r for r in self.view.reports.values() if r.status.state is StatusState.validated
        ]

    def feed(self, page: int = 1, page_size: int = 20) -> list[PublicReport]:
        """Newest first, pending and validated only."""
        if page < 1 or not 1 <= page_size <= MAX_PAGE_SIZE:
            raise errors.BadPage(
                f"page must be >= 1 and page_size in 1..{MAX_PAGE_SIZE}"
            )
        with self._lock:
            visible = [
                r
                for r in self.view.reports.values()
                if r.status.state is not StatusState.rejected
            ]
            visible.sort(key=lambda r: (r.server_time, r.report_id), reverse=True)
            start = (page - 1) * page_size
            return [redact(r, self.view.display_name) for r in visible[start : start + page_size]]

    def map_cells(
        self,
        bbox: geo.BBox,
        cell_size: Optional[float] = None,
        category: Optional[Category] = None,
    ) -> list[geo.MapCell]:
        return self.map_snapshot(bbox, cell_size, category)[0]

    def map_snapshot(
        self,
        bbox: geo.BBox,
        cell_size: Optional[float] = None,
        category: Optional[Category] = None,
    ) -> tuple[list[geo.MapCell], int]:
        """Cells plus the stream cursor they are consistent with.

        Connecting to /stream with since_seq = the returned watermark delivers
        exactly the deltas that post-date this snapshot: no gap, no overlap.
        """
        with self._lock:
            cells = geo.aggregate_map(
                self._validated_reports(),
                bbox,
                cell_size if cell_size is not None else self.config.cell_size,
                frozenset({category}) if category is not None else None,
            )
            return cells, len(self.view.stream_events)

    def stats(self) -> dict:
        with self._lock:
            validated = self._validated_reports()
            return {
                "total_validated": len(validated),
                "distribution": [s.to_wire() for s in geo.category_distribution(validated)],
            }

    def sync(
        self, entries: list, token: Optional[str] = None, source_addr: str = ""
    ) -> list[dict]:
        """Process a batch in order; one bad entry never aborts the rest."""
        if not isinstance(entries, list):
            raise errors.MalformedBody("entries must be a list")
        if len(entries) > MAX_BATCH:
            raise errors.BatchTooLarge(f"batch exceeds {MAX_BATCH} entries")
        outcomes = []
        for entry in entries:
            try:
                public, created = self.submit(entry, token=token, source_addr=source_addr)
                outcomes.append(
                    {
                        "outcome": "created" if created else "duplicate",
                        "report_id": public.report_id,
                    }
                )
            except errors.CiviError as exc:
                outcomes.append({"outcome": "error", "code": exc.code, "message": exc.message})
        return outcomes

    def pending_reports(self, token: str) -> list[dict]:
        """Moderation queue: pending reports oldest-first with their evidence."""
        profile = self.authenticate(token)
        if profile.role is not Role.admin:
            raise errors.NotAdmin("moderation queue is admin-only")
        with self._lock:
            pending = [
                r for r in self.view.reports.values() if r.status.state is StatusState.pending
            ]
            pending.sort(key=lambda r: (r.server_time, r.report_id))
            out = []
            for report in pending:
                state = self.view.trust_states[report.report_id]
                entry = redact(report, self.view.display_name).to_wire()
                entry["score"] = trust.trust_score(state)
                entry["rating_count"] = len(state.ratings)
                out.append(entry)
            return out

    def summary(self, token: str, period: geo.Period, detail: str = "summarized") -> geo.SummaryDocument:
        profile = self.authenticate(token)
        if profile.role is not Role.admin:
            raise errors.NotAdmin("summaries are admin-only")
        with self._lock:
            return geo.build_summary(
                self._validated_reports(),
                period,
                detail,
                cell_size=self.config.cell_size,
                resolve_display_name=self.view.display_name,
            )

    def share_link(self, report_id: int) -> str:
        self.public_report(report_id)
        return f"/r/{report_id}"

    def public_report(self, report_id: int) -> PublicReport:
        with self._lock:
            report = self.view.reports.get(report_id)
            if report is None:
                raise errors.UnknownReport(f"no report {report_id}")
            if report.status.state is StatusState.rejected:
                raise errors.ReportRejected(f"report {report_id} was rejected")
            return redact(report, self.view.display_name)

    # -- stream ---------------------------------------------------------------

    def stream_snapshot(self, since_seq: int = 0) -> list[StreamEvent]:
        with self._lock:
            return [e for e in self.view.stream_events if e.seq > since_seq]

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self._lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue):
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)
