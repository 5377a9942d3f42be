"""Durable append-only event log and the state derived from replaying it.

The log is the single source of truth: every submission, rating, community
validation, admin verdict, and registration is one record, and the live
in-memory state is always the fold of ``StateView.apply`` over the log, so a
replay reproduces it exactly (reputations and scores bit-for-bit).

On-disk record format (language-neutral, corruption detectable per record):

    4-byte big-endian payload length | payload | 4-byte big-endian CRC32

where the payload is the canonical JSON of the event envelope
``{"kind", "payload", "seq", "server_time"}``. A torn tail (fewer bytes on
disk than the record claims) is a crash artifact and is truncated on open; a
complete record that fails its checks is corruption and replay refuses it.

Attachment blobs never enter the log; they live content-addressed under
``blobs/<first-2-hex>/<sha256>``.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import threading
import zlib
from dataclasses import dataclass, field, replace
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional

from . import errors, trust
from .encoding import canonical_json, format_time, parse_time, utc_now
from .model import (
    ANONYMOUS,
    Report,
    ReporterProfile,
    Role,
    StatusState,
    Provenance,
    ValidationStatus,
    draft_from_wire,
    report_from_parts,
)

_HEADER = struct.Struct(">I")
_CRC = struct.Struct(">I")


class EventKind(str, Enum):
    user_registered = "UserRegistered"
    report_submitted = "ReportSubmitted"
    rating_applied = "RatingApplied"
    community_validated = "CommunityValidated"
    admin_verdict = "AdminVerdict"


@dataclass(frozen=True)
class Event:
    seq: int
    kind: EventKind
    payload: dict
    server_time: datetime

    def to_wire(self) -> dict:
        return {
            "seq": self.seq,
            "kind": self.kind.value,
            "payload": self.payload,
            "server_time": format_time(self.server_time),
        }

    @classmethod
    def from_wire(cls, wire: dict) -> "Event":
        return cls(
            seq=int(wire["seq"]),
            kind=EventKind(wire["kind"]),
            payload=wire["payload"],
            server_time=parse_time(wire["server_time"]),
        )


class EventLog:
    """Single-writer append-only log with gapless sequence numbers.

    Appends are serialized internally and durable (flush + fsync unless
    ``fsync=False``) before ``append`` returns. Opening scans the whole file:
    a torn tail is truncated away, anything else invalid raises CorruptLog.
    """

    def __init__(self, path, fsync: bool = True):
        self.path = Path(path)
        self.fsync = fsync
        self._lock = threading.Lock()
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.touch(exist_ok=True)
        good_end, last_seq = self._scan()
        if good_end < self.path.stat().st_size:
            with open(self.path, "r+b") as fh:
                fh.truncate(good_end)
        self._fh = open(self.path, "ab")
        self.next_seq = last_seq + 1

    def _scan(self) -> tuple[int, int]:
        """Validate existing records; return (end of last good record, last seq)."""
        good_end = 0
        last_seq = 0
        with open(self.path, "rb") as fh:
            data = fh.read()
        size = len(data)
        pos = 0
        while pos < size:
            if pos + _HEADER.size > size:
                break  # torn header
            (length,) = _HEADER.unpack_from(data, pos)
            end = pos + _HEADER.size + length + _CRC.size
            if end > size:
                break  # torn payload or checksum
            payload = data[pos + _HEADER.size : pos + _HEADER.size + length]
            (crc,) = _CRC.unpack_from(data, end - _CRC.size)
            if zlib.crc32(payload) != crc:
                raise errors.CorruptLog(last_seq + 1, f"bad checksum at offset {pos}")
            try:
                envelope = json.loads(payload.decode("utf-8"))
                event = Event.from_wire(envelope)
            except (ValueError, KeyError, TypeError):
                raise errors.CorruptLog(last_seq + 1, f"undecodable record at offset {pos}") from None
            if event.seq != last_seq + 1:
                raise errors.CorruptLog(
                    last_seq + 1, f"sequence gap: expected {last_seq + 1}, found {event.seq}"
                )
            last_seq = event.seq
            good_end = end
            pos = end
        return good_end, last_seq

    def append(self, kind: EventKind, payload: dict, server_time: Optional[datetime] = None) -> Event:
        with self._lock:
            event = Event(
                seq=self.next_seq,
                kind=kind,
                payload=payload,
                server_time=server_time or utc_now(),
            )
            body = canonical_json(event.to_wire())
            record = _HEADER.pack(len(body)) + body + _CRC.pack(zlib.crc32(body))
            try:
                self._fh.write(record)
                self._fh.flush()
                if self.fsync:
                    os.fsync(self._fh.fileno())
            except OSError as exc:
                raise errors.StorageFailure(f"append failed: {exc}") from exc
            self.next_seq += 1
            return event

    def read_all(self) -> list[Event]:
        """Re-read every committed record from disk (fresh handle)."""
        events = []
        with open(self.path, "rb") as fh:
            data = fh.read()
        pos = 0
        while pos + _HEADER.size <= len(data):
            (length,) = _HEADER.unpack_from(data, pos)
            end = pos + _HEADER.size + length + _CRC.size
            if end > len(data):
                break
            body = data[pos + _HEADER.size : pos + _HEADER.size + length]
            events.append(Event.from_wire(json.loads(body.decode("utf-8"))))
            pos = end
        return events

    def close(self):
        self._fh.close()


# -- derived state ---------------------------------------------------------------


@dataclass(frozen=True)
class CredentialRecord:
    salt: str
    hash: str
    iterations: int
    algorithm: str = "pbkdf2-sha256"


@dataclass(frozen=True)
class StreamEvent:
    """One redacted real-time message derived deterministically from the log.

    ``seq`` is the gapless resume cursor over the derived stream; ``log_seq``
    is the log record that caused it. Payloads never carry author identity.
    """

    seq: int
    log_seq: int
    kind: str  # report-validated | map-cell-updated | stats-updated
    data: dict

    def to_wire(self) -> dict:
        return {"seq": self.seq, "log_seq": self.log_seq, "kind": self.kind, **self.data}


@dataclass
class StateView:
    """Current state folded from the event log.

    ``apply`` is the only mutation path, used identically by the live service
    and by replay, which is what makes replay reproduce live state exactly.
    """

    profiles: dict[str, ReporterProfile] = field(default_factory=dict)
    names: dict[str, str] = field(default_factory=dict)
    credentials: dict[str, CredentialRecord] = field(default_factory=dict)
    reports: dict[int, Report] = field(default_factory=dict)
    trust_states: dict[int, trust.TrustState] = field(default_factory=dict)
    client_keys: dict[tuple[str, str], int] = field(default_factory=dict)
    stream_events: list[StreamEvent] = field(default_factory=list)
    next_report_id: int = 1

    def lookup_client_key(self, scope: str, client_key: str) -> Optional[int]:
        """Report created by an earlier submission with this (scope, key), if any."""
        return self.client_keys.get((scope, client_key))

    def profile_by_name(self, name: str) -> Optional[ReporterProfile]:
        user_id = self.names.get(name)
        return self.profiles.get(user_id) if user_id else None

    def display_name(self, user_id: str) -> str:
        profile = self.profiles.get(user_id)
        return profile.display_name if profile else user_id

    def _bump_reputation(self, user_id: str, delta: float):
        profile = self.profiles.get(user_id)
        if profile is None:
            return
        self.profiles[user_id] = replace(
            profile, reputation=trust.clamp_reputation(profile.reputation + delta)
        )

    def _emit(self, log_seq: int, kind: str, data: dict):
        self.stream_events.append(
            StreamEvent(seq=len(self.stream_events) + 1, log_seq=log_seq, kind=kind, data=data)
        )

    def _emit_validation(self, event: Event, report: Report):
        loc = report.location
        cats = sorted(c.value for c in report.categories)
        base = {"report_id": report.report_id, "categories": cats, "lat": loc.lat, "lon": loc.lon}
        self._emit(event.seq, "report-validated", dict(base, provenance=report.status.provenance.value))
        self._emit(event.seq, "map-cell-updated", dict(base, delta=1))
        self._emit(event.seq, "stats-updated", {"reason": "report-validated", "report_id": report.report_id})

    def _emit_removal(self, event: Event, report: Report):
        loc = report.location
        cats = sorted(c.value for c in report.categories)
        self._emit(
            event.seq,
            "map-cell-updated",
            {"report_id": report.report_id, "categories": cats, "lat": loc.lat, "lon": loc.lon, "delta": -1},
        )
        self._emit(event.seq, "stats-updated", {"reason": "report-rejected", "report_id": report.report_id})

    def apply(self, event: Event):
        """Fold one event into the view (raises on inconsistent logs)."""
        if event.kind is EventKind.user_registered:
            p = event.payload
            user_id = p["user_id"]
            profile = ReporterProfile(
                user_id=user_id,
                display_name=p["name"],
                reputation=float(p["reputation"]),
                role=Role(p["role"]),
            )
            self.profiles[user_id] = profile
            self.names[profile.display_name] = user_id
            cred = p["credential"]
            self.credentials[user_id] = CredentialRecord(
                salt=cred["salt"],
                hash=cred["hash"],
                iterations=int(cred["iterations"]),
                algorithm=cred.get("algorithm", "pbkdf2-sha256"),
            )

        elif event.kind is EventKind.report_submitted:
            p = event.payload
            draft = draft_from_wire(p["draft"])
            report_id = int(p["report_id"])
            author = p["author"]
            report = report_from_parts(report_id, draft, author, event.server_time)
            self.reports[report_id] = report
            if author == ANONYMOUS:
                weight = trust.ANONYMOUS_AUTHOR_WEIGHT
            else:
                weight = self.profiles[author].reputation
            self.trust_states[report_id] = trust.TrustState(
                report_id=report_id,
                author=author,
                author_reputation_at_submit=weight,
            )
            self.client_keys[(author, draft.client_key)] = report_id
            self.next_report_id = max(self.next_report_id, report_id + 1)

        elif event.kind is EventKind.rating_applied:
            p = event.payload
            report_id = int(p["report_id"])
            state = self.trust_states[report_id]
            rating = trust.Rating(
                report_id=report_id,
                rater_id=p["rater_id"],
                vote=int(p["vote"]),
                rater_reputation_at_vote=float(p["rater_reputation_at_vote"]),
                time=event.server_time,
            )
            self.trust_states[report_id] = trust.apply_rating(state, rating)

        elif event.kind is EventKind.community_validated:
            report_id = int(event.payload["report_id"])
            state = self.trust_states[report_id]
            status = ValidationStatus(StatusState.validated, Provenance.community)
            self.trust_states[report_id] = replace(state, status=status)
            self.reports[report_id] = self.reports[report_id].with_status(status)
            if state.author != ANONYMOUS:
                self._bump_reputation(state.author, trust.VALIDATED_AUTHOR_DELTA)
            self._emit_validation(event, self.reports[report_id])

        elif event.kind is EventKind.admin_verdict:
            p = event.payload
            report_id = int(p["report_id"])
            state = self.trust_states[report_id]
            was = state.status.state
            admin = self.profiles[p["admin_id"]]
            result = trust.admin_verdict(state, trust.Verdict(p["verdict"]), admin)
            self.trust_states[report_id] = result.state
            self.reports[report_id] = self.reports[report_id].with_status(result.state.status)
            for user_id, delta in result.reputation_deltas.items():
                self._bump_reputation(user_id, delta)
            now = result.state.status.state
            if was is StatusState.pending and now is StatusState.validated:
                self._emit_validation(event, self.reports[report_id])
            elif was is StatusState.validated and now is StatusState.rejected:
                self._emit_removal(event, self.reports[report_id])

        else:  # pragma: no cover - enum is closed
            raise errors.StorageFailure(f"unknown event kind {event.kind!r}")


def replay(events: Iterable[Event]) -> StateView:
    """Fold a log into a fresh StateView; deterministic for equal logs."""
    view = StateView()
    expected = 1
    for event in events:
        if event.seq != expected:
            raise errors.CorruptLog(expected, f"sequence gap at {event.seq}")
        try:
            view.apply(event)
        except errors.CorruptLog:
            raise
        except Exception as exc:
            raise errors.CorruptLog(event.seq, f"inconsistent event {event.seq}: {exc}") from exc
        expected += 1
    return view


# -- attachment blobs --------------------------------------------------------------


class BlobStore:
    """Content-addressed attachment storage: ``blobs/<first-2-hex>/<sha256>``."""

    def __init__(self, root):
        self.root = Path(root)

    def path_for(self, content_hash: str) -> Path:
        return self.root / content_hash[:2] / content_hash

    def put(self, data: bytes, expected_hash: Optional[str] = None) -> str:
        digest = hashlib.sha256(data).hexdigest()
        if expected_hash is not None and digest != expected_hash:
            raise errors.BadAttachment(
                f"content hash mismatch: body digests to {digest}, draft says {expected_hash}"
            )
        target = self.path_for(digest)
        if not target.exists():
            target.parent.mkdir(parents=True, exist_ok=True)
            tmp = target.with_suffix(".tmp")
            tmp.write_bytes(data)
            os.replace(tmp, target)
        return digest

    def get(self, content_hash: str) -> bytes:
        target = self.path_for(content_hash)
        if not target.exists():
            raise errors.StorageFailure(f"missing blob {content_hash}")
        return target.read_bytes()

    def exists(self, content_hash: str) -> bool:
        return self.path_for(content_hash).exists()
