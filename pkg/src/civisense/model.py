"""Core domain model: reports, identities, categories, locations.

All types are immutable values. Validation lives here so every tier (server,
client, fixtures) applies the same rules; wire conversion is ``to_wire`` /
``from_*_wire`` pairs producing the canonical JSON field layout.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from datetime import datetime
from enum import Enum
from typing import Callable, Optional, Union

from .encoding import format_time, parse_time
from . import errors

TEXT_LIMIT = 2000
CLIENT_KEY_LIMIT = 64
DIGEST_HEX_LEN = 64  # sha256

#: Shared author marker for anonymous submissions. Never a registered user id.
ANONYMOUS = "anonymous"


class Category(str, Enum):
    """Closed pollution category set; ``other`` absorbs the long tail."""

    garbage = "garbage"
    air = "air"
    water = "water"
    noise = "noise"
    light = "light"
    visual = "visual"
    other = "other"


#: Accepted spellings beyond the canonical labels.
CATEGORY_ALIASES = {"waste": Category.garbage}


def parse_category(label: str) -> Category:
    """Case-insensitive parse over the closed set; unknown labels raise."""
    key = label.strip().lower()
    if key in CATEGORY_ALIASES:
        return CATEGORY_ALIASES[key]
    try:
        return Category(key)
    except ValueError:
        raise errors.UnknownCategory(f"unknown category {label!r}") from None


class LocationSource(str, Enum):
    gps = "gps"
    network = "network"
    manual = "manual"


class AttachmentKind(str, Enum):
    photo = "photo"
    video = "video"


class Role(str, Enum):
    citizen = "citizen"
    admin = "admin"


class StatusState(str, Enum):
    pending = "pending"
    validated = "validated"
    rejected = "rejected"


class Provenance(str, Enum):
    community = "community"
    admin = "admin"


@dataclass(frozen=True)
class GeoPoint:
    """WGS84 coordinates; the source is recorded verbatim, never applied."""

    lat: float
    lon: float
    source: LocationSource = LocationSource.gps

    def to_wire(self) -> dict:
        return {"lat": self.lat, "lon": self.lon, "source": self.source.value}


@dataclass(frozen=True)
class AttachmentMeta:
    kind: AttachmentKind
    content_hash: str
    size_bytes: int
    media_ref: str = ""

    def to_wire(self) -> dict:
        return {
            "kind": self.kind.value,
            "content_hash": self.content_hash,
            "size_bytes": self.size_bytes,
            "media_ref": self.media_ref,
        }


@dataclass(frozen=True)
class ReportDraft:
    """A submission as the client produced it, before the server accepts it."""

    categories: frozenset[Category]
    location: GeoPoint
    text: str
    client_key: str
    client_time: datetime
    attachment: Optional[AttachmentMeta] = None
    anonymous: bool = False

    def to_wire(self) -> dict:
        return {
            "categories": sorted(c.value for c in self.categories),
            "location": self.location.to_wire(),
            "text": self.text,
            "attachment": self.attachment.to_wire() if self.attachment else None,
            "anonymous": self.anonymous,
            "client_key": self.client_key,
            "client_time": format_time(self.client_time),
        }


@dataclass(frozen=True)
class ValidationStatus:
    """Lifecycle state plus who moved it there (absent while pending)."""

    state: StatusState = StatusState.pending
    provenance: Optional[Provenance] = None

    def to_wire(self) -> dict:
        wire = {"state": self.state.value}
        if self.provenance is not None:
            wire["provenance"] = self.provenance.value
        return wire


PENDING = ValidationStatus(StatusState.pending, None)


@dataclass(frozen=True)
class Report:
    """An accepted report. ``author`` is a user id or the anonymous marker."""

    report_id: int
    categories: frozenset[Category]
    location: GeoPoint
    text: str
    attachment: Optional[AttachmentMeta]
    anonymous: bool
    client_key: str
    client_time: datetime
    author: str
    server_time: datetime
    status: ValidationStatus

    def with_status(self, status: ValidationStatus) -> "Report":
        return replace(self, status=status)


@dataclass(frozen=True)
class ReporterProfile:
    user_id: str
    display_name: str
    reputation: float
    role: Role = Role.citizen


@dataclass(frozen=True)
class PublicReport:
    """The redacted view safe to hand to any consumer.

    ``author`` is a display name, or the anonymous marker; user ids,
    credentials, and media locators never appear here.
    """

    report_id: int
    author: str
    categories: tuple[Category, ...]
    location: GeoPoint
    text: str
    attachment_kind: Optional[AttachmentKind]
    status: ValidationStatus
    server_time: datetime

    def to_wire(self) -> dict:
        return {
            "report_id": self.report_id,
            "author": self.author,
            "categories": [c.value for c in self.categories],
            "location": self.location.to_wire(),
            "text": self.text,
            "attachment": (
                {"kind": self.attachment_kind.value} if self.attachment_kind else None
            ),
            "status": self.status.to_wire(),
            "server_time": format_time(self.server_time),
        }


def redact(
    report: Union[Report, PublicReport],
    resolve_display_name: Callable[[str], str] = lambda user_id: user_id,
) -> PublicReport:
    """Project a report onto its public view.

    Anonymous reports surface the shared anonymous marker; registered ones
    surface the author's display name via ``resolve_display_name``. Applying
    ``redact`` to an already-public view is the identity.
    """
    if isinstance(report, PublicReport):
        return report
    if report.anonymous or report.author == ANONYMOUS:
        author = ANONYMOUS
    else:
        author = resolve_display_name(report.author)
    return PublicReport(
        report_id=report.report_id,
        author=author,
        categories=tuple(sorted(report.categories, key=lambda c: c.value)),
        location=report.location,
        text=report.text,
        attachment_kind=report.attachment.kind if report.attachment else None,
        status=report.status,
        server_time=report.server_time,
    )


# -- validation ----------------------------------------------------------------

_HEX_DIGEST = re.compile(r"^[0-9a-f]{%d}$" % DIGEST_HEX_LEN)


def validate_draft(draft: ReportDraft) -> ReportDraft:
    """Check every draft invariant; return the draft unchanged if all hold.

    Violations raise the error named after the first offending field, in
    declaration order: categories, location, text, attachment, client_key.
    """
    if not draft.categories:
        raise errors.EmptyCategories("at least one category is required")
    if not (-90.0 <= draft.location.lat <= 90.0):
        raise errors.BadCoordinates(f"lat {draft.location.lat} outside [-90, 90]")
    if not (-180.0 <= draft.location.lon <= 180.0):
        raise errors.BadCoordinates(f"lon {draft.location.lon} outside [-180, 180]")
    if len(draft.text) > TEXT_LIMIT:
        raise errors.TextTooLong(f"text length {len(draft.text)} exceeds {TEXT_LIMIT}")
    if draft.attachment is not None:
        att = draft.attachment
        if att.size_bytes <= 0:
            raise errors.BadAttachment("attachment size_bytes must be positive")
        if not _HEX_DIGEST.match(att.content_hash):
            raise errors.BadAttachment(
                f"content_hash must be {DIGEST_HEX_LEN} lowercase hex chars"
            )
    if not 1 <= len(draft.client_key) <= CLIENT_KEY_LIMIT:
        raise errors.BadClientKey(
            f"client_key length must be 1..{CLIENT_KEY_LIMIT}"
        )
    return draft


# -- wire parsing ----------------------------------------------------------------

def _require(wire: dict, field: str):
    if field not in wire:
        raise errors.MalformedBody(f"missing field {field!r}")
    return wire[field]


def geopoint_from_wire(wire: dict) -> GeoPoint:
    try:
        lat = float(_require(wire, "lat"))
        lon = float(_require(wire, "lon"))
    except (TypeError, ValueError):
        raise errors.BadCoordinates("lat/lon must be numbers") from None
    source_label = wire.get("source", LocationSource.gps.value)
    try:
        source = LocationSource(str(source_label).strip().lower())
    except ValueError:
        raise errors.BadSource(f"unknown location source {source_label!r}") from None
    return GeoPoint(lat=lat, lon=lon, source=source)


def attachment_from_wire(wire: dict) -> AttachmentMeta:
    kind_label = _require(wire, "kind")
    try:
        kind = AttachmentKind(str(kind_label).strip().lower())
    except ValueError:
        raise errors.BadAttachment(f"unknown attachment kind {kind_label!r}") from None
    try:
        size = int(_require(wire, "size_bytes"))
    except (TypeError, ValueError):
        raise errors.BadAttachment("size_bytes must be an integer") from None
    content_hash = str(_require(wire, "content_hash"))
    return AttachmentMeta(
        kind=kind,
        content_hash=content_hash,
        size_bytes=size,
        media_ref=str(wire.get("media_ref", "")),
    )


def draft_from_wire(wire: dict) -> ReportDraft:
    """Decode and validate a draft from its wire dict."""
    if not isinstance(wire, dict):
        raise errors.MalformedBody("draft must be an object")
    raw_categories = _require(wire, "categories")
    if not isinstance(raw_categories, (list, tuple, set, frozenset)):
        raise errors.MalformedBody("categories must be a list")
    categories = frozenset(parse_category(str(label)) for label in raw_categories)
    location = geopoint_from_wire(_require(wire, "location"))
    text = wire.get("text", "")
    if not isinstance(text, str):
        raise errors.MalformedBody("text must be a string")
    raw_attachment = wire.get("attachment")
    attachment = attachment_from_wire(raw_attachment) if raw_attachment else None
    client_key = str(_require(wire, "client_key"))
    raw_time = wire.get("client_time")
    try:
        client_time = parse_time(str(raw_time)) if raw_time else None
    except ValueError:
        raise errors.MalformedBody(f"bad client_time {raw_time!r}") from None
    if client_time is None:
        raise errors.MalformedBody("missing field 'client_time'")
    draft = ReportDraft(
        categories=categories,
        location=location,
        text=text,
        attachment=attachment,
        anonymous=bool(wire.get("anonymous", False)),
        client_key=client_key,
        client_time=client_time,
    )
    return validate_draft(draft)


def report_from_parts(
    report_id: int,
    draft: ReportDraft,
    author: str,
    server_time: datetime,
    status: ValidationStatus = PENDING,
) -> Report:
    """Build the accepted Report; anonymous drafts always get the shared marker."""
    return Report(
        report_id=report_id,
        categories=draft.categories,
        location=draft.location,
        text=draft.text,
        attachment=draft.attachment,
        anonymous=draft.anonymous,
        client_key=draft.client_key,
        client_time=draft.client_time,
        author=ANONYMOUS if draft.anonymous else author,
        server_time=server_time,
        status=status,
    )
