"""Canonical wire encoding helpers.

The whole platform serializes through these two primitives so that the event
log, the HTTP API, and the client spool agree byte-for-byte on what a value
looks like: canonical JSON (sorted keys, compact separators, UTF-8) and
RFC 3339 UTC timestamps with microsecond precision and a ``Z`` suffix.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone


def canonical_json(value) -> bytes:
    """Serialize ``value`` to canonical JSON bytes."""
    return json.dumps(
        value, sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


def format_time(ts: datetime) -> str:
    """RFC 3339 UTC with microseconds, e.g. ``2026-08-09T12:00:00.000000Z``."""
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    ts = ts.astimezone(timezone.utc)
    return ts.strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def parse_time(text: str) -> datetime:
    """Parse an RFC 3339 timestamp; naive input is taken as UTC."""
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)
