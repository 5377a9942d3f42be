"""Reporter command-line client.

Stands in for the mobile app: login, submit reports (with optional photo or
video attachments), rate and browse, and keep an offline queue that syncs
later. Exit codes: 0 success, 1 validation/permission error, 2 network error.

The queue is a spool directory with one JSON file per entry, updated by
atomic rename, so a killed client never loses or double-submits a draft:
entry files carry the idempotency key the server dedupes on.
"""

from __future__ import annotations

import argparse
import base64
import hashlib
import json
import os
import secrets
import sys
from pathlib import Path
from typing import Optional

import httpx

from . import errors
from .client import ApiClient
from .encoding import format_time, utc_now
from .model import draft_from_wire, parse_category

EXIT_OK, EXIT_ERROR, EXIT_NETWORK = 0, 1, 2
DEFAULT_SERVER = "http://127.0.0.1:8025"
VIDEO_SUFFIXES = {".mp4", ".mov", ".avi", ".mkv", ".webm"}


class ClientState:
    """Config file (server URL + cached token) plus the spool directory."""

    def __init__(self, config_path: Path):
        self.config_path = Path(config_path)
        self.home = self.config_path.parent
        self.data: dict = {}
        if self.config_path.exists():
            self.data = json.loads(self.config_path.read_text("utf-8"))

    def save(self):
        self.home.mkdir(parents=True, exist_ok=True)
        tmp = self.config_path.with_suffix(".tmp")
        tmp.write_text(json.dumps(self.data, indent=2) + "\n", "utf-8")
        os.chmod(tmp, 0o600)  # token lives here
        os.replace(tmp, self.config_path)

    @property
    def spool_dir(self) -> Path:
        return self.home / "spool"


# -- offline spool -------------------------------------------------------------


def _entry_path(spool: Path, client_key: str) -> Path:
    return spool / f"{client_key}.json"


def _write_entry(spool: Path, entry: dict):
    spool.mkdir(parents=True, exist_ok=True)
    target = _entry_path(spool, entry["client_key"])
    tmp = target.with_suffix(".tmp")
    tmp.write_text(json.dumps(entry, indent=2) + "\n", "utf-8")
    os.replace(tmp, target)


def load_entries(spool: Path) -> list[dict]:
    if not spool.is_dir():
        return []
    entries = [
        json.loads(path.read_text("utf-8")) for path in spool.glob("*.json")
    ]
    entries.sort(key=lambda e: (e["queued_at"], e["client_key"]))
    return entries


def enqueue(spool: Path, draft_wire: dict) -> int:
    """Persist one draft; returns its 1-based queue position."""
    entry = {
        "client_key": draft_wire["client_key"],
        "queued_at": format_time(utc_now()),
        "state": "queued",
        "draft": draft_wire,
    }
    _write_entry(spool, entry)
    return sum(1 for e in load_entries(spool) if e["state"] == "queued")


# -- helpers ---------------------------------------------------------------------


def _emit(args, payload, human: str):
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    elif human:
        print(human)


def _attachment_wire(path_str: str) -> dict:
    path = Path(path_str)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise errors.BadAttachment(f"cannot read attachment {path}: {exc}") from None
    kind = "video" if path.suffix.lower() in VIDEO_SUFFIXES else "photo"
    return {
        "kind": kind,
        "content_hash": hashlib.sha256(blob).hexdigest(),
        "size_bytes": len(blob),
        "data": base64.b64encode(blob).decode("ascii"),
    }


def build_draft(args) -> dict:
    """Assemble and locally validate the draft wire; never touches the network."""
    categories = [parse_category(label).value for label in args.categories.split(",")]
    wire = {
        "categories": categories,
        "location": {"lat": args.lat, "lon": args.lon, "source": args.source},
        "text": args.text,
        "attachment": _attachment_wire(args.attach) if args.attach else None,
        "anonymous": args.anonymous,
        "client_key": secrets.token_hex(16),
        "client_time": format_time(utc_now()),
    }
    draft_from_wire(wire)  # same validation the server applies
    return wire


# -- commands ----------------------------------------------------------------------


def cmd_register(state: ClientState, client: ApiClient, args) -> int:
    user_id = client.register(args.name, args.credential)
    _emit(args, {"user_id": user_id}, f"registered {args.name} ({user_id})")
    return EXIT_OK


def cmd_login(state: ClientState, client: ApiClient, args) -> int:
    token = client.login(args.name, args.credential)
    state.data.update({"server": args.server, "token": token, "name": args.name})
    state.save()
    _emit(args, {"logged_in": args.name}, f"logged in as {args.name}")
    return EXIT_OK


def cmd_report(state: ClientState, client: ApiClient, args) -> int:
    wire = build_draft(args)
    if args.offline:
        position = enqueue(state.spool_dir, wire)
        _emit(args, {"queued": wire["client_key"], "position": position},
              f"queued offline at position {position}")
        return EXIT_OK
    try:
        public, created = client.submit_draft(wire, token=state.data.get("token"))
    except httpx.TransportError:
        position = enqueue(state.spool_dir, wire)
        _emit(args, {"queued": wire["client_key"], "position": position},
              f"server unreachable; queued offline at position {position}")
        return EXIT_OK
    word = "created" if created else "duplicate"
    _emit(args, dict(public, created=created),
          f"report {public['report_id']} {word} (status {public['status']['state']})")
    return EXIT_OK


def cmd_sync(state: ClientState, client: ApiClient, args) -> int:
    queued = [e for e in load_entries(state.spool_dir) if e["state"] == "queued"]
    if not queued:
        _emit(args, {"synced": 0}, "nothing to sync")
        return EXIT_OK
    batch_size = max(1, min(args.batch_size, 100))
    results = []
    for start in range(0, len(queued), batch_size):
        chunk = queued[start : start + batch_size]
        outcomes = client.sync([e["draft"] for e in chunk], token=state.data.get("token"))
        for entry, outcome in zip(chunk, outcomes):
            if outcome["outcome"] in ("created", "duplicate"):
                entry["state"] = "synced"
                entry["report_id"] = outcome["report_id"]
            else:
                entry["state"] = "failed"
                entry["error_code"] = outcome["code"]
            _write_entry(state.spool_dir, entry)
            results.append({"client_key": entry["client_key"], **outcome})
    lines = [
        f"{r['client_key'][:8]}.. {r['outcome']}"
        + (f" -> report {r['report_id']}" if "report_id" in r else f" ({r.get('code')})")
        for r in results
    ]
    _emit(args, {"outcomes": results}, "\n".join(lines))
    return EXIT_OK


def cmd_queue(state: ClientState, client: ApiClient, args) -> int:
    entries = load_entries(state.spool_dir)
    if not entries:
        _emit(args, {"entries": []}, "queue is empty")
        return EXIT_OK
    lines = []
    for e in entries:
        suffix = ""
        if e["state"] == "synced":
            suffix = f" -> report {e.get('report_id')}"
        elif e["state"] == "failed":
            suffix = f" ({e.get('error_code')})"
        lines.append(f"{e['client_key'][:8]}.. {e['state']:<7} {e['queued_at']}{suffix}")
    _emit(args, {"entries": entries}, "\n".join(lines))
    return EXIT_OK


def cmd_rate(state: ClientState, client: ApiClient, args) -> int:
    votes = {"+1": 1, "1": 1, "support": 1, "-1": -1, "dispute": -1}
    vote = votes.get(args.vote.lower())
    if vote is None:
        raise errors.BadVote(f"vote must be +1/-1/support/dispute, got {args.vote!r}")
    result = client.rate(args.report_id, vote, token=state.data.get("token"))
    _emit(args, result,
          f"report {result['report_id']} score {result['score']:g} status {result['status']['state']}")
    return EXIT_OK


def cmd_feed(state: ClientState, client: ApiClient, args) -> int:
    page = client.feed(args.page, args.page_size)
    if not page["reports"]:
        _emit(args, page, "no reports")
        return EXIT_OK
    lines = []
    for r in page["reports"]:
        cats = ",".join(r["categories"])
        lines.append(
            f"#{r['report_id']} [{r['status']['state']}] ({cats}) {r['author']}: {r['text']}"
        )
    _emit(args, page, "\n".join(lines))
    return EXIT_OK


def cmd_map(state: ClientState, client: ApiClient, args) -> int:
    cells = client.map_cells(
        args.min_lat, args.min_lon, args.max_lat, args.max_lon,
        cell_size=args.cell_size, category=args.category,
    )
    if not cells:
        _emit(args, {"cells": []}, "no occupied cells")
        return EXIT_OK
    rows = sorted({c["row"] for c in cells}, reverse=True)
    cols = sorted({c["col"] for c in cells})
    totals = {(c["row"], c["col"]): c["total"] for c in cells}
    width = max(5, max(len(str(c)) for c in cols) + 1)
    header = "row\\col" + "".join(f"{c:>{width}}" for c in cols)
    lines = [header]
    for row in rows:
        cells_line = "".join(
            f"{totals.get((row, col), '.'):>{width}}" for col in cols
        )
        lines.append(f"{row:>7}{cells_line}")
    _emit(args, {"cells": cells}, "\n".join(lines))
    return EXIT_OK


def cmd_stats(state: ClientState, client: ApiClient, args) -> int:
    stats = client.stats()
    if not stats["distribution"]:
        _emit(args, stats, "no validated reports")
        return EXIT_OK
    lines = [f"validated reports: {stats['total_validated']}"]
    for share in stats["distribution"]:
        lines.append(
            f"  {share['category']:<10} {share['count']:>8.2f} {share['fraction'] * 100:>5.1f}%"
        )
    _emit(args, stats, "\n".join(lines))
    return EXIT_OK


# -- entry point -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="civisense", description=__doc__)
    parser.add_argument("--server", default=None, help=f"server URL (default {DEFAULT_SERVER})")
    parser.add_argument("--config", default=None, help="client config file path")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("register", help="create an account")
    p.add_argument("name")
    p.add_argument("credential")
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("login", help="log in and cache the session token")
    p.add_argument("name")
    p.add_argument("credential")
    p.set_defaults(func=cmd_login)

    p = sub.add_parser("report", help="submit a pollution report")
    p.add_argument("categories", help="comma-separated categories, e.g. garbage,water")
    p.add_argument("lat", type=float)
    p.add_argument("lon", type=float)
    p.add_argument("text", nargs="?", default="")
    p.add_argument("--attach", help="path to a photo/video file")
    p.add_argument("--anonymous", action="store_true")
    p.add_argument("--offline", action="store_true", help="queue locally instead of sending")
    p.add_argument("--source", default="manual", choices=["gps", "network", "manual"])
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("sync", help="upload the offline queue")
    p.add_argument("--batch-size", type=int, default=100)
    p.set_defaults(func=cmd_sync)

    p = sub.add_parser("queue", help="show the offline queue")
    p.set_defaults(func=cmd_queue)

    p = sub.add_parser("rate", help="support or dispute a report")
    p.add_argument("report_id", type=int)
    p.add_argument("vote", help="+1/-1/support/dispute")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("feed", help="browse recent reports")
    p.add_argument("--page", type=int, default=1)
    p.add_argument("--page-size", type=int, default=20)
    p.set_defaults(func=cmd_feed)

    p = sub.add_parser("map", help="render the pollution map as a text grid")
    p.add_argument("min_lat", type=float)
    p.add_argument("min_lon", type=float)
    p.add_argument("max_lat", type=float)
    p.add_argument("max_lon", type=float)
    p.add_argument("--cell-size", type=float, default=None)
    p.add_argument("--category", default=None)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("stats", help="category distribution of validated reports")
    p.set_defaults(func=cmd_stats)

    return parser


def default_config_path() -> Path:
    env = os.environ.get("CIVISENSE_CLIENT_CONFIG")
    if env:
        return Path(env)
    return Path.home() / ".civisense" / "config.json"


def main(argv: Optional[list[str]] = None, transport: Optional[httpx.BaseTransport] = None) -> int:
    args = build_parser().parse_args(argv)
    state = ClientState(Path(args.config) if args.config else default_config_path())
    args.server = args.server or state.data.get("server") or DEFAULT_SERVER
    client = ApiClient(args.server, token=state.data.get("token"), transport=transport)
    try:
        return args.func(state, client, args)
    except errors.CiviError as exc:
        print(f"error: {exc.code}: {exc.message}", file=sys.stderr)
        return EXIT_ERROR
    except httpx.TransportError as exc:
        print(f"network error: {exc}", file=sys.stderr)
        return EXIT_NETWORK
    finally:
        client.close()


if __name__ == "__main__":
    sys.exit(main())
