"""HTTP tier: the JSON API over the service core, plus the live event stream.

Thin adapter only — every rule lives in the service/domain layer. Errors
surface uniformly as ``{"error": {"code", "message"}}`` with the status the
error class declares. Query parameters are parsed by hand so out-of-range
and garbage input both map to the domain's own error codes.
"""

from __future__ import annotations

import argparse
import json
import queue

from fastapi import Body, FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse, StreamingResponse

from . import errors
from .config import AppConfig, load_config
from .encoding import format_time, parse_time
from .geo import BBox, Period, render_summary_text
from .model import parse_category
from .service import Service
from .store import StreamEvent

API = "/api/v1"


def _bearer_token(request: Request):
    header = request.headers.get("authorization", "")
    if header.lower().startswith("bearer "):
        return header[7:].strip()
    return None


def _client_addr(request: Request) -> str:
    return request.client.host if request.client else "unknown"


def _parse_float(raw, error_cls, what: str) -> float:
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise error_cls(f"{what} must be a number, got {raw!r}") from None


def _parse_int(raw, error_cls, what: str) -> int:
    try:
        return int(raw)
    except (TypeError, ValueError):
        raise error_cls(f"{what} must be an integer, got {raw!r}") from None


def _sse(event: StreamEvent) -> str:
    data = json.dumps(event.to_wire(), sort_keys=True)
    return f"id: {event.seq}\nevent: {event.kind}\ndata: {data}\n\n"


def create_app(service: Service, stream_keepalive_secs: float = 15.0) -> FastAPI:
    app = FastAPI(title="civisense", docs_url=None, redoc_url=None)
    app.state.service = service
    app.add_middleware(  # the dashboard is served from its own origin
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(errors.CiviError)
    async def civi_error(request: Request, exc: errors.CiviError):
        return JSONResponse(
            status_code=exc.http_status,
            content={"error": {"code": exc.code, "message": exc.message}},
        )

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"error": {"code": "MalformedBody", "message": "request body is not valid JSON"}},
        )

    # -- auth -------------------------------------------------------------

    @app.post(API + "/auth/register")
    def register(response: Response, body: dict = Body(...)):
        user_id = service.register(str(body.get("name", "")), str(body.get("credential", "")))
        response.status_code = 201
        return {"user_id": user_id}

    @app.post(API + "/auth/login")
    def login(body: dict = Body(...)):
        session = service.login(str(body.get("name", "")), str(body.get("credential", "")))
        return {
            "token": session.token,
            "user_id": session.user_id,
            "expiry": format_time(session.expiry),
        }

    # -- reports ------------------------------------------------------------

    @app.post(API + "/reports")
    def submit(request: Request, response: Response, body: dict = Body(...)):
        public, created = service.submit(
            body, token=_bearer_token(request), source_addr=_client_addr(request)
        )
        response.status_code = 201 if created else 200
        return public.to_wire()

    @app.post(API + "/reports/{report_id}/ratings")
    def rate(report_id: int, request: Request, body: dict = Body(...)):
        token = _bearer_token(request)
        if token is None:
            raise errors.Unauthorized("rating requires a session token")
        vote = body.get("vote")
        if not isinstance(vote, int) or isinstance(vote, bool):
            raise errors.BadVote(f"vote must be the integer +1 or -1, got {vote!r}")
        return service.rate(token, report_id, vote)

    @app.get(API + "/feed")
    def feed(page: str = "1", page_size: str = "20"):
        page_n = _parse_int(page, errors.BadPage, "page")
        size_n = _parse_int(page_size, errors.BadPage, "page_size")
        reports = service.feed(page_n, size_n)
        return {"page": page_n, "page_size": size_n, "reports": [r.to_wire() for r in reports]}

    @app.get(API + "/map")
    def map_cells(
        min_lat: str | None = None,
        min_lon: str | None = None,
        max_lat: str | None = None,
        max_lon: str | None = None,
        cell_size: str | None = None,
        category: str | None = None,
    ):
        bbox = BBox(
            _parse_float(min_lat, errors.BadBBox, "min_lat"),
            _parse_float(min_lon, errors.BadBBox, "min_lon"),
            _parse_float(max_lat, errors.BadBBox, "max_lat"),
            _parse_float(max_lon, errors.BadBBox, "max_lon"),
        )
        size = _parse_float(cell_size, errors.BadCellSize, "cell_size") if cell_size else None
        cat = parse_category(category) if category else None
        cells, as_of_seq = service.map_snapshot(bbox, size, cat)
        return {"cells": [cell.to_wire() for cell in cells], "as_of_seq": as_of_seq}

    @app.get(API + "/stats/categories")
    def stats():
        return service.stats()

    @app.post(API + "/sync")
    def sync(request: Request, body: dict = Body(...)):
        entries = body.get("entries")
        outcomes = service.sync(
            entries, token=_bearer_token(request), source_addr=_client_addr(request)
        )
        return {"outcomes": outcomes}

    # -- stream ----------------------------------------------------------------

    @app.get(API + "/stream")
    def stream(request: Request, since_seq: str = "0"):
        cursor = _parse_int(since_seq, errors.MalformedBody, "since_seq")
        last_event_id = request.headers.get("last-event-id")
        if last_event_id is not None:
            cursor = _parse_int(last_event_id, errors.MalformedBody, "Last-Event-ID")

        def generate():
            live = service.subscribe()
            try:
                last = cursor
                for event in service.stream_snapshot(cursor):
                    yield _sse(event)
                    last = event.seq
                while True:
                    try:
                        event = live.get(timeout=stream_keepalive_secs)
                    except queue.Empty:
                        yield ": keepalive\n\n"
                        continue
                    if event.seq <= last:
                        continue  # already delivered during the snapshot phase
                    yield _sse(event)
                    last = event.seq
            finally:
                service.unsubscribe(live)

        return StreamingResponse(
            generate(),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "X-Accel-Buffering": "no"},
        )

    # -- admin ---------------------------------------------------------------

    @app.post(API + "/admin/reports/{report_id}/verdict")
    def verdict(report_id: int, request: Request, body: dict = Body(...)):
        token = _bearer_token(request)
        if token is None:
            raise errors.Unauthorized("verdicts require a session token")
        return service.admin_verdict(token, report_id, str(body.get("verdict", "")))

    @app.get(API + "/admin/reports/pending")
    def pending(request: Request):
        token = _bearer_token(request)
        if token is None:
            raise errors.Unauthorized("the moderation queue requires a session token")
        return {"reports": service.pending_reports(token)}

    @app.get(API + "/admin/summary")
    def summary(
        request: Request,
        start: str | None = None,
        end: str | None = None,
        detail: str = "summarized",
        format: str = "json",
    ):
        token = _bearer_token(request)
        if token is None:
            raise errors.Unauthorized("summaries require a session token")
        try:
            period = Period(parse_time(str(start)), parse_time(str(end)))
        except ValueError:
            raise errors.BadPeriod("start/end must be RFC 3339 timestamps") from None
        doc = service.summary(token, period, detail)
        if format == "text":
            return PlainTextResponse(render_summary_text(doc))
        if format != "json":
            raise errors.BadFormat(f"format must be json or text, got {format!r}")
        return doc.to_wire()

    # -- share links --------------------------------------------------------

    @app.get("/r/{report_id}")
    def shared_report(report_id: int):
        return service.public_report(report_id).to_wire()

    return app


def app_from_config(config: AppConfig) -> FastAPI:
    service = Service(config.service_config())
    return create_app(service, stream_keepalive_secs=config.stream_keepalive_secs)


def main(argv=None):
    parser = argparse.ArgumentParser(prog="civisense-server", description=__doc__)
    parser.add_argument("--config", help="path to the JSON config file")
    args = parser.parse_args(argv)
    config = load_config(args.config)

    import uvicorn

    uvicorn.run(app_from_config(config), host=config.host, port=config.port, log_level="info")


if __name__ == "__main__":
    main()
