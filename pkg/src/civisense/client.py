"""HTTP client for the reporting API.

Used by the reporter CLI and by anything that wants the API without hand
rolling requests. Server-side failures are re-raised as the same typed
errors the server itself uses; transport failures surface as
``httpx.TransportError`` so callers can tell "the server said no" apart from
"the server is unreachable".
"""

from __future__ import annotations

import json
from typing import Iterator, Optional

import httpx

from . import errors
from .encoding import format_time, utc_now

API = "/api/v1"


class ApiClient:
    def __init__(
        self,
        base_url: str,
        token: Optional[str] = None,
        transport: Optional[httpx.BaseTransport] = None,
        timeout: float = 10.0,
    ):
        self.token = token
        self._http = httpx.Client(base_url=base_url, transport=transport, timeout=timeout)

    def close(self):
        self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- plumbing -----------------------------------------------------------

    def _headers(self, token: Optional[str]) -> dict:
        effective = token if token is not None else self.token
        return {"Authorization": f"Bearer {effective}"} if effective else {}

    def _request(self, method: str, path: str, token=None, **kw):
        response = self._http.request(method, path, headers=self._headers(token), **kw)
        if response.status_code >= 400:
            try:
                detail = response.json()["error"]
                raise errors.from_code(detail["code"], detail.get("message", ""))
            except (ValueError, KeyError):
                raise errors.CiviError(f"HTTP {response.status_code}: {response.text[:200]}") from None
        return response

    # -- auth ----------------------------------------------------------------

    def register(self, name: str, credential: str) -> str:
        body = {"name": name, "credential": credential}
        return self._request("POST", API + "/auth/register", json=body).json()["user_id"]

    def login(self, name: str, credential: str) -> str:
        body = {"name": name, "credential": credential}
        token = self._request("POST", API + "/auth/login", json=body).json()["token"]
        self.token = token
        return token

    # -- reports --------------------------------------------------------------

    def submit_draft(self, draft_wire: dict, token: Optional[str] = None) -> tuple[dict, bool]:
        """Submit one draft wire dict; returns (public report, created?)."""
        response = self._request("POST", API + "/reports", json=draft_wire, token=token)
        return response.json(), response.status_code == 201

    def submit_report(
        self,
        categories,
        lat: float,
        lon: float,
        text: str = "",
        client_key: str = "",
        token: Optional[str] = None,
        anonymous: bool = False,
        attachment: Optional[dict] = None,
        source: str = "manual",
    ) -> dict:
        draft = {
            "categories": list(categories),
            "location": {"lat": lat, "lon": lon, "source": source},
            "text": text,
            "attachment": attachment,
            "anonymous": anonymous,
            "client_key": client_key,
            "client_time": format_time(utc_now()),
        }
        public, _ = self.submit_draft(draft, token=token)
        return public

    def rate(self, report_id: int, vote: int, token: Optional[str] = None) -> dict:
        return self._request(
            "POST", f"{API}/reports/{report_id}/ratings", json={"vote": vote}, token=token
        ).json()

    def feed(self, page: int = 1, page_size: int = 20) -> dict:
        params = {"page": page, "page_size": page_size}
        return self._request("GET", API + "/feed", params=params).json()

    def map_cells(
        self,
        min_lat: float,
        min_lon: float,
        max_lat: float,
        max_lon: float,
        cell_size: Optional[float] = None,
        category: Optional[str] = None,
    ) -> list[dict]:
        params = {
            "min_lat": min_lat,
            "min_lon": min_lon,
            "max_lat": max_lat,
            "max_lon": max_lon,
        }
        if cell_size is not None:
            params["cell_size"] = cell_size
        if category is not None:
            params["category"] = category
        return self._request("GET", API + "/map", params=params).json()["cells"]

    def stats(self) -> dict:
        return self._request("GET", API + "/stats/categories").json()

    def sync(self, entries: list[dict], token: Optional[str] = None) -> list[dict]:
        body = {"entries": entries}
        return self._request("POST", API + "/sync", json=body, token=token).json()["outcomes"]

    def shared_report(self, report_id: int) -> dict:
        return self._request("GET", f"/r/{report_id}").json()

    # -- admin ------------------------------------------------------------------

    def admin_verdict(self, report_id: int, verdict: str, token: Optional[str] = None) -> dict:
        return self._request(
            "POST", f"{API}/admin/reports/{report_id}/verdict", json={"verdict": verdict}, token=token
        ).json()

    def pending_reports(self, token: Optional[str] = None) -> list[dict]:
        return self._request("GET", API + "/admin/reports/pending", token=token).json()["reports"]

    def summary(
        self,
        start: str,
        end: str,
        detail: str = "summarized",
        format: str = "json",
        token: Optional[str] = None,
    ):
        params = {"start": start, "end": end, "detail": detail, "format": format}
        response = self._request("GET", API + "/admin/summary", params=params, token=token)
        return response.text if format == "text" else response.json()

    # -- stream -----------------------------------------------------------------

    def stream_events(self, since_seq: int = 0, max_events: Optional[int] = None) -> Iterator[dict]:
        """Yield parsed stream events; closes after ``max_events`` if given."""
        count = 0
        with self._http.stream(
            "GET", API + "/stream", params={"since_seq": since_seq}
        ) as response:
            if response.status_code >= 400:
                raise errors.CiviError(f"stream failed with HTTP {response.status_code}")
            for event in parse_sse(response.iter_lines()):
                yield event
                count += 1
                if max_events is not None and count >= max_events:
                    return


def parse_sse(lines) -> Iterator[dict]:
    """Parse text/event-stream lines into {'id', 'event', ...data} dicts."""
    event_id = None
    event_type = None
    data_lines: list[str] = []
    for line in lines:
        if line == "":
            if data_lines:
                payload = json.loads("\n".join(data_lines))
                payload.setdefault("kind", event_type)
                if event_id is not None:
                    payload.setdefault("seq", int(event_id))
                yield payload
            event_id = None
            event_type = None
            data_lines = []
        elif line.startswith(":"):
            continue  # keepalive comment
        elif line.startswith("id:"):
            event_id = line[3:].strip()
        elif line.startswith("event:"):
            event_type = line[6:].strip()
        elif line.startswith("data:"):
            data_lines.append(line[5:].strip())
