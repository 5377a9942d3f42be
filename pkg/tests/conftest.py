import random
import threading
import time
from datetime import datetime, timedelta, timezone

import pytest
import uvicorn

from civisense.model import (
    Category,
    GeoPoint,
    LocationSource,
    Report,
    ReportDraft,
    StatusState,
    Provenance,
    ValidationStatus,
)
from civisense.server import create_app
from civisense.service import Service, ServiceConfig

T0 = datetime(2026, 8, 1, 12, 0, tzinfo=timezone.utc)


class LiveServer:
    """Real uvicorn server on an ephemeral port (needed for SSE streaming)."""

    def __init__(self, data_dir, stream_keepalive_secs=0.2, **service_overrides):
        options = dict(kdf_iterations=500, fsync=False)
        options.update(service_overrides)
        self.service = Service(ServiceConfig(data_dir=data_dir, **options))
        app = create_app(self.service, stream_keepalive_secs=stream_keepalive_secs)
        self.server = uvicorn.Server(
            uvicorn.Config(app, host="127.0.0.1", port=0, log_level="warning", lifespan="off")
        )
        self.thread = threading.Thread(target=self.server.run, daemon=True)
        self.url = ""

    def start(self) -> "LiveServer":
        self.thread.start()
        deadline = time.monotonic() + 15
        while not self.server.started:
            if time.monotonic() > deadline:
                raise RuntimeError("uvicorn did not start in time")
            time.sleep(0.01)
        port = self.server.servers[0].sockets[0].getsockname()[1]
        self.url = f"http://127.0.0.1:{port}"
        return self

    def stop(self):
        self.server.should_exit = True
        self.thread.join(timeout=5)
        if self.thread.is_alive():
            self.server.force_exit = True
            self.thread.join(timeout=5)
        self.service.close()


@pytest.fixture
def live_server(tmp_path):
    server = LiveServer(tmp_path / "server-data").start()
    yield server
    server.stop()


def make_draft(
    categories=(Category.garbage,),
    lat=23.7465,
    lon=90.3760,
    text="canal blocked by garbage",
    client_key="key-0001",
    anonymous=False,
    attachment=None,
    source=LocationSource.gps,
):
    return ReportDraft(
        categories=frozenset(categories),
        location=GeoPoint(lat, lon, source),
        text=text,
        attachment=attachment,
        anonymous=anonymous,
        client_key=client_key,
        client_time=T0,
    )


def make_report(
    report_id=1,
    categories=(Category.garbage,),
    lat=23.7465,
    lon=90.3760,
    author="u-author",
    minutes=0,
    state=StatusState.validated,
    provenance=Provenance.community,
    text="",
):
    status = ValidationStatus(state, provenance if state is not StatusState.pending else None)
    return Report(
        report_id=report_id,
        categories=frozenset(categories),
        location=GeoPoint(lat, lon, LocationSource.gps),
        text=text,
        attachment=None,
        anonymous=False,
        client_key=f"key-{report_id:04d}",
        client_time=T0 + timedelta(minutes=minutes),
        author=author,
        server_time=T0 + timedelta(minutes=minutes),
        status=status,
    )


def random_reports(rng: random.Random, n: int, lat_span=(23.60, 23.95), lon_span=(90.30, 90.55)):
    """n validated reports with random positions, categories, and times."""
    cats = list(Category)
    out = []
    for i in range(n):
        k = rng.choice([1, 1, 1, 2, 3])
        out.append(
            make_report(
                report_id=i + 1,
                categories=rng.sample(cats, k),
                lat=rng.uniform(*lat_span),
                lon=rng.uniform(*lon_span),
                minutes=rng.randrange(0, 10_000),
            )
        )
    return out


@pytest.fixture
def rng():
    return random.Random(0xC1715)
