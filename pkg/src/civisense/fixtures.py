"""Bundled demo dataset: 53 reports clustered in three Dhaka neighborhoods.

The category split fixes garbage at 18 of 53 reports (33.96%, displayed as
34%); the remainder is spread as air 7, water 6, noise 6, light 6, visual 5,
other 5 — the non-garbage split is a free choice, documented here. Each
report sits inside a ~1 km² box around one of three neighborhood centers
(Dhanmondi, Mirpur, Jatrabari), so a 0.01-degree grid shows exactly three
spatial clusters.

The dataset is bundled as ``data/study_fixture.json`` and must stay equal to
``generate_study_fixture()`` (a test enforces it); regenerate with
``python -m civisense.fixtures`` after deliberate changes.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from importlib import resources

from .model import (
    Category,
    GeoPoint,
    LocationSource,
    Provenance,
    Report,
    StatusState,
    ValidationStatus,
    parse_category,
)

_SEED = 20161201
_JITTER = 0.0045  # degrees; keeps each cluster inside ~1 km²

NEIGHBORHOODS = [
    ("dhanmondi", 23.746, 90.376),
    ("mirpur", 23.806, 90.368),
    ("jatrabari", 23.710, 90.435),
]

CATEGORY_SPLIT = [
    ("garbage", 18),
    ("air", 7),
    ("water", 6),
    ("noise", 6),
    ("light", 6),
    ("visual", 5),
    ("other", 5),
]

_TEXTS = {
    "garbage": [
        "canal blocked by garbage",
        "road covered by garbage",
        "overflowing bin left on the roadside",
        "drain blocked, garbage piling up",
    ],
    "air": ["too much dust", "smoke from the fish market", "burning trash smell"],
    "water": [
        "water logging for days",
        "water logging disturbs transportation",
        "stagnant water by the drain",
    ],
    "noise": ["construction noise all night", "loudspeaker noise late at night"],
    "light": ["billboard floodlight into homes", "stadium lights on all night"],
    "visual": ["torn posters all over the wall", "wires hanging across the street"],
    "other": ["open manhole", "broken footpath"],
}


def generate_study_fixture() -> dict:
    """Deterministically build the 53-report fixture document."""
    rng = random.Random(_SEED)
    reports = []
    n = 0
    for label, count in CATEGORY_SPLIT:
        for _ in range(count):
            name, lat0, lon0 = NEIGHBORHOODS[n % len(NEIGHBORHOODS)]
            texts = _TEXTS[label]
            reports.append(
                {
                    "categories": [label],
                    "lat": round(lat0 + rng.uniform(-_JITTER, _JITTER), 6),
                    "lon": round(lon0 + rng.uniform(-_JITTER, _JITTER), 6),
                    "text": texts[n % len(texts)],
                    "neighborhood": name,
                }
            )
            n += 1
    return {
        "description": (
            "53 pollution reports over three ~1 km^2 neighborhood clusters; "
            "18/53 garbage = 33.96% (displays as 34%), remainder spread "
            "air 7 / water 6 / noise 6 / light 6 / visual 5 / other 5."
        ),
        "cell_size_hint": 0.01,
        "neighborhoods": [
            {"name": name, "center": [lat, lon]} for name, lat, lon in NEIGHBORHOODS
        ],
        "reports": reports,
    }


def study_fixture() -> dict:
    """Load the bundled fixture document."""
    data = resources.files("civisense").joinpath("data/study_fixture.json").read_text("utf-8")
    return json.loads(data)


def study_report_objects(start: datetime | None = None) -> list[Report]:
    """Fixture entries as already-validated Report values (for offline use)."""
    start = start or datetime(2016, 12, 1, 9, 0, tzinfo=timezone.utc)
    out = []
    for i, entry in enumerate(study_fixture()["reports"]):
        out.append(
            Report(
                report_id=i + 1,
                categories=frozenset(parse_category(c) for c in entry["categories"]),
                location=GeoPoint(entry["lat"], entry["lon"], LocationSource.gps),
                text=entry["text"],
                attachment=None,
                anonymous=False,
                client_key=f"fixture-{i + 1:03d}",
                client_time=start + timedelta(minutes=i),
                author=f"fixture-user-{i % 6}",
                server_time=start + timedelta(minutes=i),
                status=ValidationStatus(StatusState.validated, Provenance.community),
            )
        )
    return out


@dataclass
class LoadedFixture:
    report_ids: list[int]
    author_tokens: dict[str, str]
    rater_tokens: dict[str, str]


def load_study_fixture(client, credential: str = "fixture-pass-1") -> LoadedFixture:
    """Drive the fixture through a live API client and validate every report.

    Registers six authors and two raters, submits all 53 reports, and has
    both raters support each one; with fresh reputations (0.5 each) the
    second supporting vote lifts every score to at least 1.5, the default
    validation threshold.
    """
    authors = [f"fixture_reporter_{i}" for i in range(6)]
    raters = ["fixture_rater_a", "fixture_rater_b"]
    author_tokens = {}
    rater_tokens = {}
    for name in authors:
        client.register(name, credential)
        author_tokens[name] = client.login(name, credential)
    for name in raters:
        client.register(name, credential)
        rater_tokens[name] = client.login(name, credential)

    report_ids = []
    for i, entry in enumerate(study_fixture()["reports"]):
        author = authors[i % len(authors)]
        public = client.submit_report(
            categories=entry["categories"],
            lat=entry["lat"],
            lon=entry["lon"],
            text=entry["text"],
            client_key=f"fixture-{i + 1:03d}",
            token=author_tokens[author],
        )
        report_id = public["report_id"]
        report_ids.append(report_id)
        for rater in raters:
            client.rate(report_id, 1, token=rater_tokens[rater])
    return LoadedFixture(
        report_ids=report_ids, author_tokens=author_tokens, rater_tokens=rater_tokens
    )


def main():  # regenerate the bundled JSON in a source checkout
    from pathlib import Path

    target = Path(__file__).parent / "data" / "study_fixture.json"
    target.parent.mkdir(exist_ok=True)
    target.write_text(json.dumps(generate_study_fixture(), indent=2) + "\n", "utf-8")
    print(f"wrote {target}")


if __name__ == "__main__":
    main()
