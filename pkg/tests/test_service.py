"""Service core: auth, submission lifecycle, gating, sync, stream derivation."""

import random
from datetime import datetime, timedelta, timezone

import pytest

from civisense import errors
from civisense.geo import BBox, Period
from civisense.model import ANONYMOUS, Category, Role
from civisense.service import Service, ServiceConfig
from civisense.store import replay

from conftest import make_draft

DHAKA = BBox(23.5, 90.2, 24.0, 90.6)


def make_service(tmp_path, **overrides) -> Service:
    config = ServiceConfig(
        data_dir=tmp_path / "data",
        kdf_iterations=500,
        fsync=False,
        **overrides,
    )
    return Service(config)


def wire_draft(key="k1", anonymous=False, **kw):
    return make_draft(client_key=key, anonymous=anonymous, **kw).to_wire()


@pytest.fixture
def svc(tmp_path):
    service = make_service(tmp_path)
    yield service
    service.close()


@pytest.fixture
def users(svc):
    tokens = {}
    for name in ("rahim", "karim", "salma", "admin1"):
        role = Role.admin if name == "admin1" else Role.citizen
        svc.register(name, f"{name}-password", role=role)
        tokens[name] = svc.login(name, f"{name}-password").token
    return tokens


class TestRegistration:
    def test_initial_reputation(self, svc):
        user_id = svc.register("rahim", "longenough")
        assert svc.view.profiles[user_id].reputation == 0.5
        assert svc.view.profiles[user_id].role is Role.citizen

    def test_name_taken(self, svc):
        svc.register("rahim", "longenough")
        with pytest.raises(errors.NameTaken):
            svc.register("rahim", "otherpassword")

    def test_weak_credential(self, svc):
        with pytest.raises(errors.WeakCredential):
            svc.register("rahim", "abc")

    def test_credentials_stored_hashed(self, svc):
        user_id = svc.register("rahim", "longenough")
        record = svc.view.credentials[user_id]
        assert "longenough" not in (record.hash, record.salt)
        assert record.algorithm == "pbkdf2-sha256"


class TestLogin:
    def test_roundtrip(self, svc):
        svc.register("rahim", "longenough")
        session = svc.login("rahim", "longenough")
        assert len(session.token) == 32  # 128-bit hex
        profile = svc.authenticate(session.token)
        assert profile.display_name == "rahim"

    def test_bad_credential(self, svc):
        svc.register("rahim", "longenough")
        with pytest.raises(errors.Unauthorized):
            svc.login("rahim", "wrong-password")

    def test_unknown_token(self, svc):
        with pytest.raises(errors.Unauthorized):
            svc.authenticate("feedfacefeedfacefeedfacefeedface")

    def test_expired_token(self, tmp_path):
        now = [datetime(2026, 8, 1, tzinfo=timezone.utc)]
        config = ServiceConfig(data_dir=tmp_path / "d", kdf_iterations=500, fsync=False)
        service = Service(config, clock=lambda: now[0])
        service.register("rahim", "longenough")
        token = service.login("rahim", "longenough").token
        now[0] += timedelta(hours=25)
        with pytest.raises(errors.Unauthorized):
            service.authenticate(token)
        service.close()


class TestSubmit:
    def test_idempotent_resubmission(self, svc, users):
        before = svc.log.next_seq
        first, created = svc.submit(wire_draft("key-a"), token=users["rahim"])
        again, created_again = svc.submit(wire_draft("key-a"), token=users["rahim"])
        assert created and not created_again
        assert first.report_id == again.report_id
        assert svc.log.next_seq == before + 1  # one event total

    def test_same_key_different_users_distinct(self, svc, users):
        a, _ = svc.submit(wire_draft("shared"), token=users["rahim"])
        b, _ = svc.submit(wire_draft("shared"), token=users["karim"])
        assert a.report_id != b.report_id

    def test_anonymous_author_marker(self, svc):
        public, _ = svc.submit(wire_draft("anon-1", anonymous=True), source_addr="10.0.0.1")
        assert public.author == ANONYMOUS
        assert svc.view.reports[public.report_id].author == ANONYMOUS

    def test_logged_in_anonymous_not_linked(self, svc, users):
        public, _ = svc.submit(wire_draft("anon-2", anonymous=True), token=users["salma"])
        report = svc.view.reports[public.report_id]
        assert report.author == ANONYMOUS
        event = svc.log.read_all()[-1]
        assert "salma" not in str(event.to_wire())

    def test_sessionless_registered_submit_rejected(self, svc):
        with pytest.raises(errors.Unauthorized):
            svc.submit(wire_draft("nope", anonymous=False))

    def test_enters_feed_as_pending(self, svc, users):
        public, _ = svc.submit(wire_draft("key-b"), token=users["rahim"])
        feed = svc.feed(1, 10)
        assert feed[0].report_id == public.report_id
        assert feed[0].status.state.value == "pending"

    def test_high_reputation_author_self_validates(self, tmp_path, users):
        service = make_service(tmp_path / "low", threshold=0.4)
        service.register("rahim", "longenough")
        token = service.login("rahim", "longenough").token
        public, _ = service.submit(wire_draft("auto"), token=token)
        assert public.status.state.value == "validated"
        service.close()

    def test_attachment_stored_content_addressed(self, svc, users):
        import base64
        import hashlib

        blob = b"jpeg bytes pretend"
        digest = hashlib.sha256(blob).hexdigest()
        wire = wire_draft("with-att")
        wire["attachment"] = {
            "kind": "photo",
            "content_hash": digest,
            "size_bytes": len(blob),
            "data": base64.b64encode(blob).decode(),
        }
        public, _ = svc.submit(wire, token=users["rahim"])
        assert svc.blobs.get(digest) == blob
        stored = svc.view.reports[public.report_id].attachment
        assert stored.media_ref == f"blob:{digest}"
        assert public.to_wire()["attachment"] == {"kind": "photo"}

    def test_attachment_hash_mismatch(self, svc, users):
        import base64

        wire = wire_draft("bad-att")
        wire["attachment"] = {
            "kind": "photo",
            "content_hash": "00" * 32,
            "size_bytes": 4,
            "data": base64.b64encode(b"data").decode(),
        }
        with pytest.raises(errors.BadAttachment):
            svc.submit(wire, token=users["rahim"])


class TestRating:
    def test_second_supporter_validates_at_boundary(self, svc, users):
        public, _ = svc.submit(wire_draft("r1"), token=users["rahim"])
        first = svc.rate(users["karim"], public.report_id, 1)
        assert first["status"]["state"] == "pending"
        second = svc.rate(users["salma"], public.report_id, 1)
        assert second["score"] == 1.5
        assert second["status"] == {"state": "validated", "provenance": "community"}
        # author rewarded
        author = svc.view.profile_by_name("rahim")
        assert author.reputation == 0.55

    def test_self_rating_blocked(self, svc, users):
        public, _ = svc.submit(wire_draft("r2"), token=users["rahim"])
        with pytest.raises(errors.SelfRating):
            svc.rate(users["rahim"], public.report_id, 1)

    def test_unknown_report(self, svc, users):
        with pytest.raises(errors.UnknownReport):
            svc.rate(users["rahim"], 999, 1)

    def test_revote_replaces(self, svc, users):
        public, _ = svc.submit(wire_draft("r3"), token=users["rahim"])
        svc.rate(users["karim"], public.report_id, 1)
        result = svc.rate(users["karim"], public.report_id, -1)
        state = svc.view.trust_states[public.report_id]
        assert len(state.ratings) == 1
        assert result["score"] == 0.0


class TestVerdicts:
    def test_confirm_pending(self, svc, users):
        public, _ = svc.submit(wire_draft("v1"), token=users["rahim"])
        result = svc.admin_verdict(users["admin1"], public.report_id, "confirm")
        assert result["status"] == {"state": "validated", "provenance": "admin"}

    def test_reject_updates_reputations(self, svc, users):
        public, _ = svc.submit(wire_draft("v2"), token=users["rahim"])
        svc.rate(users["karim"], public.report_id, 1)
        svc.admin_verdict(users["admin1"], public.report_id, "reject")
        assert svc.view.profile_by_name("rahim").reputation == 0.4
        assert svc.view.profile_by_name("karim").reputation == 0.48

    def test_citizen_blocked(self, svc, users):
        public, _ = svc.submit(wire_draft("v3"), token=users["rahim"])
        with pytest.raises(errors.NotAdmin):
            svc.admin_verdict(users["karim"], public.report_id, "reject")

    def test_reject_removes_from_map(self, svc, users):
        public, _ = svc.submit(wire_draft("v4"), token=users["rahim"])
        svc.rate(users["karim"], public.report_id, 1)
        svc.rate(users["salma"], public.report_id, 1)
        assert sum(c.total for c in svc.map_cells(DHAKA)) == 1
        svc.admin_verdict(users["admin1"], public.report_id, "reject")
        assert svc.map_cells(DHAKA) == []


class TestFeed:
    def test_pagination(self, svc, users):
        for i in range(3):
            svc.submit(wire_draft(f"f{i}"), token=users["rahim"])
        page1 = svc.feed(1, 2)
        page2 = svc.feed(2, 2)
        assert [len(page1), len(page2)] == [2, 1]
        ids = [r.report_id for r in page1 + page2]
        assert ids == sorted(ids, reverse=True)

    def test_rejected_hidden(self, svc, users):
        public, _ = svc.submit(wire_draft("fr"), token=users["rahim"])
        svc.admin_verdict(users["admin1"], public.report_id, "reject")
        assert svc.feed(1, 10) == []

    def test_bad_page(self, svc):
        with pytest.raises(errors.BadPage):
            svc.feed(0, 10)
        with pytest.raises(errors.BadPage):
            svc.feed(1, 101)


class TestMapAndStats:
    def test_validated_only_gating(self, svc, users):
        a, _ = svc.submit(wire_draft("m1"), token=users["rahim"])
        b, _ = svc.submit(wire_draft("m2"), token=users["karim"])
        svc.rate(users["karim"], a.report_id, 1)
        svc.rate(users["salma"], a.report_id, 1)  # validates a; b stays pending
        cells = svc.map_cells(DHAKA)
        assert sum(c.total for c in cells) == 1
        stats = svc.stats()
        assert stats["total_validated"] == 1

    def test_category_filter_mismatch(self, svc, users):
        a, _ = svc.submit(wire_draft("m3"), token=users["rahim"])
        svc.rate(users["karim"], a.report_id, 1)
        svc.rate(users["salma"], a.report_id, 1)
        assert svc.map_cells(DHAKA, category=Category.air) == []

    def test_stats_single_validated(self, svc, users):
        a, _ = svc.submit(wire_draft("m4", categories=(Category.air,)), token=users["rahim"])
        svc.rate(users["karim"], a.report_id, 1)
        svc.rate(users["salma"], a.report_id, 1)
        stats = svc.stats()
        assert stats["distribution"] == [{"category": "air", "count": 1.0, "fraction": 1.0}]


class TestSync:
    def test_batch_outcomes(self, svc, users):
        entries = [wire_draft("s1"), wire_draft("s2")]
        outcomes = svc.sync(entries, token=users["rahim"])
        assert [o["outcome"] for o in outcomes] == ["created", "created"]

    def test_replay_all_duplicates_zero_events(self, svc, users):
        entries = [wire_draft("s3"), wire_draft("s4")]
        svc.sync(entries, token=users["rahim"])
        before = svc.log.next_seq
        outcomes = svc.sync(entries, token=users["rahim"])
        assert [o["outcome"] for o in outcomes] == ["duplicate", "duplicate"]
        assert svc.log.next_seq == before

    def test_per_entry_isolation(self, svc, users):
        bad = wire_draft("s5")
        bad["location"]["lat"] = 99.0
        outcomes = svc.sync([wire_draft("s6"), bad, wire_draft("s7")], token=users["rahim"])
        assert [o["outcome"] for o in outcomes] == ["created", "error", "created"]
        assert outcomes[1]["code"] == "BadCoordinates"

    def test_batch_too_large(self, svc, users):
        entries = [wire_draft(f"big{i}") for i in range(101)]
        with pytest.raises(errors.BatchTooLarge):
            svc.sync(entries, token=users["rahim"])


class TestShareLink:
    def test_path(self, svc, users):
        public, _ = svc.submit(wire_draft("share"), token=users["rahim"])
        assert svc.share_link(public.report_id) == f"/r/{public.report_id}"

    def test_rejected(self, svc, users):
        public, _ = svc.submit(wire_draft("share-rej"), token=users["rahim"])
        svc.admin_verdict(users["admin1"], public.report_id, "reject")
        with pytest.raises(errors.ReportRejected):
            svc.share_link(public.report_id)

    def test_unknown(self, svc):
        with pytest.raises(errors.UnknownReport):
            svc.share_link(424242)


class TestModerationQueue:
    def test_oldest_first_with_score(self, svc, users):
        first, _ = svc.submit(wire_draft("q1"), token=users["rahim"])
        second, _ = svc.submit(wire_draft("q2"), token=users["karim"])
        svc.rate(users["salma"], second.report_id, 1)
        queue = svc.pending_reports(users["admin1"])
        assert [q["report_id"] for q in queue] == [first.report_id, second.report_id]
        assert queue[1]["score"] == 1.0

    def test_admin_only(self, svc, users):
        with pytest.raises(errors.NotAdmin):
            svc.pending_reports(users["rahim"])

    def test_acted_rows_leave_queue(self, svc, users):
        public, _ = svc.submit(wire_draft("q3"), token=users["rahim"])
        svc.admin_verdict(users["admin1"], public.report_id, "confirm")
        assert svc.pending_reports(users["admin1"]) == []


class TestSummary:
    def test_admin_gate(self, svc, users):
        period = Period(
            datetime(2020, 1, 1, tzinfo=timezone.utc), datetime(2030, 1, 1, tzinfo=timezone.utc)
        )
        with pytest.raises(errors.NotAdmin):
            svc.summary(users["rahim"], period)
        doc = svc.summary(users["admin1"], period, "summarized")
        assert doc.total_reports == 0


class TestAnonymousRateLimit:
    def test_limit_enforced_per_address(self, tmp_path):
        service = make_service(tmp_path / "rl", anon_rate_limit_per_min=3)
        for i in range(3):
            service.submit(wire_draft(f"rl{i}", anonymous=True), source_addr="1.1.1.1")
        with pytest.raises(errors.RateLimited):
            service.submit(wire_draft("rl3", anonymous=True), source_addr="1.1.1.1")
        # other addresses unaffected
        service.submit(wire_draft("rl4", anonymous=True), source_addr="2.2.2.2")
        service.close()

    def test_window_slides(self, tmp_path):
        now = [datetime(2026, 8, 1, tzinfo=timezone.utc)]
        config = ServiceConfig(
            data_dir=tmp_path / "rl2", kdf_iterations=500, fsync=False, anon_rate_limit_per_min=2
        )
        service = Service(config, clock=lambda: now[0])
        service.submit(wire_draft("w1", anonymous=True), source_addr="9.9.9.9")
        service.submit(wire_draft("w2", anonymous=True), source_addr="9.9.9.9")
        with pytest.raises(errors.RateLimited):
            service.submit(wire_draft("w3", anonymous=True), source_addr="9.9.9.9")
        now[0] += timedelta(seconds=61)
        service.submit(wire_draft("w4", anonymous=True), source_addr="9.9.9.9")
        service.close()


class TestStreamDerivation:
    def test_validation_event_trio(self, svc, users):
        public, _ = svc.submit(wire_draft("st1"), token=users["rahim"])
        svc.rate(users["karim"], public.report_id, 1)
        svc.rate(users["salma"], public.report_id, 1)
        events = svc.stream_snapshot(0)
        kinds = [e.kind for e in events]
        assert kinds == ["report-validated", "map-cell-updated", "stats-updated"]
        assert [e.seq for e in events] == [1, 2, 3]
        assert all(e.log_seq == events[0].log_seq for e in events)
        assert events[1].data["delta"] == 1

    def test_rejection_emits_removal(self, svc, users):
        public, _ = svc.submit(wire_draft("st2"), token=users["rahim"])
        svc.admin_verdict(users["admin1"], public.report_id, "confirm")
        svc.admin_verdict(users["admin1"], public.report_id, "reject")
        events = svc.stream_snapshot(0)
        assert [e.kind for e in events] == [
            "report-validated",
            "map-cell-updated",
            "stats-updated",
            "map-cell-updated",
            "stats-updated",
        ]
        assert events[3].data["delta"] == -1

    def test_no_author_identity_in_stream(self, svc, users):
        public, _ = svc.submit(wire_draft("st3", anonymous=True), token=users["rahim"])
        svc.admin_verdict(users["admin1"], public.report_id, "confirm")
        for event in svc.stream_snapshot(0):
            wire = str(event.to_wire())
            assert "rahim" not in wire and "u-" not in wire

    def test_since_seq_filter(self, svc, users):
        public, _ = svc.submit(wire_draft("st4"), token=users["rahim"])
        svc.admin_verdict(users["admin1"], public.report_id, "confirm")
        assert [e.seq for e in svc.stream_snapshot(2)] == [3]

    def test_live_subscription(self, svc, users):
        q = svc.subscribe()
        public, _ = svc.submit(wire_draft("st5"), token=users["rahim"])
        svc.admin_verdict(users["admin1"], public.report_id, "confirm")
        got = [q.get_nowait() for _ in range(3)]
        assert [e.kind for e in got] == ["report-validated", "map-cell-updated", "stats-updated"]
        svc.unsubscribe(q)


# -- randomized session: live state equals replayed state --------------------


def run_random_session(service, rng, ops=120):
    citizens = []
    tokens = {}
    admin_id = service.register("op-admin", "admin-pass-1", role=Role.admin)
    tokens[admin_id] = service.login("op-admin", "admin-pass-1").token
    report_ids = []

    def random_draft(key):
        cats = rng.sample(list(Category), rng.choice([1, 1, 2]))
        return wire_draft(
            key,
            anonymous=rng.random() < 0.2,
            categories=cats,
            lat=rng.uniform(23.6, 23.9),
            lon=rng.uniform(90.3, 90.5),
            text=f"incident {rng.randrange(10_000)}",
        )

    for step in range(ops):
        roll = rng.random()
        try:
            if roll < 0.15 or not citizens:
                name = f"citizen{len(citizens)}"
                user_id = service.register(name, "citizen-pass")
                tokens[user_id] = service.login(name, "citizen-pass").token
                citizens.append(user_id)
            elif roll < 0.55:
                author = rng.choice(citizens)
                key = f"key-{step}" if rng.random() < 0.9 else "key-dup"
                public, _ = service.submit(random_draft(key), token=tokens[author])
                report_ids.append(public.report_id)
            elif roll < 0.85 and report_ids:
                rater = rng.choice(citizens)
                service.rate(tokens[rater], rng.choice(report_ids), rng.choice([1, -1]))
            elif report_ids:
                service.admin_verdict(
                    tokens[admin_id], rng.choice(report_ids), rng.choice(["confirm", "reject"])
                )
        except errors.CiviError:
            continue


def test_live_state_equals_replayed_state(tmp_path):
    rng = random.Random(500_500)
    service = make_service(tmp_path / "session")
    run_random_session(service, rng, ops=650)
    events = service.log.read_all()
    assert len(events) >= 500  # a substantial session; failed ops append nothing
    replayed = replay(events)
    live = service.view
    assert replayed.profiles == live.profiles  # bit-exact reputations
    assert replayed.trust_states == live.trust_states
    assert replayed.reports == live.reports
    assert replayed.client_keys == live.client_keys
    assert replayed.stream_events == live.stream_events
    assert replayed.next_report_id == live.next_report_id
    service.close()
