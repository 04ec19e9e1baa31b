"""Tests for the game service: store durability, HTTP API, concurrency."""

import json
import threading

import numpy as np
import pytest
from fastapi.testclient import TestClient

from paretosearch.errors import (
    OutOfBounds,
    SessionFinished,
    UnknownProblem,
    UnknownSession,
)
from paretosearch.pipeline import load_sessions, step1
from paretosearch.service import SHOTS_MAX, GameStore, create_app
from paretosearch.testbed import PROBLEM_IDS, get_problem, score


def play_clicks(store, sid, n, seed=0):
    rng = np.random.default_rng(seed)
    results = []
    for _ in range(n):
        u, v = rng.uniform(0, 1, size=2)
        results.append(store.submit_click(sid, float(u), float(v)))
    return results


class TestGameStore:
    def test_create_session_fields(self, tmp_path):
        store = GameStore(tmp_path)
        view = store.create_session("U01", 1)
        assert view["shots_used"] == 0
        assert view["shots_max"] == SHOTS_MAX
        assert view["state"] == "active"
        assert view["best_score"] is None
        assert "problem_id" not in view  # identity hidden during play

    def test_distinct_tokens(self, tmp_path):
        store = GameStore(tmp_path)
        a = store.create_session("U01", 1)
        b = store.create_session("U01", 1)
        assert a["session_id"] != b["session_id"]

    def test_unknown_task_index(self, tmp_path):
        store = GameStore(tmp_path)
        with pytest.raises(UnknownProblem):
            store.create_session("U01", 0)
        with pytest.raises(UnknownProblem):
            store.create_session("U01", 11)

    def test_click_score_matches_testbed(self, tmp_path):
        store = GameStore(tmp_path)
        sid = store.create_session("U01", 1)["session_id"]
        res = store.submit_click(sid, 0.25, 0.75)
        problem = get_problem(PROBLEM_IDS[0])
        (lo1, hi1), (lo2, hi2) = problem.bounds
        x = (lo1 + 0.25 * (hi1 - lo1), lo2 + 0.75 * (hi2 - lo2))
        assert res["score"] == pytest.approx(score(problem, x), abs=1e-9)
        assert res["shots_remaining"] == SHOTS_MAX - 1

    def test_budget_and_finish(self, tmp_path):
        store = GameStore(tmp_path)
        sid = store.create_session("U01", 2)["session_id"]
        results = play_clicks(store, sid, SHOTS_MAX)
        assert results[-1]["state"] == "finished"
        assert results[-1]["shots_remaining"] == 0
        with pytest.raises(SessionFinished):
            store.submit_click(sid, 0.5, 0.5)

    def test_best_score_tracks_max(self, tmp_path):
        store = GameStore(tmp_path)
        sid = store.create_session("U01", 3)["session_id"]
        results = play_clicks(store, sid, 5, seed=3)
        best = max(r["score"] for r in results)
        assert results[-1]["best_score"] == pytest.approx(best)

    def test_out_of_unit_square(self, tmp_path):
        store = GameStore(tmp_path)
        sid = store.create_session("U01", 1)["session_id"]
        with pytest.raises(OutOfBounds):
            store.submit_click(sid, 1.2, 0.5)
        with pytest.raises(OutOfBounds):
            store.submit_click(sid, 0.5, -0.01)

    def test_unknown_session(self, tmp_path):
        store = GameStore(tmp_path)
        with pytest.raises(UnknownSession):
            store.submit_click("nope", 0.5, 0.5)
        with pytest.raises(UnknownSession):
            store.session_view("nope")

    def test_close_session_idempotent(self, tmp_path):
        store = GameStore(tmp_path)
        sid = store.create_session("U01", 1)["session_id"]
        play_clicks(store, sid, 2)
        assert store.close_session(sid)["state"] == "finished"
        assert store.close_session(sid)["state"] == "finished"

    def test_export_only_finished(self, tmp_path):
        store = GameStore(tmp_path)
        sid_full = store.create_session("U01", 1)["session_id"]
        play_clicks(store, sid_full, SHOTS_MAX, seed=1)
        sid_open = store.create_session("U02", 2)["session_id"]
        play_clicks(store, sid_open, 3, seed=2)
        sid_closed = store.create_session("U03", 3)["session_id"]
        play_clicks(store, sid_closed, 4, seed=3)
        store.close_session(sid_closed)

        exported = store.export_sessions()
        by_user = {s.user_id: s for s in exported}
        assert set(by_user) == {"U01", "U03"}
        assert by_user["U01"].complete is True
        assert len(by_user["U03"].clicks) == 4
        assert by_user["U03"].complete is False


class TestReplay:
    def test_restart_replays_acknowledged_clicks(self, tmp_path):
        store = GameStore(tmp_path)
        sid = store.create_session("U05", 4)["session_id"]
        play_clicks(store, sid, 7, seed=5)
        before = store.session_view(sid)
        store.close()

        reloaded = GameStore(tmp_path)
        after = reloaded.session_view(sid)
        assert after == before

    def test_replay_keeps_task_mapping(self, tmp_path):
        store = GameStore(tmp_path, shuffle_seed=99)
        mapping_before = list(store._mapping)
        sid = store.create_session("U01", 5)["session_id"]
        play_clicks(store, sid, 2, seed=6)
        store.close()

        reloaded = GameStore(tmp_path)
        assert list(reloaded._mapping) == mapping_before
        assert sorted(mapping_before) == sorted(PROBLEM_IDS)

    def test_corrupt_log_detected(self, tmp_path):
        store = GameStore(tmp_path)
        sid = store.create_session("U01", 1)["session_id"]
        play_clicks(store, sid, 1, seed=7)
        store.close()
        events = tmp_path / "events.jsonl"
        lines = events.read_text().splitlines()
        tampered = json.loads(lines[-1])
        tampered["y"] += 1.0
        events.write_text("\n".join(lines[:-1] + [json.dumps(tampered)]) + "\n")
        with pytest.raises(ValueError):
            GameStore(tmp_path)

    def test_finished_session_survives_restart(self, tmp_path):
        store = GameStore(tmp_path)
        sid = store.create_session("U01", 6)["session_id"]
        play_clicks(store, sid, SHOTS_MAX, seed=8)
        store.close()
        reloaded = GameStore(tmp_path)
        assert reloaded.session_view(sid)["state"] == "finished"
        assert len(reloaded.export_sessions()) == 1


class TestConcurrency:
    def test_two_writers_respect_budget(self, tmp_path):
        store = GameStore(tmp_path)
        sid = store.create_session("U09", 1)["session_id"]
        accepted = []
        rejected = []
        lock = threading.Lock()

        def writer(seed):
            rng = np.random.default_rng(seed)
            for _ in range(100):
                try:
                    res = store.submit_click(
                        sid, float(rng.uniform()), float(rng.uniform())
                    )
                    with lock:
                        accepted.append(res)
                except SessionFinished:
                    with lock:
                        rejected.append(1)

        threads = [threading.Thread(target=writer, args=(s,)) for s in (1, 2)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()

        assert len(accepted) == SHOTS_MAX
        assert len(rejected) == 200 - SHOTS_MAX
        view = store.session_view(sid)
        assert view["shots_used"] == SHOTS_MAX
        events = (tmp_path / "events.jsonl").read_text().splitlines()
        clicks = [json.loads(e) for e in events if json.loads(e)["event"] == "click"]
        assert len(clicks) == SHOTS_MAX


class TestHttpApi:
    @pytest.fixture()
    def client(self, tmp_path):
        app = create_app(tmp_path)
        with TestClient(app) as c:
            yield c

    def test_tasks_metadata(self, client):
        res = client.get("/api/tasks")
        assert res.status_code == 200
        body = res.json()
        assert body["count"] == 10
        assert body["shots_max"] == SHOTS_MAX
        assert body["task_indices"] == list(range(1, 11))

    def test_session_lifecycle(self, client):
        res = client.post("/api/sessions", json={"user_id": "U01", "task_index": 1})
        assert res.status_code == 201
        sid = res.json()["session_id"]

        res = client.post(f"/api/sessions/{sid}/clicks", json={"x": [0.5, 0.5]})
        assert res.status_code == 200
        body = res.json()
        assert body["shots_remaining"] == SHOTS_MAX - 1
        assert body["state"] == "active"

        res = client.get(f"/api/sessions/{sid}")
        assert res.status_code == 200
        assert len(res.json()["clicks"]) == 1

    def test_error_shapes(self, client):
        res = client.post("/api/sessions", json={"user_id": "U01", "task_index": 42})
        assert res.status_code == 404
        assert set(res.json()) == {"code", "message"}
        assert res.json()["code"] == "UnknownProblem"

        res = client.get("/api/sessions/missing")
        assert res.status_code == 404
        assert res.json()["code"] == "UnknownSession"

        res = client.post("/api/sessions", json={"user_id": "U01", "task_index": 1})
        sid = res.json()["session_id"]
        res = client.post(f"/api/sessions/{sid}/clicks", json={"x": [2.0, 0.5]})
        assert res.status_code == 422
        assert res.json()["code"] == "OutOfBounds"

        res = client.post(f"/api/sessions/{sid}/clicks", json={"x": [0.5]})
        assert res.status_code == 422
        assert res.json()["code"] == "ValidationError"

    def test_finished_click_conflicts(self, client):
        res = client.post("/api/sessions", json={"user_id": "U01", "task_index": 2})
        sid = res.json()["session_id"]
        for _ in range(SHOTS_MAX):
            client.post(f"/api/sessions/{sid}/clicks", json={"x": [0.3, 0.7]})
        res = client.post(f"/api/sessions/{sid}/clicks", json={"x": [0.3, 0.7]})
        assert res.status_code == 409
        assert res.json()["code"] == "SessionFinished"

    def test_export_empty(self, client):
        res = client.get("/api/export")
        assert res.status_code == 200
        assert res.text == ""

    def test_export_roundtrips_through_pipeline(self, client, tmp_path):
        res = client.post("/api/sessions", json={"user_id": "U07", "task_index": 3})
        sid = res.json()["session_id"]
        rng = np.random.default_rng(17)
        for _ in range(SHOTS_MAX):
            u, v = rng.uniform(0, 1, size=2)
            client.post(f"/api/sessions/{sid}/clicks", json={"x": [float(u), float(v)]})

        res = client.get("/api/export")
        path = tmp_path / "exported.jsonl"
        path.write_text(res.text)
        sessions = load_sessions(path)
        assert len(sessions) == 1
        assert sessions[0].user_id == "U07"
        assert len(sessions[0].clicks) == SHOTS_MAX

    def test_duplicate_click_location_allowed(self, client):
        res = client.post("/api/sessions", json={"user_id": "U01", "task_index": 1})
        sid = res.json()["session_id"]
        a = client.post(f"/api/sessions/{sid}/clicks", json={"x": [0.4, 0.4]})
        b = client.post(f"/api/sessions/{sid}/clicks", json={"x": [0.4, 0.4]})
        assert a.json()["score"] == b.json()["score"]


class TestExportAnalysis:
    def test_exported_short_session_yields_expected_records(self, tmp_path):
        store = GameStore(tmp_path)
        sid = store.create_session("U01", 1)["session_id"]
        play_clicks(store, sid, 5, seed=20)
        store.close_session(sid)
        sessions = store.export_sessions()
        records = step1(sessions)
        assert len(records) == 3 * (5 - 3)
