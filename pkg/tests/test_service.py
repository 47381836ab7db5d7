import json

import pytest
from fastapi.testclient import TestClient

from conftest import build_platform
from crowdboard.demo import make_demo_instances, make_demo_predictions
from crowdboard.service import create_app


@pytest.fixture
def world(default_tasks):
    task = default_tasks["arc_da"]
    instances = make_demo_instances(task, 8, seed=3)
    inst_map = {"arc_da": {i.instance_id: i for i in instances}}
    platform = build_platform(default_tasks, inst_map, backend=None)
    predictions = make_demo_predictions(instances, seed=11)
    return platform, TestClient(create_app(platform)), predictions


def as_jsonl(predictions: dict) -> str:
    return "\n".join(
        json.dumps({"id": k, "prediction": v}) for k, v in predictions.items()
    )


class TestHealthAndTasks:
    def test_healthz(self, world):
        _, client, _ = world
        body = client.get("/healthz").json()
        assert body["status"] == "ok"

    def test_tasks_catalogue(self, world):
        _, client, _ = world
        tasks = client.get("/tasks").json()["tasks"]
        assert {t["task_id"] for t in tasks} == {"arc_da", "anlg", "wmt19_de_en", "xsum"}

    def test_single_task(self, world):
        _, client, _ = world
        task = client.get("/tasks/xsum").json()
        assert task["paired_with_gold"] is True

    def test_unknown_task_404(self, world):
        _, client, _ = world
        assert client.get("/tasks/ghost").status_code == 404


class TestSubmissions:
    def test_submit_jsonl_payload(self, world):
        _, client, predictions = world
        response = client.post(
            "/tasks/arc_da/submissions",
            json={"submitter": "alice", "predictions": as_jsonl(predictions)},
        )
        assert response.status_code == 201
        body = response.json()
        assert body["status"] == "validated"

        view = client.get(f"/submissions/{body['submission_id']}").json()
        assert view["status"] == "validated"
        assert view["human"] == {}  # pending: no human scores yet
        assert set(view["metrics"])  # automatic metrics present from validated

    def test_submit_mapping_payload(self, world):
        _, client, predictions = world
        response = client.post(
            "/tasks/arc_da/submissions",
            json={"submitter": "alice", "predictions": predictions},
        )
        assert response.status_code == 201

    def test_invalid_submission_returns_violations(self, world):
        _, client, predictions = world
        broken = dict(predictions)
        broken.popitem()
        response = client.post(
            "/tasks/arc_da/submissions",
            json={"submitter": "alice", "predictions": broken},
        )
        assert response.status_code == 422
        assert response.json()["violations"]

    def test_rate_limit_429_with_retry_after(self, world):
        _, client, predictions = world
        for _ in range(3):
            client.post(
                "/tasks/arc_da/submissions",
                json={"submitter": "alice", "predictions": predictions},
            )
        response = client.post(
            "/tasks/arc_da/submissions",
            json={"submitter": "alice", "predictions": predictions},
        )
        assert response.status_code == 429
        assert "Retry-After" in response.headers

    def test_parse_error_400(self, world):
        _, client, _ = world
        response = client.post(
            "/tasks/arc_da/submissions",
            json={"submitter": "alice", "predictions": "{not json"},
        )
        assert response.status_code == 400

    def test_unknown_submission_404(self, world):
        _, client, _ = world
        assert client.get("/submissions/ghost").status_code == 404


class TestPlannerEndpoint:
    def test_se_target_plan(self, world):
        _, client, _ = world
        plan = client.get(
            "/plan-budget?cost_per_instance=0.10&target_se=0.0177"
        ).json()
        assert plan["n_instances"] == 800
        assert plan["total_cost"] == pytest.approx(80.0)

    def test_budget_plan(self, world):
        _, client, _ = world
        plan = client.get("/plan-budget?cost_per_instance=0.30&budget=90").json()
        assert plan["n_instances"] == 300

    def test_bad_parameters_400(self, world):
        _, client, _ = world
        assert client.get("/plan-budget?cost_per_instance=0.10").status_code == 400


class TestLeaderboardEndpoint:
    def test_fixture_order_and_display(self, default_tasks):
        from importlib import resources

        platform = build_platform(default_tasks, {}, backend=None)
        platform.load_fixture_entries(
            str(resources.files("crowdboard").joinpath("data/demo_leaderboard.json"))
        )
        client = TestClient(create_app(platform))
        board = client.get("/tasks/wmt19_de_en/leaderboard").json()
        assert [e["submitter"] for e in board["entries"]] == [
            "FairSeq-large", "FAIR", "JHU", "FairSeq-base",
        ]
        top = board["entries"][0]["human"]["adequacy"]["display"]
        assert top == {"mean": 70.6, "plus": 2.1, "minus": 2.1}

    def test_unknown_aspect_400(self, world):
        _, client, _ = world
        response = client.get("/tasks/arc_da/leaderboard?sort_aspect=ghost")
        assert response.status_code == 400

    def test_empty_task_empty_board(self, world):
        _, client, _ = world
        board = client.get("/tasks/anlg/leaderboard").json()
        assert board["entries"] == [] and board["unscored"] == []


class TestAnnotationEndpoints:
    def prepare_released(self, platform, client, predictions):
        client.post(
            "/tasks/arc_da/submissions",
            json={"submitter": "alice", "predictions": predictions},
        )
        client.post("/pipeline/step")
        client.post("/pipeline/step")
        platform.clock.advance(hours=5)
        client.post("/pipeline/step")
        client.post(
            "/annotators",
            json={
                "annotator_id": "human-1",
                "hits_completed": 6000,
                "approval_rate": 0.995,
                "passed_qual_tests": ["arc_da"],
            },
        )

    def test_next_then_label_then_idempotent_retry(self, world):
        platform, client, predictions = world
        self.prepare_released(platform, client, predictions)

        nxt = client.get("/annotators/human-1/next").json()
        assert nxt["done"] is False
        assignment = nxt["assignment"]
        assert "presentation_key" not in json.dumps(assignment)
        assert assignment["task"]["scheme"]["kind"] == "likert5"

        aid = assignment["assignment_id"]
        first = client.post(
            f"/assignments/{aid}/label", json={"annotator_id": "human-1", "labels": 3}
        )
        assert first.status_code == 200
        assert first.json()["recorded"] == 1
        retry = client.post(
            f"/assignments/{aid}/label", json={"annotator_id": "human-1", "labels": 3}
        )
        assert retry.status_code == 200
        assert retry.json() == first.json()

    def test_unqualified_gets_403(self, world):
        platform, client, predictions = world
        self.prepare_released(platform, client, predictions)
        client.post("/annotators", json={"annotator_id": "newbie"})
        assert client.get("/annotators/newbie/next").status_code == 403

    def test_unknown_annotator_403(self, world):
        _, client, _ = world
        assert client.get("/annotators/ghost/next").status_code == 403

    def test_done_when_queue_empty(self, world):
        platform, client, predictions = world
        client.post(
            "/annotators",
            json={
                "annotator_id": "human-1",
                "hits_completed": 6000,
                "approval_rate": 0.995,
                "passed_qual_tests": ["arc_da"],
            },
        )
        assert client.get("/annotators/human-1/next").json() == {"done": True}

    def test_stale_label_conflict(self, world):
        platform, client, predictions = world
        self.prepare_released(platform, client, predictions)
        some_assignment = sorted(platform.state.assignments)[0]
        response = client.post(
            f"/assignments/{some_assignment}/label",
            json={"annotator_id": "human-1", "labels": 3},
        )
        assert response.status_code == 409


class TestPairedTaskOverHttp:
    def test_paired_next_payload_is_blind_and_labels_both_panels(self, default_tasks):
        task = default_tasks["xsum"]
        instances = make_demo_instances(task, 4, seed=9)
        inst_map = {"xsum": {i.instance_id: i for i in instances}}
        platform = build_platform(default_tasks, inst_map, backend=None)
        client = TestClient(create_app(platform))
        predictions = make_demo_predictions(instances, seed=2)
        client.post(
            "/tasks/xsum/submissions",
            json={"submitter": "carol", "predictions": predictions},
        )
        client.post("/pipeline/step")
        client.post("/pipeline/step")
        platform.clock.advance(hours=5)
        client.post("/pipeline/step")
        client.post(
            "/annotators",
            json={
                "annotator_id": "human-1",
                "hits_completed": 6000,
                "approval_rate": 0.995,
                "passed_qual_tests": ["xsum"],
            },
        )

        raw = client.get("/annotators/human-1/next")
        assert "gold" not in raw.text.lower()
        assert "presentation" not in raw.text.lower()
        assignment = raw.json()["assignment"]
        assert len(assignment["candidates"]) == 2
        assert assignment["task"]["paired"] is True

        labels = {aspect["name"]: [3, 4] for aspect in assignment["task"]["aspects"]}
        ack = client.post(
            f"/assignments/{assignment['assignment_id']}/label",
            json={"annotator_id": "human-1", "labels": labels},
        )
        assert ack.status_code == 200
        assert ack.json()["recorded"] == 5  # one model-side record per aspect
        sid = assignment["assignment_id"].split(":")[0]
        assert len(platform.state.gold_annotations[sid]) == 5
