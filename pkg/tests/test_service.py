import threading

import pytest
from fastapi.testclient import TestClient

from autoreview.core import NOT_PROVIDED
from autoreview.corpus import call_to_dict, record_to_dict
from autoreview.service import ServiceConfig, create_app
from autoreview.store import (
    InvalidTransition,
    NotFound,
    ReviewStore,
    VersionConflict,
)


@pytest.fixture()
def client(tmp_path, small_models, small_corpus):
    config = ServiceConfig(
        store_path=str(tmp_path / "store.db"),
        synchronous_ingest=True,
        auth_token="token123",
    )
    app = create_app(config, models=small_models)
    with TestClient(app) as test_client:
        test_client.headers.update({"Authorization": "Bearer token123"})
        yield test_client


def ingest(client, small_corpus, run_id="run1", strategy="DirectExtraction", n=20):
    calls, records = small_corpus["test"]
    calls = calls[:n]
    ids = {c.call_id for c in calls}
    payload = {
        "calls": [call_to_dict(c) for c in calls],
        "records": [record_to_dict(r) for r in records if r.call_id in ids],
        "strategy": strategy,
        "run_id": run_id,
    }
    response = client.post("/runs", json=payload)
    assert response.status_code == 200, response.text
    return response.json()


class TestIngest:
    def test_healthz_is_open(self, client):
        client.headers.pop("Authorization")
        assert client.get("/healthz").json() == {"status": "ok"}

    def test_fields_exposes_format_patterns(self, client):
        data = client.get("/fields").json()
        by_id = {f["field_id"]: f for f in data["fields"]}
        assert set(by_id) == {"AgentName", "ReferenceNumber", "GroupNumber"}
        assert by_id["GroupNumber"]["format_pattern"]
        assert by_id["GroupNumber"]["criticality"] == "Critical"

    def test_auth_required(self, client):
        client.headers.pop("Authorization")
        assert client.get("/items").status_code == 401

    def test_run_completes_and_counts_add_up(self, client, small_corpus):
        ingest(client, small_corpus)
        run = client.get("/runs/run1").json()
        assert run["status"] == "complete"
        assert run["decision_count"] == 60
        counts = run["item_counts"]
        assert counts["Pending"] == run["flagged_count"]
        assert counts["Approved"] == counts["Corrected"] == 0

    def test_unknown_strategy_rejected(self, client):
        response = client.post(
            "/runs", json={"calls": [], "records": [], "strategy": "Wat"}
        )
        assert response.status_code == 422

    def test_missing_corpus_rejected(self, client):
        assert client.post("/runs", json={"strategy": "Hybrid"}).status_code == 422

    def test_duplicate_run_id_conflicts(self, client, small_corpus):
        ingest(client, small_corpus, n=5)
        calls, records = small_corpus["test"]
        ids = {c.call_id for c in calls[:5]}
        response = client.post(
            "/runs",
            json={
                "calls": [call_to_dict(c) for c in calls[:5]],
                "records": [record_to_dict(r) for r in records if r.call_id in ids],
                "strategy": "Hybrid",
                "run_id": "run1",
            },
        )
        assert response.status_code == 409


class TestQueue:
    def test_sorted_ascending_by_score(self, client, small_corpus):
        ingest(client, small_corpus, n=40)
        data = client.get("/items", params={"status": "Pending", "page_size": 100}).json()
        scores = [item["score"] for item in data["items"]]
        assert scores == sorted(scores)
        assert data["total"] == len(data["items"])

    def test_filter_by_field(self, client, small_corpus):
        ingest(client, small_corpus, n=40)
        data = client.get("/items", params={"field": "GroupNumber"}).json()
        assert all(item["field_id"] == "GroupNumber" for item in data["items"])

    def test_items_carry_evidence_alternatives(self, client, small_corpus):
        ingest(client, small_corpus, n=40)
        data = client.get("/items", params={"status": "Pending"}).json()
        item = data["items"][0]
        assert item["evidence"], "flagged item should carry evidence utterances"
        assert all("alternatives" in u for u in item["evidence"])


class TestSubmitReview:
    def test_approve_transition(self, client, small_corpus):
        ingest(client, small_corpus, n=40)
        item = client.get("/items").json()["items"][0]
        response = client.post(
            f"/items/{item['item_id']}/review",
            json={"version": item["version"], "action": "approve"},
        )
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "Approved"
        assert body["version"] == item["version"] + 1

    def test_stale_version_conflicts_and_leaves_item_unchanged(self, client, small_corpus):
        ingest(client, small_corpus, n=40)
        item = client.get("/items").json()["items"][0]
        first = client.post(
            f"/items/{item['item_id']}/review",
            json={"version": item["version"], "action": "approve"},
        )
        second = client.post(
            f"/items/{item['item_id']}/review",
            json={"version": item["version"], "action": "correct", "corrected_value": "AD0156"},
        )
        assert first.status_code == 200
        assert second.status_code == 409
        current = client.get(f"/items/{item['item_id']}").json()
        assert current["status"] == "Approved"
        assert current["corrected_value"] is None

    def test_invalid_format_is_validation_error(self, client, small_corpus):
        ingest(client, small_corpus, n=40)
        items = client.get("/items", params={"field": "GroupNumber"}).json()["items"]
        item = items[0]
        response = client.post(
            f"/items/{item['item_id']}/review",
            json={"version": item["version"], "action": "correct", "corrected_value": "??"},
        )
        assert response.status_code == 422
        assert client.get(f"/items/{item['item_id']}").json()["status"] == "Pending"

    def test_correction_normalized_before_storage(self, client, small_corpus):
        ingest(client, small_corpus, n=40)
        items = client.get("/items", params={"field": "GroupNumber"}).json()["items"]
        item = items[0]
        response = client.post(
            f"/items/{item['item_id']}/review",
            json={"version": item["version"], "action": "correct", "corrected_value": "ad 0156"},
        )
        assert response.status_code == 200
        assert response.json()["corrected_value"] == "AD0156"

    def test_unknown_item_404(self, client):
        response = client.post(
            "/items/nope/review", json={"version": 1, "action": "approve"}
        )
        assert response.status_code == 404


class TestExportAndReport:
    def test_export_contains_reviewed_items_only(self, client, small_corpus):
        ingest(client, small_corpus, n=40)
        items = client.get("/items", params={"page_size": 5}).json()["items"]
        client.post(
            f"/items/{items[0]['item_id']}/review",
            json={"version": items[0]["version"], "action": "approve"},
        )
        corrected_value = "ZZ99001"
        client.post(
            f"/items/{items[1]['item_id']}/review",
            json={
                "version": items[1]["version"],
                "action": "correct",
                "corrected_value": corrected_value,
            },
        )
        export = client.get("/runs/run1/export").text.strip().splitlines()
        assert len(export) == 2
        import json as json_mod

        rows = [json_mod.loads(line) for line in export]
        by_call = {(r["call_id"], r["field_id"]): r for r in rows}
        approved = by_call[(items[0]["call_id"], items[0]["field_id"])]
        assert approved["gold_value"] == items[0]["live_call_value"]
        corrected = by_call[(items[1]["call_id"], items[1]["field_id"])]
        assert corrected["gold_value"] == corrected_value

    def test_export_is_deterministic(self, client, small_corpus):
        ingest(client, small_corpus, n=40)
        items = client.get("/items", params={"page_size": 3}).json()["items"]
        for item in items:
            client.post(
                f"/items/{item['item_id']}/review",
                json={"version": item["version"], "action": "approve"},
            )
        first = client.get("/runs/run1/export").text
        second = client.get("/runs/run1/export").text
        assert first == second

    def test_report_available_with_golds(self, client, small_corpus):
        ingest(client, small_corpus, n=40)
        report = client.get("/runs/run1/report")
        assert report.status_code == 200
        body = report.json()
        assert set(body["per_field"]) == {"AgentName", "ReferenceNumber", "GroupNumber"}
        assert 0.0 <= body["average"]["f1"] <= 1.0


class TestStoreConcurrency:
    def test_no_item_lost(self, client, small_corpus):
        ingest(client, small_corpus, n=40)
        run = client.get("/runs/run1").json()
        counts = run["item_counts"]
        items = client.get("/items", params={"page_size": 100}).json()["items"]
        for item in items[:4]:
            client.post(
                f"/items/{item['item_id']}/review",
                json={"version": item["version"], "action": "approve"},
            )
        counts_after = client.get("/runs/run1").json()["item_counts"]
        assert sum(counts.values()) == sum(counts_after.values())

    def test_concurrent_writers_exactly_one_wins(self, tmp_path, small_models, small_corpus):
        from autoreview.core import FieldRecord, ReviewDecision, Strategy, Verdict

        store = ReviewStore(tmp_path / "race.db")
        store.create_run("r", "Hybrid")
        decision = ReviewDecision(
            call_id="c1",
            field_id="GroupNumber",
            verdict=Verdict.FLAG_FOR_HUMAN,
            strategy=Strategy.HYBRID,
            score=0.1,
        )
        record = FieldRecord("c1", "GroupNumber", "AD0156", "AD0156")
        item = store.add_item("r", decision, record, evidence=[])

        outcomes = []

        def submit(action, value=None):
            try:
                store.submit_review(item.item_id, item.version, action, value)
                outcomes.append("win")
            except (VersionConflict, InvalidTransition):
                outcomes.append("conflict")

        threads = [
            threading.Thread(target=submit, args=("approve",)),
            threading.Thread(target=submit, args=("correct", "ZZ0156")),
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert sorted(outcomes) == ["conflict", "win"]
        final = store.get_item(item.item_id)
        assert final.status in ("Approved", "Corrected")
        assert final.version == item.version + 1
        store.close()

    def test_export_feedback_loop_grows_training_set(self, client, small_corpus, specs):
        # reviewed items exported as gold labels must grow the pseudo-label
        # training set monotonically as more reviews complete
        import json as json_mod

        from autoreview.corpus import record_from_dict
        from autoreview.pseudolabel import generate_pseudo_labels

        ingest(client, small_corpus, n=40)
        calls, _ = small_corpus["test"]
        calls = calls[:40]

        def exported_examples():
            lines = client.get("/runs/run1/export").text.strip().splitlines()
            records = [record_from_dict(json_mod.loads(line)) for line in lines]
            examples, _ = generate_pseudo_labels(calls, records, specs)
            return len(examples)

        sizes = [exported_examples()]
        items = client.get("/items", params={"page_size": 50}).json()["items"]
        for count in (3, 6):
            for item in items[:count]:
                current = client.get(f"/items/{item['item_id']}").json()
                if current["status"] != "Pending":
                    continue
                client.post(
                    f"/items/{item['item_id']}/review",
                    json={"version": current["version"], "action": "approve"},
                )
            sizes.append(exported_examples())
        assert sizes == sorted(sizes)
        assert sizes[-1] > sizes[0]

    def test_terminal_transition_enforced(self, tmp_path):
        from autoreview.core import FieldRecord, ReviewDecision, Strategy, Verdict

        store = ReviewStore(tmp_path / "term.db")
        store.create_run("r", "Hybrid")
        decision = ReviewDecision(
            call_id="c1",
            field_id="GroupNumber",
            verdict=Verdict.FLAG_FOR_HUMAN,
            strategy=Strategy.HYBRID,
            score=0.1,
        )
        record = FieldRecord("c1", "GroupNumber", "AD0156", "AD0156")
        item = store.add_item("r", decision, record, evidence=[])
        updated = store.submit_review(item.item_id, 1, "approve")
        with pytest.raises(InvalidTransition):
            store.submit_review(item.item_id, updated.version, "correct", "AD0157")
        with pytest.raises(NotFound):
            store.get_item("missing")
        store.close()
