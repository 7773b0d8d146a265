import json

import pytest
from fastapi.testclient import TestClient

from reprograph.canonical import serialize_graph
from reprograph.model import (
    Experiment,
    Hypothesis,
    Interpretation,
    ResultRecord,
    ResultValue,
    StudyGraph,
    StudyMetadata,
    Verdict,
)
from reprograph.service import create_app, resolve_data_dir


@pytest.fixture
def client(tmp_path):
    app = create_app(data_dir=tmp_path / "data")
    with TestClient(app) as c:
        yield c


def open_session(client, graph) -> str:
    response = client.post("/sessions", content=serialize_graph(graph))
    assert response.status_code == 201, response.text
    return response.json()["session_id"]


def rate_all(client, session_id, categories=("hypothesis",
                                             "experiment_description",
                                             "experiment_details",
                                             "interpretation")):
    for category in categories:
        response = client.post(f"/sessions/{session_id}/events", json={
            "kind": "rate", "payload": {"category": category, "value": 4}})
        assert response.status_code == 200, response.text


class TestSessionLifecycle:
    def test_create_returns_summary(self, client, minimal_graph):
        response = client.post("/sessions",
                               content=serialize_graph(minimal_graph))
        assert response.status_code == 201
        body = response.json()
        assert body["study_id"] == "minimal-01"
        assert body["state"] == "open"
        assert body["event_count"] == 0

    def test_malformed_body_is_parse_failure(self, client):
        response = client.post("/sessions", content="{nope")
        assert response.status_code == 400
        body = response.json()
        assert body["code"] == "parse_failure"
        assert "offset" in body

    def test_duplicate_json_keys_rejected(self, client, minimal_graph):
        text = serialize_graph(minimal_graph)
        doctored = text.replace('"format_version": "1"',
                                '"format_version": "1", "format_version": "1"',
                                1)
        response = client.post("/sessions", content=doctored)
        assert response.status_code == 400
        assert response.json()["code"] == "parse_failure"

    def test_invalid_graph_rejected(self, client):
        empty = StudyGraph(StudyMetadata(source_id="void"))
        response = client.post("/sessions", content=serialize_graph(empty))
        assert response.status_code == 422
        assert response.json()["code"] == "invalid_graph"

    def test_get_session_view(self, client, rich_graph):
        sid = open_session(client, rich_graph)
        view = client.get(f"/sessions/{sid}").json()
        assert view["extracted"] == view["working_copy"]
        assert view["corrections"]["statement_edits"] == []
        assert view["required_ratings"] == [
            "hypothesis", "experiment_description", "experiment_details",
            "interpretation"]

    def test_unknown_session_404(self, client):
        response = client.get("/sessions/deadbeef")
        assert response.status_code == 404
        assert response.json()["code"] == "unknown_session"


class TestEvents:
    def test_edit_statement_ack_carries_metrics(self, client, minimal_graph):
        sid = open_session(client, minimal_graph)
        original = minimal_graph.hypotheses[0].statement
        response = client.post(f"/sessions/{sid}/events", json={
            "kind": "edit_statement",
            "payload": {"element_id": "H1", "text": original + " Indeed."}})
        assert response.status_code == 200
        ack = response.json()
        assert ack["sequence_no"] == 1
        assert ack["metrics"]["levenshtein"] == 8
        assert ack["metrics"]["relative_edit_pct"] == pytest.approx(
            800 / len(original + " Indeed."))

    def test_event_updates_working_copy(self, client, rich_graph):
        sid = open_session(client, rich_graph)
        client.post(f"/sessions/{sid}/events", json={
            "kind": "edit_links",
            "payload": {"element_id": "I3", "link_field": "int_exp",
                        "remove": ["E2"]}})
        view = client.get(f"/sessions/{sid}").json()
        (i3,) = [i for i in view["working_copy"]["interpretations"]
                 if i["id"] == "I3"]
        assert i3["experiment_ids"] == ["E1"]
        assert view["corrections"]["link_edits"] == [{
            "element_id": "I3", "link_field": "int_exp",
            "added": [], "removed": ["E2"]}]

    def test_validation_rejection_is_422(self, client, minimal_graph):
        sid = open_session(client, minimal_graph)
        response = client.post(f"/sessions/{sid}/events", json={
            "kind": "edit_links",
            "payload": {"element_id": "E1", "link_field": "exp_hyp",
                        "remove": ["H1"]}})
        assert response.status_code == 422
        assert response.json()["code"] == "validation_rejected"
        view = client.get(f"/sessions/{sid}").json()
        assert view["event_count"] == 0

    def test_bad_event_body_is_422(self, client, minimal_graph):
        sid = open_session(client, minimal_graph)
        for body in (b"not json", b'{"payload": {}}'):
            response = client.post(f"/sessions/{sid}/events", content=body)
            assert response.status_code == 422
            assert response.json()["code"] == "invalid_event"

    def test_finalize_via_events_rejected(self, client, minimal_graph):
        sid = open_session(client, minimal_graph)
        response = client.post(f"/sessions/{sid}/events",
                               json={"kind": "finalize", "payload": {}})
        assert response.status_code == 422


class TestFinalize:
    def test_incomplete_review_409(self, client, minimal_graph):
        sid = open_session(client, minimal_graph)
        response = client.post(f"/sessions/{sid}/finalize")
        assert response.status_code == 409
        assert response.json()["code"] == "incomplete_review"

    def test_finalize_returns_full_outcome(self, client, minimal_graph):
        sid = open_session(client, minimal_graph)
        client.post(f"/sessions/{sid}/events", json={
            "kind": "supplement",
            "payload": {"kind": "hypothesis",
                        "element": {"statement": "Missed entirely."}}})
        rate_all(client, sid)
        response = client.post(f"/sessions/{sid}/finalize")
        assert response.status_code == 200
        body = response.json()
        assert body["study_id"] == "minimal-01"
        assert len(body["corrected"]["hypotheses"]) == 2
        assert body["corrections"]["supplements"][0]["element"]["id"] == "H2"
        assert len(body["ratings"]) == 4

        again = client.post(f"/sessions/{sid}/finalize")
        assert again.status_code == 409
        assert again.json()["code"] == "session_finalized"

    def test_events_after_finalize_409(self, client, minimal_graph):
        sid = open_session(client, minimal_graph)
        rate_all(client, sid)
        client.post(f"/sessions/{sid}/finalize")
        response = client.post(f"/sessions/{sid}/events", json={
            "kind": "rate", "payload": {"category": "hypothesis", "value": 2}})
        assert response.status_code == 409


class TestDatasetEndpoints:
    def test_studies_listing(self, client, minimal_graph, rich_graph):
        sid = open_session(client, minimal_graph)
        open_session(client, rich_graph)
        rate_all(client, sid)
        client.post(f"/sessions/{sid}/finalize")

        body = client.get("/studies").json()
        by_id = {s["study_id"]: s for s in body["studies"]}
        assert by_id["minimal-01"]["finalized"] is True
        assert by_id["rich-01"]["finalized"] is False

    def test_summary_without_data_is_404(self, client):
        response = client.get("/reports/summary")
        assert response.status_code == 404
        assert response.json()["code"] == "no_data"

    def test_summary_over_finalized_studies(self, client):
        graph = StudyGraph(
            metadata=StudyMetadata(source_id="svc-01"),
            hypotheses=(Hypothesis("H1", "Effect exists."),),
            experiments=(Experiment(
                "E1", "Measure it.", ("H1",),
                results=(ResultRecord("m", "run", ResultValue.scalar(1.0),
                                      unmatched=True),)),),
            interpretations=(Interpretation(
                "I1", "It does.", ("H1",), ("E1",),
                verdict=Verdict.SUPPORTS),),
        )
        sid = open_session(client, graph)
        client.post(f"/sessions/{sid}/events", json={
            "kind": "edit_statement",
            "payload": {"element_id": "H1", "text": "Effect is large."}})
        rate_all(client, sid)
        client.post(f"/sessions/{sid}/finalize")

        response = client.get("/reports/summary")
        assert response.status_code == 200
        assert response.headers["content-type"].startswith(
            "text/tab-separated-values")
        lines = response.text.splitlines()
        assert lines[0] == "category\terrors\tproportion_pct"
        assert "hypothesis_statements\t1\t100.00" in lines

    def test_summary_with_zero_population_is_409(self, client, minimal_graph):
        # The only finalized study has no result records at all, so the
        # result-value denominator is empty: a distinct failure from the
        # no-data case.
        sid = open_session(client, minimal_graph)
        rate_all(client, sid)
        client.post(f"/sessions/{sid}/finalize")
        response = client.get("/reports/summary")
        assert response.status_code == 409
        assert response.json()["code"] == "empty_population"


class TestAppConfiguration:
    def test_resolve_data_dir_precedence(self, monkeypatch, tmp_path):
        monkeypatch.delenv("REPRO_DATA_DIR", raising=False)
        assert resolve_data_dir(str(tmp_path)) == tmp_path
        assert str(resolve_data_dir(None)) == "review-data"
        monkeypatch.setenv("REPRO_DATA_DIR", str(tmp_path / "env"))
        assert resolve_data_dir(None) == tmp_path / "env"
        assert resolve_data_dir(str(tmp_path)) == tmp_path

    def test_static_dir_served_at_ui(self, tmp_path):
        static = tmp_path / "ui"
        static.mkdir()
        (static / "index.html").write_text("<html><body>review</body></html>",
                                           encoding="utf-8")
        app = create_app(data_dir=tmp_path / "data", static_dir=static)
        with TestClient(app) as client:
            response = client.get("/ui/")
            assert response.status_code == 200
            assert "review" in response.text

    def test_state_survives_app_restart(self, tmp_path, minimal_graph):
        with TestClient(create_app(data_dir=tmp_path / "data")) as client:
            sid = open_session(client, minimal_graph)
            client.post(f"/sessions/{sid}/events", json={
                "kind": "edit_statement",
                "payload": {"element_id": "H1", "text": "Persisted."}})

        with TestClient(create_app(data_dir=tmp_path / "data")) as client:
            view = client.get(f"/sessions/{sid}").json()
            assert view["working_copy"]["hypotheses"][0]["statement"] == (
                "Persisted.")

    def test_required_ratings_override(self, tmp_path, minimal_graph):
        app = create_app(data_dir=tmp_path / "data",
                         required_ratings=("hypothesis",))
        with TestClient(app) as client:
            sid = open_session(client, minimal_graph)
            client.post(f"/sessions/{sid}/events", json={
                "kind": "rate",
                "payload": {"category": "hypothesis", "value": 7}})
            assert client.post(f"/sessions/{sid}/finalize").status_code == 200
