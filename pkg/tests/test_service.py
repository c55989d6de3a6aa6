import json

import pytest
from fastapi.testclient import TestClient

from casescope.config import ServiceConfig, resolve_config
from casescope.errors import ConfigError
from casescope.service import create_app


def test_health_and_ready(client):
    assert client.get("/health").json() == {"status": "ok"}
    ready = client.get("/ready").json()
    assert ready["ready"] is True
    assert ready["cases"] == 60


def test_cases_pagination_envelope(client):
    body = client.get("/cases?limit=10&offset=5").json()
    assert body["total"] == 60
    assert body["limit"] == 10 and body["offset"] == 5
    assert len(body["items"]) == 10


def test_cases_filters(client):
    spine = client.get("/cases?specialty=spine&limit=100").json()
    assert all(item["specialty"] == "spine" for item in spine["items"])
    ranged = client.get("/cases?from=2021-01-01&to=2021-06-30&limit=100").json()
    for item in ranged["items"]:
        assert "2021-01-01" <= item["admitDate"] <= "2021-06-30"


def test_cases_bad_date_is_400(client):
    assert client.get("/cases?from=notadate").status_code == 400


def test_cases_inverted_range_is_422(client):
    response = client.get("/cases?from=2022-01-01&to=2021-01-01")
    assert response.status_code == 422
    assert response.json()["error"]["code"] == "invalid_range"


def test_get_case_found_and_missing(client):
    body = client.get("/cases/c001").json()
    assert body["case"]["caseId"] == "c001"
    assert "indicatorStatuses" in body and "examSummary" in body
    status = next(iter(body["indicatorStatuses"].values()))
    assert {"value", "status", "radar", "stripe"} <= set(status)
    assert client.get("/cases/ghost").status_code == 404


def test_case_detail_fields(client):
    body = client.get("/cases/c001/detail").json()
    assert body["caseId"] == "c001"
    assert len(body["discSignals"]) == 5
    signal = body["discSignals"][0]
    assert {"region", "min", "mean", "max", "normalized", "protrusionScore", "csfRatio"} <= set(signal)
    assert 0.0 <= signal["normalized"]["mean"] <= 1.0
    assert body["detections"], "synthetic cases carry detections"
    assert body["links"], "labels occur in the diagnosis text"
    for link in body["links"]:
        det = body["detections"][link["detectionIndex"]]
        assert link["phrase"].lower() == det["label"].lower()


def test_mentions_ranked_and_searchable(client):
    ranked = client.get("/mentions?limit=5").json()
    assert len(ranked["items"]) == 5
    counts = [item["count"] for item in ranked["items"]]
    assert counts == sorted(counts, reverse=True)
    hits = client.get("/mentions/search?q=retreat").json()
    assert hits["total"] == 6
    assert client.get("/mentions/search").status_code == 400  # q missing


def test_embedding_coords_endpoint(client):
    body = client.get("/embedding/coords?space=fusion&limit=100").json()
    assert body["total"] == 60
    assert {"caseId", "x", "y"} <= set(body["items"][0])
    assert client.get("/embedding/coords?space=warp").status_code == 400


def test_glyph_endpoint(client):
    body = client.get("/glyph/c001?k=5").json()
    assert body["pairSim"]["imageIndicator"] == 1.0
    assert set(body["pairPopulation"]) == {"imageText", "imageIndicator", "textIndicator"}
    assert set(body["neighbors"]) == {"image", "text", "indicator"}
    assert len(body["neighbors"]["image"]["ids"]) == 5
    assert body["neighbors"]["image"]["radius"] == 0.0  # planted group coincides


def test_glyph_errors(client):
    assert client.get("/glyph/ghost?k=5").status_code == 404
    response = client.get("/glyph/c001?k=0")
    assert response.status_code == 422
    assert response.json()["error"]["code"] == "invalid_k"


def test_glyph_population_endpoint(client):
    body = client.get("/glyph/population?pair=imageIndicator&k=5").json()
    stats = body["stats"]
    assert stats["min"] <= stats["q1"] <= stats["median"] <= stats["q3"] <= stats["max"]
    assert client.get("/glyph/population?pair=bogus&k=5").status_code == 422


def test_group_links_endpoint(client):
    response = client.post("/group-links", json={"ids": ["c001", "c002", "c003"]})
    spaces = response.json()["spaces"]
    assert set(spaces) == {"image", "text", "indicator", "fusion"}
    assert [row["caseId"] for row in spaces["image"]] == ["c001", "c002", "c003"]
    assert client.post("/group-links", json={"ids": ["ghost"]}).status_code == 404


def test_layout_endpoint_deterministic(client):
    payload = {
        "texts": [
            {"id": "a", "label": "C4-C5 disc herniation", "halfExtents": [0.3, 0.1]},
            {"id": "b", "label": "mild stenosis", "halfExtents": [0.25, 0.1]},
        ],
        "image": {"halfExtents": [1.0, 0.8]},
        "config": {"seed": 4},
    }
    first = client.post("/layout", json=payload).json()
    second = client.post("/layout", json=payload).json()
    assert first == second
    assert first["residualOverlaps"] == 0
    assert first["converged"] is True
    assert set(first["positions"]) == {"a", "b"}


def test_layout_endpoint_validates(client):
    payload = {
        "texts": [{"id": "a", "label": "x", "halfExtents": [0.3, 0.1]}],
        "image": {"halfExtents": [1.0, 0.8]},
        "config": {"dt": -1.0},
    }
    assert client.post("/layout", json=payload).status_code == 400


def test_records_crud_and_export(client):
    created = client.post(
        "/records",
        json={
            "caseId": "c001",
            "summary": "initial take",
            "comments": "looks like retreat",
            "regionNotes": [
                {
                    "imageRef": "images/c001.png",
                    "label": "C6-C7",
                    "note": "narrowed",
                    "shape": {"type": "bbox", "bbox": [1, 2, 3, 4]},
                }
            ],
        },
    )
    assert created.status_code == 201
    rid = created.json()["recordId"]

    patched = client.patch(f"/records/{rid}", json={"summary": "revised"}).json()
    assert patched["summary"] == "revised"
    assert patched["comments"] == "looks like retreat"
    assert patched["updatedAt"] > patched["createdAt"]

    listed = client.get("/records?caseId=c001").json()
    assert any(r["recordId"] == rid for r in listed["items"])

    exported = client.get("/records/export?format=json")
    assert exported.status_code == 200
    assert any(r["recordId"] == rid for r in json.loads(exported.content))
    csv_export = client.get("/records/export?format=csv")
    assert csv_export.text.splitlines()[0].startswith("recordId,")
    assert client.get("/records/export?format=xml").status_code == 422

    assert client.post("/records", json={"caseId": "ghost"}).status_code == 404
    assert client.patch("/records/99999", json={"summary": "x"}).status_code == 404


def test_error_envelope_shape(client):
    body = client.get("/cases/ghost").json()
    assert set(body["error"]) == {"code", "message"}
    assert body["error"]["code"] == "not_found"


def test_repeated_get_byte_identical(client):
    a = client.get("/glyph/c007?k=5").content
    b = client.get("/glyph/c007?k=5").content
    assert a == b


def test_missing_data_dir_is_config_error(tmp_path):
    with pytest.raises(ConfigError, match="dataDir"):
        ServiceConfig(data_dir=tmp_path / "nope", records_path=tmp_path / "r.json").validate()


def test_create_app_requires_artifacts(tmp_path):
    empty = tmp_path / "data"
    empty.mkdir()
    with pytest.raises(ConfigError):
        create_app(ServiceConfig(data_dir=empty, records_path=tmp_path / "r.json"))


def test_resolve_config_precedence(tmp_path, synth_dir):
    file_path = tmp_path / "cfg.json"
    file_path.write_text(
        json.dumps({"dataDir": str(synth_dir), "recordsPath": str(tmp_path / "r.json"), "port": 1111, "defaultK": 9})
    )
    env = {"CASESCOPE_PORT": "2222"}
    config = resolve_config({"config": str(file_path), "port": 3333}, env)
    assert config.port == 3333  # flag beats env beats file
    config = resolve_config({"config": str(file_path)}, env)
    assert config.port == 2222
    config = resolve_config({"config": str(file_path)}, {})
    assert config.port == 1111
    assert config.default_k == 9


def test_startup_with_dangling_coords_fails(tmp_path, synth_dir):
    coords = json.loads((synth_dir / "coords.json").read_text())
    coords["image"]["ghost"] = [0.0, 0.0]
    bad = tmp_path / "coords.json"
    bad.write_text(json.dumps(coords))
    config = ServiceConfig(
        data_dir=synth_dir, records_path=tmp_path / "r.json", coords_file=bad
    )
    from casescope.errors import DanglingReference

    with pytest.raises(DanglingReference):
        create_app(config)
