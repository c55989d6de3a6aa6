import copy

import pytest

from casescope.bundle import bundle_from_dict
from casescope.synth import PlantedGroup, SynthConfig, generate, write_outputs

TINY_BUNDLE_DOC = {
    "schemaVersion": 1,
    "embeddingManifest": {"image": 4, "text": 3},
    "referenceRanges": [
        {"name": "glucose", "category": "fixedScreen", "low": 3.9, "high": 6.1, "unit": "mmol/L"},
        {"name": "lymphocyte percent", "category": "completeBloodCount", "low": 20.0, "high": 40.0, "unit": "%"},
    ],
    "annotations": [
        {
            "caseId": "c1",
            "imageRef": "images/c1.png",
            "label": "C6-C7",
            "shape": {"type": "bbox", "bbox": [10.0, 10.0, 50.0, 40.0]},
        }
    ],
    "cases": [
        {
            "caseId": "c1",
            "specialty": "spine",
            "admitDate": "2021-03-01",
            "demographics": {"age": 54, "heightCm": 172.0, "weightKg": 71.5},
            "chiefComplaint": "neck pain",
            "historyEntries": [
                {"date": "2021-01-05", "text": "older entry"},
                {"date": "2021-02-20", "text": "newer entry"},
            ],
            "diagnosisText": "disc herniation",
            "physicalExam": [
                {"name": "neck tenderness", "area": "neck", "kind": "generalCondition", "status": "normal"},
                {"name": "biceps reflex left", "area": "upperLimbs", "kind": "fineMotorReflex", "status": "abnormal"},
            ],
            "labIndicators": {"glucose": 5.0, "lymphocyte percent": 31.0},
            "discSignals": [{"region": "C6-C7", "min": 10.0, "mean": 40.0, "max": 50.0}],
            "csfMean": 120.0,
            "imageRefs": ["images/c1.png"],
        },
        {
            "caseId": "c2",
            "specialty": "spine",
            "admitDate": "2021-05-10",
            "demographics": {"age": 37, "heightCm": 165.0, "weightKg": 58.0},
            "chiefComplaint": "finger numbness",
            "historyEntries": [{"date": "2021-04-28", "text": "single entry"}],
            "diagnosisText": "disc retreat",
            "physicalExam": [
                {"name": "neck tenderness", "area": "neck", "kind": "generalCondition", "status": "abnormal"}
            ],
            "labIndicators": {"glucose": 6.1},
            "discSignals": [{"region": "C6-C7", "min": 30.0, "mean": 35.0, "max": 55.0}],
            "csfMean": 110.0,
            "imageRefs": ["images/c2.png"],
        },
        {
            "caseId": "c3",
            "specialty": "orthopedics",
            "admitDate": "2021-04-02",
            "demographics": {"age": 61, "heightCm": 181.0, "weightKg": 84.0},
            "chiefComplaint": "shoulder stiffness",
            "historyEntries": [],
            "diagnosisText": "herniation found",
            "physicalExam": [],
            "labIndicators": {"lymphocyte percent": 44.0},
            "discSignals": [{"region": "C6-C7", "min": 20.0, "mean": 42.0, "max": 60.0}],
            "csfMean": None,
            "imageRefs": ["images/c3.png"],
        },
    ],
}


def tiny_doc() -> dict:
    return copy.deepcopy(TINY_BUNDLE_DOC)


@pytest.fixture()
def tiny_bundle():
    return bundle_from_dict(tiny_doc())


@pytest.fixture(scope="session")
def synth_result():
    config = SynthConfig(
        n_cases=60,
        seed=7,
        planted_groups=(PlantedGroup(6, frozenset({"image", "indicator"}), 0.0),),
    )
    return generate(config)


@pytest.fixture(scope="session")
def synth_dir(tmp_path_factory, synth_result):
    out = tmp_path_factory.mktemp("synth")
    write_outputs(synth_result, out)
    return out


@pytest.fixture(scope="session")
def client(synth_dir, tmp_path_factory):
    from fastapi.testclient import TestClient

    from casescope.config import ServiceConfig
    from casescope.service import create_app

    records = tmp_path_factory.mktemp("records") / "records.json"
    app = create_app(ServiceConfig(data_dir=synth_dir, records_path=records))
    with TestClient(app) as test_client:
        yield test_client
