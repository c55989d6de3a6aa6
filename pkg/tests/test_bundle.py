import datetime as dt
import io
import json

import pytest

from casescope.bundle import (
    bundle_from_dict,
    filter_cases,
    get_case,
    load_bundle,
    save_bundle,
    serialize_bundle,
)
from casescope.errors import DanglingReference, DuplicateId, InvalidRange, NotFound, SchemaError

from conftest import tiny_doc


def test_load_preserves_case_count(tiny_bundle):
    assert len(tiny_bundle.cases) == 3
    assert tiny_bundle.case_ids() == ["c1", "c2", "c3"]


def test_duplicate_case_id_rejected():
    doc = tiny_doc()
    doc["cases"][1]["caseId"] = "c1"
    doc["cases"][1]["imageRefs"] = ["images/c1.png"]
    doc["annotations"] = []
    with pytest.raises(DuplicateId):
        bundle_from_dict(doc)


def test_annotation_with_unknown_case_rejected():
    doc = tiny_doc()
    doc["annotations"][0]["caseId"] = "ghost"
    with pytest.raises(DanglingReference):
        bundle_from_dict(doc)


def test_annotation_with_foreign_image_ref_rejected():
    doc = tiny_doc()
    doc["annotations"][0]["imageRef"] = "images/c2.png"
    with pytest.raises(DanglingReference):
        bundle_from_dict(doc)


def test_lab_indicator_without_range_rejected():
    doc = tiny_doc()
    doc["cases"][0]["labIndicators"]["mystery"] = 1.0
    with pytest.raises(DanglingReference):
        bundle_from_dict(doc)


def test_schema_error_names_offending_path():
    doc = tiny_doc()
    doc["cases"][0]["demographics"]["age"] = -1
    with pytest.raises(SchemaError, match=r"\$\.cases\[0\]\.demographics\.age"):
        bundle_from_dict(doc)


def test_invalid_exam_enum_rejected():
    doc = tiny_doc()
    doc["cases"][0]["physicalExam"][0]["area"] = "torso"
    with pytest.raises(SchemaError, match="area"):
        bundle_from_dict(doc)


def test_empty_diagnosis_text_rejected():
    doc = tiny_doc()
    doc["cases"][0]["diagnosisText"] = "  "
    with pytest.raises(SchemaError, match="diagnosisText"):
        bundle_from_dict(doc)


def test_non_finite_lab_value_rejected():
    doc = tiny_doc()
    doc["cases"][0]["labIndicators"]["glucose"] = float("nan")
    with pytest.raises(SchemaError):
        bundle_from_dict(doc)


def test_disc_signal_ordering_enforced():
    doc = tiny_doc()
    doc["cases"][0]["discSignals"][0]["mean"] = 5.0  # below min
    with pytest.raises(SchemaError, match="min <= mean <= max"):
        bundle_from_dict(doc)


def test_history_served_most_recent_first(tiny_bundle):
    entries = get_case(tiny_bundle, "c1").history_entries
    assert [e.text for e in entries] == ["newer entry", "older entry"]


def test_round_trip_single_file(tiny_bundle, tmp_path):
    path = tmp_path / "bundle.json"
    save_bundle(tiny_bundle, path)
    assert load_bundle(path) == tiny_bundle


def test_round_trip_stream(tiny_bundle):
    payload = json.dumps(serialize_bundle(tiny_bundle))
    assert load_bundle(io.StringIO(payload)) == tiny_bundle


def test_directory_form_loads_identically(tiny_bundle, tmp_path):
    single = tmp_path / "bundle.json"
    save_bundle(tiny_bundle, single)
    as_dir = tmp_path / "bundle_dir"
    save_bundle(tiny_bundle, as_dir, as_directory=True)
    assert load_bundle(as_dir) == load_bundle(single)


def test_filter_no_filters_returns_all_date_descending(tiny_bundle):
    assert filter_cases(tiny_bundle) == ["c2", "c3", "c1"]


def test_filter_date_range_before_everything_is_empty(tiny_bundle):
    rng = (dt.date(2019, 1, 1), dt.date(2019, 12, 31))
    assert filter_cases(tiny_bundle, date_range=rng) == []


def test_filter_text_query_substring():
    doc = tiny_doc()
    # corpus of 10: exactly two diagnosis texts contain "retreat"
    base = doc["cases"][2]
    doc["annotations"] = []
    doc["cases"] = []
    texts = [
        "disc retreat",
        "severe herniation",
        "slight retreat at c6",
        "stenosis",
        "degeneration",
        "instability",
        "protrusion",
        "osteophyte",
        "myelopathy",
        "spondylosis",
    ]
    for i, text in enumerate(texts):
        case = json.loads(json.dumps(base))
        case["caseId"] = f"k{i}"
        case["labIndicators"] = {}
        case["imageRefs"] = []
        case["diagnosisText"] = text
        doc["cases"].append(case)
    bundle = bundle_from_dict(doc)
    expected = sorted(
        cid for cid, text in zip((f"k{i}" for i in range(10)), texts) if "retreat" in text
    )
    assert sorted(filter_cases(bundle, text_query="retreat")) == expected


def test_filter_conjunction_is_intersection(tiny_bundle):
    rng = (dt.date(2021, 1, 1), dt.date(2021, 4, 30))
    both = filter_cases(tiny_bundle, specialty="spine", date_range=rng)
    by_specialty = filter_cases(tiny_bundle, specialty="spine")
    by_date = filter_cases(tiny_bundle, date_range=rng)
    assert set(both) == set(by_specialty) & set(by_date)


def test_filter_invalid_range(tiny_bundle):
    with pytest.raises(InvalidRange):
        filter_cases(tiny_bundle, date_range=(dt.date(2022, 1, 1), dt.date(2021, 1, 1)))


def test_get_case_lookup_and_case_sensitivity(tiny_bundle):
    assert get_case(tiny_bundle, "c1").case_id == "c1"
    with pytest.raises(NotFound):
        get_case(tiny_bundle, "ghost")
    with pytest.raises(NotFound):
        get_case(tiny_bundle, "C1")


def test_load_missing_path_is_schema_error(tmp_path):
    with pytest.raises(SchemaError):
        load_bundle(tmp_path / "nope.json")
