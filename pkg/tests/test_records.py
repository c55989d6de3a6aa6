import datetime as dt
import json

import pytest

from casescope.errors import (
    DanglingReference,
    NotFound,
    SchemaError,
    StorageError,
    UnknownCase,
    UnsupportedFormat,
)
from casescope.records import (
    RecordPhase,
    RecordStore,
    RegionNote,
    record_to_dict,
    records_from_json,
)


@pytest.fixture()
def store(tmp_path, tiny_bundle):
    return RecordStore(tmp_path / "records.json", tiny_bundle)


def test_create_and_get_round_trip(store):
    note = RegionNote("images/c1.png", "C6-C7", "possible retreat", bbox=(1, 2, 3, 4))
    record = store.create("c1", "summary", "comments", [note])
    loaded = store.get(record.record_id)
    assert loaded == record
    assert loaded.region_notes[0].bbox == (1, 2, 3, 4)


def test_create_unknown_case(store):
    with pytest.raises(UnknownCase):
        store.create("ghost")


def test_create_foreign_image_ref(store):
    note = RegionNote("images/c2.png", "x", "y")
    with pytest.raises(DanglingReference):
        store.create("c1", region_notes=[note])


def test_record_ids_strictly_increase(store):
    first = store.create("c1")
    second = store.create("c2")
    assert second.record_id > first.record_id


def test_update_patches_only_given_fields(store):
    record = store.create("c1", "old summary", "old comments")
    patched = store.update(record.record_id, {"summary": "new"})
    assert patched.summary == "new"
    assert patched.comments == "old comments"


def test_update_bumps_updated_at(store):
    record = store.create("c1")
    patched = store.update(record.record_id, {"comments": "x"})
    assert patched.updated_at > patched.created_at
    again = store.update(record.record_id, {"comments": "y"})
    assert again.updated_at > patched.updated_at


def test_update_unknown_record(store):
    with pytest.raises(NotFound):
        store.update(999, {"summary": "x"})


def test_update_rejects_unknown_field(store):
    record = store.create("c1")
    with pytest.raises(SchemaError):
        store.update(record.record_id, {"caseId": "c2"})


def test_list_newest_first(store):
    # later creates carry later (or equal) timestamps; the id tie rule keeps
    # the order reverse-chronological either way
    ids = [store.create("c1").record_id for _ in range(3)]
    assert [r.record_id for r in store.list()] == sorted(ids, reverse=True)


def test_list_tie_on_created_at_prefers_higher_id(store, monkeypatch):
    frozen = dt.datetime(2024, 1, 1, tzinfo=dt.timezone.utc)
    monkeypatch.setattr(RecordStore, "_now", staticmethod(lambda: frozen))
    a = store.create("c1")
    b = store.create("c1")
    assert a.created_at == b.created_at
    assert [r.record_id for r in store.list()] == [b.record_id, a.record_id]


def test_list_filter_by_case(store):
    store.create("c1")
    store.create("c2")
    assert [r.case_id for r in store.list("c2")] == ["c2"]
    assert store.list("c3") == []


def test_durability_across_instances(store, tmp_path, tiny_bundle):
    record = store.create("c1", "persisted", "body")
    reopened = RecordStore(tmp_path / "records.json", tiny_bundle)
    assert [r.record_id for r in reopened.list()] == [record.record_id]
    assert reopened.get(record.record_id) == record


def test_no_temp_file_left_behind(store, tmp_path):
    store.create("c1")
    assert not list(tmp_path.glob("*.tmp"))


def test_corrupt_store_raises_storage_error(tmp_path, tiny_bundle):
    path = tmp_path / "records.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(StorageError):
        RecordStore(path, tiny_bundle)


def test_export_csv_shape(store):
    store.create("c1", 'summary, with "comma"', "c")
    store.create("c2", "plain")
    lines = store.export("csv").decode("utf-8").splitlines()
    assert len(lines) == 3
    assert lines[0].startswith("recordId,caseId,createdAt")
    assert '"summary, with ""comma"""' in lines[1] + lines[2]


def test_export_json_round_trips(store):
    store.create("c1", "a", "b", [RegionNote("images/c1.png", "L", "note")])
    store.create("c2", "c", "d")
    payload = store.export("json")
    parsed = records_from_json(payload)
    assert parsed == store.list()
    assert json.loads(payload) == [record_to_dict(r) for r in store.list()]


def test_export_unknown_format(store):
    with pytest.raises(UnsupportedFormat):
        store.export("xml")


def test_phase_validated(store):
    record = store.create("c1", phase=RecordPhase.LEARNING)
    assert record.phase is RecordPhase.LEARNING
    with pytest.raises(SchemaError):
        store.update(record.record_id, {"phase": "review"})
