"""Persistent analysis records ("cards") created while reviewing cases.

The store is a single JSON document rewritten atomically (write to a temp
file, fsync, rename) on every mutation; desk-scale volumes don't warrant
a database and the rename gives crash safety portably. Mutations are
serialized by a lock; reads serve the last committed snapshot.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import json
import os
import threading
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Any, Mapping, Sequence

from casescope.errors import (
    DanglingReference,
    NotFound,
    SchemaError,
    StorageError,
    UnknownCase,
    UnsupportedFormat,
)
from casescope.models import BBox, CaseBundle, Point


class RecordPhase(str, Enum):
    PRACTICE = "practice"
    LEARNING = "learning"


@dataclass(frozen=True)
class RegionNote:
    image_ref: str
    label: str
    note: str
    bbox: BBox | None = None
    polygon: tuple[Point, ...] | None = None


@dataclass(frozen=True)
class AnalysisRecord:
    record_id: int
    case_id: str
    created_at: dt.datetime
    updated_at: dt.datetime
    summary: str
    comments: str
    region_notes: tuple[RegionNote, ...]
    phase: RecordPhase


def note_to_dict(note: RegionNote) -> dict:
    shape: dict[str, Any]
    if note.bbox is not None:
        shape = {"type": "bbox", "bbox": list(note.bbox)}
    elif note.polygon is not None:
        shape = {"type": "polygon", "points": [list(p) for p in note.polygon]}
    else:
        shape = {"type": "none"}
    return {"imageRef": note.image_ref, "label": note.label, "note": note.note, "shape": shape}


def note_from_dict(doc: Mapping, path: str) -> RegionNote:
    shape = doc.get("shape") or {"type": "none"}
    bbox = polygon = None
    if shape.get("type") == "bbox":
        raw = shape.get("bbox")
        if not (isinstance(raw, list) and len(raw) == 4):
            raise SchemaError(f"{path}.shape.bbox: expected [x0, y0, x1, y1]")
        bbox = tuple(float(v) for v in raw)
    elif shape.get("type") == "polygon":
        polygon = tuple((float(x), float(y)) for x, y in shape.get("points", []))
    elif shape.get("type") != "none":
        raise SchemaError(f"{path}.shape.type: unsupported type {shape.get('type')!r}")
    return RegionNote(
        image_ref=str(doc.get("imageRef", "")),
        label=str(doc.get("label", "")),
        note=str(doc.get("note", "")),
        bbox=bbox,
        polygon=polygon,
    )


def record_to_dict(record: AnalysisRecord) -> dict:
    return {
        "recordId": record.record_id,
        "caseId": record.case_id,
        "createdAt": record.created_at.isoformat(),
        "updatedAt": record.updated_at.isoformat(),
        "summary": record.summary,
        "comments": record.comments,
        "regionNotes": [note_to_dict(n) for n in record.region_notes],
        "phase": record.phase.value,
    }


def record_from_dict(doc: Mapping, path: str = "$") -> AnalysisRecord:
    try:
        phase = RecordPhase(doc.get("phase", "practice"))
    except ValueError:
        raise SchemaError(f"{path}.phase: expected 'practice' or 'learning'") from None
    try:
        created = dt.datetime.fromisoformat(doc["createdAt"])
        updated = dt.datetime.fromisoformat(doc["updatedAt"])
    except (KeyError, ValueError) as exc:
        raise SchemaError(f"{path}: invalid timestamps ({exc})") from None
    return AnalysisRecord(
        record_id=int(doc["recordId"]),
        case_id=str(doc["caseId"]),
        created_at=created,
        updated_at=updated,
        summary=str(doc.get("summary", "")),
        comments=str(doc.get("comments", "")),
        region_notes=tuple(
            note_from_dict(n, f"{path}.regionNotes[{i}]")
            for i, n in enumerate(doc.get("regionNotes", []))
        ),
        phase=phase,
    )


def records_from_json(data: bytes | str) -> list[AnalysisRecord]:
    """Parse a JSON export back into records (round-trips with export json)."""
    doc = json.loads(data)
    if not isinstance(doc, list):
        raise SchemaError("$: expected a JSON list of records")
    return [record_from_dict(r, f"$[{i}]") for i, r in enumerate(doc)]


class RecordStore:
    """Single-writer record store bound to one JSON file."""

    def __init__(self, path: str | Path, bundle: CaseBundle | None = None):
        self._path = Path(path)
        self._bundle = bundle
        self._lock = threading.Lock()
        self._records: dict[int, AnalysisRecord] = {}
        self._next_id = 1
        if self._path.exists():
            self._load()

    def _load(self) -> None:
        try:
            doc = json.loads(self._path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise StorageError(f"cannot read record store {self._path}: {exc}") from None
        self._next_id = int(doc.get("nextRecordId", 1))
        for i, raw in enumerate(doc.get("records", [])):
            record = record_from_dict(raw, f"$.records[{i}]")
            self._records[record.record_id] = record
            self._next_id = max(self._next_id, record.record_id + 1)

    def _persist(self) -> None:
        doc = {
            "nextRecordId": self._next_id,
            "records": [record_to_dict(r) for r in sorted(self._records.values(), key=lambda r: r.record_id)],
        }
        payload = json.dumps(doc, indent=2, sort_keys=True)
        tmp = self._path.with_name(self._path.name + ".tmp")
        try:
            self._path.parent.mkdir(parents=True, exist_ok=True)
            with open(tmp, "w", encoding="utf-8") as fh:
                fh.write(payload)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, self._path)
        except OSError as exc:
            raise StorageError(f"cannot persist record store {self._path}: {exc}") from None

    def _validate_case(self, case_id: str, region_notes: Sequence[RegionNote]) -> None:
        if self._bundle is None:
            return
        case = self._bundle.case_index.get(case_id)
        if case is None:
            raise UnknownCase(f"unknown caseId {case_id!r}")
        for note in region_notes:
            if note.image_ref and note.image_ref not in case.image_refs:
                raise DanglingReference(
                    f"regionNote imageRef {note.image_ref!r} does not belong to case {case_id!r}"
                )

    @staticmethod
    def _now() -> dt.datetime:
        return dt.datetime.now(dt.timezone.utc)

    def create(
        self,
        case_id: str,
        summary: str = "",
        comments: str = "",
        region_notes: Sequence[RegionNote] = (),
        phase: RecordPhase = RecordPhase.PRACTICE,
    ) -> AnalysisRecord:
        """Create and durably persist a record before returning it."""
        self._validate_case(case_id, region_notes)
        with self._lock:
            now = self._now()
            record = AnalysisRecord(
                record_id=self._next_id,
                case_id=case_id,
                created_at=now,
                updated_at=now,
                summary=summary,
                comments=comments,
                region_notes=tuple(region_notes),
                phase=phase,
            )
            self._next_id += 1
            self._records[record.record_id] = record
            self._persist()
            return record

    def update(self, record_id: int, patch: Mapping[str, Any]) -> AnalysisRecord:
        """Replace the patched fields; updatedAt strictly increases."""
        allowed = {"summary", "comments", "regionNotes", "phase"}
        unknown = set(patch) - allowed
        if unknown:
            raise SchemaError(f"unknown patch fields: {sorted(unknown)}")
        with self._lock:
            record = self._records.get(record_id)
            if record is None:
                raise NotFound(f"unknown recordId {record_id}")
            changes: dict[str, Any] = {}
            if "summary" in patch:
                changes["summary"] = str(patch["summary"])
            if "comments" in patch:
                changes["comments"] = str(patch["comments"])
            if "regionNotes" in patch:
                notes = tuple(
                    n if isinstance(n, RegionNote) else note_from_dict(n, f"$.regionNotes[{i}]")
                    for i, n in enumerate(patch["regionNotes"])
                )
                self._validate_case(record.case_id, notes)
                changes["region_notes"] = notes
            if "phase" in patch:
                try:
                    changes["phase"] = RecordPhase(patch["phase"])
                except ValueError:
                    raise SchemaError("$.phase: expected 'practice' or 'learning'") from None
            updated_at = max(self._now(), record.updated_at + dt.timedelta(microseconds=1))
            record = replace(record, updated_at=updated_at, **changes)
            self._records[record_id] = record
            self._persist()
            return record

    def get(self, record_id: int) -> AnalysisRecord:
        record = self._records.get(record_id)
        if record is None:
            raise NotFound(f"unknown recordId {record_id}")
        return record

    def list(self, case_id: str | None = None) -> list[AnalysisRecord]:
        """Records newest-first by creation time; id ties go to the higher id."""
        records = [
            r for r in self._records.values() if case_id is None or r.case_id == case_id
        ]
        records.sort(key=lambda r: (r.created_at, r.record_id), reverse=True)
        return records

    def export(self, format: str, case_id: str | None = None) -> bytes:
        """Records as a JSON list or RFC-4180 CSV."""
        records = self.list(case_id)
        if format == "json":
            return json.dumps(
                [record_to_dict(r) for r in records], indent=2, sort_keys=True
            ).encode("utf-8")
        if format == "csv":
            buf = io.StringIO()
            writer = csv.writer(buf)
            writer.writerow(
                ["recordId", "caseId", "createdAt", "updatedAt", "phase",
                 "summary", "comments", "regionNoteCount", "regionNotes"]
            )
            for r in records:
                writer.writerow(
                    [
                        r.record_id,
                        r.case_id,
                        r.created_at.isoformat(),
                        r.updated_at.isoformat(),
                        r.phase.value,
                        r.summary,
                        r.comments,
                        len(r.region_notes),
                        "; ".join(f"{n.label}: {n.note}" for n in r.region_notes),
                    ]
                )
            return buf.getvalue().encode("utf-8")
        raise UnsupportedFormat(f"unsupported export format {format!r}")
