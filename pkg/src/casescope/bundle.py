"""Case-store: load, validate, serialize and query immutable case bundles.

A bundle document is one UTF-8 JSON file, or a directory holding
``manifest.json`` plus one JSON document per case (see docs/schemas.md).
Both forms load to the same value. Bundles are immutable after load;
reloading produces a new value.
"""

from __future__ import annotations

import datetime as dt
import json
import math
from pathlib import Path
from typing import IO, Any

from casescope.errors import DanglingReference, DuplicateId, InvalidRange, NotFound, SchemaError
from casescope.models import (
    CaseBundle,
    Demographics,
    DiscSignal,
    EmbeddingManifest,
    ExamArea,
    ExamItem,
    ExamKind,
    ExamStatus,
    HistoryEntry,
    PatientCase,
    RangeCategory,
    ReferenceRange,
    RegionAnnotation,
)

SCHEMA_VERSION = 1


def _fail(path: str, message: str) -> SchemaError:
    return SchemaError(f"{path}: {message}")


def _get(doc: dict, key: str, kind, path: str, optional: bool = False):
    if not isinstance(doc, dict):
        raise _fail(path, f"expected object, got {type(doc).__name__}")
    if key not in doc:
        if optional:
            return None
        raise _fail(f"{path}.{key}", "missing required field")
    value = doc[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise _fail(f"{path}.{key}", "expected number")
        if not math.isfinite(value):
            raise _fail(f"{path}.{key}", "expected finite number")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise _fail(f"{path}.{key}", "expected integer")
        return value
    if not isinstance(value, kind):
        raise _fail(f"{path}.{key}", f"expected {kind.__name__}")
    return value


def _parse_date(raw: Any, path: str) -> dt.date:
    if not isinstance(raw, str):
        raise _fail(path, "expected ISO date string")
    try:
        return dt.date.fromisoformat(raw)
    except ValueError as exc:
        raise _fail(path, f"invalid date: {exc}") from None


def _parse_enum(raw: Any, enum_cls, path: str):
    try:
        return enum_cls(raw)
    except ValueError:
        allowed = ", ".join(e.value for e in enum_cls)
        raise _fail(path, f"expected one of [{allowed}], got {raw!r}") from None


def _parse_exam_item(doc: dict, path: str) -> ExamItem:
    return ExamItem(
        name=_get(doc, "name", str, path),
        area=_parse_enum(_get(doc, "area", str, path), ExamArea, f"{path}.area"),
        kind=_parse_enum(_get(doc, "kind", str, path), ExamKind, f"{path}.kind"),
        status=_parse_enum(_get(doc, "status", str, path), ExamStatus, f"{path}.status"),
    )


def _parse_disc_signal(doc: dict, path: str) -> DiscSignal:
    sig = DiscSignal(
        region=_get(doc, "region", str, path),
        min=_get(doc, "min", float, path),
        mean=_get(doc, "mean", float, path),
        max=_get(doc, "max", float, path),
    )
    if not (sig.min <= sig.mean <= sig.max):
        raise _fail(path, f"requires min <= mean <= max, got {sig.min}/{sig.mean}/{sig.max}")
    return sig


def _parse_case(doc: dict, path: str) -> PatientCase:
    case_id = _get(doc, "caseId", str, path)
    if not case_id:
        raise _fail(f"{path}.caseId", "must be nonempty")
    demo = _get(doc, "demographics", dict, path)
    age = _get(demo, "age", float, f"{path}.demographics")
    if age < 0:
        raise _fail(f"{path}.demographics.age", "must be >= 0")
    history_raw = _get(doc, "historyEntries", list, path)
    history = tuple(
        HistoryEntry(
            date=_parse_date(_get(e, "date", str, f"{path}.historyEntries[{i}]"),
                             f"{path}.historyEntries[{i}].date"),
            text=_get(e, "text", str, f"{path}.historyEntries[{i}]"),
        )
        for i, e in enumerate(history_raw)
    )
    # presentation order is most-recent-first regardless of storage order
    history = tuple(sorted(history, key=lambda e: e.date, reverse=True))
    diagnosis = _get(doc, "diagnosisText", str, path)
    if not diagnosis.strip():
        raise _fail(f"{path}.diagnosisText", "must be nonempty")
    exam_raw = _get(doc, "physicalExam", list, path)
    labs_raw = _get(doc, "labIndicators", dict, path)
    labs: dict[str, float] = {}
    for name, value in labs_raw.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise _fail(f"{path}.labIndicators.{name}", "expected finite number")
        labs[name] = float(value)
    signals_raw = _get(doc, "discSignals", list, path)
    csf = None if doc.get("csfMean") is None else _get(doc, "csfMean", float, path)
    image_refs = doc.get("imageRefs", [])
    for i, ref in enumerate(image_refs):
        if not isinstance(ref, str):
            raise _fail(f"{path}.imageRefs[{i}]", "expected string")
    return PatientCase(
        case_id=case_id,
        specialty=_get(doc, "specialty", str, path),
        admit_date=_parse_date(_get(doc, "admitDate", str, path), f"{path}.admitDate"),
        demographics=Demographics(
            age=age,
            height_cm=_get(demo, "heightCm", float, f"{path}.demographics"),
            weight_kg=_get(demo, "weightKg", float, f"{path}.demographics"),
        ),
        chief_complaint=_get(doc, "chiefComplaint", str, path),
        history_entries=history,
        diagnosis_text=diagnosis,
        physical_exam=tuple(
            _parse_exam_item(e, f"{path}.physicalExam[{i}]") for i, e in enumerate(exam_raw)
        ),
        lab_indicators=labs,
        disc_signals=tuple(
            _parse_disc_signal(s, f"{path}.discSignals[{i}]") for i, s in enumerate(signals_raw)
        ),
        csf_mean=csf,
        image_refs=tuple(image_refs),
    )


def _parse_reference_range(doc: dict, path: str) -> ReferenceRange:
    rng = ReferenceRange(
        name=_get(doc, "name", str, path),
        category=_parse_enum(_get(doc, "category", str, path), RangeCategory, f"{path}.category"),
        low=_get(doc, "low", float, path),
        high=_get(doc, "high", float, path),
        unit=_get(doc, "unit", str, path),
    )
    if not rng.low < rng.high:
        raise _fail(path, f"requires low < high, got {rng.low}/{rng.high}")
    return rng


def _parse_bbox(raw: Any, path: str) -> tuple[float, float, float, float]:
    if not (isinstance(raw, list) and len(raw) == 4):
        raise _fail(path, "expected [x0, y0, x1, y1]")
    x0, y0, x1, y1 = (float(v) for v in raw)
    if not (x0 < x1 and y0 < y1):
        raise _fail(path, f"bbox must satisfy x0 < x1 and y0 < y1, got {raw}")
    return (x0, y0, x1, y1)


def _parse_annotation(doc: dict, path: str) -> RegionAnnotation:
    shape = _get(doc, "shape", dict, path)
    kind = _get(shape, "type", str, f"{path}.shape")
    bbox = polygon = None
    if kind == "bbox":
        bbox = _parse_bbox(_get(shape, "bbox", list, f"{path}.shape"), f"{path}.shape.bbox")
    elif kind == "polygon":
        pts = _get(shape, "points", list, f"{path}.shape")
        if len(pts) < 3:
            raise _fail(f"{path}.shape.points", "polygon needs at least 3 points")
        polygon = tuple((float(p[0]), float(p[1])) for p in pts)
    else:
        raise _fail(f"{path}.shape.type", f"expected 'bbox' or 'polygon', got {kind!r}")
    return RegionAnnotation(
        case_id=_get(doc, "caseId", str, path),
        image_ref=_get(doc, "imageRef", str, path),
        label=_get(doc, "label", str, path),
        bbox=bbox,
        polygon=polygon,
    )


def bundle_from_dict(doc: dict) -> CaseBundle:
    """Validate a parsed bundle document and build the immutable bundle."""
    version = _get(doc, "schemaVersion", int, "$")
    manifest_raw = doc.get("embeddingManifest") or {}
    manifest = EmbeddingManifest(
        image_dim=int(manifest_raw.get("image", 2048)),
        text_dim=int(manifest_raw.get("text", 768)),
    )
    ranges = tuple(
        _parse_reference_range(r, f"$.referenceRanges[{i}]")
        for i, r in enumerate(_get(doc, "referenceRanges", list, "$"))
    )
    seen_ranges: set[str] = set()
    for i, rng in enumerate(ranges):
        if rng.name in seen_ranges:
            raise _fail(f"$.referenceRanges[{i}].name", f"duplicate range name {rng.name!r}")
        seen_ranges.add(rng.name)

    cases = tuple(
        _parse_case(c, f"$.cases[{i}]") for i, c in enumerate(_get(doc, "cases", list, "$"))
    )
    seen_cases: set[str] = set()
    for case in cases:
        if case.case_id in seen_cases:
            raise DuplicateId(f"duplicate caseId {case.case_id!r}")
        seen_cases.add(case.case_id)
    for case in cases:
        for name in case.lab_indicators:
            if name not in seen_ranges:
                raise DanglingReference(
                    f"case {case.case_id!r}: labIndicator {name!r} has no reference range"
                )

    annotations = tuple(
        _parse_annotation(a, f"$.annotations[{i}]")
        for i, a in enumerate(doc.get("annotations", []))
    )
    by_id = {c.case_id: c for c in cases}
    for i, ann in enumerate(annotations):
        case = by_id.get(ann.case_id)
        if case is None:
            raise DanglingReference(f"$.annotations[{i}]: unknown caseId {ann.case_id!r}")
        if ann.image_ref not in case.image_refs:
            raise DanglingReference(
                f"$.annotations[{i}]: imageRef {ann.image_ref!r} not among case {ann.case_id!r} images"
            )

    bundle = CaseBundle(
        schema_version=version,
        cases=cases,
        reference_ranges=ranges,
        annotations=annotations,
        embedding_manifest=manifest,
    )
    return bundle


def _read_json(source: str | Path | IO) -> Any:
    if hasattr(source, "read"):
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        try:
            return json.loads(data)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"$: invalid JSON: {exc}") from None
    path = Path(source)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON: {exc}") from None


def load_bundle(source: str | Path | IO) -> CaseBundle:
    """Load a bundle from a JSON file, a readable stream, or a bundle directory."""
    if not hasattr(source, "read"):
        path = Path(source)
        if path.is_dir():
            return _load_bundle_dir(path)
        if not path.exists():
            raise SchemaError(f"{path}: no such file or directory")
    doc = _read_json(source)
    return bundle_from_dict(doc)


def _load_bundle_dir(root: Path) -> CaseBundle:
    manifest_path = root / "manifest.json"
    if not manifest_path.exists():
        raise SchemaError(f"{manifest_path}: missing manifest.json in bundle directory")
    manifest = _read_json(manifest_path)
    case_files = _get(manifest, "caseFiles", list, "$")
    cases = []
    for rel in case_files:
        case_path = root / rel
        if not case_path.exists():
            raise SchemaError(f"$.caseFiles: {rel!r} does not exist")
        cases.append(_read_json(case_path))
    doc = dict(manifest)
    doc.pop("caseFiles", None)
    doc["cases"] = cases
    return bundle_from_dict(doc)


def case_to_dict(case: PatientCase) -> dict:
    return {
        "caseId": case.case_id,
        "specialty": case.specialty,
        "admitDate": case.admit_date.isoformat(),
        "demographics": {
            "age": case.demographics.age,
            "heightCm": case.demographics.height_cm,
            "weightKg": case.demographics.weight_kg,
        },
        "chiefComplaint": case.chief_complaint,
        "historyEntries": [
            {"date": e.date.isoformat(), "text": e.text} for e in case.history_entries
        ],
        "diagnosisText": case.diagnosis_text,
        "physicalExam": [
            {"name": i.name, "area": i.area.value, "kind": i.kind.value, "status": i.status.value}
            for i in case.physical_exam
        ],
        "labIndicators": dict(case.lab_indicators),
        "discSignals": [
            {"region": s.region, "min": s.min, "mean": s.mean, "max": s.max}
            for s in case.disc_signals
        ],
        "csfMean": case.csf_mean,
        "imageRefs": list(case.image_refs),
    }


def _annotation_to_dict(ann: RegionAnnotation) -> dict:
    shape: dict[str, Any]
    if ann.bbox is not None:
        shape = {"type": "bbox", "bbox": list(ann.bbox)}
    else:
        shape = {"type": "polygon", "points": [list(p) for p in ann.polygon or ()]}
    return {"caseId": ann.case_id, "imageRef": ann.image_ref, "label": ann.label, "shape": shape}


def serialize_bundle(bundle: CaseBundle) -> dict:
    """Bundle as a JSON-ready document; load_bundle of this is the identity."""
    return {
        "schemaVersion": bundle.schema_version,
        "embeddingManifest": {
            "image": bundle.embedding_manifest.image_dim,
            "text": bundle.embedding_manifest.text_dim,
        },
        "referenceRanges": [
            {"name": r.name, "category": r.category.value, "low": r.low, "high": r.high, "unit": r.unit}
            for r in bundle.reference_ranges
        ],
        "annotations": [_annotation_to_dict(a) for a in bundle.annotations],
        "cases": [case_to_dict(c) for c in bundle.cases],
    }


def save_bundle(bundle: CaseBundle, path: str | Path, as_directory: bool = False) -> None:
    """Write a bundle as a single file or as manifest + per-case documents."""
    path = Path(path)
    doc = serialize_bundle(bundle)
    if not as_directory:
        path.write_text(json.dumps(doc, indent=2, sort_keys=True), encoding="utf-8")
        return
    path.mkdir(parents=True, exist_ok=True)
    (path / "cases").mkdir(exist_ok=True)
    case_files = []
    for case in doc.pop("cases"):
        rel = f"cases/{case['caseId']}.json"
        (path / rel).write_text(json.dumps(case, indent=2, sort_keys=True), encoding="utf-8")
        case_files.append(rel)
    doc["caseFiles"] = case_files
    (path / "manifest.json").write_text(json.dumps(doc, indent=2, sort_keys=True), encoding="utf-8")


def filter_cases(
    bundle: CaseBundle,
    specialty: str | None = None,
    date_range: tuple[dt.date, dt.date] | None = None,
    text_query: str | None = None,
) -> list[str]:
    """Ids of cases matching all given filters, admit-date descending then id ascending."""
    if date_range is not None:
        lo, hi = date_range
        if lo > hi:
            raise InvalidRange(f"date range start {lo} is after end {hi}")
    needle = text_query.lower() if text_query else None
    hits = []
    for case in bundle.cases:
        if specialty is not None and case.specialty != specialty:
            continue
        if date_range is not None and not (date_range[0] <= case.admit_date <= date_range[1]):
            continue
        if needle is not None and needle not in case.diagnosis_text.lower():
            continue
        hits.append(case)
    hits.sort(key=lambda c: (-(c.admit_date.toordinal()), c.case_id))
    return [c.case_id for c in hits]


def get_case(bundle: CaseBundle, case_id: str) -> PatientCase:
    """The case with the given id; ids are case-sensitive opaque strings."""
    case = bundle.case_index.get(case_id)
    if case is None:
        raise NotFound(f"unknown caseId {case_id!r}")
    return case
