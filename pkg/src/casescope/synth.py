"""Deterministic synthetic bundle generator with planted cross-modal structure.

Planted groups share coordinates (up to a configurable spread) in their
agreeing modalities, so neighborhood-similarity expectations are exact by
construction; everything else is drawn from one seeded generator, making
whole output trees byte-reproducible.
"""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np
from PIL import Image, ImageDraw

from casescope.bundle import bundle_from_dict
from casescope.errors import ConfigError
from casescope.models import CaseBundle

REGIONS = ("C2-C3", "C3-C4", "C4-C5", "C5-C6", "C6-C7")

# condition vocabulary: planted groups draw from the first pool so their
# keyword stays rare in the rest of the corpus
PLANTED_CONDITIONS = ("retreat", "herniation", "protrusion", "osteophyte", "myelopathy")
GENERAL_CONDITIONS = ("degeneration", "stenosis", "spondylosis", "instability")

SPECIALTIES = ("spine", "orthopedics", "neurology")

CHIEF_COMPLAINTS = (
    "neck pain radiating to the left arm",
    "finger numbness for two months",
    "shoulder stiffness and morning pain",
    "tingling in both hands",
    "neck pain after prolonged desk work",
)

HISTORY_TEXTS = (
    "symptoms worsened over the last month",
    "reports intermittent numbness since onset",
    "previous conservative treatment with little relief",
    "no trauma history reported",
)

TEXT_TEMPLATES = (
    "{region} disc {condition} with mild canal narrowing",
    "{region} vertebrae slight {condition}",
    "{region} disc {condition} and adjacent segment changes",
    "signal loss at {region} suggesting {condition}",
)

LAB_CATALOG = (
    ("glucose", "fixedScreen", 3.9, 6.1, "mmol/L"),
    ("total cholesterol", "fixedScreen", 3.0, 5.2, "mmol/L"),
    ("lymphocyte percent", "completeBloodCount", 20.0, 40.0, "%"),
    ("white blood cells", "completeBloodCount", 4.0, 10.0, "10^9/L"),
    ("red blood cells", "completeBloodCount", 3.8, 5.8, "10^12/L"),
    ("platelets", "completeBloodCount", 125.0, 350.0, "10^9/L"),
    ("hemoglobin", "completeBloodCount", 115.0, 175.0, "g/L"),
    ("alt", "renalLiverFunction", 7.0, 40.0, "U/L"),
    ("ast", "renalLiverFunction", 13.0, 35.0, "U/L"),
    ("creatinine", "renalLiverFunction", 44.0, 133.0, "umol/L"),
    ("urea", "renalLiverFunction", 2.6, 7.5, "mmol/L"),
    ("albumin", "renalLiverFunction", 35.0, 55.0, "g/L"),
)

# 42 physical-exam indicators over four areas and three kinds
_EXAM_AREAS = {
    "neck": (
        ("neck tenderness", "generalCondition"),
        ("neck muscle tone", "generalCondition"),
        ("flexion range", "rangeOfMotion"),
        ("extension range", "rangeOfMotion"),
        ("rotation left", "rangeOfMotion"),
        ("rotation right", "rangeOfMotion"),
        ("lateral bend left", "rangeOfMotion"),
        ("lateral bend right", "rangeOfMotion"),
        ("spurling test", "fineMotorReflex"),
        ("lhermitte sign", "fineMotorReflex"),
    ),
    "upperLimbs": (
        ("biceps reflex left", "fineMotorReflex"),
        ("biceps reflex right", "fineMotorReflex"),
        ("triceps reflex left", "fineMotorReflex"),
        ("triceps reflex right", "fineMotorReflex"),
        ("hoffmann sign left", "fineMotorReflex"),
        ("hoffmann sign right", "fineMotorReflex"),
        ("grip strength left", "generalCondition"),
        ("grip strength right", "generalCondition"),
        ("sensation left upper limb", "generalCondition"),
        ("sensation right upper limb", "generalCondition"),
        ("shoulder abduction range", "rangeOfMotion"),
    ),
    "lowerLimbs": (
        ("knee reflex left", "fineMotorReflex"),
        ("knee reflex right", "fineMotorReflex"),
        ("ankle reflex left", "fineMotorReflex"),
        ("ankle reflex right", "fineMotorReflex"),
        ("babinski sign left", "fineMotorReflex"),
        ("babinski sign right", "fineMotorReflex"),
        ("sensation left lower limb", "generalCondition"),
        ("sensation right lower limb", "generalCondition"),
        ("gait stability", "generalCondition"),
        ("hip flexion range", "rangeOfMotion"),
        ("ankle dorsiflexion range", "rangeOfMotion"),
    ),
    "nervousSystem": (
        ("romberg test", "generalCondition"),
        ("tandem stance", "generalCondition"),
        ("vibration sense", "generalCondition"),
        ("proprioception", "generalCondition"),
        ("pinprick sense", "generalCondition"),
        ("temperature sense", "generalCondition"),
        ("finger-nose coordination", "fineMotorReflex"),
        ("heel-shin coordination", "fineMotorReflex"),
        ("clonus", "fineMotorReflex"),
        ("trunk rotation range", "rangeOfMotion"),
    ),
}


@dataclass(frozen=True)
class PlantedGroup:
    size: int
    agreeing_modalities: frozenset[str]
    spread: float = 0.0
    keyword: str | None = None


@dataclass(frozen=True)
class SynthConfig:
    n_cases: int = 60
    seed: int = 7
    planted_groups: tuple[PlantedGroup, ...] = ()
    image_dim: int = 32
    text_dim: int = 16
    indicator_dim: int = 8
    image_size: tuple[int, int] = (128, 128)
    coord_scale: float = 10.0

    def validate(self) -> None:
        if self.n_cases < 0:
            raise ConfigError(f"nCases must be >= 0, got {self.n_cases}")
        if sum(g.size for g in self.planted_groups) > self.n_cases:
            raise ConfigError("planted group sizes exceed nCases")
        for i, group in enumerate(self.planted_groups):
            if group.size < 1:
                raise ConfigError(f"plantedGroups[{i}].size must be >= 1")
            if group.spread < 0:
                raise ConfigError(f"plantedGroups[{i}].spread must be >= 0")
            bad = group.agreeing_modalities - {"image", "text", "indicator"}
            if bad:
                raise ConfigError(f"plantedGroups[{i}]: unknown modalities {sorted(bad)}")
        for name in ("image_dim", "text_dim", "indicator_dim"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "SynthConfig":
        groups = []
        for i, raw in enumerate(doc.get("plantedGroups", [])):
            groups.append(
                PlantedGroup(
                    size=int(raw.get("size", 0)),
                    agreeing_modalities=frozenset(raw.get("agreeingModalities", [])),
                    spread=float(raw.get("spread", 0.0)),
                    keyword=raw.get("keyword"),
                )
            )
        config = cls(
            n_cases=int(doc.get("nCases", 60)),
            seed=int(doc.get("seed", 7)),
            planted_groups=tuple(groups),
            image_dim=int(doc.get("imageDim", 32)),
            text_dim=int(doc.get("textDim", 16)),
            indicator_dim=int(doc.get("indicatorDim", 8)),
            image_size=tuple(doc.get("imageSize", (128, 128))),
            coord_scale=float(doc.get("coordScale", 10.0)),
        )
        config.validate()
        return config


@dataclass
class SynthResult:
    bundle: CaseBundle
    bundle_doc: dict
    embeddings_doc: dict
    coords_doc: dict
    detections_doc: list
    images: dict[str, np.ndarray] = field(default_factory=dict)


def _region_bbox(region_index: int, image_size: tuple[int, int]) -> list[float]:
    w, h = image_size
    band = max(12.0, (h - 20.0) / len(REGIONS) - 4.0)
    y0 = 10.0 + region_index * ((h - 20.0) / len(REGIONS))
    return [round(w * 0.25, 1), round(y0, 1), round(w * 0.78, 1), round(y0 + band, 1)]


def generate(config: SynthConfig) -> SynthResult:
    """Build a bundle plus embedding/coordinate/detection artifacts; pure in the seed."""
    config.validate()
    rng = np.random.default_rng(np.random.PCG64(config.seed))
    n = config.n_cases
    width = max(3, len(str(max(n, 1))))
    ids = [f"c{i:0{width}d}" for i in range(1, n + 1)]

    group_of: dict[int, int] = {}
    cursor = 0
    keywords: list[str] = []
    for gi, group in enumerate(config.planted_groups):
        keywords.append(group.keyword or PLANTED_CONDITIONS[gi % len(PLANTED_CONDITIONS)])
        for i in range(cursor, cursor + group.size):
            group_of[i] = gi
        cursor += group.size

    base_date = dt.date(2021, 1, 1)
    cases = []
    annotations = []
    detections: list[dict] = []
    images: dict[str, np.ndarray] = {}
    w, h = config.image_size

    for i, cid in enumerate(ids):
        gi = group_of.get(i)
        admit = base_date + dt.timedelta(days=int(rng.integers(0, 730)))
        n_history = int(rng.integers(1, 4))
        history = [
            {
                "date": (admit - dt.timedelta(days=int(rng.integers(5, 120)))).isoformat(),
                "text": HISTORY_TEXTS[int(rng.integers(0, len(HISTORY_TEXTS)))],
            }
            for _ in range(n_history)
        ]
        region_count = int(rng.integers(1, 3))
        region_idx = sorted(rng.choice(len(REGIONS), size=region_count, replace=False).tolist())
        condition = (
            keywords[gi]
            if gi is not None
            else GENERAL_CONDITIONS[int(rng.integers(0, len(GENERAL_CONDITIONS)))]
        )
        sentences = []
        for ri in region_idx:
            template = TEXT_TEMPLATES[int(rng.integers(0, len(TEXT_TEMPLATES)))]
            sentences.append(template.format(region=REGIONS[ri], condition=condition))
        diagnosis = ". ".join(sentences) + "."

        exam = []
        for area, items in _EXAM_AREAS.items():
            for name, kind in items:
                abnormal = bool(rng.random() < 0.12)
                exam.append(
                    {
                        "name": name,
                        "area": area,
                        "kind": kind,
                        "status": "abnormal" if abnormal else "normal",
                    }
                )

        labs = {}
        for name, _category, low, high, _unit in LAB_CATALOG:
            span = high - low
            labs[name] = round(float(rng.uniform(low - 0.15 * span, high + 0.15 * span)), 3)

        signals = []
        for region in REGIONS:
            mean = float(rng.uniform(45.0, 75.0))
            signals.append(
                {
                    "region": region,
                    "min": round(mean - float(rng.uniform(5.0, 25.0)), 2),
                    "mean": round(mean, 2),
                    "max": round(mean + float(rng.uniform(5.0, 25.0)), 2),
                }
            )

        image_ref = f"images/{cid}.png"
        specialty = "spine" if gi is not None else SPECIALTIES[i % len(SPECIALTIES)]
        cases.append(
            {
                "caseId": cid,
                "specialty": specialty,
                "admitDate": admit.isoformat(),
                "demographics": {
                    "age": int(rng.integers(18, 89)),
                    "heightCm": round(float(rng.uniform(150, 190)), 1),
                    "weightKg": round(float(rng.uniform(45, 95)), 1),
                },
                "chiefComplaint": CHIEF_COMPLAINTS[int(rng.integers(0, len(CHIEF_COMPLAINTS)))],
                "historyEntries": history,
                "diagnosisText": diagnosis,
                "physicalExam": exam,
                "labIndicators": labs,
                "discSignals": signals,
                "csfMean": round(float(rng.uniform(100.0, 140.0)), 2),
                "imageRefs": [image_ref],
            }
        )

        pixels = rng.integers(20, 90, size=(h, w), dtype=np.int64).astype(np.uint8)
        for ri in region_idx:
            bbox = _region_bbox(ri, config.image_size)
            annotations.append(
                {
                    "caseId": cid,
                    "imageRef": image_ref,
                    "label": REGIONS[ri],
                    "shape": {"type": "bbox", "bbox": bbox},
                }
            )
            detections.append(
                {
                    "caseId": cid,
                    "imageRef": image_ref,
                    "label": REGIONS[ri],
                    "bbox": bbox,
                    "confidence": round(float(rng.uniform(0.85, 0.99)), 3),
                    "mask": None,
                }
            )
        images[image_ref] = pixels

    bundle_doc = {
        "schemaVersion": 1,
        "embeddingManifest": {"image": config.image_dim, "text": config.text_dim},
        "referenceRanges": [
            {"name": name, "category": category, "low": low, "high": high, "unit": unit}
            for name, category, low, high, unit in LAB_CATALOG
        ],
        "annotations": annotations,
        "cases": cases,
    }
    bundle = bundle_from_dict(bundle_doc)

    dims = {"image": config.image_dim, "text": config.text_dim, "indicator": config.indicator_dim}
    group_vectors: dict[tuple[int, str], np.ndarray] = {}
    group_points: dict[tuple[int, str], np.ndarray] = {}
    for gi, group in enumerate(config.planted_groups):
        for modality in sorted(group.agreeing_modalities):
            group_vectors[(gi, modality)] = rng.normal(0.0, 1.0, size=dims[modality])
            group_points[(gi, modality)] = rng.uniform(0.0, config.coord_scale, size=2)

    embeddings_doc: dict[str, dict] = {}
    coords_doc: dict[str, dict] = {space: {} for space in ("image", "text", "indicator", "fusion")}
    for i, cid in enumerate(ids):
        gi = group_of.get(i)
        entry = {}
        for modality in ("image", "text", "indicator"):
            agreeing = gi is not None and modality in config.planted_groups[gi].agreeing_modalities
            if agreeing:
                spread = config.planted_groups[gi].spread
                vec = group_vectors[(gi, modality)] + spread * rng.normal(size=dims[modality])
                point = group_points[(gi, modality)] + spread * rng.normal(size=2)
            else:
                vec = rng.normal(0.0, 1.0, size=dims[modality])
                point = rng.uniform(0.0, config.coord_scale, size=2)
            entry[modality] = [round(float(v), 6) for v in vec]
            coords_doc[modality][cid] = [round(float(point[0]), 6), round(float(point[1]), 6)]
        fusion_point = rng.uniform(0.0, config.coord_scale, size=2)
        coords_doc["fusion"][cid] = [round(float(fusion_point[0]), 6), round(float(fusion_point[1]), 6)]
        embeddings_doc[cid] = entry

    return SynthResult(
        bundle=bundle,
        bundle_doc=bundle_doc,
        embeddings_doc=embeddings_doc,
        coords_doc=coords_doc,
        detections_doc=detections,
        images=images,
    )


def write_outputs(result: SynthResult, out_dir: str | Path) -> dict[str, Path]:
    """Write bundle.json, embeddings.json, coords.json, detections.json and images/."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "bundle": out / "bundle.json",
        "embeddings": out / "embeddings.json",
        "coords": out / "coords.json",
        "detections": out / "detections.json",
    }
    paths["bundle"].write_text(
        json.dumps(result.bundle_doc, indent=2, sort_keys=True), encoding="utf-8"
    )
    paths["embeddings"].write_text(
        json.dumps(result.embeddings_doc, indent=2, sort_keys=True), encoding="utf-8"
    )
    paths["coords"].write_text(
        json.dumps(result.coords_doc, indent=2, sort_keys=True), encoding="utf-8"
    )
    paths["detections"].write_text(
        json.dumps(result.detections_doc, indent=2, sort_keys=True), encoding="utf-8"
    )
    images_dir = out / "images"
    images_dir.mkdir(exist_ok=True)
    by_ref: dict[str, list[dict]] = {}
    for ann in result.bundle_doc["annotations"]:
        by_ref.setdefault(ann["imageRef"], []).append(ann)
    for ref, pixels in result.images.items():
        img = Image.fromarray(pixels, mode="L")
        draw = ImageDraw.Draw(img)
        for ann in by_ref.get(ref, []):
            x0, y0, x1, y1 = ann["shape"]["bbox"]
            draw.rectangle([x0, y0, x1, y1], outline=255, width=2)
        img.save(out / ref)
    return paths
