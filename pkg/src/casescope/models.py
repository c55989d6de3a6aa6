"""Domain types shared across engine modules.

All types are immutable after load; collections are stored as tuples so a
bundle can be shared freely between threads.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

BBox = tuple[float, float, float, float]  # x0, y0, x1, y1 with x0 < x1, y0 < y1
Point = tuple[float, float]


class ExamArea(str, Enum):
    NECK = "neck"
    UPPER_LIMBS = "upperLimbs"
    LOWER_LIMBS = "lowerLimbs"
    NERVOUS_SYSTEM = "nervousSystem"


class ExamKind(str, Enum):
    GENERAL_CONDITION = "generalCondition"
    RANGE_OF_MOTION = "rangeOfMotion"
    FINE_MOTOR_REFLEX = "fineMotorReflex"


class ExamStatus(str, Enum):
    NORMAL = "normal"
    ABNORMAL = "abnormal"


class RangeCategory(str, Enum):
    RENAL_LIVER = "renalLiverFunction"
    BLOOD_COUNT = "completeBloodCount"
    FIXED_SCREEN = "fixedScreen"


@dataclass(frozen=True)
class ExamItem:
    name: str
    area: ExamArea
    kind: ExamKind
    status: ExamStatus


@dataclass(frozen=True)
class Demographics:
    age: float
    height_cm: float
    weight_kg: float


@dataclass(frozen=True)
class HistoryEntry:
    date: dt.date
    text: str


@dataclass(frozen=True)
class ReferenceRange:
    """Normal interval [low, high] for one laboratory indicator."""

    name: str
    category: RangeCategory
    low: float
    high: float
    unit: str


@dataclass(frozen=True)
class DiscSignal:
    """Signal-intensity statistics for one intervertebral disc region."""

    region: str
    min: float
    mean: float
    max: float


@dataclass(frozen=True)
class PatientCase:
    case_id: str
    specialty: str
    admit_date: dt.date
    demographics: Demographics
    chief_complaint: str
    history_entries: tuple[HistoryEntry, ...]  # always most-recent-first
    diagnosis_text: str
    physical_exam: tuple[ExamItem, ...]
    lab_indicators: dict[str, float]
    disc_signals: tuple[DiscSignal, ...]
    csf_mean: float | None
    image_refs: tuple[str, ...]


@dataclass(frozen=True)
class RegionAnnotation:
    """Human-annotated image region; exactly one of bbox/polygon is set."""

    case_id: str
    image_ref: str
    label: str
    bbox: BBox | None = None
    polygon: tuple[Point, ...] | None = None


@dataclass(frozen=True)
class RleMask:
    """Binary mask as alternating zero/one run lengths, row-major, zeros first."""

    width: int
    height: int
    runs: tuple[int, ...]


@dataclass(frozen=True)
class RegionDetection:
    """Model-produced region proposal ingested from an offline pipeline."""

    case_id: str
    image_ref: str
    label: str
    bbox: BBox
    confidence: float
    mask: RleMask | None = None


@dataclass(frozen=True)
class TextRegionLink:
    """Character span of a detection label inside the case's diagnosis text."""

    case_id: str
    phrase_span: tuple[int, int]  # [start, end)
    detection_index: int


@dataclass(frozen=True)
class EmbeddingManifest:
    """Declared per-modality embedding dimensions for a bundle."""

    image_dim: int = 2048
    text_dim: int = 768


@dataclass(frozen=True)
class CaseBundle:
    schema_version: int
    cases: tuple[PatientCase, ...]
    reference_ranges: tuple[ReferenceRange, ...]
    annotations: tuple[RegionAnnotation, ...]
    embedding_manifest: EmbeddingManifest = field(default_factory=EmbeddingManifest)

    @cached_property
    def case_index(self) -> dict[str, PatientCase]:
        return {c.case_id: c for c in self.cases}

    @cached_property
    def range_index(self) -> dict[str, ReferenceRange]:
        return {r.name: r for r in self.reference_ranges}

    def case_ids(self) -> list[str]:
        return [c.case_id for c in self.cases]
