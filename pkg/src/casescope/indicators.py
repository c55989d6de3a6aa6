"""Reference-range evaluation and the Information Exploration / Detail math.

Covers indicator status against normal ranges, radar normalization,
population stripe bins, per-region imaging-signal normalization, the disc
protrusion heuristic, CSF ratios, and physical-exam summaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from casescope.errors import CurrentOutOfRange, NonFiniteValue, NonPositiveCsf
from casescope.models import DiscSignal, ExamArea, ExamItem, ExamKind, ExamStatus, ReferenceRange

DEFAULT_PROTRUSION_THETA = 0.5


class RangeStatus(str, Enum):
    BELOW = "below"
    WITHIN = "within"
    ABOVE = "above"


@dataclass(frozen=True)
class StripeBins:
    """Equal-width population histogram with the selected patient's bin marked."""

    bin_edges: tuple[float, ...]
    counts: tuple[int, ...]
    current_bin: int


@dataclass(frozen=True)
class ExamSummary:
    per_area: dict[ExamArea, int]
    per_kind: dict[ExamKind, int]
    abnormal: tuple[ExamItem, ...]


def evaluate(value: float, range_: ReferenceRange) -> RangeStatus:
    """Three-way status against the normal range; bounds are inclusive."""
    if not math.isfinite(value):
        raise NonFiniteValue(f"indicator value for {range_.name!r} is not finite")
    if value < range_.low:
        return RangeStatus.BELOW
    if value > range_.high:
        return RangeStatus.ABOVE
    return RangeStatus.WITHIN


def radar_normalize(value: float, range_: ReferenceRange) -> float:
    """Affine map sending low -> 0 (inner circle) and high -> 1 (outer circle).

    Clamped to [-0.5, 1.5] so far-out values stay on the chart.
    """
    n = (value - range_.low) / (range_.high - range_.low)
    return min(1.5, max(-0.5, n))


def stripe_bins(values: Sequence[float], n_bins: int, current_value: float) -> StripeBins:
    """Equal-width bins over [min, max]; the final bin is closed on both ends.

    An all-equal population collapses to a single degenerate bin.
    """
    if n_bins < 1:
        raise ValueError(f"n_bins must be >= 1, got {n_bins}")
    if len(values) == 0:
        raise ValueError("population must be nonempty")
    arr = np.asarray(values, dtype=np.float64)
    lo, hi = float(arr.min()), float(arr.max())
    if not (lo <= current_value <= hi):
        raise CurrentOutOfRange(
            f"current value {current_value} outside the population range [{lo}, {hi}]"
        )
    if lo == hi:
        return StripeBins(bin_edges=(lo, hi), counts=(len(values),), current_bin=0)
    edges = np.linspace(lo, hi, n_bins + 1)

    def bin_of(v: float) -> int:
        idx = int(np.searchsorted(edges, v, side="right")) - 1
        return min(max(idx, 0), n_bins - 1)

    counts = [0] * n_bins
    for v in arr:
        counts[bin_of(float(v))] += 1
    return StripeBins(
        bin_edges=tuple(float(e) for e in edges),
        counts=tuple(counts),
        current_bin=bin_of(current_value),
    )


def normalize_imaging(
    population: Mapping[str, Sequence[DiscSignal]],
) -> dict[str, list[dict[str, float]]]:
    """Min-max normalize each (region, statistic) over the patient population.

    Output values land in [0, 1]; a constant population (including a single
    patient) maps to 0.5. Returned as plain dicts because the per-statistic
    scaling does not preserve the min <= mean <= max ordering.
    """
    out: dict[str, list[dict[str, float]]] = {}
    for region, signals in population.items():
        if not signals:
            raise ValueError(f"region {region!r} has no signals")
        normalized: list[dict[str, float]] = [{} for _ in signals]
        for stat in ("min", "mean", "max"):
            vals = [getattr(s, stat) for s in signals]
            lo, hi = min(vals), max(vals)
            for i, v in enumerate(vals):
                normalized[i][stat] = 0.5 if hi == lo else (v - lo) / (hi - lo)
        out[region] = normalized
    return out


def protrusion_score(signal: DiscSignal) -> float:
    """Normalized gap between the minimum and mean signal: (mean-min)/(max-min).

    A large gap hints at possible disc protrusion; degenerate ranges score 0.
    """
    if signal.max == signal.min:
        return 0.0
    return (signal.mean - signal.min) / (signal.max - signal.min)


def protrusion_flagged(signal: DiscSignal, theta: float = DEFAULT_PROTRUSION_THETA) -> bool:
    return protrusion_score(signal) >= theta


def csf_ratio(signal: DiscSignal, csf_mean: float) -> dict[str, float]:
    """Disc signal statistics divided by the patient's CSF mean intensity."""
    if not csf_mean > 0:
        raise NonPositiveCsf(f"csfMean must be positive, got {csf_mean}")
    return {
        "min": signal.min / csf_mean,
        "mean": signal.mean / csf_mean,
        "max": signal.max / csf_mean,
    }


def exam_summary(items: Iterable[ExamItem]) -> ExamSummary:
    """Counts per area and kind plus the abnormal items in input order."""
    per_area = {area: 0 for area in ExamArea}
    per_kind = {kind: 0 for kind in ExamKind}
    abnormal = []
    for item in items:
        per_area[item.area] += 1
        per_kind[item.kind] += 1
        if item.status is ExamStatus.ABNORMAL:
            abnormal.append(item)
    return ExamSummary(per_area=per_area, per_kind=per_kind, abnormal=tuple(abnormal))
