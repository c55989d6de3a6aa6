"""Ingested image-region artifacts and detection-quality metrics.

Annotations come from labelme-style JSON documents; detections (and
optional pixel masks) come from an offline model pipeline. Phrase linking
is deterministic label-substring matching, and AP uses all-points
interpolation so a brute-force PR oracle can reproduce it exactly.
"""

from __future__ import annotations

import json
import warnings
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from casescope.errors import DegenerateShape, NoGroundTruthWarning, OutOfExtent, SchemaError
from casescope.models import BBox, RegionAnnotation, RegionDetection, RleMask, TextRegionLink


def load_annotations(source: str | Path | IO, case_id: str = "") -> list[RegionAnnotation]:
    """Parse a labelme document: {imagePath, shapes: [{label, points, shape_type}]}.

    Rectangles are normalized to bboxes; polygons keep their point lists.
    """
    if hasattr(source, "read"):
        data = source.read()
        doc = json.loads(data.decode("utf-8") if isinstance(data, bytes) else data)
    else:
        doc = json.loads(Path(source).read_text(encoding="utf-8"))
    if not isinstance(doc, dict) or "shapes" not in doc:
        raise SchemaError("$: expected a labelme document with a 'shapes' list")
    image_ref = doc.get("imagePath", "")
    out: list[RegionAnnotation] = []
    for i, shape in enumerate(doc["shapes"]):
        path = f"$.shapes[{i}]"
        label = shape.get("label")
        points = shape.get("points")
        kind = shape.get("shape_type", "polygon")
        if not isinstance(label, str) or not isinstance(points, list):
            raise SchemaError(f"{path}: expected 'label' string and 'points' list")
        if kind == "rectangle":
            if len(points) != 2:
                raise SchemaError(f"{path}.points: rectangle needs exactly 2 corner points")
            (ax, ay), (bx, by) = points
            x0, x1 = sorted((float(ax), float(bx)))
            y0, y1 = sorted((float(ay), float(by)))
            if x0 == x1 or y0 == y1:
                raise DegenerateShape(f"{path}: rectangle has zero area")
            out.append(RegionAnnotation(case_id, image_ref, label, bbox=(x0, y0, x1, y1)))
        elif kind == "polygon":
            if len(points) < 3:
                raise SchemaError(f"{path}.points: polygon needs at least 3 points")
            poly = tuple((float(x), float(y)) for x, y in points)
            area = 0.0
            for (x0, y0), (x1, y1) in zip(poly, poly[1:] + poly[:1]):
                area += x0 * y1 - x1 * y0
            if area == 0.0:
                raise DegenerateShape(f"{path}: polygon has zero area")
            out.append(RegionAnnotation(case_id, image_ref, label, polygon=poly))
        else:
            raise SchemaError(f"{path}.shape_type: unsupported shape type {kind!r}")
    return out


def load_detections(source: str | Path | IO) -> list[RegionDetection]:
    """Parse the detection artifact: a list of detection objects."""
    if hasattr(source, "read"):
        data = source.read()
        doc = json.loads(data.decode("utf-8") if isinstance(data, bytes) else data)
    else:
        doc = json.loads(Path(source).read_text(encoding="utf-8"))
    if not isinstance(doc, list):
        raise SchemaError("$: expected a list of detections")
    out = []
    for i, det in enumerate(doc):
        path = f"$[{i}]"
        bbox = det.get("bbox")
        if not (isinstance(bbox, list) and len(bbox) == 4):
            raise SchemaError(f"{path}.bbox: expected [x0, y0, x1, y1]")
        x0, y0, x1, y1 = (float(v) for v in bbox)
        if not (x0 < x1 and y0 < y1):
            raise SchemaError(f"{path}.bbox: must satisfy x0 < x1 and y0 < y1")
        conf = det.get("confidence")
        if not isinstance(conf, (int, float)) or not 0.0 <= conf <= 1.0:
            raise SchemaError(f"{path}.confidence: expected a number in [0, 1]")
        mask = None
        if det.get("mask") is not None:
            m = det["mask"]
            try:
                mask = RleMask(width=int(m["width"]), height=int(m["height"]), runs=tuple(m["runs"]))
            except (KeyError, TypeError) as exc:
                raise SchemaError(f"{path}.mask: {exc}") from None
        out.append(
            RegionDetection(
                case_id=str(det.get("caseId", "")),
                image_ref=str(det.get("imageRef", "")),
                label=str(det.get("label", "")),
                bbox=(x0, y0, x1, y1),
                confidence=float(conf),
                mask=mask,
            )
        )
    return out


def link_phrases(diagnosis_text: str, detections: Sequence[RegionDetection]) -> list[TextRegionLink]:
    """Link each detection to the leftmost case-insensitive occurrence of its label.

    Detections whose label never occurs in the text produce no link.
    """
    haystack = diagnosis_text.lower()
    links = []
    for index, det in enumerate(detections):
        pos = haystack.find(det.label.lower())
        if pos >= 0:
            links.append(
                TextRegionLink(
                    case_id=det.case_id,
                    phrase_span=(pos, pos + len(det.label)),
                    detection_index=index,
                )
            )
    return links


def iou(a: BBox, b: BBox) -> float:
    """Intersection-over-union of two well-ordered boxes; 0 when disjoint."""
    ax0, ay0, ax1, ay1 = a
    bx0, by0, bx1, by1 = b
    if not (ax0 < ax1 and ay0 < ay1 and bx0 < bx1 and by0 < by1):
        raise ValueError(f"boxes must be well-ordered, got {a} and {b}")
    iw = min(ax1, bx1) - max(ax0, bx0)
    ih = min(ay1, by1) - max(ay0, by0)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    return inter / union


def _gt_bbox(ann: RegionAnnotation) -> BBox:
    if ann.bbox is not None:
        return ann.bbox
    xs = [p[0] for p in ann.polygon or ()]
    ys = [p[1] for p in ann.polygon or ()]
    return (min(xs), min(ys), max(xs), max(ys))


def average_precision(
    detections: Sequence[RegionDetection],
    ground_truth: Sequence[RegionAnnotation],
    iou_threshold: float = 0.5,
) -> float:
    """All-points-interpolated AP with greedy one-to-one matching.

    Detections are ranked by confidence descending (input order breaks
    ties) and matched within the same (caseId, imageRef) group against the
    unmatched ground-truth box of highest IoU >= threshold.
    """
    if not 0.0 < iou_threshold <= 1.0:
        raise ValueError(f"iouThreshold must be in (0, 1], got {iou_threshold}")
    n_gt = len(ground_truth)
    if not detections or n_gt == 0:
        return 0.0
    gt_by_group: dict[tuple[str, str], list[int]] = {}
    for gi, ann in enumerate(ground_truth):
        gt_by_group.setdefault((ann.case_id, ann.image_ref), []).append(gi)
    matched = [False] * n_gt

    order = sorted(range(len(detections)), key=lambda i: (-detections[i].confidence, i))
    tps = np.zeros(len(order))
    for rank, di in enumerate(order):
        det = detections[di]
        best_iou, best_gi = 0.0, -1
        for gi in gt_by_group.get((det.case_id, det.image_ref), []):
            if matched[gi]:
                continue
            overlap = iou(det.bbox, _gt_bbox(ground_truth[gi]))
            if overlap > best_iou:
                best_iou, best_gi = overlap, gi
        if best_gi >= 0 and best_iou >= iou_threshold:
            matched[best_gi] = True
            tps[rank] = 1.0

    tp_cum = np.cumsum(tps)
    precision = tp_cum / (np.arange(len(order)) + 1)
    recall = tp_cum / n_gt
    mrec = np.concatenate(([0.0], recall, [1.0]))
    mpre = np.concatenate(([0.0], precision, [0.0]))
    for i in range(len(mpre) - 2, -1, -1):
        mpre[i] = max(mpre[i], mpre[i + 1])
    steps = np.nonzero(mrec[1:] != mrec[:-1])[0]
    return float(np.sum((mrec[steps + 1] - mrec[steps]) * mpre[steps + 1]))


def mean_ap(
    detections: Sequence[RegionDetection],
    ground_truth: Sequence[RegionAnnotation],
    iou_threshold: float = 0.5,
) -> float:
    """Mean AP over labels; a detected label with no ground truth scores 0 and warns."""
    gt_labels = {a.label for a in ground_truth}
    det_labels = {d.label for d in detections}
    labels = sorted(gt_labels | det_labels)
    if not labels:
        return 0.0
    aps = []
    for label in labels:
        if label not in gt_labels:
            warnings.warn(
                f"label {label!r} has detections but no ground truth; AP counted as 0",
                NoGroundTruthWarning,
                stacklevel=2,
            )
            aps.append(0.0)
            continue
        aps.append(
            average_precision(
                [d for d in detections if d.label == label],
                [a for a in ground_truth if a.label == label],
                iou_threshold,
            )
        )
    return float(np.mean(aps))


def rle_encode(mask: np.ndarray) -> RleMask:
    """Encode a binary (h, w) array as alternating zero/one runs, zeros first."""
    arr = np.asarray(mask).astype(bool)
    if arr.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {arr.shape}")
    h, w = arr.shape
    flat = arr.ravel()
    runs: list[int] = []
    current = False  # runs start with zeros by convention
    count = 0
    for v in flat.tolist():
        if v == current:
            count += 1
        else:
            runs.append(count)
            current = v
            count = 1
    runs.append(count)
    return RleMask(width=w, height=h, runs=tuple(runs))


def rle_decode(mask: RleMask) -> np.ndarray:
    """Inverse of rle_encode."""
    total = mask.width * mask.height
    if sum(mask.runs) != total:
        raise SchemaError(
            f"mask runs sum to {sum(mask.runs)}, expected width*height = {total}"
        )
    flat = np.zeros(total, dtype=bool)
    pos = 0
    value = False
    for run in mask.runs:
        if value:
            flat[pos : pos + run] = True
        pos += run
        value = not value
    return flat.reshape(mask.height, mask.width)


def mask_from_bbox(bbox: BBox, image_extent: tuple[int, int]) -> RleMask:
    """Filled rectangular mask for a bbox inside a (width, height) image."""
    w, h = image_extent
    x0, y0, x1, y1 = bbox
    if x0 < 0 or y0 < 0 or x1 > w or y1 > h:
        raise OutOfExtent(f"bbox {bbox} outside the {w}x{h} image extent")
    grid = np.zeros((h, w), dtype=bool)
    xs = slice(int(np.ceil(x0)), int(np.floor(x1)))
    ys = slice(int(np.ceil(y0)), int(np.floor(y1)))
    grid[ys, xs] = True
    return rle_encode(grid)


def masks_for_detections(
    detections: Iterable[RegionDetection], image_extent: tuple[int, int]
) -> list[RleMask]:
    """Each detection's ingested mask, or a bbox-filled fallback mask."""
    return [d.mask if d.mask is not None else mask_from_bbox(d.bbox, image_extent) for d in detections]
