import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from casescope.alignment import (
    average_precision,
    iou,
    link_phrases,
    load_annotations,
    load_detections,
    mask_from_bbox,
    mean_ap,
    rle_decode,
    rle_encode,
)
from casescope.errors import DegenerateShape, NoGroundTruthWarning, OutOfExtent, SchemaError
from casescope.models import RegionAnnotation, RegionDetection


def _labelme(shapes) -> io.StringIO:
    return io.StringIO(json.dumps({"imagePath": "img.png", "shapes": shapes}))


def _det(label, bbox, conf, case="c1", ref="img.png") -> RegionDetection:
    return RegionDetection(case, ref, label, tuple(float(v) for v in bbox), conf)


def _gt(label, bbox, case="c1", ref="img.png") -> RegionAnnotation:
    return RegionAnnotation(case, ref, label, bbox=tuple(float(v) for v in bbox))


# --- labelme loading -------------------------------------------------------


def test_rectangle_normalized_to_bbox():
    anns = load_annotations(
        _labelme([{"label": "C6", "points": [[10, 10], [50, 40]], "shape_type": "rectangle"}])
    )
    assert anns[0].bbox == (10.0, 10.0, 50.0, 40.0)


def test_rectangle_with_reversed_corners():
    anns = load_annotations(
        _labelme([{"label": "C6", "points": [[50, 40], [10, 10]], "shape_type": "rectangle"}])
    )
    assert anns[0].bbox == (10.0, 10.0, 50.0, 40.0)


def test_zero_area_rectangle_rejected():
    with pytest.raises(DegenerateShape):
        load_annotations(
            _labelme([{"label": "x", "points": [[10, 10], [10, 40]], "shape_type": "rectangle"}])
        )


def test_two_shapes_two_annotations():
    anns = load_annotations(
        _labelme(
            [
                {"label": "a", "points": [[0, 0], [1, 1]], "shape_type": "rectangle"},
                {"label": "b", "points": [[0, 0], [2, 0], [2, 2]], "shape_type": "polygon"},
            ]
        )
    )
    assert len(anns) == 2
    assert anns[1].polygon == ((0.0, 0.0), (2.0, 0.0), (2.0, 2.0))


def test_zero_area_polygon_rejected():
    with pytest.raises(DegenerateShape):
        load_annotations(
            _labelme([{"label": "x", "points": [[0, 0], [1, 1], [2, 2]], "shape_type": "polygon"}])
        )


def test_unsupported_shape_type():
    with pytest.raises(SchemaError):
        load_annotations(_labelme([{"label": "x", "points": [[0, 0]], "shape_type": "circle"}]))


def test_load_detections_schema():
    doc = [{"caseId": "c1", "imageRef": "i", "label": "L", "bbox": [0, 0, 1, 1], "confidence": 0.5}]
    dets = load_detections(io.StringIO(json.dumps(doc)))
    assert dets[0].bbox == (0.0, 0.0, 1.0, 1.0)
    doc[0]["confidence"] = 1.5
    with pytest.raises(SchemaError):
        load_detections(io.StringIO(json.dumps(doc)))


# --- phrase linking --------------------------------------------------------


def test_link_leftmost_occurrence():
    text = "C6 vertebrae slight retreat"
    links = link_phrases(text, [_det("C6", [0, 0, 1, 1], 0.9)])
    assert links[0].phrase_span == (0, 2)


def test_link_absent_label_produces_nothing():
    assert link_phrases("no match here", [_det("C6", [0, 0, 1, 1], 0.9)]) == []


def test_link_twice_occurring_label_leftmost():
    text = "C6 then later C6 again"
    links = link_phrases(text, [_det("c6", [0, 0, 1, 1], 0.9)])
    assert links[0].phrase_span == (0, 2)


def test_link_span_slices_to_label():
    text = "between C6-C7 narrowing seen"
    dets = [_det("c6-c7", [0, 0, 1, 1], 0.9), _det("narrowing", [0, 0, 1, 1], 0.8)]
    for link in link_phrases(text, dets):
        start, end = link.phrase_span
        assert text[start:end].lower() == dets[link.detection_index].label.lower()


# --- iou --------------------------------------------------------------------


def test_iou_examples():
    assert iou((0, 0, 2, 2), (0, 0, 2, 2)) == 1.0
    assert iou((0, 0, 1, 1), (2, 2, 3, 3)) == 0.0
    assert iou((0, 0, 2, 2), (1, 1, 3, 3)) == pytest.approx(1 / 7, abs=1e-15)


boxes = st.tuples(
    st.floats(-50, 50), st.floats(-50, 50), st.floats(0.1, 40), st.floats(0.1, 40)
).map(lambda t: (t[0], t[1], t[0] + t[2], t[1] + t[3]))


@given(boxes, boxes)
@settings(max_examples=100, deadline=None)
def test_iou_symmetric_and_bounded(a, b):
    v = iou(a, b)
    assert v == iou(b, a)
    assert 0.0 <= v <= 1.0
    if a == b:
        assert v == 1.0


def test_iou_one_implies_identical():
    assert iou((0, 0, 2, 2), (0, 0, 2, 2.0001)) < 1.0


# --- average precision --------------------------------------------------------


def brute_force_ap(flags: list[bool], n_gt: int) -> float:
    """PR-curve oracle: enumerate recall levels, integrate the envelope."""
    precisions, recalls = [], []
    tp = 0
    for i, is_tp in enumerate(flags, start=1):
        tp += int(is_tp)
        precisions.append(tp / i)
        recalls.append(tp / n_gt)
    ap = 0.0
    prev_recall = 0.0
    for i, r in enumerate(recalls):
        if r > prev_recall:
            envelope = max(precisions[i:])
            ap += (r - prev_recall) * envelope
            prev_recall = r
    return ap


def test_ap_hand_scenario_five_sixths():
    gts = [_gt("L", [0, 0, 10, 10]), _gt("L", [20, 20, 30, 30])]
    dets = [
        _det("L", [0, 0, 10, 10], 0.9),  # hit
        _det("L", [40, 40, 50, 50], 0.8),  # miss
        _det("L", [20, 20, 30, 30], 0.7),  # hit
    ]
    ap = average_precision(dets, gts, 0.5)
    assert ap == pytest.approx(5 / 6, abs=1e-12)
    assert ap == pytest.approx(brute_force_ap([True, False, True], 2), abs=1e-12)


def test_ap_single_exact_match():
    assert average_precision([_det("L", [0, 0, 5, 5], 0.9)], [_gt("L", [0, 0, 5, 5])]) == 1.0


def test_ap_all_below_threshold():
    dets = [_det("L", [0, 0, 1, 1], 0.9)]
    gts = [_gt("L", [10, 10, 20, 20])]
    assert average_precision(dets, gts, 0.5) == 0.0


def test_ap_monotone_nonincreasing_in_threshold():
    rng = np.random.default_rng(0)
    gts, dets = [], []
    for i in range(12):
        x, y = rng.uniform(0, 80, size=2)
        w, h = rng.uniform(4, 12, size=2)
        gts.append(_gt("L", [x, y, x + w, y + h]))
        jx, jy = rng.uniform(-3, 3, size=2)
        dets.append(_det("L", [x + jx, y + jy, x + w + jx, y + h + jy], float(rng.uniform(0.2, 1.0))))
    previous = 1.1
    for threshold in (0.2, 0.4, 0.6, 0.8, 0.95):
        ap = average_precision(dets, gts, threshold)
        assert ap <= previous + 1e-12
        previous = ap


def test_ap_confidence_ties_broken_by_input_order():
    gts = [_gt("L", [0, 0, 10, 10])]
    hit = _det("L", [0, 0, 10, 10], 0.5)
    miss = _det("L", [50, 50, 60, 60], 0.5)
    assert average_precision([hit, miss], gts) == 1.0
    assert average_precision([miss, hit], gts) == pytest.approx(0.5)


def test_mean_ap_warns_on_detection_only_label():
    gts = [_gt("L", [0, 0, 10, 10])]
    dets = [_det("L", [0, 0, 10, 10], 0.9), _det("M", [0, 0, 10, 10], 0.9)]
    with pytest.warns(NoGroundTruthWarning):
        value = mean_ap(dets, gts)
    assert value == pytest.approx(0.5)  # AP(L)=1 and AP(M)=0


# --- masks ---------------------------------------------------------------------


def test_mask_from_bbox_pixel_count():
    mask = mask_from_bbox((0, 0, 2, 2), (4, 4))
    assert int(rle_decode(mask).sum()) == 4


def test_mask_full_extent_all_ones():
    mask = mask_from_bbox((0, 0, 3, 2), (3, 2))
    assert bool(rle_decode(mask).all())


def test_mask_out_of_extent():
    with pytest.raises(OutOfExtent):
        mask_from_bbox((0, 0, 5, 5), (4, 4))


@given(st.integers(1, 64), st.integers(1, 64), st.integers(0, 2**31 - 1))
@settings(max_examples=60, deadline=None)
def test_rle_round_trip(w, h, seed):
    rng = np.random.default_rng(seed)
    grid = rng.random((h, w)) < 0.4
    encoded = rle_encode(grid)
    assert encoded.runs[0] == 0 or not grid.ravel()[0]  # zeros-first convention
    assert np.array_equal(rle_decode(encoded), grid)
