import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from casescope.bundle import bundle_from_dict
from casescope.embedding import (
    build_projection,
    external_projection,
    fuse,
    indicator_matrix,
    load_embeddings,
    load_external_coords,
    project,
    standardize_indicators,
)
from casescope.errors import (
    DanglingReference,
    DimensionMismatch,
    MissingModality,
    NonFiniteInput,
    SchemaError,
    TooFewPoints,
)

from conftest import tiny_doc


# --- standardize_indicators ---------------------------------------------


def test_standardize_column_zscore():
    out = standardize_indicators([[10.0], [20.0], [30.0]])
    sd = math.sqrt(200.0 / 3.0)  # population sd of [10, 20, 30]
    assert out.ravel() == pytest.approx([-10.0 / sd, 0.0, 10.0 / sd], abs=1e-12)
    assert out[0, 0] == pytest.approx(-1.2247, abs=1e-4)


def test_standardize_constant_column_zeroed():
    out = standardize_indicators([[5.0], [5.0], [5.0]])
    assert np.all(out == 0.0)


def test_standardize_single_case():
    assert np.all(standardize_indicators([[7.0, 3.0]]) == 0.0)


def test_standardize_rejects_non_finite():
    with pytest.raises(NonFiniteInput):
        standardize_indicators([[1.0], [float("inf")]])


@given(
    st.lists(
        st.lists(st.floats(-1e6, 1e6), min_size=3, max_size=3),
        min_size=2,
        max_size=25,
    )
)
@settings(max_examples=50, deadline=None)
def test_standardize_columns_mean_zero_sd_one(rows):
    out = standardize_indicators(rows)
    assert np.allclose(out.mean(axis=0), 0.0, atol=1e-9)
    for sd in out.std(axis=0):
        assert abs(sd) < 1e-9 or abs(sd - 1.0) < 1e-9


# --- fuse ----------------------------------------------------------------


def test_fuse_length_additivity():
    out = fuse([1, 0, 0, 0], [1, 0, 0], [1, 0])
    assert out.shape == (9,)


def test_fuse_normalizes_each_block():
    out = fuse([3.0, 4.0], [1.0], [0.0, 0.0])
    assert out[:2] == pytest.approx([0.6, 0.8])
    assert out[2] == 1.0
    assert np.all(out[3:] == 0.0)  # zero block stays zero


def test_fuse_missing_modality_named():
    with pytest.raises(MissingModality, match="text"):
        fuse([1.0], None, [1.0])


def test_fuse_nonzero_blocks_have_unit_norm():
    rng = np.random.default_rng(3)
    image, text, ind = rng.normal(size=8), rng.normal(size=5), rng.normal(size=3)
    out = fuse(image, text, ind)
    assert np.linalg.norm(out[:8]) == pytest.approx(1.0)
    assert np.linalg.norm(out[8:13]) == pytest.approx(1.0)
    assert np.linalg.norm(out[13:]) == pytest.approx(1.0)


# --- project ---------------------------------------------------------------


def test_project_square_corners_recovered():
    out = project({"a": [1, 1], "b": [1, -1], "c": [-1, 1], "d": [-1, -1]})
    assert out == {
        "a": (1.0, 1.0),
        "b": (1.0, -1.0),
        "c": (-1.0, 1.0),
        "d": (-1.0, -1.0),
    }


def test_project_identical_points_at_origin():
    out = project({"x": [5.0, 5.0], "y": [5.0, 5.0]})
    assert out == {"x": (0.0, 0.0), "y": (0.0, 0.0)}


def test_project_collinear_second_axis_zero():
    out = project({"p": [0.0, 0.0, 0.0], "q": [3.0, 4.0, 0.0]})
    assert out["p"][1] == 0.0 and out["q"][1] == 0.0
    assert abs(out["q"][0] - out["p"][0]) == pytest.approx(5.0)


def test_project_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        project({"a": [1.0, 2.0], "b": [1.0]})


def test_project_too_few_points():
    with pytest.raises(TooFewPoints):
        project({"a": [1.0, 2.0]})


def test_project_bit_identical_reruns():
    rng = np.random.default_rng(11)
    vecs = {f"c{i}": rng.normal(size=6) for i in range(9)}
    assert project(vecs) == project(vecs)


def test_project_translation_invariant():
    rng = np.random.default_rng(0)
    vecs = {f"c{i}": rng.normal(size=5) for i in range(8)}
    shifted = {k: np.asarray(v) + 37.5 for k, v in vecs.items()}
    base, moved = project(vecs), project(shifted)
    for cid in vecs:
        assert base[cid] == pytest.approx(moved[cid], abs=1e-9)


def test_project_wide_data_matches_svd_oracle():
    rng = np.random.default_rng(5)
    vecs = {f"c{i}": rng.normal(size=120) for i in range(10)}  # forces the gram path
    out = project(vecs)
    ids = sorted(vecs)
    mat = np.stack([vecs[i] for i in ids])
    centered = mat - mat.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    expected = {}
    for row in range(2):
        axis = vt[row]
        if axis[np.argmax(np.abs(axis))] < 0:
            axis = -axis
        for cid, vec in zip(ids, centered):
            expected.setdefault(cid, []).append(float(vec @ axis))
    for cid in ids:
        assert out[cid] == pytest.approx(tuple(expected[cid]), abs=1e-8)


# --- external coords / embeddings artifacts --------------------------------


def _coords_doc(ids):
    return {
        space: {cid: [float(i), float(i) + 0.5] for i, cid in enumerate(ids)}
        for space in ("image", "text", "indicator", "fusion")
    }


def test_load_external_coords_ok():
    ids = ["c1", "c2"]
    doc = _coords_doc(ids)
    coords = load_external_coords(io.StringIO(json.dumps(doc)), ids)
    assert coords["fusion"]["c2"] == (1.0, 1.5)
    result = external_projection(io.StringIO(json.dumps(doc)), ids)
    assert result.method == "externalCoords"


def test_load_external_coords_missing_space_named():
    doc = _coords_doc(["c1"])
    del doc["fusion"]
    with pytest.raises(SchemaError, match="fusion"):
        load_external_coords(io.StringIO(json.dumps(doc)), ["c1"])


def test_load_external_coords_unknown_case():
    doc = _coords_doc(["c1", "ghost"])
    with pytest.raises(DanglingReference):
        load_external_coords(io.StringIO(json.dumps(doc)), ["c1"])


def test_load_external_coords_incomplete_coverage():
    doc = _coords_doc(["c1"])
    with pytest.raises(SchemaError, match="c2"):
        load_external_coords(io.StringIO(json.dumps(doc)), ["c1", "c2"])


def test_indicator_matrix_prefers_disc_signals(tiny_bundle):
    ids, names, matrix = indicator_matrix(tiny_bundle)
    assert ids == ["c1", "c2", "c3"]
    # one region x three stats; CSF mean skipped because c3 lacks it
    assert names == ["C6-C7:min", "C6-C7:mean", "C6-C7:max"]
    assert matrix.shape == (3, 3)


def test_indicator_matrix_lab_fallback():
    doc = tiny_doc()
    for case in doc["cases"]:
        case["discSignals"] = []
        case["labIndicators"] = {"glucose": 5.0}
    bundle = bundle_from_dict(doc)
    ids, names, matrix = indicator_matrix(bundle)
    assert names == ["glucose"]
    assert matrix.shape == (3, 1)


def test_indicator_matrix_rejects_mixed_regions():
    doc = tiny_doc()
    doc["cases"][0]["discSignals"].append(
        {"region": "C2-C3", "min": 1.0, "mean": 2.0, "max": 3.0}
    )
    with pytest.raises(SchemaError):
        indicator_matrix(bundle_from_dict(doc))


def _embeddings_doc(bundle):
    rng = np.random.default_rng(1)
    return {
        c.case_id: {
            "image": rng.normal(size=bundle.embedding_manifest.image_dim).tolist(),
            "text": rng.normal(size=bundle.embedding_manifest.text_dim).tolist(),
        }
        for c in bundle.cases
    }


def test_load_embeddings_and_projection(tiny_bundle):
    doc = _embeddings_doc(tiny_bundle)
    modalities = load_embeddings(io.StringIO(json.dumps(doc)), tiny_bundle)
    assert set(modalities) == {"image", "text", "indicator"}
    assert modalities["indicator"]["c1"].shape == (3,)
    result = build_projection(tiny_bundle, modalities, seed=0)
    assert set(result.coords) == {"image", "text", "indicator", "fusion"}
    assert len(result.coords["fusion"]) == 3


def test_load_embeddings_dimension_checked(tiny_bundle):
    doc = _embeddings_doc(tiny_bundle)
    doc["c1"]["image"] = [1.0, 2.0]
    with pytest.raises(SchemaError, match="c1.image"):
        load_embeddings(io.StringIO(json.dumps(doc)), tiny_bundle)


def test_load_embeddings_unknown_case(tiny_bundle):
    doc = _embeddings_doc(tiny_bundle)
    doc["ghost"] = doc["c1"]
    with pytest.raises(DanglingReference):
        load_embeddings(io.StringIO(json.dumps(doc)), tiny_bundle)


def test_load_embeddings_missing_case(tiny_bundle):
    doc = _embeddings_doc(tiny_bundle)
    del doc["c2"]
    with pytest.raises(SchemaError, match="c2"):
        load_embeddings(io.StringIO(json.dumps(doc)), tiny_bundle)
