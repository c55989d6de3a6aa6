"""Modality vectors, fusion by concatenation, and 2D projection.

Each modality block is L2-normalized before concatenation so the wide
image block cannot dominate fused distances. The built-in projection is a
deterministic PCA; externally computed 2D coordinates (e.g. from a
stochastic reducer) can be ingested instead of recomputing anything.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Mapping

import numpy as np

from casescope.errors import (
    DanglingReference,
    DimensionMismatch,
    MissingModality,
    NonFiniteInput,
    SchemaError,
    TooFewPoints,
)
from casescope.models import CaseBundle, Point

MODALITIES = ("image", "text", "indicator")
SPACES = MODALITIES + ("fusion",)

PCA_BUILTIN = "pcaBuiltin"
EXTERNAL_COORDS = "externalCoords"


@dataclass(frozen=True)
class ProjectionResult:
    """2D coordinates per space (the three modalities plus the fusion)."""

    method: str
    seed: int
    coords: dict[str, dict[str, Point]]

    def space(self, name: str) -> dict[str, Point]:
        if name not in self.coords:
            raise SchemaError(f"no coordinates for space {name!r}")
        return self.coords[name]


def standardize_indicators(rows) -> np.ndarray:
    """Z-score each indicator column over the population (population sd).

    Zero-variance columns (including the single-case population) map to
    all-zeros rather than dividing by zero.
    """
    arr = np.asarray(rows, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise TooFewPoints("need at least one case")
    if not np.isfinite(arr).all():
        raise NonFiniteInput("indicator matrix contains non-finite values")
    centered = arr - arr.mean(axis=0)
    # second centering pass kills the cancellation residue left by the first
    # when values are large relative to their spread
    centered -= centered.mean(axis=0)
    sd = centered.std(axis=0)
    out = np.zeros_like(arr)
    np.divide(centered, sd, out=out, where=sd > 0.0)
    return out


def fuse(image, text, indicator) -> np.ndarray:
    """Concatenate the three modality vectors after per-block L2 normalization."""
    blocks = []
    for name, block in (("image", image), ("text", text), ("indicator", indicator)):
        if block is None:
            raise MissingModality(f"missing modality {name!r}")
        vec = np.asarray(block, dtype=np.float64).ravel()
        if not np.isfinite(vec).all():
            raise NonFiniteInput(f"modality {name!r} contains non-finite values")
        norm = float(np.linalg.norm(vec))
        blocks.append(vec / norm if norm > 0.0 else vec)
    return np.concatenate(blocks)


def _pca_components(centered: np.ndarray) -> np.ndarray:
    """Top-2 principal axes (rows), deterministic for fixed input.

    Eigenvalue ties keep the covariance eigendecomposition order (original
    axis order for diagonal covariance); each axis is flipped so its
    largest-magnitude loading is positive.
    """
    n, d = centered.shape
    comps = np.zeros((2, d))
    if d <= max(n, 64):
        cov = centered.T @ centered / n
        w, v = np.linalg.eigh(cov)  # ascending eigenvalues
        order = np.argsort(-w, kind="stable")
        axes = [v[:, i] for i in order[: min(2, d)]]
    else:
        # dual (gram) form for wide data: d x d eigendecomposition would dominate
        gram = centered @ centered.T / n
        w, u = np.linalg.eigh(gram)
        order = np.argsort(-w, kind="stable")
        scale = max(float(w.max()), 1.0)
        axes = []
        for i in order[:2]:
            if w[i] <= 1e-12 * scale:
                axes.append(np.zeros(d))
                continue
            axis = centered.T @ u[:, i]
            axes.append(axis / np.linalg.norm(axis))
    for row, axis in enumerate(axes):
        peak = int(np.argmax(np.abs(axis)))
        comps[row] = -axis if axis[peak] < 0.0 else axis
    return comps


def project(vectors: Mapping[str, np.ndarray], method: str = PCA_BUILTIN, seed: int = 0) -> dict[str, Point]:
    """2D coordinates for each case id; deterministic for fixed input and seed."""
    if method != PCA_BUILTIN:
        raise SchemaError(f"unknown projection method {method!r}")
    ids = sorted(vectors)
    if len(ids) < 2:
        raise TooFewPoints(f"pcaBuiltin needs at least 2 cases, got {len(ids)}")
    rows = [np.asarray(vectors[i], dtype=np.float64).ravel() for i in ids]
    dim = rows[0].shape[0]
    for cid, row in zip(ids, rows):
        if row.shape[0] != dim:
            raise DimensionMismatch(
                f"case {cid!r} has vector length {row.shape[0]}, expected {dim}"
            )
    mat = np.stack(rows)
    if not np.isfinite(mat).all():
        raise NonFiniteInput("embedding matrix contains non-finite values")
    centered = mat - mat.mean(axis=0)
    comps = _pca_components(centered)
    coords = centered @ comps.T
    return {cid: (float(x), float(y)) for cid, (x, y) in zip(ids, coords)}


def _check_point(raw, path: str) -> Point:
    if not (isinstance(raw, list) and len(raw) == 2):
        raise SchemaError(f"{path}: expected [x, y]")
    x, y = float(raw[0]), float(raw[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise SchemaError(f"{path}: coordinates must be finite")
    return (x, y)


def load_external_coords(source: str | Path | IO, known_ids: Iterable[str]) -> dict[str, dict[str, Point]]:
    """Read a coordinate file covering every known case in all four spaces."""
    if hasattr(source, "read"):
        data = source.read()
        doc = json.loads(data.decode("utf-8") if isinstance(data, bytes) else data)
    else:
        doc = json.loads(Path(source).read_text(encoding="utf-8"))
    if not isinstance(doc, dict):
        raise SchemaError("$: expected an object of spaces")
    known = set(known_ids)
    coords: dict[str, dict[str, Point]] = {}
    for space in SPACES:
        if space not in doc:
            raise SchemaError(f"$.{space}: missing space {space!r}")
        entries = doc[space]
        if not isinstance(entries, dict):
            raise SchemaError(f"$.{space}: expected an object of caseId -> [x, y]")
        space_coords: dict[str, Point] = {}
        for cid, raw in entries.items():
            if cid not in known:
                raise DanglingReference(f"$.{space}.{cid}: unknown caseId")
            space_coords[cid] = _check_point(raw, f"$.{space}.{cid}")
        missing = known - space_coords.keys()
        if missing:
            raise SchemaError(f"$.{space}: missing coordinates for case {sorted(missing)[0]!r}")
        coords[space] = space_coords
    return coords


def external_projection(source, known_ids: Iterable[str], seed: int = 0) -> ProjectionResult:
    return ProjectionResult(
        method=EXTERNAL_COORDS, seed=seed, coords=load_external_coords(source, known_ids)
    )


def indicator_matrix(bundle: CaseBundle) -> tuple[list[str], list[str], np.ndarray]:
    """Raw indicator rows per case, for standardization into the indicator modality.

    Imaging indicators (per-region disc min/mean/max plus the CSF mean when
    universally present) are preferred; bundles without disc signals fall
    back to the laboratory indicators. Feature sets must agree across cases.
    """
    ids = sorted(c.case_id for c in bundle.cases)
    cases = [bundle.case_index[c] for c in ids]
    if not cases:
        raise TooFewPoints("bundle has no cases")
    with_signals = [c for c in cases if c.disc_signals]
    if with_signals and len(with_signals) != len(cases):
        missing = next(c.case_id for c in cases if not c.disc_signals)
        raise SchemaError(f"case {missing!r} has no discSignals while others do")
    if with_signals:
        regions = sorted({s.region for s in cases[0].disc_signals})
        for case in cases:
            if sorted({s.region for s in case.disc_signals}) != regions:
                raise SchemaError(f"case {case.case_id!r} disc regions differ from the population")
        use_csf = all(c.csf_mean is not None for c in cases)
        names = [f"{r}:{stat}" for r in regions for stat in ("min", "mean", "max")]
        if use_csf:
            names.append("csfMean")
        rows = []
        for case in cases:
            by_region = {s.region: s for s in case.disc_signals}
            row = []
            for region in regions:
                sig = by_region[region]
                row.extend((sig.min, sig.mean, sig.max))
            if use_csf:
                row.append(case.csf_mean)
            rows.append(row)
        return ids, names, np.asarray(rows, dtype=np.float64)
    names = sorted(cases[0].lab_indicators)
    for case in cases:
        if sorted(case.lab_indicators) != names:
            raise SchemaError(f"case {case.case_id!r} lab indicators differ from the population")
    rows = [[case.lab_indicators[n] for n in names] for case in cases]
    return ids, names, np.asarray(rows, dtype=np.float64)


def load_embeddings(source: str | Path | IO, bundle: CaseBundle) -> dict[str, dict[str, np.ndarray]]:
    """Read the per-case embedding artifact and assemble all three modalities.

    The artifact maps caseId -> {image, text, indicator?}; indicator rows
    default to bundle-derived values. Indicator rows are standardized here,
    so the returned indicator vectors are the final modality embeddings.
    """
    if hasattr(source, "read"):
        data = source.read()
        doc = json.loads(data.decode("utf-8") if isinstance(data, bytes) else data)
    else:
        doc = json.loads(Path(source).read_text(encoding="utf-8"))
    if not isinstance(doc, dict):
        raise SchemaError("$: expected an object of caseId -> modality vectors")
    known = set(bundle.case_index)
    for cid in doc:
        if cid not in known:
            raise DanglingReference(f"$.{cid}: unknown caseId")
    manifest = bundle.embedding_manifest
    dims = {"image": manifest.image_dim, "text": manifest.text_dim}
    out: dict[str, dict[str, np.ndarray]] = {"image": {}, "text": {}}
    for cid in sorted(known):
        entry = doc.get(cid)
        if entry is None:
            raise SchemaError(f"$.{cid}: missing embeddings for case")
        for modality in ("image", "text"):
            if modality not in entry:
                raise SchemaError(f"$.{cid}.{modality}: missing modality vector")
            vec = np.asarray(entry[modality], dtype=np.float64)
            if vec.ndim != 1 or vec.shape[0] != dims[modality]:
                raise SchemaError(
                    f"$.{cid}.{modality}: expected length {dims[modality]}, got {vec.shape}"
                )
            if not np.isfinite(vec).all():
                raise SchemaError(f"$.{cid}.{modality}: non-finite values")
            out[modality][cid] = vec

    have_indicator = [cid for cid in sorted(known) if "indicator" in (doc.get(cid) or {})]
    if have_indicator and len(have_indicator) == len(known):
        rows = [np.asarray(doc[cid]["indicator"], dtype=np.float64) for cid in sorted(known)]
        width = rows[0].shape[0]
        for cid, row in zip(sorted(known), rows):
            if row.ndim != 1 or row.shape[0] != width:
                raise SchemaError(f"$.{cid}.indicator: inconsistent indicator length")
        ids = sorted(known)
        matrix = np.stack(rows)
    elif have_indicator:
        missing = next(cid for cid in sorted(known) if cid not in set(have_indicator))
        raise SchemaError(f"$.{missing}: indicator vector missing while others provide one")
    else:
        ids, _, matrix = indicator_matrix(bundle)
    standardized = standardize_indicators(matrix)
    out["indicator"] = {cid: standardized[i] for i, cid in enumerate(ids)}
    return out


def build_projection(
    bundle: CaseBundle,
    modalities: Mapping[str, Mapping[str, np.ndarray]],
    seed: int = 0,
) -> ProjectionResult:
    """Project each modality and the fused vectors with the built-in PCA."""
    coords: dict[str, dict[str, Point]] = {}
    for modality in MODALITIES:
        coords[modality] = project(modalities[modality], PCA_BUILTIN, seed)
    fused = {
        cid: fuse(
            modalities["image"][cid], modalities["text"][cid], modalities["indicator"][cid]
        )
        for cid in modalities["image"]
    }
    coords["fusion"] = project(fused, PCA_BUILTIN, seed)
    return ProjectionResult(method=PCA_BUILTIN, seed=seed, coords=coords)
