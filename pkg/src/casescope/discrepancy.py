"""Neighborhood discrepancy math behind the fusion-space glyphs.

For each case we take the k nearest neighbors (self included) within each
modality's 2D coordinates, then compare those neighbor sets across
modality pairs with Jaccard similarity and across all three with the
triple Jaccard |A∩B∩C| / |A∪B∪C|. A low triple similarity combined with
one high pair flags a case whose modalities disagree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Collection, Iterable, Mapping

import numpy as np

from casescope import _kernels
from casescope.errors import EmptyUniverse, InvalidK, MissingModalityCoords, NotFound
from casescope.embedding import MODALITIES, SPACES, ProjectionResult
from casescope.models import Point

# The three modality pairs encoded by the glyph's outer segments. Kept in one
# place: the third pairing is the only defensible reading of the source
# material but is the part most likely to be revisited.
PAIR_KINDS: dict[str, tuple[str, str]] = {
    "imageText": ("image", "text"),
    "imageIndicator": ("image", "indicator"),
    "textIndicator": ("text", "indicator"),
}

FiveNumber = dict[str, float]


@dataclass(frozen=True)
class NeighborSet:
    """The k nearest cases to a query case within one modality's coordinates."""

    case_id: str
    modality: str
    k: int
    ids: tuple[str, ...]  # ordered by (distance, id); always contains case_id
    radius: float


@dataclass(frozen=True)
class GlyphMetrics:
    case_id: str
    k: int
    pair_sim: dict[str, float]
    triple_sim: float
    pair_population: dict[str, FiveNumber]


def _space_arrays(coords: Mapping[str, Point]) -> tuple[list[str], np.ndarray]:
    ids = sorted(coords)
    pts = np.asarray([coords[i] for i in ids], dtype=np.float64)
    return ids, pts


def knn_set(coords: Mapping[str, Point], query_id: str, k: int, modality: str = "") -> NeighborSet:
    """K nearest neighbors by Euclidean distance, ties by ascending case id.

    The query case is always a member (distance 0); saturated populations
    (k >= n) return everyone.
    """
    if k < 1:
        raise InvalidK(f"k must be >= 1, got {k}")
    if query_id not in coords:
        raise NotFound(f"unknown caseId {query_id!r}" + (f" in {modality} space" if modality else ""))
    ids, pts = _space_arrays(coords)
    qi = ids.index(query_id)
    sel, radius = _kernels.knn_query(pts, qi, k)
    return NeighborSet(
        case_id=query_id,
        modality=modality,
        k=k,
        ids=tuple(ids[i] for i in sel),
        radius=float(radius),
    )


def jaccard(a: Collection, b: Collection) -> float:
    """|a ∩ b| / |a ∪ b|."""
    sa, sb = set(a), set(b)
    union = sa | sb
    if not union:
        raise EmptyUniverse("jaccard of two empty sets is undefined")
    return len(sa & sb) / len(union)


def jaccard_triple(a: Collection, b: Collection, c: Collection) -> float:
    """|a ∩ b ∩ c| / |a ∪ b ∪ c|."""
    sa, sb, sc = set(a), set(b), set(c)
    union = sa | sb | sc
    if not union:
        raise EmptyUniverse("jaccard of three empty sets is undefined")
    return len(sa & sb & sc) / len(union)


def _all_neighbor_ids(projection: ProjectionResult, k: int) -> dict[str, dict[str, frozenset[str]]]:
    """Per modality, the KNN id set of every case (one kernel sweep per space)."""
    out: dict[str, dict[str, frozenset[str]]] = {}
    for modality in MODALITIES:
        coords = projection.space(modality)
        ids, pts = _space_arrays(coords)
        if not ids:
            out[modality] = {}
            continue
        idx, _ = _kernels.knn_all(pts, k)
        out[modality] = {
            ids[qi]: frozenset(ids[j] for j in idx[qi]) for qi in range(len(ids))
        }
    return out


def _pair_sims_for_case(
    neighbor_ids: Mapping[str, Mapping[str, frozenset[str]]], case_id: str
) -> dict[str, float]:
    return {
        kind: jaccard(neighbor_ids[m1][case_id], neighbor_ids[m2][case_id])
        for kind, (m1, m2) in PAIR_KINDS.items()
    }


def _five_number(values: Iterable[float]) -> FiveNumber:
    arr = np.asarray(list(values), dtype=np.float64)
    qs = np.quantile(arr, [0.0, 0.25, 0.5, 0.75, 1.0], method="linear")
    return {
        "min": float(qs[0]),
        "q1": float(qs[1]),
        "median": float(qs[2]),
        "q3": float(qs[3]),
        "max": float(qs[4]),
    }


def compute_all_glyph_metrics(projection: ProjectionResult, k: int) -> dict[str, GlyphMetrics]:
    """GlyphMetrics for every case that has coordinates in all three modalities."""
    if k < 1:
        raise InvalidK(f"k must be >= 1, got {k}")
    neighbor_ids = _all_neighbor_ids(projection, k)
    complete = sorted(
        set(neighbor_ids["image"]) & set(neighbor_ids["text"]) & set(neighbor_ids["indicator"])
    )
    pair_sims = {cid: _pair_sims_for_case(neighbor_ids, cid) for cid in complete}
    population = {
        kind: _five_number(pair_sims[cid][kind] for cid in complete) for kind in PAIR_KINDS
    }
    out: dict[str, GlyphMetrics] = {}
    for cid in complete:
        triple = jaccard_triple(
            neighbor_ids["image"][cid], neighbor_ids["text"][cid], neighbor_ids["indicator"][cid]
        )
        out[cid] = GlyphMetrics(
            case_id=cid,
            k=k,
            pair_sim=pair_sims[cid],
            triple_sim=triple,
            pair_population=population,
        )
    return out


def glyph_metrics(projection: ProjectionResult, case_id: str, k: int) -> GlyphMetrics:
    """Glyph metrics for one case (computes the population sweep; cache upstream)."""
    if k < 1:
        raise InvalidK(f"k must be >= 1, got {k}")
    for modality in MODALITIES:
        space = projection.space(modality)
        if case_id not in space:
            if case_id not in projection.space("fusion") and all(
                case_id not in projection.space(m) for m in MODALITIES
            ):
                raise NotFound(f"unknown caseId {case_id!r}")
            raise MissingModalityCoords(
                f"case {case_id!r} has no coordinates in the {modality} space"
            )
    return compute_all_glyph_metrics(projection, k)[case_id]


def population_pair_stats(projection: ProjectionResult, pair_kind: str, k: int) -> FiveNumber:
    """Five-number summary of one pair's similarity over the whole population."""
    if pair_kind not in PAIR_KINDS:
        raise InvalidK(f"unknown pair kind {pair_kind!r}; expected one of {sorted(PAIR_KINDS)}")
    if k < 1:
        raise InvalidK(f"k must be >= 1, got {k}")
    m1, m2 = PAIR_KINDS[pair_kind]
    neighbor_ids = _all_neighbor_ids(projection, k)
    shared = sorted(set(neighbor_ids[m1]) & set(neighbor_ids[m2]))
    if not shared:
        raise EmptyUniverse("no cases with coordinates in both modalities")
    return _five_number(jaccard(neighbor_ids[m1][cid], neighbor_ids[m2][cid]) for cid in shared)


def group_links(projection: ProjectionResult, ids: Collection[str]) -> dict[str, list[tuple[str, float, float]]]:
    """Coordinates of each id in all four spaces, stably ordered by case id.

    Serves the cross-space connecting lines for lasso groups and KNN sets.
    """
    ordered = sorted(set(ids))
    out: dict[str, list[tuple[str, float, float]]] = {}
    for space in SPACES:
        coords = projection.space(space)
        rows = []
        for cid in ordered:
            if cid not in coords:
                raise NotFound(f"case {cid!r} has no coordinates in the {space} space")
            x, y = coords[cid]
            rows.append((cid, x, y))
        out[space] = rows
    return out
