"""HTTP/JSON facade over the engine.

All state is loaded and precomputed before the app is returned; request
handlers only read immutable structures, except record mutations (which
the store serializes) and layout solves (independent per request).
"""

from __future__ import annotations

import datetime as dt
import threading
from typing import Any

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel, Field

from casescope import _kernels, alignment, bundle as bundle_io, discrepancy, indicators, layout, mentions
from casescope.config import ServiceConfig
from casescope.embedding import (
    EXTERNAL_COORDS,
    MODALITIES,
    SPACES,
    ProjectionResult,
    build_projection,
    external_projection,
    load_embeddings,
)
from casescope.errors import (
    ConfigError,
    EngineError,
    InvalidK,
    MissingModalityCoords,
    NotFound,
    SchemaError,
)
from casescope.models import CaseBundle, DiscSignal, PatientCase, RegionDetection
from casescope.records import RecordPhase, RecordStore, note_from_dict, record_to_dict


class Engine:
    """Immutable engine state shared read-only by all requests."""

    def __init__(self, config: ServiceConfig):
        config.validate()
        self.config = config
        self.bundle = self._load_bundle(config)
        self.mention_index = mentions.build_index(self.bundle.cases, config.tokenizer)
        self.detections = self._load_detections(config)
        self.detections_by_case: dict[str, list[RegionDetection]] = {}
        for det in self.detections:
            self.detections_by_case.setdefault(det.case_id, []).append(det)
        self.projection = self._build_projection(config, self.bundle)
        self.records = RecordStore(config.records_path, self.bundle)
        self.normalized_signals = self._normalize_signals(self.bundle)
        self._glyph_cache: dict[int, dict[str, discrepancy.GlyphMetrics]] = {}
        self._glyph_lock = threading.Lock()
        self.glyphs(config.default_k)  # warm the default-k cache before serving

    @staticmethod
    def _load_bundle(config: ServiceConfig) -> CaseBundle:
        single = config.data_dir / "bundle.json"
        if single.exists():
            return bundle_io.load_bundle(single)
        if (config.data_dir / "manifest.json").exists():
            return bundle_io.load_bundle(config.data_dir)
        raise ConfigError(
            f"dataDir {config.data_dir} holds neither bundle.json nor manifest.json"
        )

    @staticmethod
    def _load_detections(config: ServiceConfig) -> list[RegionDetection]:
        path = config.data_dir / "detections.json"
        return alignment.load_detections(path) if path.exists() else []

    @staticmethod
    def _build_projection(config: ServiceConfig, bundle: CaseBundle) -> ProjectionResult:
        ids = bundle.case_ids()
        if config.coords_file is not None:
            return external_projection(config.coords_file, ids, config.seed)
        coords_default = config.data_dir / "coords.json"
        if coords_default.exists():
            return external_projection(coords_default, ids, config.seed)
        embeddings_path = config.data_dir / "embeddings.json"
        if not embeddings_path.exists():
            raise ConfigError(
                f"dataDir {config.data_dir} has no coords.json and no embeddings.json; "
                "one of them is needed to build the 2D spaces"
            )
        modalities = load_embeddings(embeddings_path, bundle)
        return build_projection(bundle, modalities, config.seed)

    @staticmethod
    def _normalize_signals(bundle: CaseBundle) -> dict[tuple[str, str], dict[str, float]]:
        per_region: dict[str, list[tuple[str, DiscSignal]]] = {}
        for case in bundle.cases:
            for sig in case.disc_signals:
                per_region.setdefault(sig.region, []).append((case.case_id, sig))
        if not per_region:
            return {}
        normalized = indicators.normalize_imaging(
            {r: [s for _, s in pairs] for r, pairs in per_region.items()}
        )
        out: dict[tuple[str, str], dict[str, float]] = {}
        for region, pairs in per_region.items():
            for (cid, _), norm in zip(pairs, normalized[region]):
                out[(cid, region)] = norm
        return out

    def glyphs(self, k: int) -> dict[str, discrepancy.GlyphMetrics]:
        if k < 1:
            raise InvalidK(f"k must be >= 1, got {k}")
        with self._glyph_lock:
            if k not in self._glyph_cache:
                self._glyph_cache[k] = discrepancy.compute_all_glyph_metrics(self.projection, k)
            return self._glyph_cache[k]

    def signal_population(self) -> dict[str, dict[str, list[float]]]:
        out: dict[str, dict[str, list[float]]] = {}
        for case in self.bundle.cases:
            for sig in case.disc_signals:
                region = out.setdefault(sig.region, {"min": [], "mean": [], "max": []})
                region["min"].append(sig.min)
                region["mean"].append(sig.mean)
                region["max"].append(sig.max)
        return out


def _paginate(items: list, limit: int, offset: int) -> dict:
    return {
        "items": items[offset : offset + limit],
        "total": len(items),
        "limit": limit,
        "offset": offset,
    }


def _parse_date(raw: str | None, name: str) -> dt.date | None:
    if raw is None:
        return None
    try:
        return dt.date.fromisoformat(raw)
    except ValueError:
        raise SchemaError(f"query parameter {name!r}: invalid date {raw!r}") from None


def _stripe_doc(bins: indicators.StripeBins) -> dict:
    return {
        "binEdges": list(bins.bin_edges),
        "counts": list(bins.counts),
        "currentBin": bins.current_bin,
    }


def _case_summary(case: PatientCase) -> dict:
    return {
        "caseId": case.case_id,
        "specialty": case.specialty,
        "admitDate": case.admit_date.isoformat(),
        "chiefComplaint": case.chief_complaint,
    }


class LayoutTextBody(BaseModel):
    id: str
    label: str = ""
    halfExtents: tuple[float, float]
    wordMassOverride: float | None = None


class LayoutImageBody(BaseModel):
    halfExtents: tuple[float, float]


class LayoutConfigBody(BaseModel):
    dt: float | None = None
    damping: float | None = None
    maxIter: int | None = None
    convergenceEps: float | None = None
    rMin: float | None = None
    initialRadius: float | None = None
    imageMass: float | None = None
    seed: int | None = None


class LayoutRequest(BaseModel):
    texts: list[LayoutTextBody]
    image: LayoutImageBody
    config: LayoutConfigBody | None = None


class GroupLinksRequest(BaseModel):
    ids: list[str]


class RegionNoteBody(BaseModel):
    imageRef: str = ""
    label: str = ""
    note: str = ""
    shape: dict | None = None


class RecordCreateBody(BaseModel):
    caseId: str
    summary: str = ""
    comments: str = ""
    regionNotes: list[RegionNoteBody] = Field(default_factory=list)
    phase: str = "practice"


class RecordPatchBody(BaseModel):
    summary: str | None = None
    comments: str | None = None
    regionNotes: list[RegionNoteBody] | None = None
    phase: str | None = None


def _notes_from_bodies(notes: list[RegionNoteBody]) -> list:
    return [
        note_from_dict(
            {"imageRef": n.imageRef, "label": n.label, "note": n.note, "shape": n.shape},
            f"$.regionNotes[{i}]",
        )
        for i, n in enumerate(notes)
    ]


def _layout_config(base: layout.LayoutConfig, body: LayoutConfigBody | None) -> layout.LayoutConfig:
    if body is None:
        return base
    updates = {
        "dt": body.dt,
        "damping": body.damping,
        "max_iter": body.maxIter,
        "convergence_eps": body.convergenceEps,
        "r_min": body.rMin,
        "initial_radius": body.initialRadius,
        "image_mass": body.imageMass,
        "seed": body.seed,
    }
    kept = {k: v for k, v in updates.items() if v is not None}
    from dataclasses import replace

    return replace(base, **kept)


def create_app(config: ServiceConfig) -> FastAPI:
    """Load the engine and expose it; readiness holds once this returns."""
    engine = Engine(config)
    app = FastAPI(title="casescope", version="0.1.0")
    app.state.engine = engine

    @app.exception_handler(EngineError)
    async def engine_error_handler(_req: Request, exc: EngineError):
        return JSONResponse(
            status_code=exc.http_status,
            content={"error": {"code": exc.code, "message": str(exc)}},
        )

    @app.exception_handler(RequestValidationError)
    async def validation_handler(_req: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"error": {"code": "bad_parameters", "message": str(exc.errors())}},
        )

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/ready")
    def ready():
        return {
            "ready": True,
            "cases": len(engine.bundle.cases),
            "kernelBackend": _kernels.BACKEND,
            "projectionMethod": engine.projection.method,
        }

    @app.get("/cases")
    def list_cases(
        specialty: str | None = None,
        q: str | None = None,
        limit: int = Query(100, ge=1),
        offset: int = Query(0, ge=0),
        from_: str | None = Query(None, alias="from"),
        to: str | None = Query(None, alias="to"),
    ):
        date_from = _parse_date(from_, "from")
        date_to = _parse_date(to, "to")
        date_range = None
        if date_from is not None or date_to is not None:
            date_range = (date_from or dt.date.min, date_to or dt.date.max)
        ids = bundle_io.filter_cases(
            engine.bundle, specialty=specialty, date_range=date_range, text_query=q
        )
        summaries = [_case_summary(engine.bundle.case_index[cid]) for cid in ids]
        return _paginate(summaries, limit, offset)

    @app.get("/cases/{case_id}/detail")
    def case_detail(case_id: str):
        case = bundle_io.get_case(engine.bundle, case_id)
        population = engine.signal_population()
        signals = []
        for sig in case.disc_signals:
            entry: dict[str, Any] = {
                "region": sig.region,
                "min": sig.min,
                "mean": sig.mean,
                "max": sig.max,
                "normalized": engine.normalized_signals.get((case_id, sig.region)),
                "protrusionScore": indicators.protrusion_score(sig),
                "protrusionFlagged": indicators.protrusion_flagged(
                    sig, engine.config.protrusion_theta
                ),
                "csfRatio": (
                    indicators.csf_ratio(sig, case.csf_mean) if case.csf_mean else None
                ),
                "density": {},
            }
            pop = population.get(sig.region, {})
            for stat in ("min", "mean", "max"):
                values = pop.get(stat, [])
                if values:
                    bins = indicators.stripe_bins(
                        values, engine.config.stripe_bins, getattr(sig, stat)
                    )
                    entry["density"][stat] = _stripe_doc(bins)
            signals.append(entry)
        dets = engine.detections_by_case.get(case_id, [])
        links = alignment.link_phrases(case.diagnosis_text, dets)
        return {
            "caseId": case_id,
            "csfMean": case.csf_mean,
            "imageRefs": list(case.image_refs),
            "discSignals": signals,
            "detections": [
                {
                    "label": d.label,
                    "imageRef": d.image_ref,
                    "bbox": list(d.bbox),
                    "confidence": d.confidence,
                    "mask": (
                        {"width": d.mask.width, "height": d.mask.height, "runs": list(d.mask.runs)}
                        if d.mask
                        else None
                    ),
                }
                for d in dets
            ],
            "links": [
                {
                    "detectionIndex": link.detection_index,
                    "phraseSpan": list(link.phrase_span),
                    "phrase": case.diagnosis_text[link.phrase_span[0] : link.phrase_span[1]],
                }
                for link in links
            ],
        }

    @app.get("/cases/{case_id}")
    def get_case(case_id: str):
        case = bundle_io.get_case(engine.bundle, case_id)
        statuses = {}
        population_labs: dict[str, list[float]] = {}
        for other in engine.bundle.cases:
            for name, value in other.lab_indicators.items():
                population_labs.setdefault(name, []).append(value)
        for name, value in case.lab_indicators.items():
            rng = engine.bundle.range_index[name]
            statuses[name] = {
                "value": value,
                "status": indicators.evaluate(value, rng).value,
                "radar": indicators.radar_normalize(value, rng),
                "low": rng.low,
                "high": rng.high,
                "unit": rng.unit,
                "category": rng.category.value,
                "stripe": _stripe_doc(
                    indicators.stripe_bins(population_labs[name], engine.config.stripe_bins, value)
                ),
            }
        summary = indicators.exam_summary(case.physical_exam)
        demo_population = {
            "age": [c.demographics.age for c in engine.bundle.cases],
            "heightCm": [c.demographics.height_cm for c in engine.bundle.cases],
            "weightKg": [c.demographics.weight_kg for c in engine.bundle.cases],
        }
        demo_current = {
            "age": case.demographics.age,
            "heightCm": case.demographics.height_cm,
            "weightKg": case.demographics.weight_kg,
        }
        return {
            "case": bundle_io.case_to_dict(case),
            "indicatorStatuses": statuses,
            "examSummary": {
                "perArea": {a.value: n for a, n in summary.per_area.items()},
                "perKind": {k.value: n for k, n in summary.per_kind.items()},
                "abnormal": [item.name for item in summary.abnormal],
            },
            "demographicStripes": {
                name: _stripe_doc(
                    indicators.stripe_bins(
                        demo_population[name], engine.config.stripe_bins, demo_current[name]
                    )
                )
                for name in demo_population
            },
        }

    @app.get("/mentions")
    def list_mentions(limit: int = Query(100, ge=1), offset: int = Query(0, ge=0)):
        ranked = mentions.top_keywords(
            engine.mention_index, max(len(engine.mention_index.keyword_counts), 1)
        )
        items = [{"token": t, "count": c} for t, c in ranked]
        return _paginate(items, limit, offset)

    @app.get("/mentions/search")
    def mentions_search(q: str, limit: int = Query(100, ge=1), offset: int = Query(0, ge=0)):
        ids = mentions.search(engine.mention_index, engine.bundle.cases, q)
        return _paginate(ids, limit, offset)

    @app.get("/embedding/coords")
    def embedding_coords(
        space: str, limit: int = Query(100, ge=1), offset: int = Query(0, ge=0)
    ):
        if space not in SPACES:
            raise SchemaError(f"unknown space {space!r}; expected one of {list(SPACES)}")
        coords = engine.projection.space(space)
        items = [
            {"caseId": cid, "x": xy[0], "y": xy[1]} for cid, xy in sorted(coords.items())
        ]
        return {
            "space": space,
            "method": engine.projection.method,
            "seed": engine.projection.seed,
            **_paginate(items, limit, offset),
        }

    @app.get("/glyph/population")
    def glyph_population(pair: str, k: int | None = None):
        k = engine.config.default_k if k is None else k
        stats = discrepancy.population_pair_stats(engine.projection, pair, k)
        return {"pair": pair, "k": k, "stats": stats}

    @app.get("/glyph/{case_id}")
    def glyph(case_id: str, k: int | None = None):
        k = engine.config.default_k if k is None else k
        if k < 1:
            raise InvalidK(f"k must be >= 1, got {k}")
        metrics = engine.glyphs(k).get(case_id)
        if metrics is None:
            if case_id in engine.bundle.case_index:
                raise MissingModalityCoords(
                    f"case {case_id!r} lacks coordinates in at least one modality"
                )
            raise NotFound(f"unknown caseId {case_id!r}")
        neighbors = {}
        for modality in MODALITIES:
            ns = discrepancy.knn_set(engine.projection.space(modality), case_id, k, modality)
            neighbors[modality] = {"ids": list(ns.ids), "radius": ns.radius}
        return {
            "caseId": case_id,
            "k": k,
            "pairSim": metrics.pair_sim,
            "tripleSim": metrics.triple_sim,
            "pairPopulation": metrics.pair_population,
            "neighbors": neighbors,
        }

    @app.post("/group-links")
    def group_links(body: GroupLinksRequest):
        links = discrepancy.group_links(engine.projection, body.ids)
        return {
            "spaces": {
                space: [{"caseId": cid, "x": x, "y": y} for cid, x, y in rows]
                for space, rows in links.items()
            }
        }

    @app.post("/layout")
    def solve_layout(body: LayoutRequest):
        texts = [
            layout.TextSpec(
                id=t.id,
                label=t.label,
                half_extents=t.halfExtents,
                mass_override=t.wordMassOverride,
            )
            for t in body.texts
        ]
        cfg = _layout_config(engine.config.layout, body.config)
        result = layout.solve(texts, body.image.halfExtents, cfg)
        return {
            "positions": {tid: [x, y] for tid, (x, y) in result.positions.items()},
            "iterations": result.iterations,
            "converged": result.converged,
            "residualOverlaps": result.residual_overlaps,
        }

    @app.get("/records")
    def list_records(
        caseId: str | None = None,
        limit: int = Query(100, ge=1),
        offset: int = Query(0, ge=0),
    ):
        records = [record_to_dict(r) for r in engine.records.list(caseId)]
        return _paginate(records, limit, offset)

    @app.get("/records/export")
    def export_records(format: str = "json", caseId: str | None = None):
        payload = engine.records.export(format, caseId)
        media = "application/json" if format == "json" else "text/csv"
        return Response(content=payload, media_type=media)

    @app.post("/records", status_code=201)
    def create_record(body: RecordCreateBody):
        try:
            phase = RecordPhase(body.phase)
        except ValueError:
            raise SchemaError("$.phase: expected 'practice' or 'learning'") from None
        record = engine.records.create(
            case_id=body.caseId,
            summary=body.summary,
            comments=body.comments,
            region_notes=_notes_from_bodies(body.regionNotes),
            phase=phase,
        )
        return record_to_dict(record)

    @app.patch("/records/{record_id}")
    def patch_record(record_id: int, body: RecordPatchBody):
        patch: dict[str, Any] = {}
        if body.summary is not None:
            patch["summary"] = body.summary
        if body.comments is not None:
            patch["comments"] = body.comments
        if body.regionNotes is not None:
            patch["regionNotes"] = _notes_from_bodies(body.regionNotes)
        if body.phase is not None:
            patch["phase"] = body.phase
        record = engine.records.update(record_id, patch)
        return record_to_dict(record)

    @app.get("/records/{record_id}")
    def get_record(record_id: int):
        return record_to_dict(engine.records.get(record_id))

    return app
