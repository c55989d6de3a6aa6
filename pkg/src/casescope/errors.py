"""Exception types shared across the engine.

Every error carries a stable machine-readable ``code`` (used verbatim in
API error bodies) and a default HTTP status for the service layer.
"""

from __future__ import annotations


class EngineError(Exception):
    """Base class for all engine errors."""

    code = "engine_error"
    http_status = 500


class SchemaError(EngineError):
    """Malformed document; the message names the offending path."""

    code = "schema_error"
    http_status = 400


class DuplicateId(EngineError):
    code = "duplicate_id"
    http_status = 400


class DanglingReference(EngineError):
    """A cross-reference (case id, indicator name, image ref) does not resolve."""

    code = "dangling_reference"
    http_status = 400


class InvalidRange(EngineError):
    code = "invalid_range"
    http_status = 422


class NotFound(EngineError):
    code = "not_found"
    http_status = 404


class EmptyQuery(EngineError):
    code = "empty_query"
    http_status = 422


class NonFiniteInput(EngineError):
    code = "non_finite_input"
    http_status = 422


class NonFiniteValue(EngineError):
    code = "non_finite_value"
    http_status = 422


class MissingModality(EngineError):
    code = "missing_modality"
    http_status = 422


class DimensionMismatch(EngineError):
    code = "dimension_mismatch"
    http_status = 422


class TooFewPoints(EngineError):
    code = "too_few_points"
    http_status = 422


class InvalidK(EngineError):
    code = "invalid_k"
    http_status = 422


class EmptyUniverse(EngineError):
    code = "empty_universe"
    http_status = 422


class MissingModalityCoords(EngineError):
    code = "missing_modality_coords"
    http_status = 422


class DegenerateShape(EngineError):
    code = "degenerate_shape"
    http_status = 422


class OutOfExtent(EngineError):
    code = "out_of_extent"
    http_status = 422


class CurrentOutOfRange(EngineError):
    code = "current_out_of_range"
    http_status = 422


class NonPositiveCsf(EngineError):
    code = "non_positive_csf"
    http_status = 422


class NonFiniteState(EngineError):
    """Layout simulation diverged; usually a config misfit."""

    code = "non_finite_state"
    http_status = 422


class ResidualOverlap(EngineError):
    """Separation pass could not resolve all overlaps (scene too dense)."""

    code = "residual_overlap"
    http_status = 422

    def __init__(self, message: str, residual_overlaps: int = 0):
        super().__init__(message)
        self.residual_overlaps = residual_overlaps


class TooFewTexts(EngineError):
    code = "too_few_texts"
    http_status = 422


class UnknownCase(EngineError):
    code = "unknown_case"
    http_status = 404


class StorageError(EngineError):
    code = "storage_error"
    http_status = 500


class UnsupportedFormat(EngineError):
    code = "unsupported_format"
    http_status = 422


class ConfigError(EngineError):
    code = "config_error"
    http_status = 500


class NoGroundTruthWarning(UserWarning):
    """A label has detections but no ground-truth boxes; its AP counts as 0."""
