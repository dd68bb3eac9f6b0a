"""Geoparser benchmarking platform: corpora, adapters, metrics, archive."""

from .errors import (
    ConversionError,
    CorpusParseError,
    CorpusValidationError,
    GazetteerError,
    GeobenchError,
    GeoparseRunError,
    InvalidExperimentId,
    OutputContractError,
    StoreError,
    TransportError,
)
from .model import Corpus, CorpusEntry, Genre, GeoPoint, ToponymSpan
from .corpus import (
    ConversionReport,
    ConversionResult,
    LineFormat,
    convert_line_corpus,
    corpus_stats,
    parse_unified_corpus,
    serialize_corpus,
)
from .gazetteer import Gazetteer, GazetteerEntry, load_gazetteer, resolve_highest_population
from .matching import ConfusionCounts, MatchReport, match_spans
from .metrics import (
    EARTH_RADIUS_KM,
    MAX_ERROR_KM,
    METRIC_IDS,
    NOT_APPLICABLE,
    UNDEFINED,
    error_distance_km,
    evaluate_run,
)
from .geoparse import (
    GeoparseResult,
    GeoparserRef,
    ParserKind,
    cached_geoparse,
    corpus_fingerprint,
    geoparse_gazpop,
    geoparse_remote,
    geoparse_replay,
    parse_output_json,
    serialize_output_json,
)
from .storage import CacheStore
from .experiment import (
    ExperimentRecord,
    ExperimentStatus,
    find_experiment,
    generate_experiment_id,
    list_experiments,
    run_experiment,
)

__version__ = "0.1.0"

__all__ = [
    "CacheStore",
    "ConfusionCounts",
    "ConversionError",
    "ConversionReport",
    "ConversionResult",
    "Corpus",
    "CorpusEntry",
    "CorpusParseError",
    "CorpusValidationError",
    "EARTH_RADIUS_KM",
    "ExperimentRecord",
    "ExperimentStatus",
    "Gazetteer",
    "GazetteerEntry",
    "GazetteerError",
    "Genre",
    "GeobenchError",
    "GeoPoint",
    "GeoparseResult",
    "GeoparseRunError",
    "GeoparserRef",
    "InvalidExperimentId",
    "LineFormat",
    "MatchReport",
    "MAX_ERROR_KM",
    "METRIC_IDS",
    "NOT_APPLICABLE",
    "OutputContractError",
    "ParserKind",
    "StoreError",
    "ToponymSpan",
    "TransportError",
    "UNDEFINED",
    "cached_geoparse",
    "convert_line_corpus",
    "corpus_fingerprint",
    "corpus_stats",
    "error_distance_km",
    "evaluate_run",
    "find_experiment",
    "generate_experiment_id",
    "geoparse_gazpop",
    "geoparse_remote",
    "geoparse_replay",
    "list_experiments",
    "load_gazetteer",
    "match_spans",
    "parse_output_json",
    "parse_unified_corpus",
    "resolve_highest_population",
    "run_experiment",
    "serialize_corpus",
    "serialize_output_json",
]
