"""Experiment orchestration and archiving.

An experiment fixes a selection of corpora, geoparsers (id and version
frozen at run time) and metrics, runs every (corpus, geoparser) cell, and
persists the record under a 16-character serial number so it can be shared
and looked up later. Records are immutable once complete; re-running the
same configuration creates a new record (whose parse work is served from
cache).
"""

from __future__ import annotations

import json
import re
import secrets
import string
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from typing import Callable, Iterable, Mapping, Sequence

from .errors import GeobenchError, InvalidExperimentId
from .geoparse import EntryRunner, GeoparserRef, cached_geoparse
from .metrics import METRIC_IDS, MetricValue, evaluate_run
from .model import Corpus
from .storage import CacheStore

ID_LENGTH = 16
ID_ALPHABET = string.ascii_uppercase + string.digits
ID_PATTERN = re.compile(r"^[A-Z0-9]{16}$")

# results[corpus_id][parser_id] -> metric row, or None for a failed cell
MetricTable = dict[str, dict[str, "dict[str, MetricValue] | None"]]


class ExperimentStatus(str, Enum):
    RUNNING = "running"
    COMPLETE = "complete"
    FAILED = "failed"


def is_valid_experiment_id(experiment_id: str) -> bool:
    return bool(ID_PATTERN.match(experiment_id))


def generate_experiment_id(store: CacheStore) -> str:
    """A fresh 16-character id over A-Z0-9, re-drawn on store collision."""
    while True:
        candidate = "".join(secrets.choice(ID_ALPHABET) for _ in range(ID_LENGTH))
        if not store.has_experiment(candidate):
            return candidate


@dataclass(frozen=True)
class ExperimentRecord:
    experiment_id: str
    created_at: str  # ISO-8601 UTC
    corpora: tuple[str, ...]
    geoparsers: tuple[GeoparserRef, ...]
    metrics: tuple[str, ...]
    status: ExperimentStatus = ExperimentStatus.RUNNING
    results: MetricTable | None = None
    failure_detail: str | None = None

    def __post_init__(self) -> None:
        if not is_valid_experiment_id(self.experiment_id):
            raise InvalidExperimentId(
                f"experiment id must match [A-Z0-9]{{16}}, got {self.experiment_id!r}"
            )
        if self.status is ExperimentStatus.COMPLETE and self.results is None:
            raise ValueError("complete experiments must carry results")

    def to_dict(self) -> dict:
        return {
            "experiment_id": self.experiment_id,
            "created_at": self.created_at,
            "corpora": list(self.corpora),
            "geoparsers": [
                {
                    "id": g.id,
                    "display_name": g.display_name,
                    "kind": g.kind.value,
                    "version": g.version,
                    "endpoint_url": g.endpoint_url,
                    "rate_limit": g.rate_limit,
                }
                for g in self.geoparsers
            ],
            "metrics": list(self.metrics),
            "status": self.status.value,
            "results": self.results,
            "failure_detail": self.failure_detail,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "ExperimentRecord":
        return cls(
            experiment_id=doc["experiment_id"],
            created_at=doc["created_at"],
            corpora=tuple(doc["corpora"]),
            geoparsers=tuple(
                GeoparserRef(
                    id=g["id"],
                    display_name=g["display_name"],
                    kind=g["kind"],
                    version=g["version"],
                    endpoint_url=g.get("endpoint_url"),
                    rate_limit=g.get("rate_limit"),
                )
                for g in doc["geoparsers"]
            ),
            metrics=tuple(doc["metrics"]),
            status=ExperimentStatus(doc["status"]),
            results=doc.get("results"),
            failure_detail=doc.get("failure_detail"),
        )


def _now_utc() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _persist(store: CacheStore, record: ExperimentRecord) -> None:
    blob = json.dumps(record.to_dict(), ensure_ascii=False, sort_keys=True).encode("utf-8")
    store.put_experiment(record.experiment_id, record.created_at, blob)


def begin_experiment(
    store: CacheStore,
    corpora: Sequence[Corpus],
    geoparsers: Sequence[GeoparserRef],
    metrics: Iterable[str],
    created_at: str | None = None,
) -> ExperimentRecord:
    """Validate the selection and persist a running record with a fresh id."""
    metric_list = list(metrics)
    if not corpora:
        raise GeobenchError("an experiment needs at least one corpus")
    if not geoparsers:
        raise GeobenchError("an experiment needs at least one geoparser")
    if not metric_list:
        raise GeobenchError("an experiment needs at least one metric")
    unknown = [m for m in metric_list if m not in METRIC_IDS]
    if unknown:
        raise GeobenchError(f"unknown metrics selected: {unknown}")
    corpus_ids = [c.id for c in corpora]
    if len(set(corpus_ids)) != len(corpus_ids):
        raise GeobenchError(f"duplicate corpus ids in selection: {corpus_ids}")
    parser_ids = [g.id for g in geoparsers]
    if len(set(parser_ids)) != len(parser_ids):
        raise GeobenchError(f"duplicate geoparser ids in selection: {parser_ids}")

    record = ExperimentRecord(
        experiment_id=generate_experiment_id(store),
        created_at=created_at or _now_utc(),
        corpora=tuple(corpus_ids),
        geoparsers=tuple(geoparsers),
        # fixed metric order keeps two identical runs byte-comparable
        metrics=tuple(m for m in METRIC_IDS if m in metric_list),
        status=ExperimentStatus.RUNNING,
    )
    _persist(store, record)
    return record


def execute_experiment(
    store: CacheStore,
    record: ExperimentRecord,
    corpora: Sequence[Corpus],
    runner_for: Callable[[GeoparserRef], EntryRunner],
    parallelism: int = 4,
) -> ExperimentRecord:
    """Run every (corpus, geoparser) cell and persist the final record.

    A cell whose geoparser fails is recorded as None and fails the whole
    record with a detail string; successful cells keep their rows so a
    partially failed experiment is still inspectable.
    """
    by_id = {c.id: c for c in corpora}
    missing = [cid for cid in record.corpora if cid not in by_id]
    if missing:
        raise GeobenchError(f"corpora not supplied for execution: {missing}")

    cells = [(cid, parser) for cid in record.corpora for parser in record.geoparsers]
    table: MetricTable = {cid: {} for cid in record.corpora}
    errors: dict[tuple[str, str], str] = {}

    def run_cell(cell: tuple[str, GeoparserRef]) -> None:
        corpus_id, parser = cell
        try:
            results = cached_geoparse(
                store, parser, by_id[corpus_id], runner_for(parser), parallelism
            )
            table[corpus_id][parser.id] = evaluate_run(
                by_id[corpus_id], results, record.metrics
            )
        except Exception as exc:  # noqa: BLE001 - cell failures fail the record, not the process
            table[corpus_id][parser.id] = None
            errors[(corpus_id, parser.id)] = str(exc)

    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        list(pool.map(run_cell, cells))

    if errors:
        detail = "; ".join(
            f"{cid}/{parser.id}: {errors[(cid, parser.id)]}"
            for cid, parser in cells
            if (cid, parser.id) in errors
        )
        final = replace(
            record, status=ExperimentStatus.FAILED, results=table, failure_detail=detail
        )
    else:
        final = replace(record, status=ExperimentStatus.COMPLETE, results=table)
    _persist(store, final)
    return final


def run_experiment(
    store: CacheStore,
    corpora: Sequence[Corpus],
    geoparsers: Sequence[GeoparserRef],
    metrics: Iterable[str],
    runner_for: Callable[[GeoparserRef], EntryRunner],
    parallelism: int = 4,
    created_at: str | None = None,
) -> ExperimentRecord:
    record = begin_experiment(store, corpora, geoparsers, metrics, created_at=created_at)
    return execute_experiment(store, record, corpora, runner_for, parallelism=parallelism)


def find_experiment(store: CacheStore, experiment_id: str) -> ExperimentRecord | None:
    """Exact-id lookup; a malformed id is an error, not a miss."""
    if not is_valid_experiment_id(experiment_id):
        raise InvalidExperimentId(
            f"experiment id must match [A-Z0-9]{{16}}, got {experiment_id!r}"
        )
    blob = store.get_experiment(experiment_id)
    if blob is None:
        return None
    return ExperimentRecord.from_dict(json.loads(blob))


@dataclass(frozen=True)
class ExperimentSummary:
    experiment_id: str
    created_at: str
    status: ExperimentStatus
    corpora: tuple[str, ...]
    geoparsers: tuple[str, ...]
    metrics: tuple[str, ...]


@dataclass(frozen=True)
class ExperimentPage:
    summaries: tuple[ExperimentSummary, ...] = field(default_factory=tuple)
    next_cursor: int | None = None


def list_experiments(
    store: CacheStore, limit: int = 20, cursor: int | None = None
) -> ExperimentPage:
    """Newest-first summaries with an opaque continuation cursor."""
    blobs, next_cursor = store.list_experiments(limit=limit, cursor=cursor)
    summaries = []
    for blob in blobs:
        doc = json.loads(blob)
        summaries.append(
            ExperimentSummary(
                experiment_id=doc["experiment_id"],
                created_at=doc["created_at"],
                status=ExperimentStatus(doc["status"]),
                corpora=tuple(doc["corpora"]),
                geoparsers=tuple(g["id"] for g in doc["geoparsers"]),
                metrics=tuple(doc["metrics"]),
            )
        )
    return ExperimentPage(summaries=tuple(summaries), next_cursor=next_cursor)
