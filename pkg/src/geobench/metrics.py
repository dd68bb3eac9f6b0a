"""The eight performance metrics and their aggregation over a run.

Four recognition metrics (precision, recall, F-score, accuracy) are
computed from matched/unmatched span counts; four resolution metrics
(mean and median error distance, accuracy within 161 km, normalized
log-error AUC) are computed from great-circle distances between gold and
predicted footprints of matched pairs.

Distances use the haversine formula with mean Earth radius 6371.0 km,
so the largest possible error is half the Earth's circumference,
MAX_ERROR_KM = pi * R ~ 20015.087 km, which also normalizes the AUC.

Metric functions return None where the value is mathematically undefined
(empty denominator or empty distance set); evaluate_run maps that to the
"undefined" cell marker, distinct from "not_applicable" which marks
precision/recall/F-score on corpora that annotate only a subset of their
toponyms.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping, Sequence, Union

from .errors import GeobenchError
from .matching import MatchReport, match_spans
from .model import Corpus, GeoPoint

EARTH_RADIUS_KM = 6371.0  # mean radius; pi*R = 20015.087 km to 3 decimals
MAX_ERROR_KM = math.pi * EARTH_RADIUS_KM

NOT_APPLICABLE = "not_applicable"
UNDEFINED = "undefined"

METRIC_IDS = (
    "precision",
    "recall",
    "fscore",
    "accuracy",
    "med",
    "mdned",
    "acc_at_161",
    "auc",
)
RECOGNITION_ONLY_METRICS = frozenset({"precision", "recall", "fscore"})

MetricValue = Union[float, str]  # float, or one of the two markers above
MetricRow = Mapping[str, MetricValue]


def error_distance_km(a: GeoPoint, b: GeoPoint) -> float:
    """Haversine great-circle distance in kilometers."""
    lon1, lat1, lon2, lat2 = map(math.radians, (a.lon, a.lat, b.lon, b.lat))
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = math.sin(dlat / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def precision(tp: int, fp: int) -> float | None:
    """tp / (tp + fp); None when nothing was predicted."""
    if tp + fp == 0:
        return None
    return tp / (tp + fp)


def recall(tp: int, fn: int) -> float | None:
    """tp / (tp + fn); None when there is no gold standard."""
    if tp + fn == 0:
        return None
    return tp / (tp + fn)


def fscore(p: float, r: float) -> float:
    """Harmonic mean of precision and recall; 0 when both are 0."""
    if p + r == 0:
        return 0.0
    return 2 * p * r / (p + r)


def annotation_accuracy(tp: int, gold_count: int) -> float | None:
    """Fraction of annotated toponyms the geoparser recognized.

    The intersection of annotated and recognized sets under inexact
    matching is exactly the matched-pair count.
    """
    if gold_count == 0:
        return None
    return tp / gold_count


def mean_error_distance(distances: Sequence[float]) -> float | None:
    if not distances:
        return None
    return sum(distances) / len(distances)


def median_error_distance(distances: Sequence[float]) -> float | None:
    if not distances:
        return None
    ordered = sorted(distances)
    n = len(ordered)
    mid = n // 2
    if n % 2 == 1:
        return ordered[mid]
    return (ordered[mid - 1] + ordered[mid]) / 2


def accuracy_at_161(distances: Sequence[float]) -> float | None:
    """Fraction of matched toponyms resolved within 161 km (boundary included)."""
    if not distances:
        return None
    return sum(1 for d in distances if d <= 161.0) / len(distances)


def auc_error(distances: Sequence[float]) -> float | None:
    """Normalized area under the log error-distance curve; lower is better.

    Discretized as the mean of ln(ed+1)/ln(MAX_ERROR_KM) with each term
    clamped at 1 so the result stays in [0, 1] even at the antipodal
    extreme where ln(ed+1) slightly exceeds the normalizer.
    """
    if not distances:
        return None
    log_max = math.log(MAX_ERROR_KM)
    return sum(min(1.0, math.log(d + 1.0) / log_max) for d in distances) / len(distances)


def _metric_cell(value: float | None) -> MetricValue:
    return UNDEFINED if value is None else value


def pooled_distances(reports: Iterable[MatchReport]) -> list[float]:
    """Great-circle errors for matched pairs whose gold span has a footprint.

    Pairs with a footprint-less gold annotation count toward tp but
    contribute no distance (partially geo-annotated corpora).
    """
    distances: list[float] = []
    for report in reports:
        for gold_span, pred_span in report.pairs:
            if gold_span.footprint is None or pred_span.footprint is None:
                continue
            distances.append(error_distance_km(gold_span.footprint, pred_span.footprint))
    return distances


def compute_metric_row(
    tp: int,
    fp: int,
    fn: int,
    gold_count: int,
    distances: Sequence[float],
    selected_metrics: Iterable[str],
    fully_annotated: bool,
) -> dict[str, MetricValue]:
    """One metric-table row from pooled counts and distances.

    Precision/recall/F-score cells become "not_applicable" when the corpus
    is not fully annotated, regardless of the counts.
    """
    selected = list(selected_metrics)
    unknown = set(selected) - set(METRIC_IDS)
    if unknown:
        raise GeobenchError(f"unknown metrics selected: {sorted(unknown)}")

    row: dict[str, MetricValue] = {}
    p = precision(tp, fp)
    r = recall(tp, fn)
    for metric in METRIC_IDS:  # fixed order for stable serialization
        if metric not in selected:
            continue
        if metric in RECOGNITION_ONLY_METRICS and not fully_annotated:
            row[metric] = NOT_APPLICABLE
            continue
        if metric == "precision":
            row[metric] = _metric_cell(p)
        elif metric == "recall":
            row[metric] = _metric_cell(r)
        elif metric == "fscore":
            row[metric] = UNDEFINED if p is None or r is None else fscore(p, r)
        elif metric == "accuracy":
            row[metric] = _metric_cell(annotation_accuracy(tp, gold_count))
        elif metric == "med":
            row[metric] = _metric_cell(mean_error_distance(distances))
        elif metric == "mdned":
            row[metric] = _metric_cell(median_error_distance(distances))
        elif metric == "acc_at_161":
            row[metric] = _metric_cell(accuracy_at_161(distances))
        elif metric == "auc":
            row[metric] = _metric_cell(auc_error(distances))
    return row


def evaluate_run(
    corpus: Corpus,
    results: Sequence,  # Sequence[GeoparseResult]; kept loose to avoid an import cycle
    selected_metrics: Iterable[str],
) -> dict[str, MetricValue]:
    """Compare one geoparser's results against a corpus and compute a row.

    Results must cover the corpus one-to-one by entry id. Aggregation is
    micro: tp/fp/fn are summed and distances pooled across entries before
    any metric is computed.
    """
    by_entry = {r.entry_id: r for r in results}
    if set(by_entry) != set(corpus.entry_ids()) or len(results) != len(corpus.entries):
        raise GeobenchError(
            "results do not cover corpus entries one-to-one: "
            f"corpus has {len(corpus.entries)} entries, results cover {sorted(by_entry)[:5]}..."
        )

    tp = fp = fn = 0
    reports = []
    for entry in corpus.entries:
        report = match_spans(entry.annotations, by_entry[entry.entry_id].toponyms)
        tp += report.tp
        fp += report.fp
        fn += report.fn
        reports.append(report)
    distances = pooled_distances(reports)
    return compute_metric_row(
        tp=tp,
        fp=fp,
        fn=fn,
        gold_count=corpus.annotation_count(),
        distances=distances,
        selected_metrics=selected_metrics,
        fully_annotated=corpus.fully_annotated,
    )
