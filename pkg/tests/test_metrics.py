from __future__ import annotations

import math
import random
import statistics

import pytest
from hypothesis import given
from hypothesis import strategies as st

from geobench import (
    GeobenchError,
    GeoPoint,
    MAX_ERROR_KM,
    NOT_APPLICABLE,
    UNDEFINED,
    error_distance_km,
)
from geobench.metrics import (
    METRIC_IDS,
    accuracy_at_161,
    annotation_accuracy,
    auc_error,
    compute_metric_row,
    fscore,
    mean_error_distance,
    median_error_distance,
    precision,
    recall,
)

# independent reference implementations, written straight from the
# definitions with no shared code beyond the math module
_REF_MAX = math.pi * 6371.0


def _ref_row(tp, fp, fn, gold, ds):
    p = tp / (tp + fp) if tp + fp else None
    r = tp / (tp + fn) if tp + fn else None
    if p is None or r is None:
        f = None
    else:
        f = 2 * p * r / (p + r) if p + r else 0.0
    acc = tp / gold if gold else None
    med = sum(ds) / len(ds) if ds else None
    mdn = statistics.median(ds) if ds else None
    a161 = sum(1 for d in ds if d <= 161.0) / len(ds) if ds else None
    auc = (
        sum(min(1.0, math.log(d + 1) / math.log(_REF_MAX)) for d in ds) / len(ds)
        if ds
        else None
    )
    return p, r, f, acc, med, mdn, a161, auc


# -- great-circle distance ---------------------------------------------------


def test_antipodal_distance_constant():
    assert error_distance_km(GeoPoint(0, 0), GeoPoint(180, 0)) == pytest.approx(
        20015.087, abs=1e-3
    )


def test_one_degree_meridian_constant():
    assert error_distance_km(GeoPoint(0, 0), GeoPoint(0, 1)) == pytest.approx(
        111.195, abs=1e-3
    )


_points = st.builds(
    GeoPoint,
    lon=st.floats(min_value=-180, max_value=180, allow_nan=False),
    lat=st.floats(min_value=-90, max_value=90, allow_nan=False),
)


@given(_points, _points)
def test_distance_symmetry(a, b):
    assert error_distance_km(a, b) == pytest.approx(error_distance_km(b, a), abs=1e-9)


@given(_points)
def test_distance_identity(p):
    assert error_distance_km(p, p) == 0.0


@given(_points, _points)
def test_distance_bounded_by_half_circumference(a, b):
    assert 0.0 <= error_distance_km(a, b) <= MAX_ERROR_KM + 1e-9


# -- ratio metrics -----------------------------------------------------------


def test_precision_recall_fscore_basic():
    assert precision(8, 2) == pytest.approx(0.8)
    assert recall(8, 2) == pytest.approx(0.8)
    assert fscore(0.5, 1.0) == pytest.approx(2 / 3)


def test_empty_denominators_are_undefined():
    assert precision(0, 0) is None
    assert recall(0, 0) is None
    assert annotation_accuracy(0, 0) is None


def test_fscore_zero_when_both_zero():
    assert fscore(0.0, 0.0) == 0.0


def test_accuracy_uses_gold_count():
    assert annotation_accuracy(3, 4) == pytest.approx(0.75)


# -- distance-set metrics ------------------------------------------------------


def test_median_even_count_averages_central_pair():
    assert median_error_distance([1.0, 2.0, 10.0, 100.0]) == pytest.approx(6.0)


def test_mean_and_median_empty_are_undefined():
    assert mean_error_distance([]) is None
    assert median_error_distance([]) is None
    assert accuracy_at_161([]) is None
    assert auc_error([]) is None


def test_accuracy_at_161_boundary_is_inclusive():
    assert accuracy_at_161([0.0, 161.0, 162.0]) == pytest.approx(2 / 3)


def test_auc_all_zero_distances():
    assert auc_error([0.0, 0.0, 0.0]) == 0.0


def test_auc_single_max_distance():
    assert auc_error([MAX_ERROR_KM - 1.0]) == pytest.approx(1.0, abs=1e-9)


def test_auc_worked_example():
    assert auc_error([0.0, math.e - 1.0]) == pytest.approx(0.050485, abs=1e-5)


@given(st.lists(st.floats(min_value=0, max_value=MAX_ERROR_KM - 1), min_size=1, max_size=30))
def test_auc_stays_in_unit_interval(ds):
    assert 0.0 <= auc_error(ds) <= 1.0


@given(
    st.lists(st.floats(min_value=0, max_value=MAX_ERROR_KM - 1), min_size=1, max_size=20),
    st.data(),
)
def test_increasing_a_distance_is_monotone(ds, data):
    i = data.draw(st.integers(min_value=0, max_value=len(ds) - 1))
    bumped = list(ds)
    bumped[i] = data.draw(st.floats(min_value=bumped[i], max_value=MAX_ERROR_KM - 1))
    assert auc_error(bumped) >= auc_error(ds) - 1e-12
    assert mean_error_distance(bumped) >= mean_error_distance(ds) - 1e-9
    assert accuracy_at_161(bumped) <= accuracy_at_161(ds) + 1e-12


@given(st.lists(st.floats(min_value=0, max_value=1e5), min_size=1, max_size=21))
def test_median_ignores_magnitudes_above_it(ds):
    if len(ds) % 2 == 0:
        ds = ds[:-1]
    baseline = median_error_distance(ds)
    inflated = [d * 10 if d > baseline else d for d in ds]
    assert median_error_distance(inflated) == pytest.approx(baseline)


# -- oracle equivalence ---------------------------------------------------------


def test_metrics_match_reference_formulas():
    rng = random.Random(20250826)
    for _ in range(500):
        tp = rng.randint(0, 20)
        fp = rng.randint(0, 20)
        fn = rng.randint(0, 20)
        gold = tp + fn
        ds = [rng.uniform(0, _REF_MAX - 1) for _ in range(rng.randint(0, tp))]
        want = _ref_row(tp, fp, fn, gold, ds)
        got = (
            precision(tp, fp),
            recall(tp, fn),
            None
            if want[2] is None
            else fscore(precision(tp, fp), recall(tp, fn)),
            annotation_accuracy(tp, gold),
            mean_error_distance(ds),
            median_error_distance(ds),
            accuracy_at_161(ds),
            auc_error(ds),
        )
        for metric, got_v, want_v in zip(METRIC_IDS, got, want):
            if want_v is None:
                assert got_v is None, metric
            else:
                assert got_v == pytest.approx(want_v, abs=1e-9), metric


@given(
    st.integers(min_value=0, max_value=50),
    st.integers(min_value=0, max_value=50),
    st.integers(min_value=0, max_value=50),
)
def test_fscore_bounds(tp, fp, fn):
    p, r = precision(tp, fp), recall(tp, fn)
    if p is None or r is None:
        return
    f = fscore(p, r)
    assert f <= 2 * min(p, r) + 1e-12
    assert f <= max(p, r) + 1e-12
    if p == r:
        assert f == pytest.approx(p)


# -- row assembly ----------------------------------------------------------


def test_row_has_fixed_metric_order():
    row = compute_metric_row(
        tp=1, fp=0, fn=0, gold_count=1, distances=[0.0],
        selected_metrics=["auc", "precision", "med"], fully_annotated=True,
    )
    assert list(row) == ["precision", "med", "auc"]


def test_row_marks_recognition_metrics_not_applicable():
    row = compute_metric_row(
        tp=1, fp=1, fn=1, gold_count=2, distances=[5.0],
        selected_metrics=list(METRIC_IDS), fully_annotated=False,
    )
    assert row["precision"] == NOT_APPLICABLE
    assert row["recall"] == NOT_APPLICABLE
    assert row["fscore"] == NOT_APPLICABLE
    assert row["accuracy"] == pytest.approx(0.5)
    assert row["med"] == pytest.approx(5.0)


def test_row_uses_undefined_marker():
    row = compute_metric_row(
        tp=0, fp=0, fn=0, gold_count=0, distances=[],
        selected_metrics=list(METRIC_IDS), fully_annotated=True,
    )
    assert all(value == UNDEFINED for value in row.values())


def test_unknown_metric_rejected():
    with pytest.raises(GeobenchError):
        compute_metric_row(
            tp=0, fp=0, fn=0, gold_count=0, distances=[],
            selected_metrics=["bleu"], fully_annotated=True,
        )
