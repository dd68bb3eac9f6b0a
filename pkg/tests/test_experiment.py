from __future__ import annotations

import re
import threading

import pytest

from geobench import (
    CacheStore,
    GeobenchError,
    GeoparserRef,
    InvalidExperimentId,
    ParserKind,
    ToponymSpan,
    find_experiment,
    generate_experiment_id,
    geoparse_replay,
    list_experiments,
    parse_unified_corpus,
    run_experiment,
)
from geobench.experiment import (
    ExperimentRecord,
    ExperimentStatus,
    begin_experiment,
    execute_experiment,
    is_valid_experiment_id,
)

ID_RE = re.compile(r"^[A-Z0-9]{16}$")


@pytest.fixture
def corpus(fixtures_dir):
    return parse_unified_corpus((fixtures_dir / "news10.xml").read_bytes())


def _replay_ref(version: str = "1", parser_id: str = "replay") -> GeoparserRef:
    return GeoparserRef(
        id=parser_id, display_name="Replay", kind=ParserKind.REPLAY, version=version
    )


def _gold_fixture(corpus) -> dict:
    return {e.entry_id: list(e.annotations) for e in corpus.entries}


class _CountingFor:
    """runner_for factory that counts per-entry invocations."""

    def __init__(self, fixture):
        self.fixture = fixture
        self.calls = 0
        self._lock = threading.Lock()

    def __call__(self, ref):
        def run(entry):
            with self._lock:
                self.calls += 1
            return geoparse_replay(self.fixture, entry, parser_id=ref.id)

        return run


# -- experiment ids ----------------------------------------------------------


def test_known_good_id_is_format_valid():
    assert is_valid_experiment_id("8380NII17XEKM0GD") is True


def test_lowercase_id_is_format_invalid():
    assert is_valid_experiment_id("8380nii17xekm0gd") is False
    assert is_valid_experiment_id("8380NII17XEKM0G") is False  # 15 chars


def test_generated_ids_have_fixed_length_and_alphabet(store):
    for _ in range(200):
        generated = generate_experiment_id(store)
        assert len(generated) == 16
        assert ID_RE.match(generated)


def test_id_uniqueness_at_scale(store):
    generated = {generate_experiment_id(store) for _ in range(100_000)}
    assert len(generated) == 100_000


def test_record_rejects_malformed_id():
    with pytest.raises(InvalidExperimentId):
        ExperimentRecord(
            experiment_id="short", created_at="t", corpora=(), geoparsers=(), metrics=()
        )


# -- running ------------------------------------------------------------------


def test_perfect_run_produces_perfect_table(store, corpus):
    runner_for = _CountingFor(_gold_fixture(corpus))
    record = run_experiment(
        store, [corpus], [_replay_ref()], ["precision", "recall", "auc"], runner_for
    )
    assert record.status is ExperimentStatus.COMPLETE
    row = record.results[corpus.id]["replay"]
    assert row == {"precision": 1.0, "recall": 1.0, "auc": 0.0}


def test_selection_validation(store, corpus):
    ref = _replay_ref()
    with pytest.raises(GeobenchError):
        begin_experiment(store, [], [ref], ["precision"])
    with pytest.raises(GeobenchError):
        begin_experiment(store, [corpus], [], ["precision"])
    with pytest.raises(GeobenchError):
        begin_experiment(store, [corpus], [ref], [])
    with pytest.raises(GeobenchError):
        begin_experiment(store, [corpus], [ref], ["bleu"])


def test_metric_order_is_normalized(store, corpus):
    record = begin_experiment(store, [corpus], [_replay_ref()], ["auc", "precision"])
    assert record.metrics == ("precision", "auc")


def test_status_transitions_running_to_complete(store, corpus):
    record = begin_experiment(store, [corpus], [_replay_ref()], ["recall"])
    assert record.status is ExperimentStatus.RUNNING
    stored = find_experiment(store, record.experiment_id)
    assert stored.status is ExperimentStatus.RUNNING
    assert stored.results is None

    final = execute_experiment(
        store, record, [corpus], _CountingFor(_gold_fixture(corpus))
    )
    assert final.status is ExperimentStatus.COMPLETE
    assert find_experiment(store, record.experiment_id).status is ExperimentStatus.COMPLETE


def test_determinism_across_identical_runs(store, corpus):
    runner_for = _CountingFor(_gold_fixture(corpus))
    first = run_experiment(store, [corpus], [_replay_ref()], ["precision", "med"], runner_for)
    second = run_experiment(store, [corpus], [_replay_ref()], ["precision", "med"], runner_for)
    assert first.experiment_id != second.experiment_id
    assert first.results == second.results


def test_second_run_makes_zero_invocations(store, corpus):
    runner_for = _CountingFor(_gold_fixture(corpus))
    run_experiment(store, [corpus], [_replay_ref()], ["precision"], runner_for)
    assert runner_for.calls == len(corpus.entries)
    run_experiment(store, [corpus], [_replay_ref()], ["precision"], runner_for)
    assert runner_for.calls == len(corpus.entries)  # served from cache


def test_failed_cell_fails_the_record_but_keeps_others(store, corpus):
    fixture = _gold_fixture(corpus)

    def runner_for(ref):
        if ref.id == "broken":
            def boom(entry):
                raise RuntimeError("synthetic outage")
            return boom
        return lambda entry: geoparse_replay(fixture, entry, parser_id=ref.id)

    record = run_experiment(
        store, [corpus],
        [_replay_ref(parser_id="good"), _replay_ref(parser_id="broken")],
        ["accuracy"], runner_for,
    )
    assert record.status is ExperimentStatus.FAILED
    assert "broken" in record.failure_detail
    assert record.results[corpus.id]["broken"] is None
    assert record.results[corpus.id]["good"] == {"accuracy": 1.0}


def test_record_round_trips_through_dict(store, corpus):
    record = run_experiment(
        store, [corpus], [_replay_ref()], ["fscore"], _CountingFor(_gold_fixture(corpus))
    )
    assert ExperimentRecord.from_dict(record.to_dict()) == record


# -- lookup and listing ---------------------------------------------------------


def test_find_experiment_distinguishes_malformed_from_missing(store):
    with pytest.raises(InvalidExperimentId):
        find_experiment(store, "not-an-id")
    assert find_experiment(store, "A" * 16) is None


def test_durability_across_restart(tmp_path, corpus):
    path = tmp_path / "archive.db"
    with CacheStore(path) as store:
        record = run_experiment(
            store, [corpus], [_replay_ref()], ["recall"], _CountingFor(_gold_fixture(corpus))
        )
    with CacheStore(path) as store:
        reread = find_experiment(store, record.experiment_id)
    assert reread == record


def test_listing_empty_store(store):
    page = list_experiments(store)
    assert page.summaries == ()
    assert page.next_cursor is None


def test_listing_newest_first_with_cursor(store, corpus):
    runner_for = _CountingFor(_gold_fixture(corpus))
    ids = [
        run_experiment(store, [corpus], [_replay_ref()], ["recall"], runner_for).experiment_id
        for _ in range(3)
    ]
    page = list_experiments(store, limit=2)
    assert [s.experiment_id for s in page.summaries] == [ids[2], ids[1]]
    assert page.summaries[0].status is ExperimentStatus.COMPLETE
    rest = list_experiments(store, limit=2, cursor=page.next_cursor)
    assert [s.experiment_id for s in rest.summaries] == [ids[0]]
    assert rest.next_cursor is None


def test_cursor_past_end_is_empty(store):
    page = list_experiments(store, cursor=1)
    assert page.summaries == ()
