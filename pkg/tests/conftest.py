from __future__ import annotations

import time
from pathlib import Path

import pytest

from geobench import CacheStore, load_gazetteer

FIXTURES = Path(__file__).parent.parent / "fixtures"

_SESSION_T0 = time.perf_counter()
_SUITE_BUDGET_SECONDS = 300.0


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def minimal_corpus_bytes() -> bytes:
    return (FIXTURES / "minimal_corpus.xml").read_bytes()


@pytest.fixture(scope="session")
def minimal_output_bytes() -> bytes:
    return (FIXTURES / "minimal_output.json").read_bytes()


@pytest.fixture(scope="session")
def gazetteer_bytes() -> bytes:
    return (FIXTURES / "gazetteer.tsv").read_bytes()


@pytest.fixture(scope="session")
def toy_gazetteer(gazetteer_bytes):
    gazetteer, _ = load_gazetteer(gazetteer_bytes)
    return gazetteer


@pytest.fixture
def store(tmp_path):
    with CacheStore(tmp_path / "store.db") as s:
        yield s


def pytest_sessionfinish(session, exitstatus):
    # whole-suite wall-clock budget; also see the pytest summary line
    elapsed = time.perf_counter() - _SESSION_T0
    capman = session.config.pluginmanager.getplugin("capturemanager")
    if capman:
        capman.suspend_global_capture(in_=True)
    if elapsed < _SUITE_BUDGET_SECONDS:
        print(f"\nPASS [suite runtime] whole suite took {elapsed:.1f}s (< 300s)")
    else:
        print(f"\nFAIL [suite runtime] whole suite took {elapsed:.1f}s (>= 300s)")
        session.exitstatus = 1
    if capman:
        capman.resume_global_capture()
