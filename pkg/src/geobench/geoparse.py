"""Uniform geoparser abstraction.

Three interchangeable parser kinds sit behind one result type:

- ``rest``: a remote service that accepts POSTed plain text and answers
  with the toponym JSON contract (see parse_output_json),
- ``builtin_gazpop``: dictionary recognition plus highest-population
  resolution against a loaded gazetteer,
- ``replay``: canned per-entry outputs, for deterministic tests.

Whole-corpus runs are cached in a store keyed by corpus content hash,
parser id and parser version, so repeating an experiment never re-invokes
the parser.
"""

from __future__ import annotations

import hashlib
import json
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Mapping, Protocol, Sequence

import requests

from .corpus import serialize_corpus
from .errors import GeoparseRunError, OutputContractError, TransportError
from .gazetteer import Gazetteer, resolve_highest_population
from .model import Corpus, CorpusEntry, GeoPoint, ToponymSpan
from .ratelimit import TokenBucket

RETRY_DELAYS = (1.0, 2.0, 4.0)
DEFAULT_TIMEOUT = 30.0
MAX_WINDOW_TOKENS = 5

# tokens for dictionary matching: maximal runs of letters/digits
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


class ParserKind(str, Enum):
    BUILTIN_GAZPOP = "builtin_gazpop"
    REST = "rest"
    REPLAY = "replay"


@dataclass(frozen=True)
class GeoparserRef:
    """Registration record for one geoparser."""

    id: str
    display_name: str
    kind: ParserKind
    version: str
    endpoint_url: str | None = None
    rate_limit: int | None = None  # requests per hour

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("geoparser id must be non-empty")
        if not self.version:
            raise ValueError("geoparser version must be non-empty")
        if not isinstance(self.kind, ParserKind):
            object.__setattr__(self, "kind", ParserKind(self.kind))
        if self.kind is ParserKind.REST and not self.endpoint_url:
            raise ValueError("rest geoparsers require endpoint_url")
        if self.rate_limit is not None and self.rate_limit <= 0:
            raise ValueError(f"rate_limit must be positive, got {self.rate_limit}")


@dataclass(frozen=True)
class GeoparseResult:
    entry_id: str
    toponyms: tuple[ToponymSpan, ...]
    parser: str
    elapsed: float = 0.0

    def __post_init__(self) -> None:
        if not isinstance(self.toponyms, tuple):
            object.__setattr__(self, "toponyms", tuple(self.toponyms))
        for span in self.toponyms:
            if span.footprint is None:
                raise ValueError(
                    f"result for entry {self.entry_id!r} has a toponym without a footprint"
                )


def parse_output_json(json_bytes: bytes) -> list[ToponymSpan]:
    """Decode the geoparser output contract.

    The document is an object with a ``toponyms`` array; each element
    carries start, end, phrase and a place whose footprint is an array of
    [lon, lat] pairs. Only the first pair is consumed; extra pairs are
    legal but ignored. Optional placename/placetype are kept.
    """
    try:
        doc = json.loads(json_bytes)
    except json.JSONDecodeError as exc:
        raise OutputContractError(f"output is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "toponyms" not in doc:
        raise OutputContractError('output must be an object with a "toponyms" array')
    raw = doc["toponyms"]
    if not isinstance(raw, list):
        raise OutputContractError('"toponyms" must be an array')

    spans: list[ToponymSpan] = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict):
            raise OutputContractError(f"toponym {i} is not an object")
        try:
            start, end, phrase = item["start"], item["end"], item["phrase"]
        except KeyError as exc:
            raise OutputContractError(f"toponym {i} is missing {exc.args[0]!r}") from exc
        place = item.get("place")
        if not isinstance(place, dict):
            raise OutputContractError(f"toponym {i} ({phrase!r}) is missing its place")
        footprint = place.get("footprint")
        if not isinstance(footprint, list) or not footprint:
            raise OutputContractError(f"toponym {i} ({phrase!r}) is missing its footprint")
        first = footprint[0]
        if (
            not isinstance(first, (list, tuple))
            or len(first) != 2
            or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in first)
        ):
            raise OutputContractError(
                f"toponym {i} ({phrase!r}) footprint must hold [lon, lat] number pairs"
            )
        try:
            spans.append(
                ToponymSpan(
                    start=int(start),
                    end=int(end),
                    phrase=str(phrase),
                    footprint=GeoPoint(lon=float(first[0]), lat=float(first[1])),
                    place_name=place.get("placename"),
                    place_type=place.get("placetype"),
                )
            )
        except (TypeError, ValueError) as exc:
            raise OutputContractError(f"toponym {i} is malformed: {exc}") from exc
    return spans


def serialize_output_json(spans: Sequence[ToponymSpan]) -> bytes:
    """Inverse of parse_output_json on the required fields."""
    toponyms = []
    for span in spans:
        if span.footprint is None:
            raise ValueError(f"span {span.phrase!r} has no footprint to serialize")
        place: dict[str, object] = {"footprint": [[span.footprint.lon, span.footprint.lat]]}
        if span.place_name is not None:
            place["placename"] = span.place_name
        if span.place_type is not None:
            place["placetype"] = span.place_type
        toponyms.append(
            {"start": span.start, "end": span.end, "phrase": span.phrase, "place": place}
        )
    return json.dumps({"toponyms": toponyms}, ensure_ascii=False).encode("utf-8")


def _check_bounds(spans: Sequence[ToponymSpan], entry: CorpusEntry, parser_id: str) -> None:
    for span in spans:
        if not span.in_bounds(entry.text):
            raise OutputContractError(
                f"parser {parser_id!r} produced span [{span.start}, {span.end}] outside "
                f"entry {entry.entry_id!r} (text length {len(entry.text)})"
            )


def geoparse_remote(
    ref: GeoparserRef,
    entry: CorpusEntry,
    *,
    session: requests.Session | None = None,
    bucket: TokenBucket | None = None,
    sleep: Callable[[float], None] = time.sleep,
    timeout: float = DEFAULT_TIMEOUT,
) -> GeoparseResult:
    """POST the entry text to a remote geoparser and decode its answer.

    Timeouts and 5xx answers are retried up to three times with 1 s, 2 s,
    4 s pauses; 4xx answers are permanent failures. A token bucket, when
    given, throttles the request rate.
    """
    if ref.kind is not ParserKind.REST:
        raise ValueError(f"geoparse_remote requires a rest geoparser, got {ref.kind.value}")
    http = session or requests
    started = time.perf_counter()
    last_error: str = "no attempt made"
    last_status: int | None = None
    for attempt in range(1 + len(RETRY_DELAYS)):
        if attempt > 0:
            sleep(RETRY_DELAYS[attempt - 1])
        if bucket is not None:
            bucket.acquire()
        try:
            response = http.post(
                ref.endpoint_url,
                data=entry.text.encode("utf-8"),
                headers={"Content-Type": "text/plain; charset=utf-8"},
                timeout=timeout,
            )
        except requests.Timeout:
            last_error, last_status = "request timed out", None
            continue
        except requests.ConnectionError as exc:
            last_error, last_status = f"connection failed: {exc}", None
            continue
        if 400 <= response.status_code < 500:
            raise TransportError(
                f"geoparser {ref.id!r} rejected entry {entry.entry_id!r}: "
                f"HTTP {response.status_code}",
                status=response.status_code,
                permanent=True,
            )
        if response.status_code >= 500:
            last_error = f"HTTP {response.status_code}"
            last_status = response.status_code
            continue
        spans = parse_output_json(response.content)
        _check_bounds(spans, entry, ref.id)
        return GeoparseResult(
            entry_id=entry.entry_id,
            toponyms=tuple(spans),
            parser=ref.id,
            elapsed=time.perf_counter() - started,
        )
    raise TransportError(
        f"geoparser {ref.id!r} failed for entry {entry.entry_id!r} after "
        f"{1 + len(RETRY_DELAYS)} attempts: {last_error}",
        status=last_status,
    )


def _tokenize(text: str) -> list[tuple[int, int, str]]:
    # (start, end exclusive, lowercased surface)
    return [(m.start(), m.end(), m.group().lower()) for m in _TOKEN_RE.finditer(text)]


def geoparse_gazpop(
    gazetteer: Gazetteer, entry: CorpusEntry, parser_id: str = "gazpop"
) -> GeoparseResult:
    """Dictionary recognition plus highest-population resolution.

    Scans tokens left to right; at each position the longest window of up
    to five tokens whose space-joined surface hits the gazetteer becomes a
    span, and scanning resumes past it, so spans never overlap.
    """
    started = time.perf_counter()
    tokens = _tokenize(entry.text)
    spans: list[ToponymSpan] = []
    i = 0
    while i < len(tokens):
        matched = False
        for width in range(min(MAX_WINDOW_TOKENS, len(tokens) - i), 0, -1):
            window = tokens[i : i + width]
            candidates = gazetteer.lookup(" ".join(t[2] for t in window))
            if not candidates:
                continue
            chosen = resolve_highest_population(candidates)
            start, end = window[0][0], window[-1][1] - 1
            spans.append(
                ToponymSpan(
                    start=start,
                    end=end,
                    phrase=entry.text[start : end + 1],
                    footprint=chosen.location,
                    place_name=chosen.canonical_name,
                    place_type=chosen.feature_class or None,
                )
            )
            i += width
            matched = True
            break
        if not matched:
            i += 1
    return GeoparseResult(
        entry_id=entry.entry_id,
        toponyms=tuple(spans),
        parser=parser_id,
        elapsed=time.perf_counter() - started,
    )


def geoparse_replay(
    fixture: Mapping[str, Sequence[ToponymSpan]],
    entry: CorpusEntry,
    parser_id: str = "replay",
) -> GeoparseResult:
    """Answer from canned per-entry outputs; unknown entries yield nothing."""
    spans = tuple(fixture.get(entry.entry_id, ()))
    _check_bounds(spans, entry, parser_id)
    return GeoparseResult(entry_id=entry.entry_id, toponyms=spans, parser=parser_id)


def load_replay_fixture(json_bytes: bytes) -> dict[str, list[ToponymSpan]]:
    """Replay file: an object mapping entry id to a toponym array in the
    output-contract element shape."""
    try:
        doc = json.loads(json_bytes)
    except json.JSONDecodeError as exc:
        raise OutputContractError(f"replay fixture is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise OutputContractError("replay fixture must map entry ids to toponym arrays")
    fixture: dict[str, list[ToponymSpan]] = {}
    for entry_id, toponyms in doc.items():
        wrapped = json.dumps({"toponyms": toponyms}).encode("utf-8")
        try:
            fixture[str(entry_id)] = parse_output_json(wrapped)
        except OutputContractError as exc:
            raise OutputContractError(f"replay fixture entry {entry_id!r}: {exc}") from exc
    return fixture


def corpus_fingerprint(corpus: Corpus) -> str:
    """Content hash of the canonical corpus serialization."""
    return hashlib.sha256(serialize_corpus(corpus)).hexdigest()


def serialize_results(results: Sequence[GeoparseResult]) -> bytes:
    """Canonical bytes for a whole-corpus run, used for cache storage."""
    payload = [
        {
            "entry_id": r.entry_id,
            "parser": r.parser,
            "elapsed": r.elapsed,
            "toponyms": json.loads(serialize_output_json(r.toponyms))["toponyms"],
        }
        for r in results
    ]
    return json.dumps({"results": payload}, ensure_ascii=False, sort_keys=True).encode("utf-8")


def deserialize_results(blob: bytes) -> list[GeoparseResult]:
    doc = json.loads(blob)
    results = []
    for item in doc["results"]:
        spans = parse_output_json(
            json.dumps({"toponyms": item["toponyms"]}).encode("utf-8")
        )
        results.append(
            GeoparseResult(
                entry_id=item["entry_id"],
                toponyms=tuple(spans),
                parser=item["parser"],
                elapsed=item["elapsed"],
            )
        )
    return results


EntryRunner = Callable[[CorpusEntry], GeoparseResult]

# shared per-parser limiters so concurrent experiments cannot stack rates
_BUCKETS: dict[str, TokenBucket] = {}


def shared_bucket(ref: GeoparserRef) -> TokenBucket | None:
    if ref.rate_limit is None:
        return None
    bucket = _BUCKETS.get(ref.id)
    if bucket is None:
        bucket = _BUCKETS.setdefault(ref.id, TokenBucket(rate_per_hour=ref.rate_limit))
    return bucket


def build_runner(
    ref: GeoparserRef,
    *,
    gazetteer: Gazetteer | None = None,
    fixture: Mapping[str, Sequence[ToponymSpan]] | None = None,
    session: requests.Session | None = None,
) -> EntryRunner:
    """Bind a GeoparserRef to the per-entry callable the cache layer runs."""
    if ref.kind is ParserKind.BUILTIN_GAZPOP:
        if gazetteer is None:
            raise ValueError(f"geoparser {ref.id!r} needs a loaded gazetteer")
        return lambda entry: geoparse_gazpop(gazetteer, entry, parser_id=ref.id)
    if ref.kind is ParserKind.REPLAY:
        if fixture is None:
            raise ValueError(f"geoparser {ref.id!r} needs a replay fixture")
        return lambda entry: geoparse_replay(fixture, entry, parser_id=ref.id)
    bucket = shared_bucket(ref)
    return lambda entry: geoparse_remote(ref, entry, session=session, bucket=bucket)


class ParseCache(Protocol):
    def get_parse_cache(self, key: tuple[str, str, str]) -> bytes | None: ...

    def put_parse_cache(self, key: tuple[str, str, str], blob: bytes) -> None: ...


def cached_geoparse(
    store: ParseCache,
    ref: GeoparserRef,
    corpus: Corpus,
    runner: EntryRunner,
    parallelism: int = 4,
) -> list[GeoparseResult]:
    """Run a geoparser over a corpus, reusing stored results when the same
    corpus content has already been parsed by the same parser version.

    A run in which any entry fails caches nothing and reports the failed
    entry ids, so a later retry starts clean.
    """
    key = (corpus_fingerprint(corpus), ref.id, ref.version)
    blob = store.get_parse_cache(key)
    if blob is not None:
        return deserialize_results(blob)

    results: dict[str, GeoparseResult] = {}
    failures: dict[str, str] = {}

    def run_one(entry: CorpusEntry) -> None:
        try:
            results[entry.entry_id] = runner(entry)
        except Exception as exc:  # noqa: BLE001 - aggregated into the run error
            failures[entry.entry_id] = str(exc)

    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        list(pool.map(run_one, corpus.entries))

    if failures:
        failed_ids = [e.entry_id for e in corpus.entries if e.entry_id in failures]
        detail = "; ".join(f"{fid}: {failures[fid]}" for fid in failed_ids[:3])
        raise GeoparseRunError(
            f"geoparser {ref.id!r} failed on {len(failed_ids)} of "
            f"{len(corpus.entries)} entries ({detail})",
            failed_entry_ids=failed_ids,
        )

    ordered = [results[e.entry_id] for e in corpus.entries]
    store.put_parse_cache(key, serialize_results(ordered))
    return ordered
