"""HTTP API for corpora, geoparsers, experiments, and the built-in parser.

Every non-2xx response body is a single error object {code, message,
detail?}. Experiment execution is asynchronous: POST /api/experiments
answers 202 with the new id at once and the record's status is polled via
GET /api/experiments/{id}, because runs against remote geoparsers can take
hours.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Mapping, Sequence

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from starlette.exceptions import HTTPException as StarletteHTTPException

from .config import ServerConfig
from .corpus import parse_unified_corpus, serialize_corpus
from .errors import (
    CorpusParseError,
    CorpusValidationError,
    GeobenchError,
    InvalidExperimentId,
    OutputContractError,
    StoreError,
)
from .gazetteer import Gazetteer, load_gazetteer
from .geoparse import (
    GeoparserRef,
    ParserKind,
    build_runner,
    geoparse_gazpop,
    load_replay_fixture,
    serialize_output_json,
)
from .experiment import (
    ExperimentStatus,
    begin_experiment,
    execute_experiment,
    find_experiment,
    list_experiments,
)
from .metrics import METRIC_IDS
from .model import Corpus, CorpusEntry
from .storage import CacheStore

BUILTIN_PARSER_ID = "gazpop"


class ApiException(Exception):
    """Carries the wire shape of an error response."""

    def __init__(self, status: int, code: str, message: str, detail: object = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail


def _error_response(status: int, code: str, message: str, detail: object = None) -> JSONResponse:
    body: dict[str, object] = {"code": code, "message": message}
    if detail is not None:
        body["detail"] = detail
    return JSONResponse(status_code=status, content=body)


def _corpus_meta(corpus: Corpus) -> dict:
    return {
        "id": corpus.id,
        "name": corpus.name,
        "genre": corpus.genre.value,
        "fully_annotated": corpus.fully_annotated,
        "entries": len(corpus.entries),
        "annotations": corpus.annotation_count(),
    }


def _parser_record(ref: GeoparserRef) -> dict:
    return {
        "id": ref.id,
        "display_name": ref.display_name,
        "kind": ref.kind.value,
        "version": ref.version,
        "endpoint_url": ref.endpoint_url,
        "rate_limit": ref.rate_limit,
    }


def _parser_from_record(doc: Mapping) -> GeoparserRef:
    return GeoparserRef(
        id=doc["id"],
        display_name=doc.get("display_name", doc["id"]),
        kind=doc["kind"],
        version=doc["version"],
        endpoint_url=doc.get("endpoint_url"),
        rate_limit=doc.get("rate_limit"),
    )


def create_app(
    config: ServerConfig | None = None,
    store: CacheStore | None = None,
    gazetteer: Gazetteer | None = None,
    gazetteer_version: str = "none",
    static_dir: str | Path | None = None,
) -> FastAPI:
    """Assemble the application.

    `store` and `gazetteer` are injectable for tests; by default they are
    opened from the config. The built-in baseline is registered at startup
    when a gazetteer is available, versioned by the dictionary snapshot so
    cached results are invalidated when the snapshot changes.
    """
    cfg = config or ServerConfig()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        app.state.store = store or CacheStore(cfg.store_path)
        app.state.gazetteer = gazetteer
        app.state.gazetteer_version = gazetteer_version
        if app.state.gazetteer is None and cfg.gazetteer_path:
            raw = Path(cfg.gazetteer_path).read_bytes()
            app.state.gazetteer, _ = load_gazetteer(raw)
            app.state.gazetteer_version = _gazetteer_version(raw)
        app.state.replay_fixtures = {}
        app.state.executor = ThreadPoolExecutor(max_workers=cfg.default_parallelism)
        if app.state.gazetteer is not None and not app.state.store.has_geoparser(
            BUILTIN_PARSER_ID
        ):
            builtin = GeoparserRef(
                id=BUILTIN_PARSER_ID,
                display_name="Gazetteer + population baseline",
                kind=ParserKind.BUILTIN_GAZPOP,
                version=f"0.1.0+gaz.{app.state.gazetteer_version}",
            )
            app.state.store.put_geoparser(
                BUILTIN_PARSER_ID, json.dumps(_parser_record(builtin)).encode("utf-8")
            )
        try:
            yield
        finally:
            app.state.executor.shutdown(wait=True)
            app.state.store.close()

    app = FastAPI(title="geobench", lifespan=lifespan, openapi_url=None)

    @app.exception_handler(ApiException)
    async def handle_api_exception(request: Request, exc: ApiException) -> JSONResponse:
        return _error_response(exc.status, exc.code, exc.message, exc.detail)

    @app.exception_handler(RequestValidationError)
    async def handle_validation(request: Request, exc: RequestValidationError) -> JSONResponse:
        return _error_response(422, "invalid_request", "request failed validation", exc.errors())

    @app.exception_handler(StarletteHTTPException)
    async def handle_http(request: Request, exc: StarletteHTTPException) -> JSONResponse:
        return _error_response(exc.status_code, "http_error", str(exc.detail))

    @app.exception_handler(Exception)
    async def handle_unexpected(request: Request, exc: Exception) -> JSONResponse:
        return _error_response(500, "internal_error", f"{type(exc).__name__}: {exc}")

    # -- corpora ----------------------------------------------------------

    @app.post("/api/corpora", status_code=201)
    async def upload_corpus(request: Request):
        content_type = request.headers.get("content-type", "")
        fully = request.query_params.get("fully_annotated", "true") != "false"
        if content_type.startswith("multipart/form-data"):
            form = await request.form()
            upload = form.get("file")
            if upload is None:
                raise ApiException(422, "invalid_corpus", 'multipart upload needs a "file" part')
            body = await upload.read()
            if "fully_annotated" in form:
                fully = form["fully_annotated"] != "false"
        else:
            body = await request.body()
        if not body:
            raise ApiException(422, "invalid_corpus", "empty corpus body")
        try:
            corpus = parse_unified_corpus(body, fully_annotated=fully)
        except (CorpusParseError, CorpusValidationError) as exc:
            raise ApiException(422, "invalid_corpus", str(exc)) from exc
        try:
            request.app.state.store.put_corpus(
                corpus.id,
                json.dumps(_corpus_meta(corpus)).encode("utf-8"),
                serialize_corpus(corpus),
            )
        except StoreError as exc:
            raise ApiException(409, "duplicate_corpus", str(exc)) from exc
        return {"id": corpus.id}

    @app.get("/api/corpora")
    def get_corpora(request: Request):
        metas = [json.loads(blob) for blob in request.app.state.store.list_corpora()]
        return {"corpora": metas}

    # -- geoparsers --------------------------------------------------------

    @app.post("/api/geoparsers", status_code=201)
    async def register_geoparser(request: Request):
        try:
            doc = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            raise ApiException(422, "invalid_geoparser", f"body is not valid JSON: {exc}")
        if not isinstance(doc, dict) or "id" not in doc:
            raise ApiException(422, "invalid_geoparser", "registration needs at least an id")
        try:
            ref = _parser_from_record(doc)
        except (KeyError, ValueError) as exc:
            raise ApiException(422, "invalid_geoparser", f"invalid registration: {exc}")
        fixture_doc = doc.get("fixture")
        if ref.kind is ParserKind.REPLAY:
            if fixture_doc is None:
                raise ApiException(
                    422, "invalid_geoparser", "replay geoparsers need a fixture object"
                )
            try:
                fixture = load_replay_fixture(json.dumps(fixture_doc).encode("utf-8"))
            except OutputContractError as exc:
                raise ApiException(422, "invalid_geoparser", str(exc)) from exc
        elif fixture_doc is not None:
            raise ApiException(
                422, "invalid_geoparser", "only replay geoparsers accept a fixture"
            )
        try:
            request.app.state.store.put_geoparser(
                ref.id, json.dumps(_parser_record(ref)).encode("utf-8")
            )
        except StoreError as exc:
            raise ApiException(409, "duplicate_geoparser", str(exc)) from exc
        if ref.kind is ParserKind.REPLAY:
            request.app.state.replay_fixtures[ref.id] = fixture
        return {"id": ref.id}

    @app.get("/api/geoparsers")
    def get_geoparsers(request: Request):
        records = [json.loads(blob) for blob in request.app.state.store.list_geoparsers()]
        return {"geoparsers": records}

    # -- experiments -------------------------------------------------------

    def _load_selected_corpora(store: CacheStore, corpus_ids: Sequence[str]) -> list[Corpus]:
        corpora = []
        for corpus_id in corpus_ids:
            stored = store.get_corpus(str(corpus_id))
            if stored is None:
                raise ApiException(404, "unknown_corpus", f"no corpus with id {corpus_id!r}")
            meta, xml = stored
            fully = json.loads(meta)["fully_annotated"]
            corpora.append(parse_unified_corpus(xml, fully_annotated=fully))
        return corpora

    def _load_selected_parsers(store: CacheStore, parser_ids: Sequence[str]) -> list[GeoparserRef]:
        refs = []
        for parser_id in parser_ids:
            blob = store.get_geoparser(str(parser_id))
            if blob is None:
                raise ApiException(404, "unknown_geoparser", f"no geoparser with id {parser_id!r}")
            refs.append(_parser_from_record(json.loads(blob)))
        return refs

    @app.post("/api/experiments", status_code=202)
    async def run_experiment_route(request: Request):
        try:
            doc = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            raise ApiException(422, "invalid_request", f"body is not valid JSON: {exc}")
        if not isinstance(doc, dict):
            raise ApiException(422, "invalid_request", "body must be a JSON object")
        corpus_ids = doc.get("corpora") or []
        parser_ids = doc.get("geoparsers") or []
        metrics = doc.get("metrics") or []
        if metrics == "all":
            metrics = list(METRIC_IDS)
        if not (
            isinstance(corpus_ids, list) and isinstance(parser_ids, list)
            and isinstance(metrics, list)
        ):
            raise ApiException(422, "invalid_request", "corpora/geoparsers/metrics must be arrays")
        if not corpus_ids or not parser_ids or not metrics:
            raise ApiException(
                422, "empty_selection",
                "an experiment needs at least one corpus, one geoparser, and one metric",
            )
        state = request.app.state
        corpora = _load_selected_corpora(state.store, corpus_ids)
        parsers = _load_selected_parsers(state.store, parser_ids)
        try:
            record = begin_experiment(state.store, corpora, parsers, metrics)
        except GeobenchError as exc:
            raise ApiException(422, "invalid_selection", str(exc)) from exc

        def runner_for(ref: GeoparserRef):
            return build_runner(
                ref,
                gazetteer=state.gazetteer,
                fixture=state.replay_fixtures.get(ref.id),
            )

        cfg_parallelism = cfg.default_parallelism
        state.executor.submit(
            execute_experiment, state.store, record, corpora, runner_for, cfg_parallelism
        )
        return JSONResponse(status_code=202, content={"experiment_id": record.experiment_id})

    @app.get("/api/experiments/{experiment_id}")
    def get_experiment(experiment_id: str, request: Request):
        try:
            record = find_experiment(request.app.state.store, experiment_id)
        except InvalidExperimentId as exc:
            raise ApiException(422, "invalid_experiment_id", str(exc)) from exc
        if record is None:
            raise ApiException(
                404, "unknown_experiment", f"no experiment with id {experiment_id!r}"
            )
        doc = record.to_dict()
        if record.status is ExperimentStatus.RUNNING:
            doc["results"] = None
        return doc

    @app.get("/api/experiments")
    def get_experiments(request: Request, limit: int = 20, cursor: int | None = None):
        if limit < 1 or limit > 200:
            raise ApiException(422, "invalid_request", "limit must be between 1 and 200")
        page = list_experiments(request.app.state.store, limit=limit, cursor=cursor)
        return {
            "experiments": [
                {
                    "experiment_id": s.experiment_id,
                    "created_at": s.created_at,
                    "status": s.status.value,
                    "corpora": list(s.corpora),
                    "geoparsers": list(s.geoparsers),
                    "metrics": list(s.metrics),
                }
                for s in page.summaries
            ],
            "next_cursor": page.next_cursor,
        }

    # -- built-in parser endpoint -----------------------------------------

    @app.post("/api/parse/gazpop")
    async def parse_gazpop(request: Request):
        body = await request.body()
        text = body.decode("utf-8", errors="replace")
        if not text.strip():
            raise ApiException(422, "empty_text", "no text to parse")
        if request.app.state.gazetteer is None:
            raise ApiException(503, "no_gazetteer", "no gazetteer is loaded")
        entry = CorpusEntry(entry_id="adhoc", text=text, annotations=())
        result = geoparse_gazpop(request.app.state.gazetteer, entry)
        return Response(content=serialize_output_json(result.toponyms),
                        media_type="application/json")

    if static_dir is not None and Path(static_dir).is_dir():
        # mounted last so /api/* keeps priority
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app


def _gazetteer_version(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()[:8]
