"""Single-file durable store.

One SQLite database holds everything that must survive a restart: cached
whole-corpus geoparse runs, experiment records, uploaded corpora, and
registered geoparsers. Callers hand in opaque bytes (JSON or XML); this
module never interprets them, which keeps it import-light and reusable.

All access goes through one connection guarded by a lock, so concurrent
request handlers and worker threads serialize on writes without relying on
SQLite's own busy handling.
"""

from __future__ import annotations

import sqlite3
import threading
from pathlib import Path

from .errors import StoreError

_SCHEMA = """
CREATE TABLE IF NOT EXISTS parse_cache (
    corpus_hash    TEXT NOT NULL,
    parser_id      TEXT NOT NULL,
    parser_version TEXT NOT NULL,
    blob           BLOB NOT NULL,
    PRIMARY KEY (corpus_hash, parser_id, parser_version)
);
CREATE TABLE IF NOT EXISTS experiments (
    seq           INTEGER PRIMARY KEY AUTOINCREMENT,
    experiment_id TEXT NOT NULL UNIQUE,
    created_at    TEXT NOT NULL,
    record        BLOB NOT NULL
);
CREATE TABLE IF NOT EXISTS corpora (
    corpus_id  TEXT PRIMARY KEY,
    meta       BLOB NOT NULL,
    xml        BLOB NOT NULL
);
CREATE TABLE IF NOT EXISTS geoparsers (
    parser_id TEXT PRIMARY KEY,
    record    BLOB NOT NULL
);
"""


class CacheStore:
    def __init__(self, path: str | Path):
        self._path = str(path)
        try:
            self._conn = sqlite3.connect(self._path, check_same_thread=False)
            self._conn.executescript(_SCHEMA)
            self._conn.commit()
        except sqlite3.Error as exc:
            raise StoreError(f"cannot open store at {self._path}: {exc}") from exc
        self._lock = threading.RLock()

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    def __enter__(self) -> "CacheStore":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()

    # -- geoparse result cache ------------------------------------------

    def get_parse_cache(self, key: tuple[str, str, str]) -> bytes | None:
        with self._lock:
            row = self._conn.execute(
                "SELECT blob FROM parse_cache"
                " WHERE corpus_hash = ? AND parser_id = ? AND parser_version = ?",
                key,
            ).fetchone()
        return row[0] if row else None

    def put_parse_cache(self, key: tuple[str, str, str], blob: bytes) -> None:
        with self._lock:
            self._conn.execute(
                "INSERT OR REPLACE INTO parse_cache"
                " (corpus_hash, parser_id, parser_version, blob) VALUES (?, ?, ?, ?)",
                (*key, blob),
            )
            self._conn.commit()

    # -- experiment records ---------------------------------------------

    def has_experiment(self, experiment_id: str) -> bool:
        with self._lock:
            row = self._conn.execute(
                "SELECT 1 FROM experiments WHERE experiment_id = ?", (experiment_id,)
            ).fetchone()
        return row is not None

    def put_experiment(self, experiment_id: str, created_at: str, record: bytes) -> None:
        """Insert or overwrite; status transitions rewrite the same row."""
        with self._lock:
            self._conn.execute(
                "INSERT INTO experiments (experiment_id, created_at, record)"
                " VALUES (?, ?, ?)"
                " ON CONFLICT (experiment_id) DO UPDATE SET"
                " created_at = excluded.created_at, record = excluded.record",
                (experiment_id, created_at, record),
            )
            self._conn.commit()

    def get_experiment(self, experiment_id: str) -> bytes | None:
        with self._lock:
            row = self._conn.execute(
                "SELECT record FROM experiments WHERE experiment_id = ?", (experiment_id,)
            ).fetchone()
        return row[0] if row else None

    def list_experiments(
        self, limit: int = 20, cursor: int | None = None
    ) -> tuple[list[bytes], int | None]:
        """Newest-first page of records plus the cursor for the next page.

        The cursor is the sequence number of the last row returned; rows
        inserted later never shift an already-fetched page.
        """
        if limit < 1:
            raise StoreError(f"page limit must be >= 1, got {limit}")
        query = "SELECT seq, record FROM experiments"
        args: tuple = ()
        if cursor is not None:
            query += " WHERE seq < ?"
            args = (cursor,)
        query += " ORDER BY seq DESC LIMIT ?"
        with self._lock:
            rows = self._conn.execute(query, (*args, limit)).fetchall()
        records = [row[1] for row in rows]
        next_cursor = rows[-1][0] if len(rows) == limit else None
        return records, next_cursor

    # -- corpora ----------------------------------------------------------

    def has_corpus(self, corpus_id: str) -> bool:
        with self._lock:
            row = self._conn.execute(
                "SELECT 1 FROM corpora WHERE corpus_id = ?", (corpus_id,)
            ).fetchone()
        return row is not None

    def put_corpus(self, corpus_id: str, meta: bytes, xml: bytes) -> None:
        with self._lock:
            try:
                self._conn.execute(
                    "INSERT INTO corpora (corpus_id, meta, xml) VALUES (?, ?, ?)",
                    (corpus_id, meta, xml),
                )
            except sqlite3.IntegrityError as exc:
                raise StoreError(f"corpus {corpus_id!r} already exists") from exc
            self._conn.commit()

    def get_corpus(self, corpus_id: str) -> tuple[bytes, bytes] | None:
        with self._lock:
            row = self._conn.execute(
                "SELECT meta, xml FROM corpora WHERE corpus_id = ?", (corpus_id,)
            ).fetchone()
        return (row[0], row[1]) if row else None

    def list_corpora(self) -> list[bytes]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT meta FROM corpora ORDER BY corpus_id"
            ).fetchall()
        return [row[0] for row in rows]

    # -- geoparser registry ----------------------------------------------

    def has_geoparser(self, parser_id: str) -> bool:
        with self._lock:
            row = self._conn.execute(
                "SELECT 1 FROM geoparsers WHERE parser_id = ?", (parser_id,)
            ).fetchone()
        return row is not None

    def put_geoparser(self, parser_id: str, record: bytes) -> None:
        with self._lock:
            try:
                self._conn.execute(
                    "INSERT INTO geoparsers (parser_id, record) VALUES (?, ?)",
                    (parser_id, record),
                )
            except sqlite3.IntegrityError as exc:
                raise StoreError(f"geoparser {parser_id!r} already exists") from exc
            self._conn.commit()

    def get_geoparser(self, parser_id: str) -> bytes | None:
        with self._lock:
            row = self._conn.execute(
                "SELECT record FROM geoparsers WHERE parser_id = ?", (parser_id,)
            ).fetchone()
        return row[0] if row else None

    def list_geoparsers(self) -> list[bytes]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT record FROM geoparsers ORDER BY parser_id"
            ).fetchall()
        return [row[0] for row in rows]
