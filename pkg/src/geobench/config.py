"""Server configuration: a small JSON file, overridable by environment."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

from .errors import GeobenchError

CONFIG_PATH_ENV = "GEOBENCH_CONFIG"

_KNOWN_KEYS = {"listen_address", "store_path", "gazetteer_path", "default_parallelism"}


@dataclass(frozen=True)
class ServerConfig:
    listen_address: str = "127.0.0.1:8000"
    store_path: str = "geobench.db"
    gazetteer_path: str | None = None
    default_parallelism: int = 4

    def __post_init__(self) -> None:
        if self.default_parallelism < 1:
            raise GeobenchError(
                f"default_parallelism must be >= 1, got {self.default_parallelism}"
            )
        host, sep, port = self.listen_address.rpartition(":")
        if not sep or not host or not port.isdigit():
            raise GeobenchError(
                f"listen_address must look like host:port, got {self.listen_address!r}"
            )

    @property
    def host(self) -> str:
        return self.listen_address.rpartition(":")[0]

    @property
    def port(self) -> int:
        return int(self.listen_address.rpartition(":")[2])


def load_config(path: str | Path | None = None) -> ServerConfig:
    """Read config JSON from `path`, the GEOBENCH_CONFIG env var, or defaults.

    An explicit argument wins over the environment; unknown keys are an
    error so typos do not silently fall back to defaults.
    """
    chosen = path or os.environ.get(CONFIG_PATH_ENV)
    if chosen is None:
        return ServerConfig()
    try:
        doc = json.loads(Path(chosen).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise GeobenchError(f"config file not found: {chosen}") from exc
    except json.JSONDecodeError as exc:
        raise GeobenchError(f"config file {chosen} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise GeobenchError(f"config file {chosen} must hold a JSON object")
    unknown = set(doc) - _KNOWN_KEYS
    if unknown:
        raise GeobenchError(f"unknown config keys in {chosen}: {sorted(unknown)}")
    return ServerConfig(**doc)
