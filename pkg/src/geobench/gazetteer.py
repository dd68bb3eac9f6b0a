"""Place-name dictionary with coordinates and populations.

Backs the built-in baseline geoparser: names (canonical and alternate) are
matched case-insensitively and exactly, and ambiguous names resolve to the
candidate with the highest population. Ties break lexicographically by
canonical name, then by coordinates, so resolution is deterministic and
experiment results are cacheable.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from .errors import GazetteerError
from .model import GeoPoint

_EXPECTED_COLUMNS = ("name", "alternate_names", "lat", "lon", "population", "feature_class")


@dataclass(frozen=True)
class GazetteerEntry:
    canonical_name: str
    alternate_names: tuple[str, ...]
    location: GeoPoint
    population: int
    feature_class: str = ""

    def __post_init__(self) -> None:
        if not self.canonical_name:
            raise ValueError("canonical_name must be non-empty")
        if self.population < 0:
            raise ValueError(f"population must be >= 0, got {self.population}")

    def names(self) -> tuple[str, ...]:
        return (self.canonical_name, *self.alternate_names)


@dataclass
class LoadReport:
    rows_read: int = 0
    entries: int = 0
    bad_rows: list[str] = field(default_factory=list)


class Gazetteer:
    """Immutable after load; any number of concurrent readers is fine."""

    def __init__(self, entries: list[GazetteerEntry]):
        self._entries = tuple(entries)
        index: dict[str, list[GazetteerEntry]] = {}
        for entry in self._entries:
            for name in entry.names():
                index.setdefault(name.lower(), []).append(entry)
        self._index = index

    @property
    def entries(self) -> tuple[GazetteerEntry, ...]:
        return self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def lookup(self, name: str) -> list[GazetteerEntry]:
        return list(self._index.get(name.lower(), ()))

    def names(self) -> set[str]:
        return set(self._index)


def load_gazetteer(tsv_bytes: bytes) -> tuple[Gazetteer, LoadReport]:
    """Load a TSV snapshot (header: name, alternate_names, lat, lon,
    population, feature_class; alternate names comma-joined).

    Malformed rows are skipped and counted in the report; a file yielding
    zero valid rows is an error.
    """
    reader = csv.DictReader(io.StringIO(tsv_bytes.decode("utf-8")), delimiter="\t")
    missing = [c for c in _EXPECTED_COLUMNS if c not in (reader.fieldnames or [])]
    if missing:
        raise GazetteerError(f"gazetteer TSV is missing columns: {missing}")

    report = LoadReport()
    entries: list[GazetteerEntry] = []
    for row in reader:
        report.rows_read += 1
        try:
            alternates = tuple(
                a.strip() for a in (row["alternate_names"] or "").split(",") if a.strip()
            )
            entry = GazetteerEntry(
                canonical_name=(row["name"] or "").strip(),
                alternate_names=alternates,
                location=GeoPoint(lon=float(row["lon"]), lat=float(row["lat"])),
                population=int(row["population"]),
                feature_class=(row["feature_class"] or "").strip(),
            )
        except (ValueError, TypeError, KeyError) as exc:
            report.bad_rows.append(f"row {report.rows_read}: {exc}")
            continue
        entries.append(entry)

    if not entries:
        raise GazetteerError(
            f"no valid gazetteer rows ({len(report.bad_rows)} bad of {report.rows_read})"
        )
    report.entries = len(entries)
    return Gazetteer(entries), report


def lookup_name(gazetteer: Gazetteer, name: str) -> list[GazetteerEntry]:
    """Case-insensitive exact match over canonical and alternate names."""
    return gazetteer.lookup(name)


def resolve_highest_population(candidates: list[GazetteerEntry]) -> GazetteerEntry:
    """The candidate with maximal population.

    Ties break by lexicographically smallest canonical name, then smallest
    (lat, lon). Permutation-invariant by construction.
    """
    if not candidates:
        raise GazetteerError("cannot resolve an empty candidate list")
    return min(
        candidates,
        key=lambda e: (-e.population, e.canonical_name, e.location.lat, e.location.lon),
    )
