"""Core domain types: corpora, entries, annotated toponym spans.

Character offsets count Unicode scalar values (Python string indices) and
`end` is the index of the LAST character of the span, i.e. inclusive:
the 5-character phrase "Paris" at the start of a text is (start=0, end=4).
All types are immutable; invariants are enforced at construction so a
value that exists is a value that validates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import CorpusValidationError


class Genre(str, Enum):
    NEWS = "news"
    WIKIPEDIA = "wikipedia"
    SOCIAL_MEDIA = "social_media"
    WEB_PAGES = "web_pages"
    OTHER = "other"


@dataclass(frozen=True)
class GeoPoint:
    """A point location in degrees, longitude first."""

    lon: float
    lat: float

    def __post_init__(self) -> None:
        if not (-180.0 <= self.lon <= 180.0):
            raise ValueError(f"longitude out of range [-180, 180]: {self.lon}")
        if not (-90.0 <= self.lat <= 90.0):
            raise ValueError(f"latitude out of range [-90, 90]: {self.lat}")


@dataclass(frozen=True)
class ToponymSpan:
    """One annotated or predicted toponym.

    `phrase` is the surface form as it appears in the text. For corpus
    annotations CorpusEntry additionally enforces phrase == text slice;
    predicted spans are only required to stay inside the text bounds
    (checked where the source text is known).

    `footprint` is optional on annotations (partially geo-annotated
    corpora); geoparser outputs always carry one. `extra` holds unknown
    toponym-level XML tags, `place_extra` unknown place-level tags, both
    preserved opaquely for round-tripping.
    """

    start: int
    end: int
    phrase: str
    footprint: GeoPoint | None = None
    place_name: str | None = None
    place_type: str | None = None
    extra: dict = field(default_factory=dict)
    place_extra: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.start < 0:
            raise ValueError(f"span start must be >= 0, got {self.start}")
        if self.end < self.start:
            raise ValueError(f"span end ({self.end}) must be >= start ({self.start})")

    @property
    def length(self) -> int:
        return self.end - self.start + 1

    def in_bounds(self, text: str) -> bool:
        return self.end < len(text)

    def matches_text(self, text: str) -> bool:
        return self.in_bounds(text) and text[self.start : self.end + 1] == self.phrase


@dataclass(frozen=True)
class CorpusEntry:
    """One text to geoparse plus its gold annotations.

    Construction validates every annotation against the text: span within
    bounds and phrase equal to the exact text slice.
    """

    entry_id: str
    text: str
    annotations: tuple[ToponymSpan, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "annotations", tuple(self.annotations))
        for span in self.annotations:
            if not span.in_bounds(self.text):
                raise CorpusValidationError(
                    f"span [{span.start},{span.end}] exceeds text length {len(self.text)}",
                    entry_id=self.entry_id,
                )
            actual = self.text[span.start : span.end + 1]
            if actual != span.phrase:
                raise CorpusValidationError(
                    f"span [{span.start},{span.end}] reads {actual!r} "
                    f"but annotation says {span.phrase!r}",
                    entry_id=self.entry_id,
                )


@dataclass(frozen=True)
class Corpus:
    """An annotated corpus in the unified model.

    `fully_annotated` is per-corpus ingestion metadata: when False the
    corpus marks only a subset of its toponyms, so precision/recall/F-score
    are not applicable to runs against it.
    """

    id: str
    name: str
    genre: Genre
    fully_annotated: bool
    entries: tuple[CorpusEntry, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        if not isinstance(self.genre, Genre):
            object.__setattr__(self, "genre", Genre(self.genre))
        seen: set[str] = set()
        for entry in self.entries:
            if entry.entry_id in seen:
                raise CorpusValidationError(
                    "duplicate entry id", entry_id=entry.entry_id
                )
            seen.add(entry.entry_id)

    def entry_ids(self) -> tuple[str, ...]:
        return tuple(e.entry_id for e in self.entries)

    def annotation_count(self) -> int:
        return sum(len(e.annotations) for e in self.entries)
