"""Unified corpus XML and legacy line-based formats.

The XML schema uses the tag vocabulary
entries/entry/text/toponyms/toponym/start/end/phrase/place/footprint/
placename/placetype. A <footprint> is "lon lat" separated by a space.
Unknown tags inside <toponym> and <place> are carried through opaquely.

Corpus-level metadata (id, name, genre, fully-annotated) and entry ids are
not part of the core tag set; the serializer records them as XML
attributes so serialize -> parse is the identity on the full model, and
the parser falls back to ingestion-supplied defaults when a document
(e.g. one produced by another tool) does not carry them.

Line-based converters cover the two legacy layouts: TSV where one logical
record spans several consecutive rows (one per toponym), and CSV with one
record per line.
"""

from __future__ import annotations

import csv
import hashlib
import io
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from enum import Enum

from .errors import ConversionError, CorpusParseError, CorpusValidationError
from .model import Corpus, CorpusEntry, Genre, GeoPoint, ToponymSpan

_TOPONYM_CORE_TAGS = {"start", "end", "phrase", "place"}
_PLACE_CORE_TAGS = {"footprint", "placename", "placetype"}


def _text_of(elem: ET.Element | None) -> str:
    if elem is None or elem.text is None:
        return ""
    return elem.text


def _parse_footprint(raw: str, entry_id: str) -> GeoPoint:
    parts = raw.split()
    if len(parts) != 2:
        raise CorpusValidationError(
            f"footprint must be 'lon lat', got {raw!r}", entry_id=entry_id
        )
    try:
        lon, lat = float(parts[0]), float(parts[1])
    except ValueError:
        raise CorpusValidationError(
            f"non-numeric footprint coordinates: {raw!r}", entry_id=entry_id
        ) from None
    try:
        return GeoPoint(lon=lon, lat=lat)
    except ValueError as exc:
        raise CorpusValidationError(str(exc), entry_id=entry_id) from None


def _parse_toponym(elem: ET.Element, entry_id: str) -> ToponymSpan:
    start_el = elem.find("start")
    end_el = elem.find("end")
    phrase_el = elem.find("phrase")
    if start_el is None or end_el is None or phrase_el is None:
        raise CorpusValidationError(
            "toponym requires <start>, <end> and <phrase>", entry_id=entry_id
        )
    try:
        start = int(_text_of(start_el).strip())
        end = int(_text_of(end_el).strip())
    except ValueError:
        raise CorpusValidationError(
            f"non-integer span bounds: start={_text_of(start_el)!r} "
            f"end={_text_of(end_el)!r}",
            entry_id=entry_id,
        ) from None

    footprint: GeoPoint | None = None
    place_name: str | None = None
    place_type: str | None = None
    place_extra: dict = {}
    place_el = elem.find("place")
    if place_el is not None:
        for child in place_el:
            if child.tag == "footprint":
                footprint = _parse_footprint(_text_of(child).strip(), entry_id)
            elif child.tag == "placename":
                place_name = _text_of(child)
            elif child.tag == "placetype":
                place_type = _text_of(child)
            else:
                place_extra[child.tag] = _text_of(child)

    extra: dict = {}
    for child in elem:
        if child.tag not in _TOPONYM_CORE_TAGS:
            extra[child.tag] = _text_of(child)

    try:
        return ToponymSpan(
            start=start,
            end=end,
            phrase=_text_of(phrase_el),
            footprint=footprint,
            place_name=place_name,
            place_type=place_type,
            extra=extra,
            place_extra=place_extra,
        )
    except ValueError as exc:
        raise CorpusValidationError(str(exc), entry_id=entry_id) from None


def parse_unified_corpus(
    xml_bytes: bytes,
    fully_annotated: bool = True,
    corpus_id: str | None = None,
    name: str | None = None,
    genre: Genre | str = Genre.OTHER,
) -> Corpus:
    """Parse a unified-format corpus document.

    Document order of entries is preserved. Root attributes (id, name,
    genre, fully-annotated) and entry id attributes take precedence over
    the keyword defaults; entries without an id get a positional one
    ("e1", "e2", ...). Annotations without a footprint are retained: they
    take part in recognition metrics but not distance metrics.

    Raises CorpusParseError for malformed XML (with line/column) and
    CorpusValidationError when any invariant fails; never returns a
    partially valid corpus.
    """
    try:
        root = ET.fromstring(xml_bytes)
    except ET.ParseError as exc:
        line, column = exc.position
        raise CorpusParseError(f"malformed XML: {exc.msg}", line=line, column=column) from None

    if root.tag != "entries":
        raise CorpusParseError(f"root element must be <entries>, got <{root.tag}>")

    entries: list[CorpusEntry] = []
    for index, entry_el in enumerate(root.findall("entry"), start=1):
        entry_id = entry_el.get("id") or f"e{index}"
        text = _text_of(entry_el.find("text"))
        annotations = []
        toponyms_el = entry_el.find("toponyms")
        if toponyms_el is not None:
            for top_el in toponyms_el.findall("toponym"):
                annotations.append(_parse_toponym(top_el, entry_id))
        entries.append(CorpusEntry(entry_id=entry_id, text=text, annotations=tuple(annotations)))

    if root.get("fully-annotated") is not None:
        fully_annotated = root.get("fully-annotated") == "true"
    if root.get("genre") is not None:
        try:
            genre = Genre(root.get("genre"))
        except ValueError:
            raise CorpusValidationError(f"unknown genre {root.get('genre')!r}") from None
    cid = root.get("id") or corpus_id or f"corpus-{hashlib.sha256(xml_bytes).hexdigest()[:8]}"
    return Corpus(
        id=cid,
        name=root.get("name") or name or cid,
        genre=Genre(genre),
        fully_annotated=fully_annotated,
        entries=tuple(entries),
    )


def _format_coord(value: float) -> str:
    # repr gives the shortest string that round-trips the float
    return repr(float(value))


def serialize_corpus(corpus: Corpus) -> bytes:
    """Serialize a corpus to unified XML (UTF-8, indented).

    Optional fields that are absent are omitted, not emitted empty.
    parse_unified_corpus(serialize_corpus(c)) == c for every valid corpus.
    """
    root = ET.Element(
        "entries",
        attrib={
            "id": corpus.id,
            "name": corpus.name,
            "genre": corpus.genre.value,
            "fully-annotated": "true" if corpus.fully_annotated else "false",
        },
    )
    for entry in corpus.entries:
        entry_el = ET.SubElement(root, "entry", attrib={"id": entry.entry_id})
        ET.SubElement(entry_el, "text").text = entry.text
        toponyms_el = ET.SubElement(entry_el, "toponyms")
        for span in entry.annotations:
            top_el = ET.SubElement(toponyms_el, "toponym")
            ET.SubElement(top_el, "start").text = str(span.start)
            ET.SubElement(top_el, "end").text = str(span.end)
            ET.SubElement(top_el, "phrase").text = span.phrase
            if (
                span.footprint is not None
                or span.place_name is not None
                or span.place_type is not None
                or span.place_extra
            ):
                place_el = ET.SubElement(top_el, "place")
                if span.footprint is not None:
                    ET.SubElement(place_el, "footprint").text = (
                        f"{_format_coord(span.footprint.lon)} {_format_coord(span.footprint.lat)}"
                    )
                if span.place_name is not None:
                    ET.SubElement(place_el, "placename").text = span.place_name
                if span.place_type is not None:
                    ET.SubElement(place_el, "placetype").text = span.place_type
                for tag, value in span.place_extra.items():
                    ET.SubElement(place_el, tag).text = value
            for tag, value in span.extra.items():
                ET.SubElement(top_el, tag).text = value

    tree = ET.ElementTree(root)
    ET.indent(tree)
    buf = io.BytesIO()
    tree.write(buf, encoding="utf-8", xml_declaration=True)
    return buf.getvalue()


class LineFormat(str, Enum):
    TSV_MULTI_LINE = "tsv_multi_line"
    CSV_ONE_PER_LINE = "csv_one_per_line"


@dataclass
class ConversionReport:
    """What happened during a line-based conversion."""

    rows_read: int = 0
    entries_out: int = 0
    skipped: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


@dataclass
class ConversionResult:
    corpus: Corpus
    report: ConversionReport


_REQUIRED_MAP_FIELDS = ("text", "phrase", "lon", "lat")


def convert_line_corpus(
    rows: bytes,
    format: LineFormat | str,
    column_map: dict[str, str],
    corpus_id: str = "converted",
    name: str | None = None,
    genre: Genre | str = Genre.OTHER,
    fully_annotated: bool = True,
) -> ConversionResult:
    """Convert a header-led TSV/CSV corpus to the unified model.

    column_map maps model fields to column names and must cover text,
    phrase, lon and lat; "entry_id", "place_name" and "place_type" are
    optional. For tsv_multi_line, consecutive rows sharing a record key
    (the entry_id column when mapped, else identical text) merge into one
    entry with several annotations.

    start/end are recovered by locating the phrase in the text (first
    occurrence; further occurrences produce a warning in the report).
    Rows whose phrase does not occur in the text are skipped and logged.
    """
    format = LineFormat(format)
    for field_name in _REQUIRED_MAP_FIELDS:
        if field_name not in column_map:
            raise ConversionError(f"column_map is missing required field {field_name!r}")

    delimiter = "\t" if format is LineFormat.TSV_MULTI_LINE else ","
    reader = csv.DictReader(io.StringIO(rows.decode("utf-8")), delimiter=delimiter)
    if reader.fieldnames is None:
        header_cols: list[str] = []
    else:
        header_cols = list(reader.fieldnames)
    for field_name, column in column_map.items():
        if column not in header_cols:
            raise ConversionError(
                f"mapped column {column!r} (field {field_name!r}) not in header {header_cols}"
            )

    report = ConversionReport()
    # each group: (key, text, [span rows])
    groups: list[tuple[str, str, list[ToponymSpan]]] = []

    def record_key(row: dict) -> str:
        if "entry_id" in column_map:
            return row[column_map["entry_id"]]
        return row[column_map["text"]]

    def spans_for(row: dict, text: str, key: str) -> ToponymSpan | None:
        phrase = row[column_map["phrase"]]
        pos = text.find(phrase)
        if phrase == "" or pos < 0:
            report.skipped.append(f"record {key!r}: phrase {phrase!r} not found in text")
            return None
        if text.find(phrase, pos + 1) >= 0:
            report.warnings.append(
                f"record {key!r}: phrase {phrase!r} occurs more than once; using first"
            )
        try:
            footprint = GeoPoint(
                lon=float(row[column_map["lon"]]), lat=float(row[column_map["lat"]])
            )
        except ValueError as exc:
            report.skipped.append(f"record {key!r}: bad coordinates ({exc})")
            return None
        return ToponymSpan(
            start=pos,
            end=pos + len(phrase) - 1,
            phrase=phrase,
            footprint=footprint,
            place_name=row.get(column_map.get("place_name", ""), None),
            place_type=row.get(column_map.get("place_type", ""), None),
        )

    for row in reader:
        report.rows_read += 1
        key = record_key(row)
        text = row[column_map["text"]]
        span = spans_for(row, text, key)
        merged = (
            format is LineFormat.TSV_MULTI_LINE
            and groups
            and groups[-1][0] == key
        )
        if merged:
            if span is not None:
                groups[-1][2].append(span)
        else:
            groups.append((key, text, [span] if span is not None else []))

    entries: list[CorpusEntry] = []
    used_ids: set[str] = set()
    for index, (key, text, spans) in enumerate(groups, start=1):
        if not spans:
            # every row of this record was skipped, so the record is too;
            # the row-level log lines already say why
            continue
        entry_id = key if "entry_id" in column_map and key not in used_ids else f"e{index}"
        used_ids.add(entry_id)
        entries.append(CorpusEntry(entry_id=entry_id, text=text, annotations=tuple(spans)))
    report.entries_out = len(entries)

    corpus = Corpus(
        id=corpus_id,
        name=name or corpus_id,
        genre=Genre(genre),
        fully_annotated=fully_annotated,
        entries=tuple(entries),
    )
    return ConversionResult(corpus=corpus, report=report)


@dataclass(frozen=True)
class CorpusStats:
    entry_count: int
    mean_words_per_entry: float
    mean_toponyms_per_entry: float


def corpus_stats(corpus: Corpus) -> CorpusStats:
    """Entry count and per-entry means (1 decimal); zeros for an empty corpus.

    Words are maximal runs of non-whitespace.
    """
    n = len(corpus.entries)
    if n == 0:
        return CorpusStats(0, 0.0, 0.0)
    words = sum(len(e.text.split()) for e in corpus.entries)
    toponyms = corpus.annotation_count()
    return CorpusStats(
        entry_count=n,
        mean_words_per_entry=round(words / n, 1),
        mean_toponyms_per_entry=round(toponyms / n, 1),
    )
