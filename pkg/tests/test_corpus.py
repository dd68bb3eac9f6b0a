from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geobench import (
    ConversionError,
    Corpus,
    CorpusEntry,
    CorpusParseError,
    CorpusValidationError,
    GeoPoint,
    Genre,
    ToponymSpan,
    convert_line_corpus,
    corpus_stats,
    parse_unified_corpus,
    serialize_corpus,
)

# -- parsing the published format ----------------------------------------


def test_minimal_corpus_fixture_exact_values(minimal_corpus_bytes):
    corpus = parse_unified_corpus(minimal_corpus_bytes)
    assert len(corpus.entries) == 1
    entry = corpus.entries[0]
    assert len(entry.annotations) == 1
    span = entry.annotations[0]
    assert span.start == 0
    assert span.end == 4
    assert span.phrase == "Paris"
    assert span.footprint == GeoPoint(lon=-95.5477, lat=33.6625)
    assert entry.text[span.start : span.end + 1] == "Paris"


def test_empty_entries_document():
    corpus = parse_unified_corpus(b"<entries></entries>")
    assert corpus.entries == ()


def test_phrase_mismatch_is_validation_error():
    doc = b"""<entries><entry id="x1"><text>Paris is big</text><toponyms>
      <toponym><start>0</start><end>5</end><phrase>Pariss</phrase>
      <place><footprint>2.35 48.85</footprint></place></toponym>
    </toponyms></entry></entries>"""
    with pytest.raises(CorpusValidationError) as err:
        parse_unified_corpus(doc)
    assert "x1" in str(err.value)


def test_malformed_xml_reports_position():
    with pytest.raises(CorpusParseError) as err:
        parse_unified_corpus(b"<entries><entry>")
    assert err.value.line == 1
    assert err.value.column is not None


def test_out_of_range_coordinates_rejected():
    doc = b"""<entries><entry><text>Paris</text><toponyms>
      <toponym><start>0</start><end>4</end><phrase>Paris</phrase>
      <place><footprint>200.0 48.85</footprint></place></toponym>
    </toponyms></entry></entries>"""
    with pytest.raises(CorpusValidationError):
        parse_unified_corpus(doc)


def test_root_attributes_take_precedence():
    doc = b'<entries id="abc" name="A corpus" genre="news" fully-annotated="false"></entries>'
    corpus = parse_unified_corpus(doc, fully_annotated=True, corpus_id="zzz", genre="other")
    assert corpus.id == "abc"
    assert corpus.name == "A corpus"
    assert corpus.genre is Genre.NEWS
    assert corpus.fully_annotated is False


def test_entries_without_ids_get_positional_ones():
    doc = b"<entries><entry><text>a</text></entry><entry><text>b</text></entry></entries>"
    corpus = parse_unified_corpus(doc)
    assert corpus.entry_ids() == ("e1", "e2")


def test_footprintless_annotation_is_retained():
    doc = b"""<entries><entry><text>Alberta</text><toponyms>
      <toponym><start>0</start><end>6</end><phrase>Alberta</phrase>
      <place><placename>Alberta</placename></place></toponym>
    </toponyms></entry></entries>"""
    corpus = parse_unified_corpus(doc)
    span = corpus.entries[0].annotations[0]
    assert span.footprint is None
    assert span.place_name == "Alberta"


def test_unknown_tags_are_preserved_through_round_trip():
    doc = b"""<entries><entry><text>Paris</text><toponyms>
      <toponym><start>0</start><end>4</end><phrase>Paris</phrase>
      <source>manual</source>
      <place><footprint>2.35 48.85</footprint><geonameid>2988507</geonameid></place>
      </toponym>
    </toponyms></entry></entries>"""
    corpus = parse_unified_corpus(doc)
    span = corpus.entries[0].annotations[0]
    assert span.extra == {"source": "manual"}
    assert span.place_extra == {"geonameid": "2988507"}
    again = parse_unified_corpus(serialize_corpus(corpus))
    assert again.entries[0].annotations[0] == span


# -- serialization round trip --------------------------------------------

# \r is folded to \n by XML parsers and control chars are not representable
_TEXT_ALPHABET = st.characters(
    blacklist_categories=("Cs", "Cc"), blacklist_characters="\r"
)
_texts = st.text(alphabet=_TEXT_ALPHABET, min_size=1, max_size=60)


@st.composite
def _spans_for(draw, text: str) -> ToponymSpan:
    start = draw(st.integers(min_value=0, max_value=len(text) - 1))
    end = draw(st.integers(min_value=start, max_value=len(text) - 1))
    has_fp = draw(st.booleans())
    footprint = None
    if has_fp:
        footprint = GeoPoint(
            lon=draw(st.floats(min_value=-180, max_value=180, allow_nan=False)),
            lat=draw(st.floats(min_value=-90, max_value=90, allow_nan=False)),
        )
    return ToponymSpan(
        start=start,
        end=end,
        phrase=text[start : end + 1],
        footprint=footprint,
        place_name=draw(st.none() | _texts),
        place_type=draw(st.none() | _texts),
    )


@st.composite
def corpora(draw) -> Corpus:
    n = draw(st.integers(min_value=0, max_value=5))
    entries = []
    for i in range(n):
        text = draw(_texts)
        spans = draw(st.lists(_spans_for(text), max_size=4))
        entries.append(
            CorpusEntry(entry_id=f"e{i + 1}", text=text, annotations=tuple(spans))
        )
    return Corpus(
        id=draw(st.from_regex(r"[a-z][a-z0-9_-]{0,15}", fullmatch=True)),
        name=draw(_texts),
        genre=draw(st.sampled_from(list(Genre))),
        fully_annotated=draw(st.booleans()),
        entries=tuple(entries),
    )


@given(corpora())
def test_round_trip_identity(corpus):
    assert parse_unified_corpus(serialize_corpus(corpus)) == corpus


@given(corpora())
def test_span_soundness_after_parse(corpus):
    reparsed = parse_unified_corpus(serialize_corpus(corpus))
    for entry in reparsed.entries:
        for span in entry.annotations:
            assert entry.text[span.start : span.end + 1] == span.phrase


def test_round_trip_minimal_corpus(minimal_corpus_bytes):
    corpus = parse_unified_corpus(minimal_corpus_bytes)
    assert parse_unified_corpus(serialize_corpus(corpus)) == corpus


def test_optional_tags_omitted_not_empty():
    corpus = Corpus(
        id="c",
        name="c",
        genre=Genre.OTHER,
        fully_annotated=True,
        entries=(
            CorpusEntry(
                entry_id="e1",
                text="Paris",
                annotations=(ToponymSpan(start=0, end=4, phrase="Paris"),),
            ),
        ),
    )
    xml = serialize_corpus(corpus)
    assert b"<placename" not in xml
    assert b"<placetype" not in xml
    assert b"<footprint" not in xml


def test_serialize_empty_corpus():
    corpus = Corpus(id="c", name="c", genre=Genre.OTHER, fully_annotated=True)
    assert parse_unified_corpus(serialize_corpus(corpus)) == corpus


def test_duplicate_entry_ids_rejected():
    with pytest.raises(CorpusValidationError):
        Corpus(
            id="c",
            name="c",
            genre=Genre.OTHER,
            fully_annotated=True,
            entries=(
                CorpusEntry(entry_id="e1", text="a"),
                CorpusEntry(entry_id="e1", text="b"),
            ),
        )


# -- line-based conversion -------------------------------------------------

_MAP = {"entry_id": "id", "text": "text", "phrase": "phrase", "lon": "lon", "lat": "lat"}


def _tsv(rows: list[tuple[str, str, str, str, str]]) -> bytes:
    head = "id\ttext\tphrase\tlon\tlat"
    return "\n".join([head] + ["\t".join(r) for r in rows]).encode("utf-8")


def test_consecutive_rows_merge_into_one_entry():
    rows = _tsv(
        [
            ("r1", "From Lima to Paris", "Lima", "-77.0", "-12.0"),
            ("r1", "From Lima to Paris", "Paris", "2.35", "48.85"),
        ]
    )
    result = convert_line_corpus(rows, "tsv_multi_line", _MAP)
    assert len(result.corpus.entries) == 1
    assert len(result.corpus.entries[0].annotations) == 2


def test_zero_data_rows_is_empty_corpus():
    result = convert_line_corpus(_tsv([]), "tsv_multi_line", _MAP)
    assert result.corpus.entries == ()
    assert result.report.rows_read == 0


def test_entry_count_preserved_at_588_rows():
    rows = [
        (f"r{i}", f"Entry number {i} mentions Lima today", "Lima", "-77.0428", "-12.0464")
        for i in range(588)
    ]
    result = convert_line_corpus(_tsv(rows), "tsv_multi_line", _MAP)
    assert len(result.corpus.entries) == 588


def test_missing_mapped_column_is_conversion_error():
    with pytest.raises(ConversionError):
        convert_line_corpus(_tsv([]), "tsv_multi_line", {**_MAP, "phrase": "nope"})


def test_map_must_cover_required_fields():
    with pytest.raises(ConversionError):
        convert_line_corpus(_tsv([]), "tsv_multi_line", {"text": "text"})


def test_unfindable_phrase_is_skipped_and_logged():
    rows = _tsv([("r1", "No places here", "Paris", "2.35", "48.85")])
    result = convert_line_corpus(rows, "tsv_multi_line", _MAP)
    assert result.corpus.entries == ()
    assert len(result.report.skipped) == 1


def test_ambiguous_phrase_warns_and_uses_first_occurrence():
    rows = _tsv([("r1", "Paris and Paris again", "Paris", "2.35", "48.85")])
    result = convert_line_corpus(rows, "tsv_multi_line", _MAP)
    span = result.corpus.entries[0].annotations[0]
    assert (span.start, span.end) == (0, 4)
    assert len(result.report.warnings) == 1


def test_csv_one_per_line_fixture(fixtures_dir):
    result = convert_line_corpus(
        (fixtures_dir / "web.csv").read_bytes(),
        "csv_one_per_line",
        {"text": "content", "phrase": "place", "lon": "lon", "lat": "lat"},
    )
    assert len(result.corpus.entries) == 4
    assert result.corpus.annotation_count() == 4


def test_tsv_fixture_round_trips_through_xml(fixtures_dir):
    result = convert_line_corpus(
        (fixtures_dir / "social.tsv").read_bytes(),
        "tsv_multi_line",
        {
            "entry_id": "post_id",
            "text": "message",
            "phrase": "toponym",
            "lon": "longitude",
            "lat": "latitude",
        },
        corpus_id="social",
    )
    assert len(result.corpus.entries) == 5
    assert result.corpus.annotation_count() == 6
    assert parse_unified_corpus(serialize_corpus(result.corpus)) == result.corpus


# -- corpus statistics -------------------------------------------------------


def test_stats_minimal_corpus(minimal_corpus_bytes):
    stats = corpus_stats(parse_unified_corpus(minimal_corpus_bytes))
    assert stats.entry_count == 1
    assert stats.mean_toponyms_per_entry == 1.0


def test_stats_empty_corpus():
    stats = corpus_stats(Corpus(id="c", name="c", genre=Genre.OTHER, fully_annotated=True))
    assert (stats.entry_count, stats.mean_words_per_entry, stats.mean_toponyms_per_entry) == (
        0,
        0.0,
        0.0,
    )


def test_stats_density_matches_news_fixture(fixtures_dir):
    corpus = parse_unified_corpus((fixtures_dir / "news10.xml").read_bytes())
    stats = corpus_stats(corpus)
    assert stats.entry_count == 10
    assert stats.mean_toponyms_per_entry == 8.0
