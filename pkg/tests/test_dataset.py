import json

import pytest
from hypothesis import given, strategies as st

from mavl.dataset import (
    CompactLineRep,
    Dataset,
    LyricLine,
    Section,
    SongEntry,
    dataset_stats,
    encode_line,
    match_line,
    parse_dataset,
    reconstruct_song,
    serialize_dataset,
)
from mavl.errors import (
    DatasetParseError,
    DatasetValidationError,
    EmptyLineError,
)
from mavl.languages import Language


def entry_from_lines(lang, section_lines, *, resolved=False,
                     title="Song", url="https://example.test/lyrics"):
    sections = []
    for s, texts in enumerate(section_lines):
        lines = []
        for i, text in enumerate(texts):
            lines.append(LyricLine(
                index=i,
                rep=encode_line(lang, text),
                resolved_text=text if resolved else None,
            ))
        sections.append(Section(index=s, lines=lines))
    return SongEntry(title=title, source_url=url, media_url=None,
                     language=lang, sections=sections)


ONE_SONG_DOC = {
    "song-1": {
        "en": {
            "title": "One",
            "source_url": "https://example.test/one",
            "media_url": None,
            "sections": [
                {"index": 0, "lines": [
                    {"index": 0, "rep": ["RmtIhtsg", "Remember", "goodbye"],
                     "time_span": [12000, 15500], "syllable_count": 10},
                ]},
            ],
        },
    },
}


class TestParse:
    def test_one_song_document(self):
        ds = parse_dataset(json.dumps(ONE_SONG_DOC))
        assert len(ds.songs) == 1
        entry = ds.songs["song-1"][Language.EN]
        assert len(entry.sections) == 1
        assert len(entry.sections[0].lines) == 1
        line = entry.sections[0].lines[0]
        assert line.rep == CompactLineRep("RmtIhtsg", "Remember", "goodbye")
        assert line.time_span == (12000, 15500)
        assert line.syllable_count == 10

    def test_empty_document(self):
        assert parse_dataset(b"{}") == Dataset({})

    def test_missing_en_sibling(self):
        doc = {"song-1": {"ko": ONE_SONG_DOC["song-1"]["en"]}}
        with pytest.raises(DatasetValidationError) as err:
            parse_dataset(json.dumps(doc))
        assert "song-1" in str(err.value)

    def test_malformed_json_reports_offset(self):
        with pytest.raises(DatasetParseError) as err:
            parse_dataset(b'{"song": ')
        assert isinstance(err.value.byte_offset, int)

    def test_unknown_language_code(self):
        doc = {"song-1": {"xx": ONE_SONG_DOC["song-1"]["en"]}}
        with pytest.raises(DatasetValidationError):
            parse_dataset(json.dumps(doc))

    def test_strict_rejects_unknown_fields(self):
        doc = json.loads(json.dumps(ONE_SONG_DOC))
        doc["song-1"]["en"]["genre"] = "pop"
        parse_dataset(json.dumps(doc))  # lenient default
        with pytest.raises(DatasetValidationError):
            parse_dataset(json.dumps(doc), strict=True)

    def test_lenient_preserves_unknown_fields(self):
        doc = json.loads(json.dumps(ONE_SONG_DOC))
        doc["song-1"]["en"]["genre"] = "pop"
        ds = parse_dataset(json.dumps(doc))
        again = parse_dataset(serialize_dataset(ds))
        assert again.songs["song-1"][Language.EN].extras == {"genre": "pop"}

    def test_non_contiguous_section_index(self):
        doc = json.loads(json.dumps(ONE_SONG_DOC))
        doc["song-1"]["en"]["sections"][0]["index"] = 2
        with pytest.raises(DatasetValidationError) as err:
            parse_dataset(json.dumps(doc))
        assert "section" in str(err.value)

    def test_bad_time_span(self):
        doc = json.loads(json.dumps(ONE_SONG_DOC))
        doc["song-1"]["en"]["sections"][0]["lines"][0]["time_span"] = [9, 9]
        with pytest.raises(DatasetValidationError):
            parse_dataset(json.dumps(doc))

    def test_text_must_match_rep(self):
        doc = json.loads(json.dumps(ONE_SONG_DOC))
        doc["song-1"]["en"]["sections"][0]["lines"][0]["text"] = "Wrong words"
        with pytest.raises(DatasetValidationError):
            parse_dataset(json.dumps(doc))


class TestSerialize:
    def test_empty_round_trip(self):
        assert parse_dataset(serialize_dataset(Dataset({}))) == Dataset({})

    def test_fixture_round_trip(self):
        ds = parse_dataset(json.dumps(ONE_SONG_DOC))
        assert parse_dataset(serialize_dataset(ds)) == ds

    def test_optional_fields_omitted(self):
        entry = entry_from_lines(Language.EN, [["Go"]])
        ds = Dataset({"s": {Language.EN: entry}})
        doc = json.loads(serialize_dataset(ds).decode("utf-8"))
        line = doc["s"]["en"]["sections"][0]["lines"][0]
        assert "time_span" not in line
        assert "syllable_count" not in line
        assert "media_url" not in doc["s"]["en"]


class TestEncode:
    def test_quoted_example(self):
        rep = encode_line(Language.EN,
                          "Remember me though I have to say goodbye")
        assert rep == CompactLineRep("RmtIhtsg", "Remember", "goodbye")
        assert rep.token_count == 8

    def test_single_token(self):
        rep = encode_line(Language.EN, "Go")
        assert rep == CompactLineRep("G", "Go", "Go")
        assert rep.first_token == rep.last_token

    def test_punctuation_kept(self):
        rep = encode_line(Language.EN, "Remember me, don't cry")
        assert rep.signature == "Rmdc"
        assert rep.last_token == "cry"

    def test_japanese_pairs(self):
        class Fixed:
            def tokens(self, text):
                return ["夜", "に", "駆け", "る"]

        rep = encode_line(Language.JA, "夜に駆ける", tokenizer=Fixed())
        assert rep.signature == "夜駆"
        assert rep.first_token == "夜に"
        assert rep.last_token == "駆ける"

    def test_japanese_odd_trailing_token(self):
        class Fixed:
            def tokens(self, text):
                return ["a", "b", "c"]

        rep = encode_line(Language.JA, "abc", tokenizer=Fixed())
        assert rep.signature == "ac"
        assert rep.last_token == "c"

    def test_empty_line_rejected(self):
        with pytest.raises(EmptyLineError):
            encode_line(Language.EN, "   ")


class TestMatch:
    def test_exact_sentence(self):
        rep = CompactLineRep("RmtIhtsg", "Remember", "goodbye")
        assert match_line(rep, "Remember me though I have to say goodbye",
                          Language.EN)

    def test_prefix_rejected(self):
        rep = CompactLineRep("RmtIhtsg", "Remember", "goodbye")
        assert not match_line(rep, "Remember me", Language.EN)

    def test_single_token(self):
        assert match_line(CompactLineRep("G", "Go", "Go"), "Go", Language.EN)

    def test_empty_candidate(self):
        assert not match_line(CompactLineRep("G", "Go", "Go"), "",
                              Language.EN)

    @given(st.lists(st.text(alphabet="abcdef", min_size=1, max_size=5),
                    min_size=1, max_size=8))
    def test_match_agrees_with_encoder(self, words):
        text = " ".join(words)
        rep = encode_line(Language.EN, text)
        assert match_line(rep, text, Language.EN)
        assert match_line(rep, text + " extra", Language.EN) == (
            encode_line(Language.EN, text + " extra") == rep)


class TestReconstruct:
    LINES = [["Hello darkness my old friend",
              "I've come to talk with you again"],
             ["In restless dreams I walked alone"]]

    def test_exact_candidates(self):
        entry = entry_from_lines(Language.EN, self.LINES)
        flat = [t for sec in self.LINES for t in sec]
        resolved, unmatched = reconstruct_song(entry, flat)
        assert unmatched == []
        assert [l.resolved_text for _, l in resolved.lines()] == flat

    def test_extra_interleaved_line_skipped(self):
        entry = entry_from_lines(Language.EN, self.LINES)
        flat = [t for sec in self.LINES for t in sec]
        noisy = flat[:1] + ["[Verse 2]"] + flat[1:]
        resolved, unmatched = reconstruct_song(entry, noisy)
        assert unmatched == []
        assert [l.resolved_text for _, l in resolved.lines()] == flat

    def test_empty_candidates(self):
        entry = entry_from_lines(Language.EN, self.LINES)
        resolved, unmatched = reconstruct_song(entry, [])
        assert unmatched == [(0, 0), (0, 1), (1, 0)]
        assert all(l.resolved_text is None for _, l in resolved.lines())

    def test_idempotent(self):
        entry = entry_from_lines(Language.EN, self.LINES)
        flat = [t for sec in self.LINES for t in sec]
        once, _ = reconstruct_song(entry, flat)
        twice, unmatched = reconstruct_song(once, flat)
        assert twice == once
        assert unmatched == []

    def test_partial_resolution(self):
        entry = entry_from_lines(Language.EN, self.LINES)
        flat = [t for sec in self.LINES for t in sec]
        resolved, unmatched = reconstruct_song(entry, flat[:1] + flat[2:])
        assert unmatched == [(0, 1)]


class TestStats:
    def build(self):
        song_a_en = entry_from_lines(Language.EN,
                                     [["one line", "two lines"],
                                      ["three here"]])
        song_a_es = entry_from_lines(Language.ES, [["una línea"]])
        song_b_en = entry_from_lines(Language.EN,
                                     [["a b c", "d e"], ["f g", "h i"]])
        return Dataset({
            "a": {Language.EN: song_a_en, Language.ES: song_a_es},
            "b": {Language.EN: song_b_en},
        })

    def test_empty(self):
        report = dataset_stats(Dataset({}))
        assert report.per_language == {}
        assert report.total_songs == 0

    def test_counts(self):
        report = dataset_stats(self.build())
        en = report.per_language[Language.EN]
        assert (en.songs, en.sections, en.lines) == (2, 4, 7)
        assert report.per_language[Language.ES].songs == 1
        assert report.total_songs == 2


words = st.lists(st.text(alphabet="abcdefghij", min_size=1, max_size=6),
                 min_size=1, max_size=6)


@st.composite
def datasets(draw):
    songs = {}
    for sid in range(draw(st.integers(0, 3))):
        langs = {Language.EN} | set(draw(st.lists(
            st.sampled_from(list(Language)), max_size=2)))
        entries = {}
        for lang in langs:
            n_sections = draw(st.integers(1, 2))
            section_lines = []
            for _ in range(n_sections):
                texts = [" ".join(draw(words))
                         for _ in range(draw(st.integers(1, 3)))]
                section_lines.append(texts)
            entries[lang] = entry_from_lines(lang, section_lines,
                                             resolved=draw(st.booleans()))
        songs[f"song-{sid}"] = entries
    return Dataset(songs)


@given(datasets())
def test_round_trip_property(ds):
    assert parse_dataset(serialize_dataset(ds)) == ds
