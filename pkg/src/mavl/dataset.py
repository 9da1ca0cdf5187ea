"""Dataset schema, compact line codec, and reconstruction.

Lyrics are distributed as fingerprints rather than text: per line we
keep the first letter of every word plus the first and last word. Given
a candidate page fetched from the recorded URL, the original line can
be recognized without the dataset ever shipping it.

File format (UTF-8 JSON)::

    { "<song-id>": { "<lang>": {
        "title": ..., "source_url": ..., "media_url": null,
        "sections": [ { "index": 0, "lines": [
            { "index": 0, "rep": ["RmtIhtsg", "Remember", "goodbye"],
              "time_span": [12000, 15500], "syllable_count": 10 } ] } ] } } }

A resolved line may additionally carry its recovered "text". Unknown
fields are kept and re-emitted in lenient mode, rejected in strict.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .errors import DatasetParseError, DatasetValidationError, EmptyLineError
from .languages import Language
from .tokenize import TokenizerHandle, default_tokenizer

_LINE_KEYS = {"index", "rep", "time_span", "syllable_count", "text"}
_SECTION_KEYS = {"index", "lines"}
_ENTRY_KEYS = {"title", "source_url", "media_url", "sections"}


@dataclass(frozen=True)
class CompactLineRep:
    signature: str
    first_token: str
    last_token: str

    @property
    def token_count(self) -> int:
        return len(self.signature)


@dataclass
class LyricLine:
    index: int
    rep: CompactLineRep
    resolved_text: str | None = None
    time_span: tuple[int, int] | None = None
    syllable_count: int | None = None
    extras: dict = field(default_factory=dict)


@dataclass
class Section:
    index: int
    lines: list[LyricLine]
    extras: dict = field(default_factory=dict)


@dataclass
class SongEntry:
    title: str
    source_url: str
    media_url: str | None
    language: Language
    sections: list[Section]
    extras: dict = field(default_factory=dict)

    def lines(self):
        for section in self.sections:
            for line in section.lines:
                yield section, line


@dataclass
class Dataset:
    songs: dict[str, dict[Language, SongEntry]] = field(default_factory=dict)


# ---------------------------------------------------------------- codec

def encode_line(lang: Language, text: str,
                tokenizer: TokenizerHandle | None = None) -> CompactLineRep:
    """Fingerprint one lyric line.

    Tokens keep their punctuation; the signature is the first character
    of each token. Japanese tokens are first combined in consecutive
    pairs (an odd trailing token stands alone) so the signature stays
    short despite fine-grained tokenization.
    """
    if tokenizer is None:
        tokenizer = default_tokenizer(lang)
    tokens = tokenizer.tokens(text)
    if not tokens:
        raise EmptyLineError("cannot encode an empty line")
    if lang is Language.JA:
        tokens = [a + b for a, b in zip(tokens[::2], tokens[1::2] + [""])]
    signature = "".join(tok[0] for tok in tokens)
    return CompactLineRep(signature, tokens[0], tokens[-1])


def match_line(rep: CompactLineRep, candidate: str, lang: Language,
               tokenizer: TokenizerHandle | None = None) -> bool:
    try:
        return encode_line(lang, candidate, tokenizer) == rep
    except EmptyLineError:
        return False


def reconstruct_song(entry: SongEntry, candidate_lines: list[str],
                     tokenizer: TokenizerHandle | None = None
                     ) -> tuple[SongEntry, list[tuple[int, int]]]:
    """Match candidates to the entry's lines, greedily and in order.

    Candidates that match nothing (page headers, ads) are skipped over.
    Lines that are already resolved keep their text; they still advance
    the cursor past their own candidate so later lines search the right
    region. Returns the resolved copy plus (section, line) index pairs
    that found no match.
    """
    if tokenizer is None:
        tokenizer = default_tokenizer(entry.language)
    cursor = 0
    unmatched: list[tuple[int, int]] = []
    sections: list[Section] = []
    for section in entry.sections:
        lines: list[LyricLine] = []
        for line in section.lines:
            if line.resolved_text is not None:
                cursor = _advance(line.rep, candidate_lines, cursor,
                                  entry.language, tokenizer)
                lines.append(replace(line))
                continue
            found = None
            for j in range(cursor, len(candidate_lines)):
                if match_line(line.rep, candidate_lines[j], entry.language,
                              tokenizer):
                    found = j
                    break
            if found is None:
                unmatched.append((section.index, line.index))
                lines.append(replace(line))
            else:
                cursor = found + 1
                lines.append(replace(line,
                                     resolved_text=candidate_lines[found]))
        sections.append(replace(section, lines=lines))
    return replace(entry, sections=sections), unmatched


def _advance(rep: CompactLineRep, candidates: list[str], cursor: int,
             lang: Language, tokenizer: TokenizerHandle) -> int:
    for j in range(cursor, len(candidates)):
        if match_line(rep, candidates[j], lang, tokenizer):
            return j + 1
    return cursor


# ----------------------------------------------------------- parse side

def parse_dataset(data: bytes | str, *, strict: bool = False) -> Dataset:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[:exc.pos].encode("utf-8"))
        raise DatasetParseError(str(exc), byte_offset=offset) from None
    if not isinstance(doc, dict):
        raise DatasetParseError("top level must be a JSON object")
    songs: dict[str, dict[Language, SongEntry]] = {}
    for song_id, by_lang in doc.items():
        if not isinstance(by_lang, dict):
            raise DatasetValidationError("song value must be an object",
                                         location=song_id)
        entries: dict[Language, SongEntry] = {}
        for code, raw in by_lang.items():
            try:
                lang = Language.parse(code)
            except ValueError as exc:
                raise DatasetValidationError(str(exc),
                                             location=song_id) from None
            entries[lang] = _parse_entry(raw, lang, f"{song_id}/{code}",
                                         strict)
        songs[song_id] = entries
    dataset = Dataset(songs)
    validate_dataset(dataset)
    return dataset


def _parse_entry(raw, lang: Language, loc: str, strict: bool) -> SongEntry:
    if not isinstance(raw, dict):
        raise DatasetValidationError("entry must be an object", location=loc)
    _check_keys(raw, _ENTRY_KEYS, loc, strict)
    try:
        title = raw["title"]
        source_url = raw["source_url"]
        sections_raw = raw["sections"]
    except KeyError as exc:
        raise DatasetValidationError(f"missing field {exc.args[0]!r}",
                                     location=loc) from None
    sections = [
        _parse_section(s, f"{loc}/section[{i}]", strict)
        for i, s in enumerate(sections_raw)
    ]
    extras = {k: v for k, v in raw.items() if k not in _ENTRY_KEYS}
    return SongEntry(title=title, source_url=source_url,
                     media_url=raw.get("media_url"), language=lang,
                     sections=sections, extras=extras)


def _parse_section(raw, loc: str, strict: bool) -> Section:
    if not isinstance(raw, dict):
        raise DatasetValidationError("section must be an object", location=loc)
    _check_keys(raw, _SECTION_KEYS, loc, strict)
    lines = [
        _parse_line(l, f"{loc}/line[{i}]", strict)
        for i, l in enumerate(raw.get("lines", []))
    ]
    extras = {k: v for k, v in raw.items() if k not in _SECTION_KEYS}
    return Section(index=raw.get("index", -1), lines=lines, extras=extras)


def _parse_line(raw, loc: str, strict: bool) -> LyricLine:
    if not isinstance(raw, dict):
        raise DatasetValidationError("line must be an object", location=loc)
    _check_keys(raw, _LINE_KEYS, loc, strict)
    rep_raw = raw.get("rep")
    if (not isinstance(rep_raw, list) or len(rep_raw) != 3
            or not all(isinstance(x, str) for x in rep_raw)):
        raise DatasetValidationError(
            "rep must be [signature, first, last]", location=loc)
    rep = CompactLineRep(*rep_raw)
    span = raw.get("time_span")
    if span is not None:
        if (not isinstance(span, list) or len(span) != 2
                or not all(isinstance(x, int) for x in span)):
            raise DatasetValidationError("time_span must be [start_ms, end_ms]",
                                         location=loc)
        span = (span[0], span[1])
    extras = {k: v for k, v in raw.items() if k not in _LINE_KEYS}
    return LyricLine(index=raw.get("index", -1), rep=rep,
                     resolved_text=raw.get("text"), time_span=span,
                     syllable_count=raw.get("syllable_count"), extras=extras)


def _check_keys(raw: dict, allowed: set, loc: str, strict: bool) -> None:
    if strict:
        unknown = set(raw) - allowed
        if unknown:
            raise DatasetValidationError(
                f"unknown fields {sorted(unknown)}", location=loc)


def validate_dataset(dataset: Dataset) -> None:
    for song_id, entries in dataset.songs.items():
        if Language.EN not in entries:
            raise DatasetValidationError("no EN entry", location=song_id)
        for lang, entry in entries.items():
            loc = f"{song_id}/{lang.value.lower()}"
            if entry.language is not lang:
                raise DatasetValidationError("language mismatch", location=loc)
            if not entry.source_url:
                raise DatasetValidationError("source_url is empty",
                                             location=loc)
            _validate_entry(entry, loc)


def _validate_entry(entry: SongEntry, loc: str) -> None:
    for i, section in enumerate(entry.sections):
        sloc = f"{loc}/section[{i}]"
        if section.index != i:
            raise DatasetValidationError(
                f"section index {section.index}, expected {i}", location=sloc)
        for j, line in enumerate(section.lines):
            lloc = f"{sloc}/line[{j}]"
            if line.index != j:
                raise DatasetValidationError(
                    f"line index {line.index}, expected {j}", location=lloc)
            if not line.rep.signature:
                raise DatasetValidationError("empty signature", location=lloc)
            if line.rep.first_token and line.rep.signature[0] != line.rep.first_token[0]:
                raise DatasetValidationError(
                    "signature does not start with first token's letter",
                    location=lloc)
            if line.time_span is not None and not line.time_span[0] < line.time_span[1]:
                raise DatasetValidationError("time_span start must precede end",
                                             location=lloc)
            if line.syllable_count is not None and line.syllable_count < 0:
                raise DatasetValidationError("negative syllable_count",
                                             location=lloc)
            if (line.resolved_text is not None
                    and entry.language.space_delimited
                    and not match_line(line.rep, line.resolved_text,
                                       entry.language)):
                raise DatasetValidationError(
                    "text does not match its rep", location=lloc)


# ------------------------------------------------------- serialize side

def serialize_dataset(dataset: Dataset) -> bytes:
    doc = {
        song_id: {
            lang.value.lower(): _entry_to_json(entry)
            for lang, entry in sorted(entries.items(), key=lambda kv: kv[0].value)
        }
        for song_id, entries in sorted(dataset.songs.items())
    }
    return (json.dumps(doc, ensure_ascii=False, indent=2) + "\n").encode("utf-8")


def _entry_to_json(entry: SongEntry) -> dict:
    out: dict = {"title": entry.title, "source_url": entry.source_url}
    if entry.media_url is not None:
        out["media_url"] = entry.media_url
    out["sections"] = [
        {
            "index": section.index,
            "lines": [_line_to_json(line) for line in section.lines],
            **section.extras,
        }
        for section in entry.sections
    ]
    out.update(entry.extras)
    return out


def _line_to_json(line: LyricLine) -> dict:
    out: dict = {
        "index": line.index,
        "rep": [line.rep.signature, line.rep.first_token, line.rep.last_token],
    }
    if line.time_span is not None:
        out["time_span"] = list(line.time_span)
    if line.syllable_count is not None:
        out["syllable_count"] = line.syllable_count
    if line.resolved_text is not None:
        out["text"] = line.resolved_text
    out.update(line.extras)
    return out


# ------------------------------------------------------------ statistics

@dataclass(frozen=True)
class LanguageStats:
    songs: int = 0
    sections: int = 0
    lines: int = 0


@dataclass(frozen=True)
class StatsReport:
    per_language: dict[Language, LanguageStats]

    @property
    def total_songs(self) -> int:
        return self.per_language.get(Language.EN, LanguageStats()).songs


def dataset_stats(dataset: Dataset) -> StatsReport:
    per: dict[Language, LanguageStats] = {}
    for entries in dataset.songs.values():
        for lang, entry in entries.items():
            prev = per.get(lang, LanguageStats())
            per[lang] = LanguageStats(
                songs=prev.songs + 1,
                sections=prev.sections + len(entry.sections),
                lines=prev.lines + sum(len(s.lines) for s in entry.sections),
            )
    return StatsReport(per)
