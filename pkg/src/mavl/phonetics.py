"""Grapheme-to-IPA transcription and phonetic edit distance.

Transcription is table-driven: ordered rules of the form
``grapheme<TAB>ipa[<TAB>left/right]`` where the ipa field holds
space-separated symbols (``∅`` marks a silent letter) and the optional
third field constrains the neighborhood, ``#`` meaning a word boundary.
Longest grapheme wins; ties fall back to file order.

Korean text is decomposed to jamo before matching, Japanese katakana is
folded to hiragana. The shipped tables are broad-phonemic on purpose:
they make distances comparable, not dictionary-grade transcriptions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .errors import MissingRuleTableError
from .languages import (
    HANGUL_BLOCK_START,
    Language,
    is_hangul_syllable,
    katakana_to_hiragana,
)


@dataclass(frozen=True)
class IpaString:
    symbols: tuple[str, ...]
    dropped: int = field(default=0, compare=False)

    def __post_init__(self):
        for sym in self.symbols:
            if not sym or sym.isspace():
                raise ValueError(f"bad IPA symbol {sym!r}")

    def __len__(self) -> int:
        return len(self.symbols)


@dataclass(frozen=True)
class G2PRule:
    grapheme: str
    output: tuple[str, ...]
    left: str = ""
    right: str = ""


class G2PRuleSet:
    def __init__(self, language: Language, rules: list[G2PRule]):
        self.language = language
        # longest grapheme first; stable sort keeps file order within a length
        self.rules = sorted(rules, key=lambda r: -len(r.grapheme))

    def match(self, text: str, i: int) -> G2PRule | None:
        for rule in self.rules:
            end = i + len(rule.grapheme)
            if text[i:end] != rule.grapheme:
                continue
            if not _side_ok(rule.left, text[:i], prefix=False):
                continue
            if not _side_ok(rule.right, text[end:], prefix=True):
                continue
            return rule
        return None


def _side_ok(pattern: str, neighborhood: str, *, prefix: bool) -> bool:
    if not pattern:
        return True
    if pattern == "#":
        return not neighborhood or (
            neighborhood[0].isspace() if prefix else neighborhood[-1].isspace())
    if prefix:
        return neighborhood.startswith(pattern)
    return neighborhood.endswith(pattern)


def parse_rules(lines, language: Language,
                source: str = "<rules>") -> G2PRuleSet:
    rules: list[G2PRule] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) not in (2, 3):
            raise MissingRuleTableError(
                f"{source}:{lineno}: expected grapheme<TAB>ipa[<TAB>ctx]")
        grapheme = parts[0]
        output = () if parts[1] == "∅" else tuple(parts[1].split())
        left = right = ""
        if len(parts) == 3 and parts[2]:
            left, _, right = parts[2].partition("/")
        rules.append(G2PRule(grapheme, output, left, right))
    return G2PRuleSet(language, rules)


def load_rules(path: str | Path, language: Language) -> G2PRuleSet:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        return parse_rules(fh, language, source=str(path))


@lru_cache(maxsize=None)
def shipped_rules(language: Language) -> G2PRuleSet:
    name = f"{language.value.lower()}.tsv"
    candidate = resources.files("mavl").joinpath("data", "g2p", name)
    if not candidate.is_file():
        raise MissingRuleTableError(f"no shipped rule table for {language}")
    with candidate.open("r", encoding="utf-8") as fh:
        return parse_rules(fh, language, source=name)


def _decompose_hangul(text: str) -> str:
    out: list[str] = []
    for ch in text:
        if not is_hangul_syllable(ch):
            out.append(ch)
            continue
        offset = ord(ch) - HANGUL_BLOCK_START
        lead, rest = divmod(offset, 588)
        vowel, tail = divmod(rest, 28)
        out.append(chr(0x1100 + lead))
        out.append(chr(0x1161 + vowel))
        if tail:
            out.append(chr(0x11A7 + tail))
    return "".join(out)


def transcribe(lang: Language, text: str,
               rules: G2PRuleSet | None = None) -> IpaString:
    if rules is None:
        rules = shipped_rules(lang)
    if rules.language is not lang:
        raise MissingRuleTableError(
            f"rule table is for {rules.language}, not {lang}")
    if lang is Language.KO:
        text = _decompose_hangul(text)
    elif lang is Language.JA:
        text = katakana_to_hiragana(text)
    else:
        text = text.lower()
    symbols: list[str] = []
    dropped = 0
    i = 0
    while i < len(text):
        if text[i].isspace():
            i += 1
            continue
        rule = rules.match(text, i)
        if rule is None:
            dropped += 1
            i += 1
            continue
        symbols.extend(rule.output)
        i += len(rule.grapheme)
    return IpaString(tuple(symbols), dropped=dropped)


def edit_distance(a: IpaString, b: IpaString) -> int:
    """Symbol-level Levenshtein distance, unit costs."""
    xs, ys = a.symbols, b.symbols
    if len(xs) < len(ys):
        xs, ys = ys, xs
    prev = list(range(len(ys) + 1))
    for i, x in enumerate(xs, start=1):
        cur = [i] + [0] * len(ys)
        for j, y in enumerate(ys, start=1):
            cur[j] = min(prev[j] + 1,
                         cur[j - 1] + 1,
                         prev[j - 1] + (x != y))
        prev = cur
    return prev[-1]


def phonetic_distance(lang_gt: Language, gt: str,
                      lang_pred: Language, pred: str,
                      rules_by_lang: dict[Language, G2PRuleSet] | None = None
                      ) -> int:
    def pick(lang: Language) -> G2PRuleSet | None:
        if rules_by_lang is None:
            return None
        if lang not in rules_by_lang:
            raise MissingRuleTableError(f"no rule table supplied for {lang}")
        return rules_by_lang[lang]

    ipa_gt = transcribe(lang_gt, gt, pick(lang_gt))
    ipa_pred = transcribe(lang_pred, pred, pick(lang_pred))
    return edit_distance(ipa_gt, ipa_pred)
