"""Word tokenizers behind a small protocol.

EN, ES, FR and KO split on whitespace. Japanese has no spaces; the
character-class tokenizer below approximates morpheme boundaries by
script changes (kanji run, kana run, latin run). Anyone with a real
morphological analyzer can pass their own handle wherever a tokenizer
is accepted.
"""

from __future__ import annotations

import unicodedata
from typing import Protocol

from .languages import Language, is_hiragana, is_kanji, is_katakana


class TokenizerHandle(Protocol):
    def tokens(self, text: str) -> list[str]: ...


class SpaceTokenizer:
    def tokens(self, text: str) -> list[str]:
        return text.split()


class CharacterTypeTokenizer:
    """Splits where the script class changes; merges punctuation runs
    into the preceding token so they never stand alone."""

    def tokens(self, text: str) -> list[str]:
        runs: list[str] = []
        prev_class = None
        for ch in text:
            cls = self._char_class(ch)
            if cls == "space":
                prev_class = None
                continue
            if cls == prev_class and runs:
                runs[-1] += ch
            else:
                runs.append(ch)
                prev_class = cls
        merged: list[str] = []
        for run in runs:
            if merged and all(self._char_class(c) == "punct" for c in run):
                merged[-1] += run
            else:
                merged.append(run)
        return merged

    @staticmethod
    def _char_class(ch: str) -> str:
        if ch.isspace():
            return "space"
        if is_kanji(ch):
            return "kanji"
        if is_hiragana(ch):
            return "hiragana"
        if is_katakana(ch) or ch == "ー":
            return "katakana"
        if unicodedata.category(ch).startswith(("P", "S")):
            return "punct"
        return "other"


def default_tokenizer(lang: Language) -> TokenizerHandle:
    if lang.space_delimited:
        return SpaceTokenizer()
    return CharacterTypeTokenizer()
