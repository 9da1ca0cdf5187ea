"""The five supported languages and small shared text helpers."""

from __future__ import annotations

import enum


class Language(enum.Enum):
    EN = "EN"
    ES = "ES"
    FR = "FR"
    KO = "KO"
    JA = "JA"

    @classmethod
    def parse(cls, value: str) -> "Language":
        try:
            return cls[value.strip().upper()]
        except KeyError:
            raise ValueError(
                f"unsupported language {value!r}; expected one of "
                f"{', '.join(m.name for m in cls)}"
            ) from None

    @property
    def display_name(self) -> str:
        return _DISPLAY_NAMES[self]

    @property
    def space_delimited(self) -> bool:
        """Whether whitespace reliably separates words (everything but Japanese)."""
        return self is not Language.JA


_DISPLAY_NAMES = {
    Language.EN: "English",
    Language.ES: "Spanish",
    Language.FR: "French",
    Language.KO: "Korean",
    Language.JA: "Japanese",
}

ORIGINAL_LANGUAGE = Language.EN

HANGUL_BLOCK_START = 0xAC00
HANGUL_BLOCK_END = 0xD7A3


def is_hangul_syllable(ch: str) -> bool:
    return HANGUL_BLOCK_START <= ord(ch) <= HANGUL_BLOCK_END


def is_hiragana(ch: str) -> bool:
    return 0x3041 <= ord(ch) <= 0x3096 or ch in "ゝゞ"


def is_katakana(ch: str) -> bool:
    return 0x30A1 <= ord(ch) <= 0x30FA or ch in "ヽヾ"


def is_kana(ch: str) -> bool:
    return is_hiragana(ch) or is_katakana(ch) or ch == "ー"


def is_kanji(ch: str) -> bool:
    cp = ord(ch)
    return 0x4E00 <= cp <= 0x9FFF or 0x3400 <= cp <= 0x4DBF or ch == "々"


def katakana_to_hiragana(text: str) -> str:
    out = []
    for ch in text:
        cp = ord(ch)
        if 0x30A1 <= cp <= 0x30F6:
            out.append(chr(cp - 0x60))
        else:
            out.append(ch)
    return "".join(out)
