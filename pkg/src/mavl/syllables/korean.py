"""Korean syllable counting.

Hangul is syllabic by construction: one precomposed block, one syllable.
Everything outside U+AC00..U+D7A3 is ignored.
"""

from __future__ import annotations

from ..languages import is_hangul_syllable


def count(text: str) -> int:
    return sum(1 for ch in text if is_hangul_syllable(ch))


def segment(text: str) -> list[str]:
    return [ch for ch in text if is_hangul_syllable(ch)]
