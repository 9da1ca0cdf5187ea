"""French syllable heuristics.

Vowel groups (including digraphs like eau, ou, ai) count once. A
diaeresis or a group following é opens a hiatus (noël, créer, poésie).
The word-final mute e (chante, portes) is dropped by default; callers
who want sung-style schwas can keep it via the policy switch.
"""

from __future__ import annotations

from .common import split_on_nuclei

_PLAIN_VOWELS = set("aâàeéèêiîoôuûùy")
_DIAERESIS = set("ëïöü")
_LIGATURES = set("œæ")
_ALL = _PLAIN_VOWELS | _DIAERESIS | _LIGATURES
_SIMPLE_VOWELS = set("aeiouy")
_ACUTE_GRAVE = set("éèê")

CLUSTERS = frozenset({
    "bl", "br", "ch", "cl", "cr", "dr", "fl", "fr", "gl", "gn", "gr", "ph",
    "pl", "pr", "qu", "th", "tr", "vr",
})


def _is_vowel_char(word: str, i: int) -> bool:
    ch = word[i]
    prev = word[i - 1] if i > 0 else ""
    nxt = word[i + 1] if i + 1 < len(word) else ""
    if ch == "u":
        if prev == "q":
            return False
        if prev == "g" and nxt in "eéèêi":
            return False
        return True
    if ch == "y":
        if i == 0 and nxt in _SIMPLE_VOWELS:
            return False
        if prev in _SIMPLE_VOWELS and nxt in _SIMPLE_VOWELS:
            return False
        return True
    return ch in _ALL


def _hiatus(last: str, ch: str) -> bool:
    if ch in _DIAERESIS:
        return True
    if last == "é":
        return True
    # poème, océan: accent after a non-glide vowel starts a new nucleus
    if ch in _ACUTE_GRAVE and last in "aâeéèêoô":
        return True
    return False


def nuclei(word: str, *, mute_final_e: bool = True) -> list[tuple[int, int]]:
    spans: list[tuple[int, int]] = []
    i = 0
    while i < len(word):
        if not _is_vowel_char(word, i):
            i += 1
            continue
        start = i
        last = word[i]
        i += 1
        while i < len(word) and _is_vowel_char(word, i):
            ch = word[i]
            if _hiatus(last, ch):
                break
            last = ch
            i += 1
        spans.append((start, i))
    if mute_final_e and len(spans) > 1:
        s, e = spans[-1]
        if e - s == 1 and word[s] == "e" and word[e:] in ("", "s"):
            spans.pop()
    return spans


def segment_word(core: str, *, mute_final_e: bool = True) -> list[str]:
    spans = nuclei(core.lower(), mute_final_e=mute_final_e)
    units = split_on_nuclei(core, spans, CLUSTERS)
    return units if units else [core]


def count_word(core: str, *, mute_final_e: bool = True) -> int:
    return max(1, len(nuclei(core.lower(), mute_final_e=mute_final_e)))
