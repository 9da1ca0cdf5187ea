"""Shared pieces for the Latin-script counters (EN, ES, FR).

Each language module finds nucleus spans in a lowercased word core; this
module turns those spans into syllable units by splitting the consonant
runs between them. The split is onset-maximal only for known clusters:
a lone consonant starts the next syllable, a run keeps everything except
its final cluster (or final consonant) in the coda.
"""

from __future__ import annotations

_STRIP = "\"'’.,;:!?¡¿()[]{}«»“”„…·-–—"


def word_core(token: str) -> str:
    """Token with surrounding punctuation removed. May be empty."""
    return token.strip(_STRIP)


def split_on_nuclei(word: str, nuclei: list[tuple[int, int]],
                    clusters: frozenset[str]) -> list[str]:
    """Cut ``word`` into len(nuclei) units, one nucleus per unit.

    ``nuclei`` are (start, end) spans in order. ``clusters`` holds onset
    groups (2 or 3 letters) that stay together at a syllable start.
    """
    if not nuclei:
        return [word] if word else []
    cuts: list[int] = []
    for (_, prev_end), (next_start, _) in zip(nuclei, nuclei[1:]):
        run = word[prev_end:next_start]
        cuts.append(prev_end + _onset_offset(run, clusters))
    units = []
    begin = 0
    for cut in cuts:
        units.append(word[begin:cut])
        begin = cut
    units.append(word[begin:])
    return [u for u in units if u]


def _onset_offset(run: str, clusters: frozenset[str]) -> int:
    """Where, within a consonant run, the next syllable begins."""
    if len(run) <= 1:
        return 0
    for width in (3, 2):
        if len(run) >= width and run[-width:] in clusters:
            return len(run) - width
    return len(run) - 1
