"""Line and corpus metrics for singability evaluation.

Four signals per line, each optional: syllable error SE (asymmetric,
over-count penalized by beta), syllable count distance SCD (symmetric,
relative), semantic cosine similarity over multilingual embeddings, and
phonetic Levenshtein distance over IPA. Every line is scored against a
reference of a stated kind, either the original English lyric or the
officially dubbed lyric in the target language, and aggregation keeps
those two populations apart.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from . import phonetics, syllables
from .errors import EmbeddingError, MetricDomainError
from .languages import Language

Embedder = Callable[[list[str]], list[list[float]]]

SYLLABIC = "syllabic"
SEMANTIC = "semantic"
PHONETIC = "phonetic"
ALL_COMPONENTS = frozenset({SYLLABIC, SEMANTIC, PHONETIC})


class ReferenceKind(enum.Enum):
    ORIGINAL_EN = "original_en"
    DUBBED = "dubbed"


@dataclass(frozen=True)
class SyllableErrorParams:
    beta: float = 2.0

    def __post_init__(self):
        if self.beta < 1:
            raise MetricDomainError("beta must be >= 1")


def syllable_error(c_ref: int, c_pred: int,
                   params: SyllableErrorParams = SyllableErrorParams()
                   ) -> float:
    if c_ref < 1:
        raise MetricDomainError("reference syllable count must be >= 1")
    if c_pred < 0:
        raise MetricDomainError("predicted syllable count must be >= 0")
    if c_ref >= c_pred:
        return float(c_ref - c_pred)
    return params.beta * (c_pred - c_ref)


def syllable_count_distance(c_ref: int, c_pred: int) -> float:
    if c_ref < 1 or c_pred < 1:
        raise MetricDomainError("syllable counts must be >= 1")
    diff = abs(c_ref - c_pred)
    return 0.5 * (diff / c_ref + diff / c_pred)


def cosine_similarity(e_gt: Sequence[float], e_pred: Sequence[float]) -> float:
    if len(e_gt) != len(e_pred):
        raise EmbeddingError(
            f"dimension mismatch: {len(e_gt)} vs {len(e_pred)}")
    if len(e_gt) == 0:
        raise EmbeddingError("empty vectors")
    dot = sum(x * y for x, y in zip(e_gt, e_pred))
    norm_gt = math.sqrt(sum(x * x for x in e_gt))
    norm_pred = math.sqrt(sum(y * y for y in e_pred))
    if norm_gt == 0.0 or norm_pred == 0.0:
        raise EmbeddingError("zero vector has no direction")
    return max(-1.0, min(1.0, dot / (norm_gt * norm_pred)))


@dataclass(frozen=True)
class LineScore:
    c_ref: int
    c_pred: int
    reference_kind: ReferenceKind
    language: Language
    se: float | None = None
    scd: float | None = None
    mismatch: bool | None = None
    semantic: float | None = None
    phonetic: int | None = None
    song_id: str | None = None
    component_errors: Mapping[str, str] = field(default_factory=dict)


@dataclass
class LineScorer:
    """Bundles the providers needed to score lines.

    ``embedder`` maps a list of texts to one vector each; without it
    the semantic component reports an error instead of a value. G2P
    rules default to the shipped tables.
    """

    params: SyllableErrorParams = field(default_factory=SyllableErrorParams)
    policy: syllables.NormalizationPolicy = syllables.DEFAULT_POLICY
    embedder: Embedder | None = None
    rules_by_lang: dict[Language, phonetics.G2PRuleSet] | None = None

    def score_line(self, gt_text: str, pred_text: str,
                   lang_gt: Language, lang_pred: Language,
                   reference_kind: ReferenceKind,
                   components: frozenset[str] = ALL_COMPONENTS,
                   song_id: str | None = None) -> LineScore:
        unknown = set(components) - ALL_COMPONENTS
        if unknown:
            raise MetricDomainError(f"unknown components {sorted(unknown)}")
        c_ref = syllables.count_syllables(lang_gt, gt_text, self.policy)
        c_pred = syllables.count_syllables(lang_pred, pred_text, self.policy)
        errors: dict[str, str] = {}
        se = scd = mismatch = semantic = phonetic = None
        if SYLLABIC in components:
            try:
                se = syllable_error(c_ref, c_pred, self.params)
                scd = syllable_count_distance(c_ref, c_pred)
                mismatch = c_ref != c_pred
            except MetricDomainError as exc:
                errors[SYLLABIC] = str(exc)
                se = scd = mismatch = None
        if SEMANTIC in components:
            try:
                semantic = self._semantic(gt_text, pred_text)
            except Exception as exc:
                errors[SEMANTIC] = str(exc)
        if PHONETIC in components:
            try:
                phonetic = phonetics.phonetic_distance(
                    lang_gt, gt_text, lang_pred, pred_text,
                    self.rules_by_lang)
            except Exception as exc:
                errors[PHONETIC] = str(exc)
        return LineScore(c_ref=c_ref, c_pred=c_pred,
                         reference_kind=reference_kind, language=lang_pred,
                         se=se, scd=scd, mismatch=mismatch,
                         semantic=semantic, phonetic=phonetic,
                         song_id=song_id, component_errors=errors)

    def _semantic(self, gt_text: str, pred_text: str) -> float:
        if self.embedder is None:
            raise EmbeddingError("no embedding provider configured")
        vectors = self.embedder([gt_text, pred_text])
        if len(vectors) != 2:
            raise EmbeddingError("embedder returned wrong vector count")
        return cosine_similarity(vectors[0], vectors[1])


@dataclass(frozen=True)
class GroupStats:
    line_count: int
    error_rate: float | None
    mean_se: float | None
    mean_scd: float | None
    mean_semantic: float | None
    mean_phonetic: float | None


@dataclass(frozen=True)
class CorpusReport:
    line_count: int
    error_rate: float | None
    groups: Mapping[tuple[Language, ReferenceKind], GroupStats]
    provider: str | None = None


def _mean(values: list[float]) -> float | None:
    return sum(values) / len(values) if values else None


def _group_stats(scores: list[LineScore]) -> GroupStats:
    flags = [s.mismatch for s in scores if s.mismatch is not None]
    return GroupStats(
        line_count=len(scores),
        error_rate=(sum(flags) / len(flags)) if flags else None,
        mean_se=_mean([s.se for s in scores if s.se is not None]),
        mean_scd=_mean([s.scd for s in scores if s.scd is not None]),
        mean_semantic=_mean([s.semantic for s in scores
                             if s.semantic is not None]),
        mean_phonetic=_mean([float(s.phonetic) for s in scores
                             if s.phonetic is not None]),
    )


def aggregate(scores: Iterable[LineScore], *, provider: str | None = None,
              per_song: bool = False) -> CorpusReport:
    scores = list(scores)
    if not scores:
        raise MetricDomainError("aggregate needs at least one score")
    if per_song:
        return _aggregate_per_song(scores, provider)
    groups: dict[tuple[Language, ReferenceKind], list[LineScore]] = {}
    for s in scores:
        groups.setdefault((s.language, s.reference_kind), []).append(s)
    flags = [s.mismatch for s in scores if s.mismatch is not None]
    return CorpusReport(
        line_count=len(scores),
        error_rate=(sum(flags) / len(flags)) if flags else None,
        groups={key: _group_stats(group) for key, group in groups.items()},
        provider=provider,
    )


def _aggregate_per_song(scores: list[LineScore],
                        provider: str | None) -> CorpusReport:
    """Mean of per-song means; lines without a song id stand alone."""
    groups: dict[tuple[Language, ReferenceKind], dict] = {}
    for idx, s in enumerate(scores):
        key = (s.language, s.reference_kind)
        song = s.song_id if s.song_id is not None else f"<line-{idx}>"
        groups.setdefault(key, {}).setdefault(song, []).append(s)
    out: dict[tuple[Language, ReferenceKind], GroupStats] = {}
    all_song_rates: list[float] = []
    total = 0
    for key, by_song in groups.items():
        per_song_stats = [_group_stats(lines) for lines in by_song.values()]
        n_lines = sum(g.line_count for g in per_song_stats)
        total += n_lines
        rates = [g.error_rate for g in per_song_stats
                 if g.error_rate is not None]
        all_song_rates.extend(rates)
        out[key] = GroupStats(
            line_count=n_lines,
            error_rate=_mean(rates),
            mean_se=_mean([g.mean_se for g in per_song_stats
                           if g.mean_se is not None]),
            mean_scd=_mean([g.mean_scd for g in per_song_stats
                            if g.mean_scd is not None]),
            mean_semantic=_mean([g.mean_semantic for g in per_song_stats
                                 if g.mean_semantic is not None]),
            mean_phonetic=_mean([g.mean_phonetic for g in per_song_stats
                                 if g.mean_phonetic is not None]),
        )
    return CorpusReport(line_count=total, error_rate=_mean(all_song_rates),
                        groups=out, provider=provider)
