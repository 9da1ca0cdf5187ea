"""Run orchestration: translate, evaluate, ablate, and stats workflows.

This module owns everything between the command line and the library calls:
loading datasets, constructing providers, fanning out line-level work,
collecting failures without aborting the run, and writing results to disk.

Output layout.  Each run gets its own directory under the configured output
root, named ``<op>-<digest>`` where the digest is a content hash of the run
configuration; rerunning the same configuration appends ``-2``, ``-3``, so
evidence from earlier runs is never clobbered.  Files are written to a
temporary name and renamed into place, and none of them embed timestamps,
which keeps repeated runs byte-comparable.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import tempfile
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import syllables
from .dataset import (
    Dataset,
    LyricLine,
    SongEntry,
    StatsReport,
    dataset_stats,
    parse_dataset,
)
from .errors import (
    ConfigError,
    DatasetValidationError,
    MavlError,
    PipelineError,
    ProviderAuthError,
    ProviderError,
)
from .languages import Language
from .metrics import (
    ALL_COMPONENTS,
    LineScore,
    LineScorer,
    ReferenceKind,
    SyllableErrorParams,
    aggregate,
)
from .pipeline import (
    Modality,
    PipelineVariant,
    PromptStyle,
    TranslationTask,
    translate_line,
)
from .providers import (
    EmbeddingRequest,
    HashEmbeddingProvider,
    MediaAttachment,
    MediaKind,
    RemoteProvider,
    RetryPolicy,
    ScriptedProvider,
    TraceStore,
    embed,
    map_bounded,
)
from .reports import (
    EvaluationRow,
    render_grid,
    render_report_table,
    render_stats_table,
    report_to_json,
    rows_to_csv,
)

__all__ = [
    "RunConfig",
    "HypothesisSet",
    "ThresholdExceededError",
    "TranslateOutcome",
    "EvaluateOutcome",
    "AblateOutcome",
    "cmd_translate",
    "cmd_evaluate",
    "cmd_ablate",
    "cmd_stats",
    "load_mock_script",
    "atomic_write",
]


class ThresholdExceededError(MavlError):
    """More lines failed than the configured tolerance allows."""


@dataclass(frozen=True)
class RunConfig:
    dataset_path: str
    source_lang: Language = Language.EN
    target_langs: tuple[Language, ...] = ()
    variant: PipelineVariant = field(default_factory=PipelineVariant)
    provider: str = "mock"
    mock_script: str | None = None
    endpoint: str | None = None
    model_id: str | None = None
    api_key_env: str = "MAVL_API_KEY"
    components: frozenset = ALL_COMPONENTS
    beta: float = 2.0
    out_dir: str = "runs"
    parallelism: int = 1
    max_reprompts: int = 2
    order_seed: int | None = None
    failure_threshold: float = 0.5
    fmt: str = "table"

    def __post_init__(self) -> None:
        if self.beta < 1:
            raise ConfigError(f"beta must be >= 1, got {self.beta}")
        if self.parallelism < 1:
            raise ConfigError("parallelism must be >= 1")
        if not 0.0 <= self.failure_threshold <= 1.0:
            raise ConfigError("failure_threshold must be within [0, 1]")
        if self.fmt not in {"csv", "json", "table"}:
            raise ConfigError(f"unknown output format {self.fmt!r}")
        if self.provider not in {"mock", "remote"}:
            raise ConfigError(f"unknown provider kind {self.provider!r}")
        if self.source_lang in self.target_langs:
            raise ConfigError("source language cannot also be a target")

    def require_paths(self) -> None:
        if not os.path.exists(self.dataset_path):
            raise ConfigError(f"dataset not found: {self.dataset_path}")
        if self.mock_script is not None and not os.path.exists(self.mock_script):
            raise ConfigError(f"mock script not found: {self.mock_script}")


def _config_payload(config: RunConfig) -> dict:
    return {
        "dataset_path": os.path.abspath(config.dataset_path),
        "source_lang": config.source_lang.value,
        "target_langs": [lang.value for lang in config.target_langs],
        "variant": {
            "use_syllable_list": config.variant.use_syllable_list,
            "use_refine": config.variant.use_refine,
            "modalities": sorted(m.value for m in config.variant.modalities),
            "style": config.variant.style.value,
        },
        "provider": config.provider,
        "mock_script": config.mock_script,
        "endpoint": config.endpoint,
        "model_id": config.model_id,
        "components": sorted(config.components),
        "beta": config.beta,
        "parallelism": config.parallelism,
        "max_reprompts": config.max_reprompts,
        "order_seed": config.order_seed,
        "failure_threshold": config.failure_threshold,
    }


def config_digest(config: RunConfig) -> str:
    blob = json.dumps(_config_payload(config), sort_keys=True)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:10]


def make_run_dir(config: RunConfig, op: str) -> Path:
    base = Path(config.out_dir)
    base.mkdir(parents=True, exist_ok=True)
    stem = f"{op}-{config_digest(config)}"
    candidate = base / stem
    suffix = 1
    while candidate.exists():
        suffix += 1
        candidate = base / f"{stem}-{suffix}"
    candidate.mkdir()
    return candidate


def atomic_write(path: Path, text: str) -> None:
    """Write via a sibling temp file and rename, so readers never see halves."""
    path = Path(path)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


# ---------------------------------------------------------------------------
# Hypothesis sets

LineKey = tuple[str, Language, int, int]


@dataclass
class HypothesisSet:
    """Translated texts keyed by (song, language, section, line).

    ``provenance`` names where the texts came from: a model identifier for
    pipeline output, or "human" when the dubbed references themselves are
    loaded for the human-baseline rows.
    """

    provenance: str
    entries: dict[LineKey, str] = field(default_factory=dict)

    def to_jsonl(self) -> str:
        lines = [json.dumps({"provenance": self.provenance}, ensure_ascii=False)]
        for (song_id, lang, section, line), text in sorted(
            self.entries.items(), key=lambda kv: (kv[0][0], kv[0][1].value, kv[0][2], kv[0][3])
        ):
            lines.append(
                json.dumps(
                    {
                        "song_id": song_id,
                        "language": lang.value,
                        "section": section,
                        "line": line,
                        "text": text,
                    },
                    ensure_ascii=False,
                )
            )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "HypothesisSet":
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        if not rows or "provenance" not in rows[0]:
            raise DatasetValidationError(
                "hypothesis file must start with a provenance record",
                location="line 1",
            )
        out = cls(provenance=rows[0]["provenance"])
        for i, row in enumerate(rows[1:], start=2):
            try:
                key = (
                    row["song_id"],
                    Language.parse(row["language"]),
                    int(row["section"]),
                    int(row["line"]),
                )
                out.entries[key] = row["text"]
            except (KeyError, ValueError) as exc:
                raise DatasetValidationError(
                    f"bad hypothesis record: {exc}", location=f"line {i}"
                ) from exc
        return out

    def validate_against(self, dataset: Dataset) -> None:
        for song_id, lang, section, line in self.entries:
            entry = dataset.songs.get(song_id, {}).get(lang)
            where = f"{song_id}/{lang.value}/{section}/{line}"
            if entry is None:
                raise DatasetValidationError(
                    "hypothesis key does not resolve to a dataset entry",
                    location=where,
                )
            if _find_line(entry, section, line) is None:
                raise DatasetValidationError(
                    "hypothesis key does not resolve to a dataset line",
                    location=where,
                )

    @classmethod
    def from_dubbed(cls, dataset: Dataset, languages: list[Language]) -> "HypothesisSet":
        """The dubbed reference lines themselves, as a human-made hypothesis set."""
        out = cls(provenance="human")
        for song_id in sorted(dataset.songs):
            for lang in languages:
                entry = dataset.songs[song_id].get(lang)
                if entry is None:
                    continue
                for section, line in entry.lines():
                    if line.resolved_text:
                        out.entries[(song_id, lang, section.index, line.index)] = (
                            line.resolved_text
                        )
        return out


def _find_line(entry: SongEntry, section_index: int, line_index: int) -> LyricLine | None:
    for section in entry.sections:
        if section.index == section_index:
            for line in section.lines:
                if line.index == line_index:
                    return line
    return None


# ---------------------------------------------------------------------------
# Provider construction


def load_mock_script(path: str) -> ScriptedProvider:
    """Build a scripted generation provider from a JSON file.

    Accepted shapes: a plain array (one shared response queue), or an object
    with optional "sequence" (shared queue) and "keyed" (map from a prompt
    substring to that task's own queue) members.
    """
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    script: dict[str | None, list[str]] = {}
    if isinstance(raw, list):
        script[None] = [str(item) for item in raw]
    elif isinstance(raw, dict):
        keyed = raw.get("keyed", {})
        if not isinstance(keyed, dict):
            raise ConfigError('mock script "keyed" member must be an object')
        for key, turns in keyed.items():
            if not isinstance(turns, list):
                raise ConfigError(f"mock script queue for {key!r} must be an array")
            script[key] = [str(t) for t in turns]
        if "sequence" in raw:
            if not isinstance(raw["sequence"], list):
                raise ConfigError('mock script "sequence" member must be an array')
            script[None] = [str(t) for t in raw["sequence"]]
    else:
        raise ConfigError("mock script must be a JSON array or object")
    if not script:
        raise ConfigError("mock script defines no responses")
    return ScriptedProvider(script, name="mock")


def _generation_provider(config: RunConfig):
    if config.provider == "mock":
        if config.mock_script is None:
            raise ConfigError("mock provider needs --mock-script")
        return load_mock_script(config.mock_script)
    if not config.endpoint or not config.model_id:
        raise ConfigError("remote provider needs an endpoint and a model id")
    return RemoteProvider(
        config.endpoint, config.model_id, api_key_env=config.api_key_env
    )


def _embedding_provider(config: RunConfig):
    if config.provider == "remote" and config.endpoint and config.model_id:
        return RemoteProvider(
            config.endpoint, config.model_id, api_key_env=config.api_key_env
        )
    return HashEmbeddingProvider()


# ---------------------------------------------------------------------------
# translate


@dataclass
class TranslateOutcome:
    run_dir: Path
    hypotheses: HypothesisSet
    failures: list[dict]
    line_results: list[dict]
    warnings: list[str] = field(default_factory=list)


def _load_dataset(path: str) -> Dataset:
    try:
        with open(path, "rb") as fh:
            return parse_dataset(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read dataset: {exc}") from exc


def _line_media(entry: SongEntry, line: LyricLine) -> tuple[MediaAttachment, ...]:
    if not entry.media_url:
        return ()
    span = None
    if line.time_span is not None:
        # dataset spans are integer milliseconds; attachments speak seconds
        span = (line.time_span[0] / 1000.0, line.time_span[1] / 1000.0)
    return (
        MediaAttachment(MediaKind.AUDIO, entry.media_url, time_span=span),
        MediaAttachment(MediaKind.VIDEO, entry.media_url, time_span=span),
    )


def cmd_translate(config: RunConfig) -> TranslateOutcome:
    config.require_paths()
    dataset = _load_dataset(config.dataset_path)
    run_dir = make_run_dir(config, "translate")
    hyp = HypothesisSet(provenance=f"{config.provider}:{config.variant.label()}")
    failures: list[dict] = []
    warnings: list[str] = []

    if not config.target_langs:
        warnings.append("no target languages selected; nothing to translate")
        atomic_write(run_dir / "hypotheses.jsonl", hyp.to_jsonl())
        atomic_write(run_dir / "failures.json", "[]\n")
        _write_config_echo(run_dir, config)
        return TranslateOutcome(run_dir, hyp, failures, [], warnings)

    tasks: list[tuple[LineKey, TranslationTask]] = []
    for song_id in sorted(dataset.songs):
        entry = dataset.songs[song_id].get(config.source_lang)
        if entry is None:
            warnings.append(f"{song_id}: no {config.source_lang.value} lyrics; skipped")
            continue
        for section, line in entry.lines():
            for target in config.target_langs:
                key: LineKey = (song_id, target, section.index, line.index)
                if not line.resolved_text:
                    failures.append(_failure(key, "data", "source line has no text"))
                    continue
                required = line.syllable_count
                if required is None:
                    required = syllables.count_syllables(
                        config.source_lang, line.resolved_text
                    )
                tasks.append(
                    (
                        key,
                        TranslationTask(
                            source_text=line.resolved_text,
                            source_lang=config.source_lang,
                            target_lang=target,
                            required_count=required,
                            media=_line_media(entry, line),
                            task_id=f"{song_id}/{target.value}/{section.index}/{line.index}",
                        ),
                    )
                )

    provider = _generation_provider(config)
    trace = TraceStore(str(run_dir / "trace.jsonl"))
    retry = RetryPolicy()

    if config.order_seed is not None:
        random.Random(config.order_seed).shuffle(tasks)

    def job(item: tuple[LineKey, TranslationTask]):
        key, task = item
        try:
            result = translate_line(
                task,
                config.variant,
                provider,
                max_reprompts=config.max_reprompts,
                retry=retry,
                trace_store=trace,
            )
            return ("ok", key, result)
        except PipelineError as exc:
            return ("pipeline", key, str(exc))
        except ProviderAuthError:
            raise
        except ProviderError as exc:
            return ("provider", key, str(exc))

    outcomes = map_bounded(job, tasks, config.parallelism)

    line_results: list[dict] = []
    provider_failures = 0
    for status, key, payload in outcomes:
        if status == "ok":
            hyp.entries[key] = payload.translation
            line_results.append(
                {
                    "song_id": key[0],
                    "language": key[1].value,
                    "section": key[2],
                    "line": key[3],
                    "translation": payload.translation,
                    "required_count": payload.task.required_count,
                    "achieved_count": payload.achieved_count,
                    "constraint_met": payload.constraint_met,
                    "attempts": payload.attempts,
                }
            )
        else:
            if status == "provider":
                provider_failures += 1
            failures.append(_failure(key, status, payload))

    total = len(tasks) + sum(1 for f in failures if f["category"] == "data")
    failures.sort(key=lambda f: (f["song_id"], f["language"], f["section"], f["line"]))
    line_results.sort(
        key=lambda r: (r["song_id"], r["language"], r["section"], r["line"])
    )

    atomic_write(run_dir / "hypotheses.jsonl", hyp.to_jsonl())
    atomic_write(
        run_dir / "failures.json",
        json.dumps(failures, ensure_ascii=False, indent=2) + "\n",
    )
    atomic_write(
        run_dir / "results.jsonl",
        "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in line_results),
    )
    _write_config_echo(run_dir, config)

    if tasks and provider_failures == len(tasks):
        raise ProviderError(
            f"provider failed for every line ({provider_failures} of {len(tasks)}); "
            f"see {run_dir / 'failures.json'}"
        )
    if total and len(failures) / total > config.failure_threshold:
        raise ThresholdExceededError(
            f"{len(failures)} of {total} lines failed, above the "
            f"{config.failure_threshold:.0%} threshold; outputs in {run_dir}"
        )
    return TranslateOutcome(run_dir, hyp, failures, line_results, warnings)


def _failure(key: LineKey, category: str, reason: str) -> dict:
    return {
        "song_id": key[0],
        "language": key[1].value,
        "section": key[2],
        "line": key[3],
        "category": category,
        "reason": reason,
    }


def _write_config_echo(run_dir: Path, config: RunConfig) -> None:
    atomic_write(
        run_dir / "config.json",
        json.dumps(_config_payload(config), indent=2, sort_keys=True) + "\n",
    )


# ---------------------------------------------------------------------------
# evaluate


@dataclass
class EvaluateOutcome:
    run_dir: Path
    rows: list[EvaluationRow]
    report: object
    skipped: int = 0


def _eval_languages(config: RunConfig, dataset: Dataset) -> list[Language]:
    if config.target_langs:
        return list(config.target_langs)
    present = {
        lang
        for entries in dataset.songs.values()
        for lang in entries
        if lang is not config.source_lang
    }
    return [lang for lang in Language if lang in present]


def cmd_evaluate(config: RunConfig, hyp: HypothesisSet) -> EvaluateOutcome:
    config.require_paths()
    dataset = _load_dataset(config.dataset_path)
    hyp.validate_against(dataset)
    run_dir = make_run_dir(config, "evaluate")

    embedder_provider = _embedding_provider(config)

    def embedder(texts):
        return embed(EmbeddingRequest(tuple(texts)), embedder_provider)

    scorer = LineScorer(
        params=SyllableErrorParams(beta=config.beta),
        embedder=embedder,
    )

    languages = _eval_languages(config, dataset)
    rows: list[EvaluationRow] = []
    scores: list[LineScore] = []
    skipped = 0

    for song_id in sorted(dataset.songs):
        entries = dataset.songs[song_id]
        entry_en = entries.get(config.source_lang)
        for lang in languages:
            entry = entries.get(lang)
            if entry is None:
                continue
            for section, line in entry.lines():
                key: LineKey = (song_id, lang, section.index, line.index)
                hyp_text = hyp.entries.get(key)
                original_text = None
                if entry_en is not None:
                    en_line = _find_line(entry_en, section.index, line.index)
                    if en_line is not None:
                        original_text = en_line.resolved_text
                dubbed_text = line.resolved_text

                if hyp_text is None:
                    skipped += 1
                    rows.append(
                        EvaluationRow(
                            song_id=song_id,
                            language=lang,
                            section=section.index,
                            line=line.index,
                            skip_reason="no hypothesis for this line",
                            original_reference=original_text,
                            dubbed_reference=dubbed_text,
                        )
                    )
                    continue
                if original_text is None and dubbed_text is None:
                    skipped += 1
                    rows.append(
                        EvaluationRow(
                            song_id=song_id,
                            language=lang,
                            section=section.index,
                            line=line.index,
                            hypothesis=hyp_text,
                            skip_reason="no reference text for this line",
                        )
                    )
                    continue

                original_score = dubbed_score = None
                if original_text is not None:
                    original_score = scorer.score_line(
                        original_text,
                        hyp_text,
                        config.source_lang,
                        lang,
                        ReferenceKind.ORIGINAL_EN,
                        components=config.components,
                        song_id=song_id,
                    )
                    scores.append(original_score)
                if dubbed_text is not None:
                    dubbed_score = scorer.score_line(
                        dubbed_text,
                        hyp_text,
                        lang,
                        lang,
                        ReferenceKind.DUBBED,
                        components=config.components,
                        song_id=song_id,
                    )
                    scores.append(dubbed_score)
                rows.append(
                    EvaluationRow(
                        song_id=song_id,
                        language=lang,
                        section=section.index,
                        line=line.index,
                        hypothesis=hyp_text,
                        original_reference=original_text,
                        dubbed_reference=dubbed_text,
                        original_score=original_score,
                        dubbed_score=dubbed_score,
                    )
                )

    report = aggregate(scores, provider=hyp.provenance) if scores else None
    atomic_write(run_dir / "scores.csv", rows_to_csv(rows))
    if report is not None:
        atomic_write(run_dir / "report.json", report_to_json(report))
        atomic_write(run_dir / "report.txt", render_report_table(report))
    _write_config_echo(run_dir, config)
    return EvaluateOutcome(run_dir, rows, report, skipped)


# ---------------------------------------------------------------------------
# ablate


STAGE_GRID = [(False, False), (False, True), (True, False), (True, True)]
MODALITY_GRID = [
    frozenset({Modality.TEXT}),
    frozenset({Modality.TEXT, Modality.VIDEO}),
    frozenset({Modality.TEXT, Modality.AUDIO}),
    frozenset({Modality.TEXT, Modality.AUDIO, Modality.VIDEO}),
]


def stage_label(use_list: bool, use_refine: bool) -> str:
    mark = lambda used: "✓" if used else "✗"
    return mark(use_list) + mark(use_refine)


def modality_label(mods: frozenset) -> str:
    label = "T"
    if Modality.AUDIO in mods:
        label += "+A"
    if Modality.VIDEO in mods:
        label += "+V"
    return label


@dataclass
class AblateOutcome:
    run_dir: Path
    summaries: dict[str, dict]
    table: str


def _dataset_has_media(dataset: Dataset) -> bool:
    return any(
        entry.media_url
        for entries in dataset.songs.values()
        for entry in entries.values()
    )


def _summarize(rows: list[EvaluationRow]) -> dict:
    pulled: dict[str, list[float]] = {
        "se": [], "scd": [], "semantic": [], "phonetic": [], "mismatch": []
    }
    for row in rows:
        for score in (row.original_score, row.dubbed_score):
            if score is None:
                continue
            if score.se is not None:
                pulled["se"].append(score.se)
            if score.scd is not None:
                pulled["scd"].append(score.scd)
            if score.semantic is not None:
                pulled["semantic"].append(score.semantic)
            if score.phonetic is not None:
                pulled["phonetic"].append(float(score.phonetic))
            if score.mismatch is not None:
                pulled["mismatch"].append(1.0 if score.mismatch else 0.0)
    mean = lambda xs: (sum(xs) / len(xs)) if xs else None
    return {
        "lines": len(rows),
        "error_rate": mean(pulled["mismatch"]),
        "mean_se": mean(pulled["se"]),
        "mean_scd": mean(pulled["scd"]),
        "mean_semantic": mean(pulled["semantic"]),
        "mean_phonetic": mean(pulled["phonetic"]),
    }


def cmd_ablate(config: RunConfig, grid: str = "stages") -> AblateOutcome:
    config.require_paths()
    if grid not in {"stages", "modalities"}:
        raise ConfigError(f"unknown ablation grid {grid!r}")
    dataset = _load_dataset(config.dataset_path)
    run_dir = make_run_dir(config, "ablate")

    if grid == "stages":
        cases = [
            (stage_label(use_list, use_refine),
             replace(config.variant, use_syllable_list=use_list, use_refine=use_refine),
             False)
            for use_list, use_refine in STAGE_GRID
        ]
    else:
        has_media = _dataset_has_media(dataset)
        cases = []
        for mods in MODALITY_GRID:
            needs_media = mods != {Modality.TEXT}
            skip = needs_media and not has_media
            cases.append(
                (modality_label(mods), replace(config.variant, modalities=mods), skip)
            )

    summaries: dict[str, dict] = {}
    for label, variant, skip in cases:
        if skip:
            summaries[label] = {"skipped": "no media in dataset"}
            continue
        sub = replace(
            config,
            variant=variant,
            out_dir=str(run_dir),
            failure_threshold=1.0,
        )
        translated = cmd_translate(sub)
        evaluated = cmd_evaluate(sub, translated.hypotheses)
        summary = _summarize(evaluated.rows)
        summary["failures"] = len(translated.failures)
        summaries[label] = summary

    col_labels = ["lines", "error rate", "mean SE", "mean SCD",
                  "mean semantic", "mean phonetic"]
    cells = []
    row_labels = []
    for label, _, _ in cases:
        row_labels.append(label)
        summary = summaries[label]
        if "skipped" in summary:
            cells.append(["skipped"] + ["-"] * (len(col_labels) - 1))
            continue
        row = [str(summary["lines"])]
        for key in ("error_rate", "mean_se", "mean_scd",
                    "mean_semantic", "mean_phonetic"):
            value = summary[key]
            row.append("-" if value is None else f"{value:.3f}")
        cells.append(row)
    header = "variant" if grid == "stages" else "modalities"
    table = render_grid(header, col_labels, row_labels, cells)

    atomic_write(run_dir / "comparison.txt", table)
    atomic_write(
        run_dir / "comparison.json",
        json.dumps(summaries, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
    )
    return AblateOutcome(run_dir, summaries, table)


# ---------------------------------------------------------------------------
# stats


def cmd_stats(dataset_path: str) -> tuple[StatsReport, str]:
    if not os.path.exists(dataset_path):
        raise ConfigError(f"dataset not found: {dataset_path}")
    stats = dataset_stats(_load_dataset(dataset_path))
    return stats, render_stats_table(stats)
