"""Syllable-constrained translation loop.

A line is translated by prompting a model through a staged recipe: segment
the source line into syllables, draft a target-language syllable list of the
same length, refine it, then emit a single JSON payload with the final text.
The model's claimed counts are never trusted; we recount every candidate with
the syllable module and re-prompt (up to a bound) whenever the count misses
or the payload is missing.

Prompts are assembled from text templates shipped with the package.  The
templates carry a tiny conditional syntax so one file covers every variant:

    %if NAME ... %else ... %endif   include lines when flag NAME is set
    %step                           the next step number (renumbers when
                                    earlier steps are switched off)

Flag names available to templates: audio, video, syllable_list, refine,
audio_and_video, audio_only, video_only, text_only.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from importlib import resources
from typing import NamedTuple, Sequence

from .errors import ConfigError, MissingFinalAnswerError, PipelineError
from .languages import Language
from .providers import (
    GenerationConfig,
    GenerationProvider,
    GenerationRequest,
    MediaAttachment,
    MediaKind,
    RetryPolicy,
    TraceStore,
    generate,
)
from .syllables import NormalizationPolicy, count_syllables

__all__ = [
    "Modality",
    "PromptStyle",
    "PipelineVariant",
    "TranslationTask",
    "StageTrace",
    "TranslationResult",
    "ValidationFlags",
    "build_prompt",
    "parse_trace",
    "validate",
    "translate_line",
]


class Modality(Enum):
    TEXT = "text"
    AUDIO = "audio"
    VIDEO = "video"


class PromptStyle(Enum):
    """STAGED walks the model through numbered steps; DIRECT asks in one go."""

    STAGED = "staged"
    DIRECT = "direct"


@dataclass(frozen=True)
class PipelineVariant:
    use_syllable_list: bool = True
    use_refine: bool = True
    modalities: frozenset = frozenset({Modality.TEXT})
    style: PromptStyle = PromptStyle.STAGED

    def __post_init__(self) -> None:
        mods = frozenset(self.modalities)
        object.__setattr__(self, "modalities", mods)
        if Modality.TEXT not in mods:
            raise ConfigError("every variant includes the text modality")

    @property
    def has_audio(self) -> bool:
        return Modality.AUDIO in self.modalities

    @property
    def has_video(self) -> bool:
        return Modality.VIDEO in self.modalities

    def label(self) -> str:
        """Short tag for report rows, e.g. 'T+A+V list+refine'."""
        mods = "T"
        if self.has_audio:
            mods += "+A"
        if self.has_video:
            mods += "+V"
        if self.style is PromptStyle.DIRECT:
            return f"{mods} direct"
        stages = ("list" if self.use_syllable_list else "nolist") + "+" + (
            "refine" if self.use_refine else "norefine"
        )
        return f"{mods} {stages}"


@dataclass(frozen=True)
class TranslationTask:
    source_text: str
    source_lang: Language
    target_lang: Language
    required_count: int
    media: tuple[MediaAttachment, ...] = ()
    task_id: str = ""

    def __post_init__(self) -> None:
        if not self.source_text.strip():
            raise ConfigError("task needs non-empty source text")
        if self.source_lang is self.target_lang:
            raise ConfigError("source and target language must differ")
        if self.required_count < 1:
            raise ConfigError("required_count must be positive")


@dataclass(frozen=True)
class StageTrace:
    """What we could recover from the model's visible working.

    ``refinement_rounds`` holds every syllable list the model wrote after the
    source segmentation, in order, with consecutive repeats collapsed; each
    entry pairs the list with its length.  ``raw_text`` is the verbatim model
    output (all attempts joined, when the loop ran more than once).
    """

    source_segmentation: tuple[str, ...] | None
    target_syllable_list: tuple[str, ...] | None
    refinement_rounds: tuple[tuple[tuple[str, ...], int], ...]
    final_translation: str | None
    raw_text: str


@dataclass(frozen=True)
class TranslationResult:
    task: TranslationTask
    translation: str
    achieved_count: int
    constraint_met: bool
    attempts: int
    trace: StageTrace


class ValidationFlags(NamedTuple):
    achieved_count: int
    constraint_met: bool
    non_empty: bool
    single_line: bool


# ---------------------------------------------------------------------------
# Prompt assembly


_PLACEHOLDER = re.compile(r"\{(source_lang|target_lang|syllable_count|source_text)\}")
_DIRECTIVE = re.compile(r"^%(if|else|endif)\b\s*(\S*)\s*$")


@lru_cache(maxsize=None)
def _template_text(style: PromptStyle) -> str:
    name = f"{style.value}.txt"
    return (resources.files("mavl") / "templates" / name).read_text(encoding="utf-8")


def _render(template: str, flags: dict[str, bool]) -> str:
    out: list[str] = []
    # each stack frame: (parent_emitting, branch_taken, in_else)
    stack: list[list[bool]] = []
    emitting = True
    for line in template.splitlines():
        m = _DIRECTIVE.match(line)
        if m is None:
            if emitting:
                out.append(line)
            continue
        kind, arg = m.group(1), m.group(2)
        if kind == "if":
            if arg not in flags:
                raise ConfigError(f"template references unknown flag {arg!r}")
            stack.append([emitting, flags[arg], False])
            emitting = emitting and flags[arg]
        elif kind == "else":
            if not stack or stack[-1][2]:
                raise ConfigError("%else without matching %if")
            stack[-1][2] = True
            emitting = stack[-1][0] and not stack[-1][1]
        else:  # endif
            if not stack:
                raise ConfigError("%endif without matching %if")
            parent, _, _ = stack.pop()
            emitting = parent
    if stack:
        raise ConfigError("unterminated %if in template")

    # number the surviving steps in order
    text = "\n".join(out)
    counter = iter(range(1, text.count("%step") + 1))
    return re.sub(r"%step", lambda _m: str(next(counter)), text)


def _substitute(text: str, task: TranslationTask) -> str:
    values = {
        "source_lang": task.source_lang.display_name,
        "target_lang": task.target_lang.display_name,
        "syllable_count": str(task.required_count),
        "source_text": task.source_text,
    }
    return _PLACEHOLDER.sub(lambda m: values[m.group(1)], text)


def build_prompt(task: TranslationTask, variant: PipelineVariant) -> str:
    audio, video = variant.has_audio, variant.has_video
    flags = {
        "audio": audio,
        "video": video,
        "syllable_list": variant.use_syllable_list,
        "refine": variant.use_refine,
        "audio_and_video": audio and video,
        "audio_only": audio and not video,
        "video_only": video and not audio,
        "text_only": not audio and not video,
    }
    rendered = _render(_template_text(variant.style), flags)
    # collapse the blank-line runs left behind by removed blocks
    rendered = re.sub(r"\n{3,}", "\n\n", rendered).strip("\n") + "\n"
    return _substitute(rendered, task)


# ---------------------------------------------------------------------------
# Trace parsing


_BRACKET_BLOCK = re.compile(r"\[[^\[\]]*\]")
_JSON_OBJECT = re.compile(r"\{[^{}]*\}")


def _quoted_lists(raw: str) -> list[tuple[str, ...]]:
    """Square-bracketed, comma-separated, quoted items; anything else ignored."""
    found: list[tuple[str, ...]] = []
    for block in _BRACKET_BLOCK.findall(raw):
        try:
            value = json.loads(block)
        except json.JSONDecodeError:
            continue
        if (
            isinstance(value, list)
            and value
            and all(isinstance(item, str) for item in value)
        ):
            found.append(tuple(value))
    return found


def _final_payload(raw: str) -> str | None:
    """The LAST well-formed {"translation": ...} object, or None.

    Last, not first: staged prompts contain an example payload inside the
    instructions, and models frequently restate before the real answer.
    """
    final: str | None = None
    for block in _JSON_OBJECT.findall(raw):
        try:
            value = json.loads(block)
        except json.JSONDecodeError:
            continue
        if (
            isinstance(value, dict)
            and set(value.keys()) == {"translation"}
            and isinstance(value["translation"], str)
        ):
            final = value["translation"]
    return final


def _assemble_trace(raw: str, lists: Sequence[tuple[str, ...]], final: str | None) -> StageTrace:
    source = lists[0] if lists else None
    rounds: list[tuple[tuple[str, ...], int]] = []
    for candidate in lists[1:]:
        if candidate == source:
            continue  # the model echoing its own segmentation back
        if rounds and rounds[-1][0] == candidate:
            continue
        rounds.append((candidate, len(candidate)))
    return StageTrace(
        source_segmentation=source,
        target_syllable_list=rounds[0][0] if rounds else None,
        refinement_rounds=tuple(rounds),
        final_translation=final,
        raw_text=raw,
    )


def parse_trace(raw: str) -> StageTrace:
    if not raw:
        raise MissingFinalAnswerError("empty model output")
    final = _final_payload(raw)
    if final is None:
        raise MissingFinalAnswerError("no final-answer payload in model output")
    return _assemble_trace(raw, _quoted_lists(raw), final)


def validate(result_text: str, task: TranslationTask) -> ValidationFlags:
    stripped = result_text.strip()
    achieved = count_syllables(task.target_lang, stripped) if stripped else 0
    return ValidationFlags(
        achieved_count=achieved,
        constraint_met=achieved == task.required_count,
        non_empty=bool(stripped),
        single_line="\n" not in stripped,
    )


# ---------------------------------------------------------------------------
# The refinement loop


@dataclass(frozen=True)
class _Candidate:
    attempt: int
    text: str
    flags: ValidationFlags


def _count_feedback(task: TranslationTask, flags: ValidationFlags, text: str) -> str:
    return (
        f'Your final translation "{text}" has {flags.achieved_count} syllables, '
        f"but the required syllable count is {task.required_count}. Please revise "
        f"the translation so that it contains exactly {task.required_count} "
        "syllables, and output the final result as a single JSON in the same format."
    )


_FORMAT_FEEDBACK = (
    "Your previous response did not contain the final result as a single JSON "
    'object. Please output the final result in the format '
    '{"translation": "final translation text"}.'
)


def translate_line(
    task: TranslationTask,
    variant: PipelineVariant,
    provider: GenerationProvider,
    *,
    max_reprompts: int = 2,
    config: GenerationConfig | None = None,
    retry: RetryPolicy | None = None,
    trace_store: TraceStore | None = None,
    policy: NormalizationPolicy | None = None,
    resend_media: bool = True,
    media_margin: float = 2.0,
) -> TranslationResult:
    """Translate one line, re-prompting until the syllable count lands.

    The loop issues at most ``1 + max_reprompts`` model calls.  A miss (wrong
    count, or no parsable payload) appends the model's reply and a corrective
    instruction to the running prompt, so refinement happens in context.  The
    returned attempt is the best one seen: constraint met if possible,
    otherwise the smallest count gap, earliest attempt on ties.
    """
    if max_reprompts < 0:
        raise ConfigError("max_reprompts must be >= 0")
    if policy is not None:
        # recount with the caller's normalization choices
        counter = lambda text: count_syllables(task.target_lang, text, policy=policy)
    else:
        counter = lambda text: count_syllables(task.target_lang, text)

    media = tuple(
        m.widened(media_margin)
        for m in task.media
        if (m.kind is MediaKind.AUDIO and variant.has_audio)
        or (m.kind is MediaKind.VIDEO and variant.has_video)
    )
    config = config or GenerationConfig()

    conversation = build_prompt(task, variant)
    responses: list[str] = []
    all_lists: list[tuple[str, ...]] = []
    candidates: list[_Candidate] = []
    attempts = 0

    for attempt in range(1, max_reprompts + 2):
        request = GenerationRequest(
            prompt_text=conversation,
            media=media if (attempt == 1 or resend_media) else (),
            config=config,
        )
        raw = generate(
            request,
            provider,
            policy=retry,
            trace=trace_store,
            task_id=task.task_id or task.source_text,
        )
        attempts = attempt
        responses.append(raw)
        all_lists.extend(_quoted_lists(raw))

        final = _final_payload(raw)
        if final is None:
            feedback = _FORMAT_FEEDBACK
        else:
            stripped = final.strip()
            achieved = counter(stripped) if stripped else 0
            flags = ValidationFlags(
                achieved_count=achieved,
                constraint_met=achieved == task.required_count,
                non_empty=bool(stripped),
                single_line="\n" not in stripped,
            )
            candidates.append(_Candidate(attempt, stripped, flags))
            if flags.constraint_met:
                break
            feedback = _count_feedback(task, flags, stripped)
        conversation = f"{conversation}\n\n{raw}\n\n{feedback}"

    merged_raw = "\n\n".join(responses)
    if not candidates:
        trace = _assemble_trace(merged_raw, all_lists, None)
        raise PipelineError(
            f"no parsable final answer in {attempts} attempt(s)", trace=trace
        )

    best = min(
        candidates,
        key=lambda c: (
            not c.flags.constraint_met,
            abs(c.flags.achieved_count - task.required_count),
            c.attempt,
        ),
    )
    trace = _assemble_trace(merged_raw, all_lists, best.text)
    return TranslationResult(
        task=task,
        translation=best.text,
        achieved_count=best.flags.achieved_count,
        constraint_met=best.flags.constraint_met,
        attempts=attempts,
        trace=trace,
    )
