from __future__ import annotations

import pytest

from mavl.errors import ConfigError, MissingFinalAnswerError, PipelineError
from mavl.languages import Language
from mavl.pipeline import (
    Modality,
    PipelineVariant,
    PromptStyle,
    StageTrace,
    TranslationTask,
    build_prompt,
    parse_trace,
    translate_line,
    validate,
)
from mavl.providers import GenerationRequest, MediaAttachment, MediaKind

TEXT = frozenset({Modality.TEXT})
TAV = frozenset({Modality.TEXT, Modality.AUDIO, Modality.VIDEO})
TV = frozenset({Modality.TEXT, Modality.VIDEO})
TA = frozenset({Modality.TEXT, Modality.AUDIO})

STEP1_FULL = "Identify the Core Lyric and Perform Syllable Segmentation"
STEP2_FULL = "Generate the Target Language Translation Syllable List"
STEP3 = "Iterate and Refine the Translation"
STEP4 = "Generate the Final Translation"


def butterfly_task(**overrides):
    fields = dict(
        source_text="And there's a butterfly",
        source_lang=Language.EN,
        target_lang=Language.KO,
        required_count=6,
    )
    fields.update(overrides)
    return TranslationTask(**fields)


def remember_task(**overrides):
    fields = dict(
        source_text="Remember me, don't let it make you cry",
        source_lang=Language.EN,
        target_lang=Language.KO,
        required_count=10,
    )
    fields.update(overrides)
    return TranslationTask(**fields)


# Reasoning text a model produces for the butterfly line: segmentation, a
# first candidate list, a refined list, then the payload.
BUTTERFLY_TRACE = """\
1. Identify the Core Lyric and Perform Syllable Segmentation
   - The core lyric is: "And there's a butterfly".
   - Audio analysis indicates a natural flow with emphasis on "butterfly".
   - The original syllable count is 6.
   - Syllable segmentation: `["And", "there's", "a", "but", "ter", "fly"]`

2. Generate the Target Language Translation Syllable List Utilizing the Video Information
   - Video context: The scene shows a colorful, cheerful environment with a pink
     Troll, running happily. A butterfly flits around. The mood is light and joyful.
   - Translation considerations: We need a Korean translation that fits this happy,
     whimsical context and maintains the 6-syllable count. We can use a common
     Korean word for butterfly, "나비" (nabi).
   - Initial translation: "나비 가 있 어 요" (Na-bi ga it-eo-yo) - This translates
     to "There's a butterfly."
   - Syllable list: `["나", "비", "가", "있", "어", "요"]`

3. Iterate and Refine the Translation
   - The initial translation "나비 가 있어요" is grammatically correct and fits the
     context. The syllable count is also correct at 6.
   - We can consider other options to see if we can get a more singable result, but
     this is already quite good.
   - Let's try "나비 가 날 아 와" (Na-bi ga nal a wa) - "A butterfly comes flying"
   - Syllable list: `["나", "비", "가", "날", "아", "와"]`
   - This also has 6 syllables and fits the scene well. It emphasizes the movement
     of the butterfly, which is visually present.

4. Generate the Final Translation
   - I think "나비 가 날 아 와" is slightly better because it has a sense of movement.
   - Final Syllable List: `["나", "비", "가", "날", "아", "와"]`
   - Final Translation: 나비가 날아와

```json
{"translation": "나비가 날아와"}
```
"""

NINE_LIST = ("날", "기", "억", "해", "줘", "울", "지", "는", "마")
TEN_LIST = ("날", "잊", "지", "마", "슬", "퍼", "하", "지", "는", "마")

# A trace where the model catches its own count error mid-reasoning: a 9-item
# first attempt, the correction note, then the accepted 10-item list.
REMEMBER_TRACE = """\
1. Identify the Core Lyric and Perform Syllable Segmentation
I begin with the original lyric "Remember me, don't let it make you cry" and note
the natural break after "me." I segment the lyric into its constituent syllables
as follows:
`["Re", "mem", "ber", "me,", "don't", "let", "it", "make", "you", "cry"]`
This gives a total of 10 syllables.

2. Generate the Target Language Translation Syllable List
The video shows a young boy singing to his elderly grandmother, who looks sad.
Given the context, the translation should be comforting and gentle.
My initial translation is:
`["날", "기", "억", "해", "줘", "울", "지", "는", "마"]`
This translation maintains the sentiment and cultural context.

3. Iterate and Refine the Translation
Upon reviewing the initial segmentation ["날", "기", "억", "해", "줘", "울", "지", "는", "마"],
the primary issue is the syllable count.
The list contains 9 syllables, not 10 as originally noted. This mismatch is crucial
for accurately fitting the lyric to the song's original melody and rhythm, which is
built on 10 syllables.
Furthermore, the original lyric has a distinct 4+6 syllable structure with a natural
break after the 4th syllable ("me,"). The initial translation has a 5+4 structure
(["날", "기", "억", "해", "줘"] as the first part and ["울", "지", "는", "마"] as the
second), causing the potential break point to fall after the 5th syllable instead
of the 4th.

Second attempt (adjusting for syllable count and naturalness):
`["날", "잊", "지", "마", "슬", "퍼", "하", "지", "는", "마"]`
The second attempt seems more natural and maintains the 10-syllable count.

4. Generate the Final Translation
The final syllable list is:
`["날", "잊", "지", "마", "슬", "퍼", "하", "지", "는", "마"]`

```json
{"translation": "날 잊지 마 슬퍼하지는 마"}
```
"""

# Two-turn variant of the same line: the first reply commits to the 9-count
# translation; the corrective re-prompt produces the 10-count one.
REMEMBER_TURN_1 = """\
1. Identify the Core Lyric and Perform Syllable Segmentation
`["Re", "mem", "ber", "me,", "don't", "let", "it", "make", "you", "cry"]`
This gives a total of 10 syllables.

2. Generate the Target Language Translation Syllable List
My translation is:
`["날", "기", "억", "해", "줘", "울", "지", "는", "마"]`

4. Generate the Final Translation
```json
{"translation": "날 기억해 줘 울지는 마"}
```
"""

REMEMBER_TURN_2 = """\
3. Iterate and Refine the Translation
The list contains 9 syllables, not 10 as originally noted.
Second attempt (adjusting for syllable count and naturalness):
`["날", "잊", "지", "마", "슬", "퍼", "하", "지", "는", "마"]`

4. Generate the Final Translation
```json
{"translation": "날 잊지 마 슬퍼하지는 마"}
```
"""


class RecordingProvider:
    """Replays fixed responses and keeps every request for inspection."""

    name = "recording"

    def __init__(self, responses):
        self.responses = list(responses)
        self.requests: list[GenerationRequest] = []

    def complete(self, request):
        self.requests.append(request)
        if not self.responses:
            raise AssertionError("provider called more times than scripted")
        return self.responses.pop(0)


class TestVariants:
    def test_text_modality_is_mandatory(self):
        with pytest.raises(ConfigError):
            PipelineVariant(modalities=frozenset({Modality.AUDIO}))

    def test_labels(self):
        assert PipelineVariant(modalities=TAV).label() == "T+A+V list+refine"
        assert (
            PipelineVariant(use_syllable_list=False, modalities=TEXT).label()
            == "T nolist+refine"
        )
        assert (
            PipelineVariant(style=PromptStyle.DIRECT, modalities=TEXT).label()
            == "T direct"
        )

    def test_task_validation(self):
        with pytest.raises(ConfigError):
            butterfly_task(source_text="   ")
        with pytest.raises(ConfigError):
            butterfly_task(target_lang=Language.EN)
        with pytest.raises(ConfigError):
            butterfly_task(required_count=0)


class TestBuildPrompt:
    def test_full_variant_has_all_step_headers(self):
        prompt = build_prompt(butterfly_task(), PipelineVariant(modalities=TAV))
        assert f"1. {STEP1_FULL}" in prompt
        assert f"2. {STEP2_FULL} Utilizing the Video Information" in prompt
        assert f"3. {STEP3}" in prompt
        assert f"4. {STEP4}" in prompt
        assert "Real Syllable Count: 6" in prompt
        assert "And there's a butterfly" in prompt
        assert "English" in prompt and "Korean" in prompt

    def test_example_payload_braces_survive_substitution(self):
        prompt = build_prompt(butterfly_task(), PipelineVariant(modalities=TAV))
        assert '{"translation": "final translation text"}' in prompt
        assert "{source_text}" not in prompt
        assert "{syllable_count}" not in prompt

    def test_no_refine_drops_step_three_and_renumbers(self):
        prompt = build_prompt(
            butterfly_task(), PipelineVariant(use_refine=False, modalities=TAV)
        )
        assert STEP3 not in prompt
        assert f"3. {STEP4}" in prompt
        assert f"4. {STEP4}" not in prompt

    def test_no_syllable_list_drops_segmentation_machinery(self):
        prompt = build_prompt(
            butterfly_task(), PipelineVariant(use_syllable_list=False, modalities=TAV)
        )
        assert STEP1_FULL not in prompt
        assert "1. Identify the Core Lyric" in prompt
        assert "Syllable List" not in prompt
        assert "syllable list" not in prompt
        assert "Real Syllable Count: 6" in prompt

    def test_minimal_variant(self):
        prompt = build_prompt(
            butterfly_task(),
            PipelineVariant(use_syllable_list=False, use_refine=False, modalities=TEXT),
        )
        assert STEP1_FULL not in prompt
        assert STEP3 not in prompt
        assert "1. Identify the Core Lyric" in prompt
        assert f"3. {STEP4}" in prompt
        assert "4. " not in prompt
        assert "Real Syllable Count: 6" in prompt

    def test_text_only_drops_media_sentences(self):
        prompt = build_prompt(butterfly_task(), PipelineVariant(modalities=TEXT))
        assert "audio" not in prompt.lower()
        assert "video" not in prompt.lower()
        assert "Read carefully to the provided lyrics" in prompt
        assert f"2. {STEP2_FULL}\n" in prompt

    def test_audio_only_keeps_audio_sentences(self):
        prompt = build_prompt(butterfly_task(), PipelineVariant(modalities=TA))
        assert "Listen carefully to the provided audio" in prompt
        assert "video" not in prompt.lower()
        assert "in context with the audio" in prompt

    def test_video_only_keeps_video_sentences(self):
        prompt = build_prompt(butterfly_task(), PipelineVariant(modalities=TV))
        assert "Utilizing the Video Information" in prompt
        assert "audio" not in prompt.lower()
        assert "in context with the video" in prompt

    def test_direct_style_has_no_steps(self):
        prompt = build_prompt(
            butterfly_task(), PipelineVariant(style=PromptStyle.DIRECT)
        )
        assert STEP1_FULL not in prompt
        assert STEP3 not in prompt
        assert "Match the syllable count of the original lyric" in prompt
        assert "Real Syllable Count: 6" in prompt

    def test_deterministic(self):
        variant = PipelineVariant(modalities=TAV)
        assert build_prompt(butterfly_task(), variant) == build_prompt(
            butterfly_task(), variant
        )


class TestParseTrace:
    def test_butterfly_trace(self):
        trace = parse_trace(BUTTERFLY_TRACE)
        assert trace.source_segmentation == ("And", "there's", "a", "but", "ter", "fly")
        assert trace.final_translation == "나비가 날아와"
        assert trace.target_syllable_list == ("나", "비", "가", "있", "어", "요")
        rounds = trace.refinement_rounds
        assert rounds[0] == (("나", "비", "가", "있", "어", "요"), 6)
        assert rounds[-1] == (("나", "비", "가", "날", "아", "와"), 6)
        assert trace.raw_text == BUTTERFLY_TRACE

    def test_remember_trace_keeps_rejected_then_accepted(self):
        trace = parse_trace(REMEMBER_TRACE)
        assert trace.source_segmentation == (
            "Re", "mem", "ber", "me,", "don't", "let", "it", "make", "you", "cry",
        )
        lists = [entry[0] for entry in trace.refinement_rounds]
        assert NINE_LIST in lists
        assert TEN_LIST in lists
        assert lists.index(NINE_LIST) < lists.index(TEN_LIST)
        assert trace.refinement_rounds[0] == (NINE_LIST, 9)
        assert trace.refinement_rounds[-1] == (TEN_LIST, 10)
        assert trace.final_translation == "날 잊지 마 슬퍼하지는 마"

    def test_counts_equal_list_lengths(self):
        trace = parse_trace(REMEMBER_TRACE)
        for syllables, count in trace.refinement_rounds:
            assert count == len(syllables)

    def test_consecutive_duplicates_collapse(self):
        raw = (
            '["a", "b"]\nthen ["x", "y"]\nagain ["x", "y"]\nfinally '
            '{"translation": "done"}'
        )
        trace = parse_trace(raw)
        assert trace.refinement_rounds == ((("x", "y"), 2),)

    def test_source_echoes_are_not_rounds(self):
        raw = '["a", "b"]\nrestating ["a", "b"]\n{"translation": "ok"}'
        trace = parse_trace(raw)
        assert trace.source_segmentation == ("a", "b")
        assert trace.refinement_rounds == ()

    def test_last_payload_wins(self):
        raw = '{"translation": "draft"}\nwait, better:\n{"translation": "final"}'
        assert parse_trace(raw).final_translation == "final"

    def test_instruction_example_payload_is_skipped_in_favor_of_answer(self):
        raw = (
            'Format: {"translation": "final translation text"}\n'
            'Answer: {"translation": "나비가 날아와"}'
        )
        assert parse_trace(raw).final_translation == "나비가 날아와"

    def test_non_list_brackets_ignored(self):
        raw = '[1, 2, 3] [verse] [] ["ok", "list"] {"translation": "x"}'
        trace = parse_trace(raw)
        assert trace.source_segmentation == ("ok", "list")

    def test_missing_payload_raises(self):
        with pytest.raises(MissingFinalAnswerError):
            parse_trace("no payload here, just prose")

    def test_payload_with_extra_keys_not_a_final_answer(self):
        with pytest.raises(MissingFinalAnswerError):
            parse_trace('{"translation": "x", "note": "y"}')


class TestValidate:
    def test_exact_count(self):
        flags = validate("나비가 날아와", butterfly_task())
        assert flags == (6, True, True, True)

    def test_empty_text(self):
        flags = validate("", butterfly_task())
        assert flags == (0, False, False, True)

    def test_short_answer(self):
        flags = validate("날 잊지 마", remember_task())
        assert flags == (4, False, True, True)

    def test_multiline_flagged(self):
        flags = validate("나비가\n날아와", butterfly_task())
        assert flags.single_line is False
        assert flags.achieved_count == 6


class TestTranslateLine:
    def test_single_attempt_success(self):
        provider = RecordingProvider([BUTTERFLY_TRACE])
        result = translate_line(
            butterfly_task(), PipelineVariant(modalities=TAV), provider
        )
        assert result.translation == "나비가 날아와"
        assert result.achieved_count == 6
        assert result.constraint_met is True
        assert result.attempts == 1
        assert result.trace.source_segmentation == (
            "And", "there's", "a", "but", "ter", "fly",
        )

    def test_miss_then_hit_takes_two_attempts(self):
        provider = RecordingProvider([REMEMBER_TURN_1, REMEMBER_TURN_2])
        result = translate_line(
            remember_task(), PipelineVariant(modalities=TV), provider
        )
        assert result.attempts == 2
        assert result.constraint_met is True
        assert result.translation == "날 잊지 마 슬퍼하지는 마"
        assert result.achieved_count == 10
        lists = [entry[0] for entry in result.trace.refinement_rounds]
        assert NINE_LIST in lists and TEN_LIST in lists

    def test_corrective_turn_states_counts_and_keeps_context(self):
        provider = RecordingProvider([REMEMBER_TURN_1, REMEMBER_TURN_2])
        translate_line(remember_task(), PipelineVariant(modalities=TV), provider)
        second_prompt = provider.requests[1].prompt_text
        assert "has 9 syllables" in second_prompt
        assert "required syllable count is 10" in second_prompt
        assert REMEMBER_TURN_1.strip() in second_prompt
        assert second_prompt.startswith(provider.requests[0].prompt_text)

    def test_all_attempts_malformed_raises_with_trace(self):
        provider = RecordingProvider(["no json 1", "no json 2", "no json 3"])
        with pytest.raises(PipelineError) as excinfo:
            translate_line(
                remember_task(), PipelineVariant(modalities=TEXT), provider,
                max_reprompts=2,
            )
        assert len(provider.requests) == 3
        assert isinstance(excinfo.value.trace, StageTrace)
        assert "no json 1" in excinfo.value.trace.raw_text

    def test_malformed_reprompt_mentions_format(self):
        provider = RecordingProvider(["not json", '{"translation": "나비가 날아와"}'])
        result = translate_line(
            butterfly_task(), PipelineVariant(modalities=TEXT), provider
        )
        assert result.attempts == 2
        assert result.constraint_met is True
        assert "single JSON" in provider.requests[1].prompt_text

    def test_best_attempt_when_nothing_hits(self):
        provider = RecordingProvider(
            [
                '{"translation": "날"}',          # 1 syllable, off by 5
                '{"translation": "나비가 날아"}',  # 5 syllables, off by 1
                '{"translation": "나"}',          # 1 syllable again
            ]
        )
        result = translate_line(
            butterfly_task(), PipelineVariant(modalities=TEXT), provider,
            max_reprompts=2,
        )
        assert result.attempts == 3
        assert result.constraint_met is False
        assert result.translation == "나비가 날아"
        assert result.achieved_count == 5
        gaps = [abs(5 - 6), abs(1 - 6)]
        assert abs(result.achieved_count - 6) <= min(gaps)

    def test_ties_prefer_earliest_attempt(self):
        provider = RecordingProvider(
            ['{"translation": "나비가 날아"}', '{"translation": "날아와 나비"}',
             '{"translation": "한"}']
        )
        result = translate_line(
            butterfly_task(), PipelineVariant(modalities=TEXT), provider,
            max_reprompts=2,
        )
        assert result.translation == "나비가 날아"

    def test_achieved_count_ignores_model_claims(self):
        # reply asserts 6 syllables but the text has 4; we recount locally
        raw = 'I count 6 syllables. {"translation": "날 잊지 마"}'
        provider = RecordingProvider([raw, raw, raw])
        result = translate_line(
            remember_task(), PipelineVariant(modalities=TEXT), provider,
            max_reprompts=2,
        )
        assert result.achieved_count == 4
        assert result.constraint_met is False

    def test_media_filtered_by_variant_and_widened(self):
        audio = MediaAttachment(MediaKind.AUDIO, "a.wav", time_span=(10.0, 14.0))
        video = MediaAttachment(MediaKind.VIDEO, "v.mp4", time_span=(10.0, 14.0))
        task = butterfly_task(media=(audio, video))
        provider = RecordingProvider([BUTTERFLY_TRACE])
        translate_line(task, PipelineVariant(modalities=TA), provider)
        sent = provider.requests[0].media
        assert len(sent) == 1
        assert sent[0].kind is MediaKind.AUDIO
        assert sent[0].time_span == (8.0, 16.0)

    def test_media_resend_flag(self):
        audio = MediaAttachment(MediaKind.AUDIO, "a.wav", time_span=(1.0, 2.0))
        task = butterfly_task(media=(audio,))
        responses = ["not json", BUTTERFLY_TRACE]
        provider = RecordingProvider(list(responses))
        translate_line(task, PipelineVariant(modalities=TA), provider)
        assert provider.requests[0].media and provider.requests[1].media

        provider = RecordingProvider(list(responses))
        translate_line(
            task, PipelineVariant(modalities=TA), provider, resend_media=False
        )
        assert provider.requests[0].media
        assert provider.requests[1].media == ()

    def test_mock_determinism(self):
        def run():
            provider = RecordingProvider([REMEMBER_TURN_1, REMEMBER_TURN_2])
            return translate_line(
                remember_task(), PipelineVariant(modalities=TV), provider
            )

        assert run() == run()
