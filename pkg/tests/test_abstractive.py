"""Generation ops: prompt assembly, retries, span math, fallbacks."""

import os

import pytest
from hypothesis import given, strategies as st

from shortform.abstractive import (
    extract_visual_concepts,
    describe_clips,
    generate_alternative_text,
    generate_short_transcript,
    locate_segment_spans,
    segment_short_transcript,
)
from shortform.config import PipelineConfig
from shortform.errors import GenerationFailed, ProviderUnavailable
from shortform.prompts import FAMILIES, build
from shortform.providers.fakes import FakeChatProvider
from shortform.textutil import normalize_ws
from shortform.transcript import ShortTranscript

GOLDEN_DIR = os.path.join(os.path.dirname(__file__), "golden")

GOLDEN_VALUES = {
    "short_transcript": {
        "visual_concepts": "spiral staircase, kitchen island, pond",
        "long_form_transcript": "Welcome to the tour. The kitchen shines. Goodbye for now.",
    },
    "visual_concepts": {
        "previous_sentences": "Welcome to the tour.",
        "sentence": "the spiral staircase winds up",
        "long_form_shot_descriptions": "Shot 1: A shot showing the kitchen.\nShot 2: A shot showing the spiral staircase.",
    },
    "clip_scoring": {
        "n": "2",
        "embedded_visual_concept": "now look at this ***spiral staircase*** here",
        "images": "[image 1]\n[image 2]",
        "image_descriptions": "1. A shot showing the kitchen.\n2. A shot showing the spiral staircase.",
        "speech": "1. the kitchen speech\n2. the staircase speech",
    },
    "segmentation": {"transcript": "Welcome home. The kitchen shines. Goodbye."},
    "alternative_text": {
        "extra_context": "(none)",
        "before_keyframe": "[keyframe attached]",
        "before_speech": "Intro speech",
        "replace_keyframe": "[keyframe attached]",
        "replace_duration": "4.0 seconds",
        "after_keyframe": "[keyframe attached]",
        "after_speech": "Outro speech",
    },
    "clip_description": {"image": "[keyframe attached]"},
    "baseline_summary": {"transcript": "Welcome home. The kitchen shines. Goodbye."},
}


@pytest.mark.parametrize("family", FAMILIES)
def test_assembled_prompts_match_golden_files(family):
    system, user = build(family, GOLDEN_VALUES[family])
    with open(os.path.join(GOLDEN_DIR, f"{family}.prompt.txt"), "r", encoding="utf-8") as f:
        assert f.read() == system + "\n<<<USER>>>\n" + user + "\n"


class StubChat:
    """Scripted chat provider: pops canned completions, records requests."""

    def __init__(self, completions):
        self.completions = list(completions)
        self.requests = []

    def chat(self, req):
        self.requests.append(req)
        if not self.completions:
            raise AssertionError("stub ran out of completions")
        item = self.completions.pop(0)
        if isinstance(item, Exception):
            raise item
        return item


LONG = (
    "Welcome back to the channel for a full tour. "
    "The kitchen has custom cabinets and light. "
    "Upstairs you will find three bedrooms. "
    "Thanks for watching and see you next time."
)


def test_generate_short_transcript_happy_path(pipeline_cfg):
    chat = StubChat(["A Fine Tour<SEP>Welcome back. The kitchen shines. Bye now."])
    short = generate_short_transcript(LONG, ["kitchen"], chat, pipeline_cfg)
    assert short.title == "A Fine Tour"
    assert short.body == "Welcome back. The kitchen shines. Bye now."
    assert "".join(s.text for s in short.sentences) == short.body


def test_prompt_contains_every_noun_phrase_verbatim(pipeline_cfg):
    chat = StubChat(["T<SEP>Body text here."])
    phrases = ["spiral staircase", "kitchen island", "quiet pond"]
    generate_short_transcript(LONG, phrases, chat, pipeline_cfg)
    user_text = chat.requests[0].user_text
    for phrase in phrases:
        assert phrase in user_text
    assert LONG in user_text


def test_missing_separator_retries_then_fails(pipeline_cfg):
    chat = StubChat(["no separator", "still none", "nope"])
    with pytest.raises(GenerationFailed):
        generate_short_transcript(LONG, [], chat, pipeline_cfg)
    assert len(chat.requests) == pipeline_cfg.transcript_attempts


def test_over_budget_body_rejected():
    cfg = PipelineConfig(word_budget=5)
    chat = StubChat(
        ["T<SEP>" + "word " * 20, "T<SEP>short enough body now.", "unused"]
    )
    short = generate_short_transcript(LONG, [], chat, cfg)
    assert short.body == "short enough body now."
    assert len(chat.requests) == 2


def test_banned_written_forms_rejected(pipeline_cfg):
    chat = StubChat(["T<SEP>Use one tbsp of butter.", "T<SEP>Use one tablespoon of butter."])
    short = generate_short_transcript(LONG, [], chat, pipeline_cfg)
    assert "tbsp" not in short.body


def test_hashtag_body_rejected(pipeline_cfg):
    chat = StubChat(["T<SEP>Great house #blessed", "T<SEP>Great house indeed."])
    short = generate_short_transcript(LONG, [], chat, pipeline_cfg)
    assert short.body == "Great house indeed."


def test_fake_chat_end_to_end_respects_budget(pipeline_cfg):
    chat = FakeChatProvider(seed=5, short_words_target=int(pipeline_cfg.word_budget * 0.9))
    short = generate_short_transcript(LONG, ["kitchen"], chat, pipeline_cfg)
    assert 0 < len(short.body.split()) <= pipeline_cfg.word_budget


# ---------------------------------------------------------------------------
# visual concepts

def make_short(body: str) -> ShortTranscript:
    return ShortTranscript.from_parts("T", body)


def test_concept_span_maps_into_body(pipeline_cfg):
    body = "the spiral staircase winds up. And a pond too."
    chat = StubChat(
        [
            "the <VIS>spiral staircase</VIS> winds up.",
            "And a <VIS>pond</VIS> too.",
        ]
    )
    concepts = extract_visual_concepts(make_short(body), ["d1"], chat, pipeline_cfg)
    assert [(c.phrase, c.start, c.end) for c in concepts] == [
        ("spiral staircase", 4, 20),
        ("pond", 37, 41),
    ]
    for c in concepts:
        assert body[c.start : c.end] == c.phrase


def test_concept_rel_pos_is_span_midpoint_over_body_length(pipeline_cfg):
    # 200-char body with the phrase at chars [90, 110) -> rel_pos 0.5
    body = ("x" * 89 + " needle some more " + "y" * 120)[:200] + "."
    body = body[:90] + "needle golden puff" + body[108:]
    body = body[:200]
    assert len(body) == 200
    phrase = body[90:110]
    chat = StubChat([body[:90] + f"<VIS>{phrase}</VIS>" + body[110:]])
    concepts = extract_visual_concepts(make_short(body), [], chat, pipeline_cfg)
    assert len(concepts) == 1
    assert concepts[0].rel_pos == pytest.approx(100.0 / 200.0)


def test_concept_mismatch_retried_then_skipped(pipeline_cfg):
    body = "the spiral staircase winds up."
    chat = StubChat(
        ["the <VIS>spiral stare</VIS> winds up.", "also wrong text entirely"]
    )
    concepts = extract_visual_concepts(make_short(body), [], chat, pipeline_cfg)
    assert concepts == []
    assert len(chat.requests) == pipeline_cfg.concept_attempts


def test_concept_previous_sentence_context(pipeline_cfg):
    body = "First sentence here. Second sentence now. Third one closes."
    chat = StubChat(
        ["First sentence here.", "Second sentence now.", "Third one closes."]
    )
    extract_visual_concepts(make_short(body), [], chat, pipeline_cfg)
    assert "Previous sentences: (none)" in chat.requests[0].user_text
    assert "First sentence here." in chat.requests[1].user_text
    assert "First sentence here. Second sentence now." in chat.requests[2].user_text


@given(st.integers(0, 6), st.integers(1, 3))
def test_concepts_verbatim_substring_property(seed, n_sent):
    words = ["kitchen", "sunny", "pond", "garden", "walls", "fine"]
    body = " ".join(
        " ".join(words[(seed + i + j) % len(words)] for j in range(4)) + "."
        for i in range(n_sent)
    )
    short = make_short(body)
    chat = FakeChatProvider(seed=seed)
    concepts = extract_visual_concepts(short, ["d"], chat, PipelineConfig())
    for c in concepts:
        assert short.body[c.start : c.end] == c.phrase
    starts = [c.start for c in concepts]
    assert starts == sorted(starts)


# ---------------------------------------------------------------------------
# clip descriptions

def test_describe_clips_order_and_placeholder(pipeline_cfg, tour_project, store):
    chat = StubChat(
        ["first desc", ProviderUnavailable("down"), "third desc"]
    )
    cfg = PipelineConfig(max_workers=1)
    out = describe_clips(tour_project.clips[:3], ["a.png", "b.png", "c.png"], chat, cfg)
    assert out == ["first desc", "", "third desc"]


# ---------------------------------------------------------------------------
# alternative text

def test_alternative_text_happy_path(pipeline_cfg):
    chat = StubChat(["Intro speech<NEW>Check out this pond.</NEW>Outro speech"])
    got = generate_alternative_text(
        "Intro speech", "Outro speech", 4.0, "", (None, "kf.png", None), chat, pipeline_cfg
    )
    assert got == "Check out this pond."


def test_alternative_text_first_entry_empty_before_section(pipeline_cfg):
    chat = StubChat(["<NEW>Fresh opener here.</NEW>After text"])
    got = generate_alternative_text(
        None, "After text", 3.0, "", (None, "kf.png", "after.png"), chat, pipeline_cfg
    )
    assert got == "Fresh opener here."
    user = chat.requests[0].user_text
    assert "BEFORE:\n\n\n\n" in user  # both keyframe and speech slots empty


def test_alternative_text_neighbor_mismatch_fails(pipeline_cfg):
    chat = StubChat(
        [
            "Wrong before<NEW>x</NEW>Outro speech",
            "Intro speech<NEW>y</NEW>Wrong after",
        ]
    )
    with pytest.raises(GenerationFailed):
        generate_alternative_text(
            "Intro speech", "Outro speech", 4.0, "", (None, "kf.png", None), chat, pipeline_cfg
        )
    assert len(chat.requests) == pipeline_cfg.alternative_attempts


def test_alternative_text_fake_scales_with_duration(pipeline_cfg):
    chat = FakeChatProvider(seed=2)
    short = generate_alternative_text(
        "Before words", "After words", 2.0, "", (None, "kf.png", None), chat, pipeline_cfg
    )
    long = generate_alternative_text(
        "Before words", "After words", 10.0, "", (None, "kf.png", None), chat, pipeline_cfg
    )
    assert len(long.split()) > len(short.split())


# ---------------------------------------------------------------------------
# short-transcript segmentation

def test_segment_short_transcript_titles_and_partition(pipeline_cfg):
    body = "Welcome home. The kitchen shines. The garden blooms."
    chat = StubChat(
        [
            "<TITLE> Intro\n<SEG> Welcome home.\n"
            "<TITLE> Rooms\n<SEG> The kitchen shines. The garden blooms."
        ]
    )
    segs = segment_short_transcript(make_short(body), chat, pipeline_cfg)
    assert [(t, s) for t, s, _ in segs] == [
        ("Intro", "Welcome home."),
        ("Rooms", "The kitchen shines. The garden blooms."),
    ]
    spans = [span for _, _, span in segs]
    assert spans == [(0, 14), (14, len(body))]
    assert normalize_ws(" ".join(s for _, s, _ in segs)) == normalize_ws(body)


def test_segment_altered_text_falls_back_to_sentences(pipeline_cfg):
    body = "Welcome home. The kitchen shines."
    chat = StubChat(
        [
            "<TITLE> A\n<SEG> Welcome house.",  # altered word
            "<TITLE> A\n<SEG> Welcome home. Extra invented text.",  # added text
        ]
    )
    segs = segment_short_transcript(make_short(body), chat, pipeline_cfg)
    assert [s for _, s, _ in segs] == ["Welcome home.", "The kitchen shines."]


def test_segment_single_sentence_body(pipeline_cfg):
    chat = StubChat(["<TITLE> All\n<SEG> Only sentence."])
    segs = segment_short_transcript(make_short("Only sentence."), chat, pipeline_cfg)
    assert len(segs) == 1
    assert segs[0][2] == (0, len("Only sentence."))


def test_locate_segment_spans_partitions_exactly():
    body = "One two.  Three four. Five."
    spans = locate_segment_spans(body, ["One two.", "Three four. Five."])
    assert spans == [(0, 10), (10, len(body))]
    assert body[spans[0][0] : spans[0][1]] + body[spans[1][0] : spans[1][1]] == body
