"""Short-form narration generation and every structured-completion op.

Each op assembles its prompt from the shipped templates, calls the chat
provider, and parses the completion with the strict parsers in ``formats``.
Malformed completions are retried within an explicit budget; what happens
after the budget differs per op (hard failure, skip, or fallback) and is
documented on each function.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor

from .config import PipelineConfig
from .errors import GenerationFailed, ParseError, ShortformError
from .formats import (
    parse_replacement,
    parse_tagged_phrases,
    parse_title_body,
    parse_titled_segments,
)
from .prompts import build
from .providers import ChatProvider, ChatRequest
from .textutil import normalize_ws, strip_leading_ws, word_count
from .transcript import ShortTranscript, VisualConcept

log = logging.getLogger(__name__)


def ordered_map(fn, items, max_workers: int = 4):
    """Run ``fn`` over items concurrently, returning results in input order."""
    if max_workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# short-form transcript


def generate_short_transcript(
    long_transcript: str,
    noun_phrases: list[str],
    chat: ChatProvider,
    cfg: PipelineConfig,
) -> ShortTranscript:
    """Generate the short-form transcript (title + body).

    Completions are rejected and retried when the separator is missing, the
    body exceeds the word budget, or a banned written form slips through;
    exhausting the attempt budget raises GenerationFailed.
    """
    if not long_transcript.strip():
        raise GenerationFailed("long transcript is empty")
    system, user = build(
        "short_transcript",
        {
            "visual_concepts": ", ".join(noun_phrases),
            "long_form_transcript": long_transcript,
        },
    )
    last_problem = ""
    for _ in range(cfg.transcript_attempts):
        completion = chat.chat(ChatRequest(system_text=system, user_text=user))
        try:
            title, body = parse_title_body(completion)
        except ParseError as exc:
            last_problem = str(exc)
            continue
        if word_count(body) > cfg.word_budget:
            last_problem = f"body has {word_count(body)} words, budget is {cfg.word_budget}"
            continue
        banned = [a for a in cfg.abbreviation_blacklist if a in body]
        if banned:
            last_problem = f"body contains banned written forms: {banned}"
            continue
        try:
            return ShortTranscript.from_parts(title, body)
        except ShortformError as exc:
            last_problem = str(exc)
    raise GenerationFailed(
        f"no well-formed transcript after {cfg.transcript_attempts} attempts: {last_problem}"
    )


# ---------------------------------------------------------------------------
# clip descriptions


def describe_clips(clips, keyframe_paths: list[str], chat: ChatProvider, cfg: PipelineConfig) -> list[str]:
    """One short visual description per clip, order preserved.

    A provider failure degrades to an empty-string placeholder with a warning
    rather than failing the pipeline.
    """
    system, user = build("clip_description", {"image": "[keyframe attached]"})

    def describe(path: str) -> str:
        try:
            return chat.chat(ChatRequest(system_text=system, user_text=user, images=(path,)))
        except ShortformError as exc:
            log.warning("clip description failed (%s); using empty placeholder", exc)
            return ""

    return ordered_map(describe, keyframe_paths, cfg.max_workers)


# ---------------------------------------------------------------------------
# visual concepts


def extract_visual_concepts(
    short: ShortTranscript,
    clip_descriptions: list[str],
    chat: ChatProvider,
    cfg: PipelineConfig,
) -> list[VisualConcept]:
    """Tag visually concrete phrases per sentence and map them to body spans.

    The completion must reproduce the sentence exactly outside the tags; a
    mismatched completion is retried once, then the sentence is skipped with
    a warning (sentences may legitimately yield zero concepts).
    """
    descriptions_block = "\n".join(
        f"Shot {i + 1}: {d}" if d else f"Shot {i + 1}: (no description)"
        for i, d in enumerate(clip_descriptions)
    ) or "(no shot descriptions)"

    found: list[tuple[int, int, int, str]] = []  # (body_start, body_end, sent_idx, phrase)
    for sentence in short.sentences:
        text, lead = strip_leading_ws(sentence.text)
        text = text.rstrip()
        if not text:
            continue
        prev = " ".join(
            s.text.strip()
            for s in short.sentences[max(0, sentence.index - cfg.concept_context_sentences) : sentence.index]
        )
        system, user = build(
            "visual_concepts",
            {
                "previous_sentences": prev or "(none)",
                "sentence": text,
                "long_form_shot_descriptions": descriptions_block,
            },
        )
        spans = None
        for _ in range(cfg.concept_attempts):
            completion = chat.chat(ChatRequest(system_text=system, user_text=user))
            try:
                spans = parse_tagged_phrases(completion, text)
                break
            except ParseError as exc:
                log.warning("concept tagging rejected for sentence %d: %s", sentence.index, exc)
        if spans is None:
            log.warning("skipping sentence %d after repeated malformed tagging", sentence.index)
            continue
        for phrase, start, end in spans:
            body_start = sentence.start + lead + start
            found.append((body_start, body_start + len(phrase), sentence.index, phrase))

    found.sort(key=lambda t: (t[0], t[1]))
    concepts: list[VisualConcept] = []
    last_end = -1
    for start, end, sent_idx, phrase in found:
        if start < last_end:  # overlapping tags: keep the first, drop the rest
            continue
        concept = VisualConcept(
            concept_id=f"vc{len(concepts):03d}",
            phrase=phrase,
            sentence_index=sent_idx,
            start=start,
            end=end,
            rel_pos=((start + end) / 2.0) / len(short.body),
        ).validate_against(short.body)
        concepts.append(concept)
        last_end = end
    return concepts


# ---------------------------------------------------------------------------
# alternative speech text


def generate_alternative_text(
    before_speech: str | None,
    after_speech: str | None,
    target_duration_s: float,
    context: str,
    keyframes: tuple[str | None, str, str | None],
    chat: ChatProvider,
    cfg: PipelineConfig,
) -> str:
    """Write replacement speech for one shot given its neighbors.

    The completion must echo the neighbor speech around the <NEW> block; a
    mismatch is rejected and retried once before GenerationFailed.
    """
    before_kf, replace_kf, after_kf = keyframes
    images = tuple(p for p in keyframes if p)
    system, user = build(
        "alternative_text",
        {
            "extra_context": context or "(none)",
            "before_keyframe": "[keyframe attached]" if before_kf else "",
            "before_speech": before_speech or "",
            "replace_keyframe": "[keyframe attached]",
            "replace_duration": f"{target_duration_s:.1f} seconds",
            "after_keyframe": "[keyframe attached]" if after_kf else "",
            "after_speech": after_speech or "",
        },
    )
    last_problem = ""
    for _ in range(cfg.alternative_attempts):
        completion = chat.chat(
            ChatRequest(system_text=system, user_text=user, images=images)
        )
        try:
            return parse_replacement(completion, before_speech, after_speech)
        except ParseError as exc:
            last_problem = str(exc)
    raise GenerationFailed(
        f"no well-formed replacement after {cfg.alternative_attempts} attempts: {last_problem}"
    )


# ---------------------------------------------------------------------------
# short-transcript segmentation


def locate_segment_spans(body: str, seg_texts: list[str]) -> list[tuple[int, int]]:
    """Map segment texts back to body char spans, ignoring whitespace runs.

    Precondition: the segment texts concatenate to the body up to whitespace
    normalization. The returned spans partition the body exactly.
    """
    starts = [0]
    cursor = 0
    for seg in seg_texts[:-1]:
        compact = "".join(seg.split())
        matched = 0
        while matched < len(compact):
            if cursor >= len(body):
                raise ParseError("titled_segments", "segment text ran past the body")
            ch = body[cursor]
            if ch.isspace():
                cursor += 1
                continue
            if ch != compact[matched]:
                raise ParseError("titled_segments", "segment text diverged from the body")
            matched += 1
            cursor += 1
        while cursor < len(body) and body[cursor].isspace():
            cursor += 1
        starts.append(cursor)
    spans = []
    for i, start in enumerate(starts):
        end = starts[i + 1] if i + 1 < len(starts) else len(body)
        spans.append((start, end))
    return spans


def segment_short_transcript(
    short: ShortTranscript,
    chat: ChatProvider,
    cfg: PipelineConfig,
) -> list[tuple[str, str, tuple[int, int]]]:
    """Segment the body into titled blocks via the segmentation prompt.

    The segment texts must reproduce the body up to whitespace normalization
    ("do not write or remove text"); otherwise the call is retried once and
    then falls back to one segment per sentence. Returns
    ``(title, text, body_span)`` triples whose spans partition the body.
    """
    system, user = build("segmentation", {"transcript": short.body})
    for _ in range(cfg.segmentation_attempts):
        completion = chat.chat(ChatRequest(system_text=system, user_text=user))
        try:
            pairs = parse_titled_segments(completion)
        except ParseError as exc:
            log.warning("segmentation rejected: %s", exc)
            continue
        joined = normalize_ws(" ".join(text for _, text in pairs))
        if joined != normalize_ws(short.body):
            log.warning("segmentation altered the transcript text; retrying")
            continue
        spans = locate_segment_spans(short.body, [text for _, text in pairs])
        return [
            (title, text, span) for (title, text), span in zip(pairs, spans)
        ]
    log.warning("segmentation fell back to per-sentence segments")
    return [
        (f"Sentence {s.index + 1}", s.text.strip(), (s.start, s.end))
        for s in short.sentences
        if s.text.strip()
    ]
