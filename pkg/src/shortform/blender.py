"""Blend the abstractive timeline with extractive long-form segments.

Each abstractive timeline slot is scored against its best extractive
candidate on four metrics; slots where the difference stays under a threshold
open into permutations, and the permutation with the lowest language-model
loss wins. Also hosts the extractive comparison baseline (sentence scoring
against a model summary plus an exact knapsack over durations).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import product

from .config import EQUAL_WEIGHTS, PipelineConfig, Weights, validate_weights
from .errors import DomainError, ShortformError
from .ingest import ProjectState, _sentences_from_words
from .prompts import build
from .providers import ChatRequest, ProviderBundle, cosine_01
from .timeline import MIN_ENTRY_SECONDS, TimelineEntry
from .transcript import ShortTranscript

log = logging.getLogger(__name__)

DURATION_RESOLUTION_S = 0.1


@dataclass(frozen=True)
class BlendConfig:
    threshold: float = 0.08
    weights: Weights = EQUAL_WEIGHTS
    max_ambiguous_slots: int = 8

    def __post_init__(self):
        if self.threshold < 0:
            raise DomainError("threshold must be >= 0")
        validate_weights(self.weights)
        if self.max_ambiguous_slots < 0:
            raise DomainError("max_ambiguous_slots must be >= 0")


@dataclass(frozen=True)
class Segment:
    seg_id: str
    kind: str  # "abstractive" | "extractive"
    title: str
    text: str
    rel_pos: float
    noun_phrase_count: int
    clip_id: str  # representative clip (keyframe source)
    char_span: tuple[int, int] | None = None  # abstractive: span in the short body
    time_span: tuple[float, float] | None = None  # extractive: span in the video

    def __post_init__(self):
        if not self.text.strip():
            raise DomainError("segment text must be non-empty")
        if self.kind not in ("abstractive", "extractive"):
            raise DomainError(f"unknown segment kind: {self.kind}")
        if self.noun_phrase_count < 0:
            raise DomainError("noun_phrase_count must be >= 0")


@dataclass(frozen=True)
class SegmentScore:
    speech_sim: float
    visual_conn: float
    coverage: float
    pos_score: float
    combined: float


@dataclass
class SlotDecision:
    """Blend outcome for one abstractive slot."""

    index: int
    slot: Segment
    best_extractive: Segment | None
    score_a: float
    score_e: float | None
    ambiguous: bool
    margin: float | None = None
    forced_off: bool = False  # was ambiguous but cut by the slot cap


@dataclass(frozen=True)
class Permutation:
    choices: tuple[str, ...]  # "A" | "E" per slot
    text: str
    loss: float | None

    def __post_init__(self):
        if any(c not in ("A", "E") for c in self.choices):
            raise DomainError("choices must be 'A' or 'E'")


# ---------------------------------------------------------------------------
# segment construction


def abstractive_slots(
    project: ProjectState,
    short: ShortTranscript,
    noun_phrases,
) -> list[Segment]:
    """One blend slot per abstractive timeline entry.

    Entry speech texts partition the short body, so each slot's char span is
    recovered from cumulative lengths; rel_pos is the span midpoint over the
    body length.
    """
    slots = []
    cursor = 0
    for i, entry in enumerate(project.timeline):
        if entry.mode != "abstractive":
            raise DomainError("blending expects a purely abstractive timeline")
        text = entry.speech_text or ""
        span = (cursor, cursor + len(text))
        cursor += len(text)
        stripped = text.strip()
        slots.append(
            Segment(
                seg_id=f"slot{i:03d}",
                kind="abstractive",
                title=entry.segment_title or f"Shot {i + 1}",
                text=stripped,
                rel_pos=((span[0] + span[1]) / 2.0) / max(1, len(short.body)),
                noun_phrase_count=len(noun_phrases.extract_noun_phrases(stripped)),
                clip_id=entry.clip_id,
                char_span=span,
            )
        )
    return slots


def extractive_segments(project: ProjectState, narration_segments, noun_phrases) -> list[Segment]:
    """Wrap long-form narration segments for blending."""
    out = []
    for seg in narration_segments:
        mid = (seg.start_s + seg.end_s) / 2.0
        clip = next(
            (c for c in project.clips if c.start_s <= mid < c.end_s), project.clips[-1]
        )
        out.append(
            Segment(
                seg_id=seg.seg_id,
                kind="extractive",
                title=seg.seg_id,
                text=seg.text,
                rel_pos=seg.rel_pos,
                noun_phrase_count=len(noun_phrases.extract_noun_phrases(seg.text)),
                clip_id=clip.clip_id,
                time_span=(seg.start_s, seg.end_s),
            )
        )
    return out


# ---------------------------------------------------------------------------
# scoring


def score_segment_pair(
    a: Segment,
    e: Segment,
    np_max: int,
    cfg: BlendConfig,
    providers: ProviderBundle,
    keyframes: dict[str, str],
) -> SegmentScore:
    """Score candidate segment ``e`` for slot ``a``.

    speech_sim compares the two texts; visual_conn, coverage describe the
    candidate itself (its text against its own keyframe, its noun phrases);
    pos_score compares relative positions. Scoring a slot against itself
    (``e is a``) yields the slot's self score.
    """
    speech_sim = cosine_01(
        providers.text_embedder.embed_text(a.text),
        providers.text_embedder.embed_text(e.text),
    )
    visual_conn = cosine_01(
        providers.joint_embedder.embed_image_text(text=e.text),
        providers.joint_embedder.embed_image_text(image=keyframes[e.clip_id]),
    )
    coverage = e.noun_phrase_count / max(1, np_max)
    pos_score = 1.0 - abs(a.rel_pos - e.rel_pos)
    w1, w2, w3, w4 = cfg.weights
    combined = w1 * speech_sim + w2 * visual_conn + w3 * coverage + w4 * pos_score
    return SegmentScore(speech_sim, visual_conn, coverage, pos_score, combined)


def find_ambiguous_slots(
    slots: list[Segment],
    candidates: list[Segment],
    cfg: BlendConfig,
    providers: ProviderBundle,
    keyframes: dict[str, str],
) -> list[SlotDecision]:
    """Decide per slot whether the extractive alternative is a close call.

    Each slot's self score is compared with its best extractive candidate;
    the slot is ambiguous iff |score_e - score_a| < threshold (strict). An
    extractive segment may back at most one slot: backers are claimed
    greedily by score, earlier slot winning ties. If more slots are ambiguous
    than the cap allows, the lowest-margin ones beyond the cap are forced
    back to the abstractive choice.
    """
    if not slots or not candidates:
        raise DomainError("both segment lists must be non-empty")

    decisions = []
    pair_scores: dict[tuple[int, int], float] = {}
    for si, slot in enumerate(slots):
        np_max = max(1, slot.noun_phrase_count, max(c.noun_phrase_count for c in candidates))
        self_score = score_segment_pair(slot, slot, np_max, cfg, providers, keyframes).combined
        for ei, cand in enumerate(candidates):
            pair_scores[(si, ei)] = score_segment_pair(
                slot, cand, np_max, cfg, providers, keyframes
            ).combined
        decisions.append(
            SlotDecision(
                index=si,
                slot=slot,
                best_extractive=None,
                score_a=self_score,
                score_e=None,
                ambiguous=False,
            )
        )

    # greedy backer claim: best remaining (slot, candidate) pair first
    order = sorted(
        pair_scores.items(), key=lambda kv: (-kv[1], kv[0][0], kv[0][1])
    )
    backed: set[int] = set()
    claimed: set[int] = set()
    for (si, ei), score in order:
        if si in backed or ei in claimed:
            continue
        backed.add(si)
        claimed.add(ei)
        d = decisions[si]
        d.best_extractive = candidates[ei]
        d.score_e = score
        d.margin = abs(score - d.score_a)
        d.ambiguous = d.margin < cfg.threshold

    ambiguous = [d for d in decisions if d.ambiguous]
    if len(ambiguous) > cfg.max_ambiguous_slots:
        # closest-call slots gain the least from permutation search
        ambiguous.sort(key=lambda d: (-(d.margin or 0.0), d.index))
        for d in ambiguous[cfg.max_ambiguous_slots:]:
            d.ambiguous = False
            d.forced_off = True
    return decisions


# ---------------------------------------------------------------------------
# permutation selection


def realize_transcript(decisions: list[SlotDecision], choices: tuple[str, ...]) -> str:
    parts = []
    for d, choice in zip(decisions, choices):
        seg = d.best_extractive if choice == "E" else d.slot
        parts.append(seg.text)
    return " ".join(parts)


def select_permutation(
    decisions: list[SlotDecision],
    cfg: BlendConfig,
    providers: ProviderBundle,
) -> Permutation:
    """Enumerate all 2^k permutations over ambiguous slots; minimize LM loss.

    Ties break toward fewer extractive choices, then lexicographically with
    A before E. With zero ambiguous slots the all-A permutation is returned
    without any loss call; a coherence-provider failure also degrades to
    all-A with a warning.
    """
    amb = [d.index for d in decisions if d.ambiguous]
    all_a = tuple("A" for _ in decisions)
    if not amb:
        return Permutation(choices=all_a, text=realize_transcript(decisions, all_a), loss=None)

    best: tuple[float, int, tuple[str, ...]] | None = None
    best_text = ""
    try:
        for bits in product("AE", repeat=len(amb)):
            choices = list(all_a)
            for idx, bit in zip(amb, bits):
                choices[idx] = bit
            choices_t = tuple(choices)
            text = realize_transcript(decisions, choices_t)
            loss = providers.coherence.lm_loss(text)
            key = (loss, choices_t.count("E"), choices_t)
            if best is None or key < best:
                best = key
                best_text = text
    except ShortformError as exc:
        log.warning("coherence provider failed (%s); keeping the abstractive cut", exc)
        return Permutation(choices=all_a, text=realize_transcript(decisions, all_a), loss=None)
    return Permutation(choices=best[2], text=best_text, loss=best[0])


def apply_blend(
    timeline: list[TimelineEntry],
    permutation: Permutation,
    decisions: list[SlotDecision],
) -> list[TimelineEntry]:
    """Replace E-chosen slots with extractive entries; A slots pass through.

    The all-A permutation is the identity. Replacement entries keep the slot's
    entry id and order, span the extractive segment's time range, and default
    denoise on for consistent sound next to synthesized narration.
    """
    if not (len(timeline) == len(decisions) == len(permutation.choices)):
        raise DomainError("timeline, slots, and choices must align one to one")
    out: list[TimelineEntry] = []
    for entry, decision, choice in zip(timeline, decisions, permutation.choices):
        if choice == "A":
            out.append(entry)
            continue
        seg = decision.best_extractive
        if seg is None or seg.time_span is None:
            raise DomainError(f"slot {decision.index} chose E without an extractive backer")
        out.append(
            TimelineEntry(
                entry_id=entry.entry_id,
                order_index=entry.order_index,
                mode="extractive",
                clip_id=seg.clip_id,
                src_start_s=seg.time_span[0],
                src_end_s=seg.time_span[1],
                denoise=True,
                saved_speech_text=entry.speech_text,
                segment_title=seg.title,
            ).validate()
        )
    return out


@dataclass
class BlendReport:
    threshold: float
    decisions: list[SlotDecision] = field(default_factory=list)
    permutation: Permutation | None = None
    losses: dict[str, float] = field(default_factory=dict)

    def to_text(self) -> str:
        lines = [f"threshold\t{self.threshold}"]
        for d in self.decisions:
            lines.append(
                "\t".join(
                    (
                        f"slot{d.index}",
                        f"{d.score_a:.4f}",
                        "-" if d.score_e is None else f"{d.score_e:.4f}",
                        d.best_extractive.seg_id if d.best_extractive else "-",
                        "ambiguous" if d.ambiguous else ("capped" if d.forced_off else "fixed"),
                    )
                )
            )
        if self.permutation:
            lines.append("chosen\t" + "".join(self.permutation.choices))
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# extractive baseline


def knapsack_select(values: list[float], weights: list[int], capacity: int) -> list[int]:
    """Exact 0/1 knapsack (max total value, total weight <= capacity).

    Returns selected indices in input order. Equal-value states keep the
    item out, so the reconstruction is deterministic.
    """
    n = len(values)
    if capacity < 0:
        raise DomainError("capacity must be >= 0")
    dp = [[0.0] * (capacity + 1) for _ in range(n + 1)]
    for j in range(1, n + 1):
        w, v = weights[j - 1], values[j - 1]
        prev, cur = dp[j - 1], dp[j]
        for c in range(capacity + 1):
            cur[c] = prev[c]
            if w <= c and prev[c - w] + v > cur[c]:
                cur[c] = prev[c - w] + v
    chosen = []
    c = capacity
    for j in range(n, 0, -1):
        if dp[j][c] != dp[j - 1][c]:
            chosen.append(j - 1)
            c -= weights[j - 1]
    chosen.reverse()
    return chosen


def deciseconds(seconds: float) -> int:
    return int(round(seconds / DURATION_RESOLUTION_S))


def extractive_baseline(
    project: ProjectState,
    target_duration_s: float,
    providers: ProviderBundle,
    cfg: PipelineConfig,
) -> list[TimelineEntry]:
    """Sentence-selection baseline: score sentences against a model summary,
    then pick the subset maximizing total score within the duration budget.

    Output entries are extractive and keep the original temporal order. If no
    single sentence fits the budget, the shortest one is selected with a
    warning rather than returning an empty timeline.
    """
    if not project.words:
        raise DomainError("project has no transcript")
    if target_duration_s < 15.0:
        raise DomainError("baseline target must be at least 15 s")

    ranges = _sentences_from_words(project.words)
    sentences = []
    for a, b in ranges:
        ws = project.words[a:b]
        sentences.append(
            {
                "text": " ".join(w.text for w in ws),
                "start_s": ws[0].start_s,
                "end_s": ws[-1].end_s,
            }
        )

    system, user = build("baseline_summary", {"transcript": project.transcript_text()})
    summary = providers.chat.chat(ChatRequest(system_text=system, user_text=user))
    summary_vec = providers.text_embedder.embed_text(summary)
    scores = [
        cosine_01(providers.text_embedder.embed_text(s["text"]), summary_vec)
        for s in sentences
    ]
    weights = [deciseconds(s["end_s"] - s["start_s"]) for s in sentences]
    capacity = deciseconds(target_duration_s)

    chosen = knapsack_select(scores, weights, capacity)
    if not chosen:
        shortest = min(range(len(sentences)), key=lambda i: (weights[i], i))
        log.warning("no sentence fits the %.1f s budget; keeping the shortest one", target_duration_s)
        chosen = [shortest]

    entries = []
    for order, idx in enumerate(sorted(chosen)):
        s = sentences[idx]
        start, end = s["start_s"], s["end_s"]
        if end - start < MIN_ENTRY_SECONDS:  # pad ultra-short sentences
            pad = (MIN_ENTRY_SECONDS - (end - start)) / 2.0
            start = max(0.0, start - pad)
            end = min(project.duration_s, start + MIN_ENTRY_SECONDS)
        mid = (start + end) / 2.0
        clip = next(
            (c for c in project.clips if c.start_s <= mid < c.end_s), project.clips[-1]
        )
        entries.append(
            TimelineEntry(
                entry_id=f"e{order:03d}",
                order_index=order,
                mode="extractive",
                clip_id=clip.clip_id,
                src_start_s=start,
                src_end_s=end,
            ).validate()
        )
    return entries
