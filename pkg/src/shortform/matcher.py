"""Score long-form clips against visual concepts and assign the best ones.

Four metrics per (concept, clip) pair — speech similarity, keyframe
similarity, a model score over a shortlist, and positional alignment — are
combined with simplex weights. Assignment is the iterative release-and-replace
procedure: every concept takes its argmax clip, then contested clips are kept
by their highest-scoring claimant while the others step down their own
rankings until the mapping is injective.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import permutations

from .config import EQUAL_WEIGHTS, Weights, normalize_weights, validate_weights
from .errors import DomainError, InsufficientClips, ParseError, ShortformError
from .formats import parse_description_scores
from .ingest import Clip
from .prompts import build
from .providers import ChatRequest, ProviderBundle, cosine_01
from .textutil import strip_leading_ws
from .timeline import TimelineEntry
from .transcript import ShortTranscript, VisualConcept

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MatchConfig:
    weights: Weights = EQUAL_WEIGHTS
    llm_shortlist_size: int = 25
    dedup_max_iters: int = 10000
    scoring_attempts: int = 3
    optimal_assignment: bool = False  # comparison-only, never the default

    def __post_init__(self):
        validate_weights(self.weights)
        if self.llm_shortlist_size < 1:
            raise DomainError("llm_shortlist_size must be >= 1")


@dataclass(frozen=True)
class ScoreVector:
    speech_sim: float
    keyframe_sim: float
    llm_score: float
    pos_score: float
    combined: float

    @classmethod
    def from_metrics(
        cls,
        speech_sim: float,
        keyframe_sim: float,
        llm_score: float,
        pos_score: float,
        weights: Weights,
    ) -> "ScoreVector":
        for name, v in (
            ("speech_sim", speech_sim),
            ("keyframe_sim", keyframe_sim),
            ("llm_score", llm_score),
            ("pos_score", pos_score),
        ):
            if not (0.0 <= v <= 1.0):
                raise DomainError(f"{name} must be in [0, 1], got {v}")
        w1, w2, w3, w4 = weights
        combined = w1 * speech_sim + w2 * keyframe_sim + w3 * llm_score + w4 * pos_score
        return cls(speech_sim, keyframe_sim, llm_score, pos_score, combined)


@dataclass
class Assignment:
    mapping: dict[str, str]  # concept_id -> clip_id, injective
    table: dict[tuple[str, str], ScoreVector] = field(default_factory=dict)

    def score_for(self, concept_id: str, clip_id: str) -> ScoreVector:
        return self.table[(concept_id, clip_id)]


def position_score(pos_concept: float, pos_clip: float) -> float:
    """1 - |a - b| for positions in [0, 1]."""
    if not (0.0 <= pos_concept <= 1.0) or not (0.0 <= pos_clip <= 1.0):
        raise DomainError("positions must be in [0, 1]")
    return 1.0 - abs(pos_concept - pos_clip)


def score_pair(
    concept: VisualConcept,
    clip: Clip,
    keyframe_path: str,
    cfg: MatchConfig,
    providers: ProviderBundle,
    llm_score: float = 0.0,
) -> ScoreVector:
    """Score one (concept, clip) pair; llm_score defaults to 0 off-shortlist."""
    if clip.speech.strip():
        speech_sim = cosine_01(
            providers.text_embedder.embed_text(clip.speech),
            providers.text_embedder.embed_text(concept.phrase),
        )
    else:
        speech_sim = 0.0  # music-only shots score nothing on speech
    keyframe_sim = cosine_01(
        providers.joint_embedder.embed_image_text(image=keyframe_path),
        providers.joint_embedder.embed_image_text(text=concept.phrase),
    )
    pos = position_score(concept.rel_pos, clip.rel_pos)
    return ScoreVector.from_metrics(speech_sim, keyframe_sim, llm_score, pos, cfg.weights)


def shortlist_rank_key(vec: ScoreVector, weights: Weights) -> float:
    """Combination of the three non-model metrics under renormalized weights."""
    w1, w2, _, w4 = weights
    sub = normalize_weights((w1, w2, w4))
    return sub[0] * vec.speech_sim + sub[1] * vec.keyframe_sim + sub[2] * vec.pos_score


def score_shortlist(
    concept: VisualConcept,
    sentence_text: str,
    shortlist: list[Clip],
    keyframe_paths: list[str],
    descriptions: list[str],
    cfg: MatchConfig,
    providers: ProviderBundle,
) -> list[float]:
    """Model scores for the shortlisted clips, in shortlist order.

    The concept is highlighted as ***concept*** inside its sentence. The
    completion must contain exactly one description/score pair per clip;
    after the attempt budget the scores degrade to all zeros with a warning.
    """
    rel = sentence_text.find(concept.phrase)
    if rel >= 0:
        embedded = (
            sentence_text[:rel]
            + f"***{concept.phrase}***"
            + sentence_text[rel + len(concept.phrase):]
        )
    else:
        embedded = f"***{concept.phrase}***"
    n = len(shortlist)
    system, user = build(
        "clip_scoring",
        {
            "n": str(n),
            "embedded_visual_concept": embedded,
            "images": "\n".join(f"[image {i + 1}]" for i in range(n)),
            "image_descriptions": "\n".join(
                f"{i + 1}. {d or '(none)'}" for i, d in enumerate(descriptions)
            ),
            "speech": "\n".join(
                f"{i + 1}. {c.speech or '(none)'}" for i, c in enumerate(shortlist)
            ),
        },
    )
    req = ChatRequest(system_text=system, user_text=user, images=tuple(keyframe_paths))
    for _ in range(cfg.scoring_attempts):
        try:
            completion = providers.chat.chat(req)
            pairs = parse_description_scores(completion, n)
            return [score for _, score in pairs]
        except (ParseError, ShortformError) as exc:
            log.warning("shortlist scoring rejected: %s", exc)
    log.warning("shortlist scoring failed %d times; degrading to zeros", cfg.scoring_attempts)
    return [0.0] * n


def compute_score_table(
    concepts: list[VisualConcept],
    clips: list[Clip],
    keyframes: dict[str, str],
    descriptions: list[str],
    short: ShortTranscript,
    cfg: MatchConfig,
    providers: ProviderBundle,
) -> dict[tuple[str, str], ScoreVector]:
    """Full score table; llm_score filled only for each concept's shortlist."""
    desc_by_clip = {c.clip_id: d for c, d in zip(clips, descriptions)}
    table: dict[tuple[str, str], ScoreVector] = {}
    for concept in concepts:
        base = {
            clip.clip_id: score_pair(concept, clip, keyframes[clip.clip_id], cfg, providers)
            for clip in clips
        }
        k = min(cfg.llm_shortlist_size, len(clips))
        shortlist = sorted(
            clips,
            key=lambda c: (-shortlist_rank_key(base[c.clip_id], cfg.weights), c.start_s, c.clip_id),
        )[:k]
        sentence = short.sentences[concept.sentence_index].text
        sentence, _ = strip_leading_ws(sentence)
        llm_scores = score_shortlist(
            concept,
            sentence.rstrip(),
            shortlist,
            [keyframes[c.clip_id] for c in shortlist],
            [desc_by_clip.get(c.clip_id, "") for c in shortlist],
            cfg,
            providers,
        )
        by_clip = {c.clip_id: s for c, s in zip(shortlist, llm_scores)}
        for clip in clips:
            vec = base[clip.clip_id]
            table[(concept.concept_id, clip.clip_id)] = ScoreVector.from_metrics(
                vec.speech_sim,
                vec.keyframe_sim,
                by_clip.get(clip.clip_id, 0.0),
                vec.pos_score,
                cfg.weights,
            )
    return table


# ---------------------------------------------------------------------------
# assignment


def assign(
    concepts: list[VisualConcept],
    clips: list[Clip],
    table: dict[tuple[str, str], ScoreVector],
    cfg: MatchConfig,
    bonus_clip_ids: frozenset[str] = frozenset(),
    bonus: float = 0.0,
) -> Assignment:
    """Assign each concept a distinct clip via iterative release-and-replace.

    Procedure (deterministic):
      1. Each concept ranks all clips by (combined desc, clip start asc,
         clip_id asc) and claims its rank-0 clip.
      2. While any clip has multiple claimants: for every contested clip in
         (start, clip_id) order, the claimant with the highest combined score
         keeps it (ties: the earlier concept), every other claimant advances
         one step down its own ranking.
    A concept's candidate rank only increases, so the loop terminates and,
    with at least as many clips as concepts, never runs off a ranking.
    """
    if len(clips) < len(concepts):
        raise InsufficientClips(
            f"{len(concepts)} concepts need at least that many clips, have {len(clips)}"
        )
    if not concepts:
        return Assignment(mapping={}, table=dict(table))

    def combined(concept_id: str, clip: Clip) -> float:
        score = table[(concept_id, clip.clip_id)].combined
        return score + (bonus if clip.clip_id in bonus_clip_ids else 0.0)

    if cfg.optimal_assignment:
        return _optimal_assign(concepts, clips, table, combined)

    clip_by_id = {c.clip_id: c for c in clips}
    rankings = [
        sorted(clips, key=lambda cl: (-combined(con.concept_id, cl), cl.start_s, cl.clip_id))
        for con in concepts
    ]
    ptr = [0] * len(concepts)

    for _ in range(cfg.dedup_max_iters):
        claims: dict[str, list[int]] = {}
        for i, ranking in enumerate(rankings):
            claims.setdefault(ranking[ptr[i]].clip_id, []).append(i)
        contested = [cid for cid, cs in claims.items() if len(cs) > 1]
        if not contested:
            break
        contested.sort(key=lambda cid: (clip_by_id[cid].start_s, cid))
        for clip_id in contested:
            claimants = claims[clip_id]
            winner = max(
                claimants,
                key=lambda i: (combined(concepts[i].concept_id, clip_by_id[clip_id]), -i),
            )
            for i in claimants:
                if i == winner:
                    continue
                if ptr[i] + 1 >= len(rankings[i]):
                    raise DomainError("deduplication ran off a ranking; clips < concepts?")
                ptr[i] += 1
    else:
        raise DomainError(f"deduplication did not converge in {cfg.dedup_max_iters} iterations")

    mapping = {
        con.concept_id: rankings[i][ptr[i]].clip_id for i, con in enumerate(concepts)
    }
    return Assignment(mapping=mapping, table=dict(table))


def _optimal_assign(concepts, clips, table, combined) -> Assignment:
    """Exhaustive maximum-total-score assignment; comparison runs only."""
    if len(concepts) > 8:
        raise DomainError("optimal assignment is a comparison flag, limited to 8 concepts")
    best = None
    for combo in permutations(range(len(clips)), len(concepts)):
        total = sum(combined(con.concept_id, clips[j]) for con, j in zip(concepts, combo))
        if best is None or total > best[0] + 1e-12:
            best = (total, combo)
    mapping = {
        con.concept_id: clips[j].clip_id for con, j in zip(concepts, best[1])
    }
    return Assignment(mapping=mapping, table=dict(table))


def export_score_table(
    concepts: list[VisualConcept],
    clips: list[Clip],
    table: dict[tuple[str, str], ScoreVector],
) -> str:
    """Tab-separated score matrix for debugging."""
    lines = ["concept_id\tclip_id\tspeech_sim\tkeyframe_sim\tllm_score\tpos_score\tcombined"]
    for con in concepts:
        for clip in clips:
            v = table[(con.concept_id, clip.clip_id)]
            lines.append(
                f"{con.concept_id}\t{clip.clip_id}\t{v.speech_sim:.4f}\t{v.keyframe_sim:.4f}"
                f"\t{v.llm_score:.4f}\t{v.pos_score:.4f}\t{v.combined:.4f}"
            )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# initial timeline


def build_initial_timeline(
    short: ShortTranscript,
    assignment: Assignment,
    segments: list[tuple[str, str, tuple[int, int]]],
    concepts: list[VisualConcept],
    clips: list[Clip],
    keyframes: dict[str, str],
    providers: ProviderBundle,
    default_voice: str = "default",
) -> list[TimelineEntry]:
    """One abstractive entry per concept, speech intervals partitioning the body.

    Entry i speaks the body from concept i's span start (0 for the first) to
    concept i+1's span start (body end for the last). With zero concepts the
    whole body goes to the clip whose keyframe best matches it.
    """
    ordered = sorted(concepts, key=lambda c: (c.start, c.end))
    entries: list[TimelineEntry] = []

    def make_entry(idx: int, text: str, clip_id: str, concept_id: str | None, title: str | None):
        clip = next(c for c in clips if c.clip_id == clip_id)
        return TimelineEntry(
            entry_id=f"e{idx:03d}",
            order_index=idx,
            mode="abstractive",
            clip_id=clip_id,
            src_start_s=clip.start_s,
            src_end_s=clip.end_s,
            speech_text=text,
            voice_id=default_voice,
            concept_id=concept_id,
            segment_title=title,
        ).validate()

    def title_at(pos: int) -> str | None:
        for title, _text, (a, b) in segments:
            if a <= pos < b:
                return title
        return None

    if not ordered:
        body_vec = providers.joint_embedder.embed_image_text(text=short.body)
        best = max(
            clips,
            key=lambda c: (
                cosine_01(providers.joint_embedder.embed_image_text(image=keyframes[c.clip_id]), body_vec),
                -c.start_s,
            ),
        )
        return [make_entry(0, short.body, best.clip_id, None, title_at(0))]

    for i, concept in enumerate(ordered):
        start = 0 if i == 0 else ordered[i].start
        end = ordered[i + 1].start if i + 1 < len(ordered) else len(short.body)
        text = short.body[start:end]
        entries.append(
            make_entry(i, text, assignment.mapping[concept.concept_id], concept.concept_id, title_at(start))
        )
    return entries
