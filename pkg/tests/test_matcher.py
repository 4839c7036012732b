"""Scoring, shortlist, assignment, and initial-timeline construction."""

import random

import numpy as np
import pytest

from conftest import reference_release_and_replace
from shortform import media
from shortform.config import normalize_weights
from shortform.errors import DomainError, InsufficientClips
from shortform.ingest import Clip
from shortform.matcher import (
    Assignment,
    MatchConfig,
    ScoreVector,
    assign,
    build_initial_timeline,
    compute_score_table,
    export_score_table,
    position_score,
    score_pair,
    score_shortlist,
    shortlist_rank_key,
)
from shortform.transcript import ShortTranscript, VisualConcept


def make_clips(n, duration=100.0, speeches=None, tags=None, tmp_path=None):
    clips = []
    for i in range(n):
        start = i * duration / n
        end = (i + 1) * duration / n
        keyframe = f"kf_{i}.png"
        if tmp_path is not None:
            keyframe = str(tmp_path / f"kf_{i}.png")
            media.save_keyframe_png(
                np.zeros((4, 4, 3), dtype=np.uint8),
                [tags[i]] if tags else ["untagged"],
                keyframe,
            )
        clips.append(
            Clip(
                clip_id=f"c{i:03d}",
                start_s=start,
                end_s=end,
                keyframe=keyframe,
                speech=(speeches[i] if speeches else f"clip {i} speech"),
                rel_pos=(start + end) / 2 / duration,
            )
        )
    return clips


def make_concept(i, phrase="kitchen", rel=0.5):
    return VisualConcept(
        concept_id=f"vc{i:03d}",
        phrase=phrase,
        sentence_index=0,
        start=0,
        end=len(phrase),
        rel_pos=rel,
    )


# ---------------------------------------------------------------------------
# position score

def test_position_score_anchors():
    assert position_score(0.5, 0.5) == 1.0
    assert position_score(0.0, 1.0) == 0.0
    assert position_score(0.25, 0.75) == 0.5


def test_position_score_formula_and_symmetry():
    rng = random.Random(42)
    for _ in range(1000):
        a, b = rng.random(), rng.random()
        assert abs(position_score(a, b) - (1.0 - abs(a - b))) < 1e-9
        assert position_score(a, b) == position_score(b, a)


def test_position_score_domain():
    with pytest.raises(DomainError):
        position_score(-0.1, 0.5)
    with pytest.raises(DomainError):
        position_score(0.5, 1.1)


# ---------------------------------------------------------------------------
# pair scoring

def test_empty_clip_speech_scores_zero(tmp_path, providers):
    clips = make_clips(1, speeches=[""], tags=["kitchen"], tmp_path=tmp_path)
    vec = score_pair(make_concept(0), clips[0], clips[0].keyframe, MatchConfig(), providers)
    assert vec.speech_sim == 0.0


def test_degenerate_weights_pick_single_metric(tmp_path, providers):
    clips = make_clips(1, speeches=["the kitchen here"], tags=["kitchen"], tmp_path=tmp_path)
    cfg = MatchConfig(weights=(1.0, 0.0, 0.0, 0.0))
    vec = score_pair(make_concept(0), clips[0], clips[0].keyframe, cfg, providers)
    assert vec.combined == pytest.approx(vec.speech_sim)


def test_perfect_match_bound(tmp_path, providers):
    clips = make_clips(1, duration=100.0, speeches=["kitchen"], tags=["kitchen"], tmp_path=tmp_path)
    concept = make_concept(0, phrase="kitchen", rel=clips[0].rel_pos)
    vec = score_pair(concept, clips[0], clips[0].keyframe, MatchConfig(), providers)
    assert vec.speech_sim == pytest.approx(1.0, abs=1e-6)
    assert vec.keyframe_sim == pytest.approx(1.0, abs=1e-6)
    assert vec.pos_score == 1.0
    assert vec.combined >= 0.75


def test_combined_monotone_in_each_metric():
    rng = random.Random(7)
    weights = normalize_weights((0.3, 0.2, 0.1, 0.4))
    for _ in range(200):
        base = [rng.random() for _ in range(4)]
        v0 = ScoreVector.from_metrics(*base, weights)
        for k in range(4):
            bumped = list(base)
            bumped[k] = min(1.0, bumped[k] + 0.1)
            v1 = ScoreVector.from_metrics(*bumped, weights)
            assert v1.combined >= v0.combined - 1e-12


def test_metric_range_validated():
    with pytest.raises(DomainError):
        ScoreVector.from_metrics(1.2, 0, 0, 0, (0.25, 0.25, 0.25, 0.25))


# ---------------------------------------------------------------------------
# shortlist scoring

class StubChat:
    def __init__(self, completions):
        self.completions = list(completions)
        self.requests = []

    def chat(self, req):
        self.requests.append(req)
        return self.completions.pop(0)


def test_shortlist_prompt_highlights_concept(tmp_path, providers):
    clips = make_clips(2, tags=["kitchen", "pond"], tmp_path=tmp_path)
    chat = StubChat(["A kitchen\n0.9\nA pond\n0.1"])
    bundle_providers = providers
    original_chat = bundle_providers.chat
    bundle_providers.chat = chat
    try:
        scores = score_shortlist(
            make_concept(0, "spiral staircase"),
            "now the spiral staircase appears",
            clips,
            [c.keyframe for c in clips],
            ["d1", "d2"],
            MatchConfig(),
            bundle_providers,
        )
    finally:
        bundle_providers.chat = original_chat
    assert scores == [0.9, 0.1]
    user = chat.requests[0].user_text
    assert "***spiral staircase***" in user
    assert "now the ***spiral staircase*** appears" in user
    assert chat.requests[0].images == tuple(c.keyframe for c in clips)


def test_shortlist_wrong_count_degrades_to_zeros(tmp_path, providers):
    clips = make_clips(2, tags=["kitchen", "pond"], tmp_path=tmp_path)
    chat = StubChat(["A kitchen\n0.9"] * 3)  # one pair short, every attempt
    original_chat = providers.chat
    providers.chat = chat
    try:
        scores = score_shortlist(
            make_concept(0),
            "the kitchen",
            clips,
            [c.keyframe for c in clips],
            ["", ""],
            MatchConfig(),
            providers,
        )
    finally:
        providers.chat = original_chat
    assert scores == [0.0, 0.0]
    assert len(chat.requests) == MatchConfig().scoring_attempts


def test_shortlist_size_caps_table(tmp_path, providers):
    tags = ["kitchen", "pond", "garden", "garage"]
    clips = make_clips(4, speeches=["kitchen things", "pond life", "garden rows", "garage door"],
                       tags=tags, tmp_path=tmp_path)
    concepts = [make_concept(0, "kitchen", rel=0.1)]
    short = ShortTranscript.from_parts("T", "the kitchen wins.")
    cfg = MatchConfig(llm_shortlist_size=2)
    keyframes = {c.clip_id: c.keyframe for c in clips}
    table = compute_score_table(concepts, clips, keyframes, ["", "", "", ""], short, cfg, providers)
    scored = [cid for (vc, cid), vec in table.items() if vec.llm_score > 0]
    assert len(scored) <= 2


# ---------------------------------------------------------------------------
# assignment

def table_from_matrix(concepts, clips, matrix):
    table = {}
    for i, con in enumerate(concepts):
        for j, clip in enumerate(clips):
            s = matrix[i][j]
            table[(con.concept_id, clip.clip_id)] = ScoreVector(s, s, s, s, s)
    return table


def test_assign_single_concept_takes_argmax():
    clips = make_clips(3)
    concepts = [make_concept(0)]
    table = table_from_matrix(concepts, clips, [[0.2, 0.9, 0.4]])
    out = assign(concepts, clips, table, MatchConfig())
    assert out.mapping == {"vc000": "c001"}


def test_assign_two_concepts_contested_clip():
    # both want clip 1; the 0.9 claimant keeps it, the other takes its rank-2
    clips = make_clips(3)
    concepts = [make_concept(0), make_concept(1)]
    matrix = [
        [0.10, 0.90, 0.50],
        [0.20, 0.70, 0.60],
    ]
    table = table_from_matrix(concepts, clips, matrix)
    out = assign(concepts, clips, table, MatchConfig())
    assert out.mapping == {"vc000": "c001", "vc001": "c002"}


def test_assign_tie_breaks_to_earlier_clip_start():
    clips = make_clips(3)
    concepts = [make_concept(0)]
    table = table_from_matrix(concepts, clips, [[0.9, 0.9, 0.2]])
    out = assign(concepts, clips, table, MatchConfig())
    assert out.mapping == {"vc000": "c000"}


def test_assign_requires_enough_clips():
    clips = make_clips(1)
    concepts = [make_concept(0), make_concept(1)]
    table = table_from_matrix(concepts, clips, [[0.5], [0.4]])
    with pytest.raises(InsufficientClips):
        assign(concepts, clips, table, MatchConfig())


def test_assign_matches_reference_on_random_tables():
    rng = random.Random(1234)
    clips = make_clips(8)
    concepts = [make_concept(i) for i in range(5)]
    for _ in range(50):
        matrix = [[round(rng.random(), 6) for _ in range(8)] for _ in range(5)]
        table = table_from_matrix(concepts, clips, matrix)
        got = assign(concepts, clips, table, MatchConfig())
        ref = reference_release_and_replace(5, clips, lambda c, j: matrix[c][j])
        assert got.mapping == {
            concepts[c].concept_id: clips[j].clip_id for c, j in ref.items()
        }
        assert len(set(got.mapping.values())) == len(concepts)  # injective


def test_assign_rank_never_better_than_solo_argmax():
    rng = random.Random(99)
    clips = make_clips(8)
    concepts = [make_concept(i) for i in range(5)]
    for _ in range(50):
        matrix = [[rng.random() for _ in range(8)] for _ in range(5)]
        table = table_from_matrix(concepts, clips, matrix)
        out = assign(concepts, clips, table, MatchConfig())
        for i, con in enumerate(concepts):
            ranking = sorted(
                range(8), key=lambda j: (-matrix[i][j], clips[j].start_s, clips[j].clip_id)
            )
            assigned_rank = ranking.index(
                next(j for j, c in enumerate(clips) if c.clip_id == out.mapping[con.concept_id])
            )
            assert assigned_rank >= 0  # rank 0 is the solo argmax; it can only move down
            assert matrix[i][ranking[0]] >= matrix[i][ranking[assigned_rank]]


def test_assign_argmax_invariant_under_weight_rescaling():
    rng = random.Random(5)
    clips = make_clips(6)
    concepts = [make_concept(i) for i in range(3)]
    metrics = {
        (i, j): tuple(rng.random() for _ in range(4))
        for i in range(3)
        for j in range(6)
    }

    def build_table(weights):
        table = {}
        for i, con in enumerate(concepts):
            for j, clip in enumerate(clips):
                table[(con.concept_id, clip.clip_id)] = ScoreVector.from_metrics(
                    *metrics[(i, j)], weights
                )
        return table

    w = normalize_weights((0.1, 0.2, 0.3, 0.4))
    w_rescaled = normalize_weights(tuple(7.5 * x for x in w))
    out_a = assign(concepts, clips, build_table(w), MatchConfig(weights=w))
    out_b = assign(concepts, clips, build_table(w_rescaled), MatchConfig(weights=w_rescaled))
    assert out_a.mapping == out_b.mapping


def test_guide_bonus_flips_argmax():
    clips = make_clips(3)
    concepts = [make_concept(0)]
    # c001 leads by less than the bonus; boosting c002 flips the argmax
    table = table_from_matrix(concepts, clips, [[0.10, 0.80, 0.70]])
    plain = assign(concepts, clips, table, MatchConfig())
    boosted = assign(
        concepts, clips, table, MatchConfig(), bonus_clip_ids=frozenset({"c002"}), bonus=0.15
    )
    assert plain.mapping == {"vc000": "c001"}
    assert boosted.mapping == {"vc000": "c002"}


def test_export_score_table_shape():
    clips = make_clips(2)
    concepts = [make_concept(0)]
    table = table_from_matrix(concepts, clips, [[0.1, 0.2]])
    text = export_score_table(concepts, clips, table)
    lines = text.strip().splitlines()
    assert lines[0].startswith("concept_id\tclip_id")
    assert len(lines) == 3


# ---------------------------------------------------------------------------
# initial timeline

def body_with_concepts(length, starts, phrase="needle"):
    chars = list("x" * length)
    concepts = []
    for i, s in enumerate(starts):
        for k, ch in enumerate(phrase):
            chars[s + k] = ch
        concepts.append(
            VisualConcept(
                concept_id=f"vc{i:03d}",
                phrase=phrase,
                sentence_index=0,
                start=s,
                end=s + len(phrase),
                rel_pos=(s + s + len(phrase)) / 2 / length,
            )
        )
    chars[-1] = "."
    body = "".join(chars)
    return body, concepts


def test_timeline_speech_intervals_partition_body(tmp_path, providers):
    body, concepts = body_with_concepts(200, [0, 80, 150])
    short = ShortTranscript.from_parts("T", body)
    clips = make_clips(3, tags=["kitchen", "pond", "garden"], tmp_path=tmp_path)
    mapping = {c.concept_id: clips[i].clip_id for i, c in enumerate(concepts)}
    assignment = Assignment(mapping=mapping)
    keyframes = {c.clip_id: c.keyframe for c in clips}
    entries = build_initial_timeline(
        short, assignment, [], concepts, clips, keyframes, providers
    )
    texts = [e.speech_text for e in entries]
    assert [len(t) for t in texts] == [80, 70, 50]
    assert "".join(texts) == body
    assert [e.clip_id for e in entries] == ["c000", "c001", "c002"]


def test_timeline_zero_concepts_best_keyframe(tmp_path, providers):
    short = ShortTranscript.from_parts("T", "A tour of the quiet pond today.")
    clips = make_clips(3, tags=["kitchen", "pond", "garden"], tmp_path=tmp_path)
    keyframes = {c.clip_id: c.keyframe for c in clips}
    entries = build_initial_timeline(
        short, Assignment(mapping={}), [], [], clips, keyframes, providers
    )
    assert len(entries) == 1
    assert entries[0].speech_text == short.body
    assert entries[0].clip_id == "c001"  # the pond-tagged keyframe


def test_timeline_entries_ordered_by_concept_span(tmp_path, providers):
    body, concepts = body_with_concepts(120, [40, 5, 90])  # unsorted input order
    short = ShortTranscript.from_parts("T", body)
    clips = make_clips(3, tmp_path=tmp_path, tags=["a", "b", "c"])
    mapping = {c.concept_id: clips[i].clip_id for i, c in enumerate(concepts)}
    entries = build_initial_timeline(
        short, Assignment(mapping=mapping), [], concepts, clips,
        {c.clip_id: c.keyframe for c in clips}, providers
    )
    assert "".join(e.speech_text for e in entries) == body
    assert [e.order_index for e in entries] == [0, 1, 2]
