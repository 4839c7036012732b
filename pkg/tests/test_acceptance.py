"""Acceptance suite: one test per exit criterion, each printing a PASS/FAIL
line (run with ``pytest tests/test_acceptance.py -s`` to see them inline).

Everything runs under deterministic fake providers; no criterion needs the
network, real models, or the TypeScript client.
"""

import itertools
import os
import random
import time
from contextlib import contextmanager

import pytest

from conftest import reference_release_and_replace
from shortform import fixtures, pipeline, renderer
from shortform.blender import BlendConfig, SlotDecision, Segment, select_permutation
from shortform.config import PipelineConfig
from shortform.errors import ParseError
from shortform.formats import (
    parse_description_scores,
    parse_replacement,
    parse_tagged_phrases,
    parse_title_body,
    parse_titled_segments,
)
from shortform.ingest import ingest_video
from shortform.matcher import MatchConfig, ScoreVector, assign, position_score
from shortform.project_store import ProjectStore
from shortform.providers import ProviderConfig, build_providers
from shortform.providers.base import CoherenceScorer
from shortform.providers.fakes import FakeCoherenceScorer
from shortform.renderer import RenderConfig, fit_speed
from shortform.timeline import EditDecisionList

SEED = 0
WORD_BUDGET = 150  # 150 words * 0.40 s/word = 60 s target duration
TARGET_S = WORD_BUDGET * 0.40


@contextmanager
def criterion(number, description, budget_s):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[FAIL] criterion {number}: {description}")
        raise
    elapsed = time.perf_counter() - start
    assert elapsed < budget_s, f"criterion {number} took {elapsed:.1f}s, budget {budget_s}s"
    print(f"[PASS] criterion {number}: {description} ({elapsed:.2f}s)")


def run_pipeline(video, mode, tmp_path, tag, threshold=0.08, preset="draft"):
    providers = build_providers(
        ProviderConfig(seed=SEED), short_words_target=int(WORD_BUDGET * 0.9)
    )
    store = ProjectStore(str(tmp_path / f"store_{tag}"))
    project = ingest_video(video, providers, store)
    result = pipeline.generate(
        project,
        store,
        providers,
        PipelineConfig(word_budget=WORD_BUDGET),
        MatchConfig(),
        BlendConfig(threshold=threshold),
        mode=mode,
    )
    project = result.project
    project.revision += 1
    store.save(project)
    return renderer.render(project, store, providers, RenderConfig(), preset=preset)


# ---------------------------------------------------------------------------

def test_criterion_1_position_score():
    with criterion(1, "position-score closed form, symmetry, anchors", 1.0):
        assert position_score(0.5, 0.5) == 1.0
        assert position_score(0.0, 1.0) == 0.0
        rng = random.Random(101)
        for _ in range(1000):
            a, b = rng.random(), rng.random()
            assert abs(position_score(a, b) - (1.0 - abs(a - b))) < 1e-9
            assert position_score(a, b) == position_score(b, a)


def test_criterion_2_deduplication():
    from test_matcher import make_clips, make_concept, table_from_matrix

    with criterion(2, "iterative release-and-replace matches the reference", 10.0):
        rng = random.Random(202)
        clips = make_clips(8)
        concepts = [make_concept(i) for i in range(5)]
        for _ in range(200):
            matrix = [[round(rng.random(), 6) for _ in range(8)] for _ in range(5)]
            table = table_from_matrix(concepts, clips, matrix)
            got = assign(concepts, clips, table, MatchConfig())
            ref = reference_release_and_replace(5, clips, lambda c, j: matrix[c][j])
            assert got.mapping == {
                concepts[c].concept_id: clips[j].clip_id for c, j in ref.items()
            }
            assert len(set(got.mapping.values())) == 5


class _CountingLoss(CoherenceScorer):
    def __init__(self, seed):
        self.inner = FakeCoherenceScorer(seed)
        self.calls = 0

    def lm_loss(self, text):
        self.calls += 1
        return self.inner.lm_loss(text)


def test_criterion_3_permutation_selection():
    import dataclasses

    def decisions_for(k):
        out = []
        for i in range(k):
            slot = Segment(
                seg_id=f"a{i}", kind="abstractive", title="t", text=f"slot words {i}",
                rel_pos=0.5, noun_phrase_count=0, clip_id="c000", char_span=(0, 1),
            )
            backer = Segment(
                seg_id=f"e{i}", kind="extractive", title="t", text=f"candidate words {i}",
                rel_pos=0.5, noun_phrase_count=0, clip_id="c000",
                time_span=(float(i), float(i) + 2.0),
            )
            out.append(
                SlotDecision(index=i, slot=slot, best_extractive=backer,
                             score_a=0.5, score_e=0.5, ambiguous=True, margin=0.0)
            )
        return out

    with criterion(3, "permutation equals exhaustive minimum, 2^k loss calls", 30.0):
        base = build_providers(ProviderConfig(seed=SEED))
        for k in range(0, 9):
            scorer = _CountingLoss(seed=300 + k)
            providers = dataclasses.replace(base, coherence=scorer)
            decisions = decisions_for(k)
            perm = select_permutation(decisions, BlendConfig(), providers)
            if k == 0:
                # zero ambiguous slots short-circuit: all-A without any loss call
                assert scorer.calls == 0
                assert perm.choices == () and perm.loss is None
                continue
            assert scorer.calls == 2 ** k
            best = None
            for bits in itertools.product("AE", repeat=k):
                text = " ".join(
                    d.best_extractive.text if b == "E" else d.slot.text
                    for d, b in zip(decisions, bits)
                )
                key = (scorer.inner.lm_loss(text), bits.count("E"), bits)
                if best is None or key < best:
                    best = key
            assert perm.choices == best[2]
            assert perm.loss == pytest.approx(best[0])


GOLDEN_COMPLETIONS = [
    # (parser, args, expected)
    (parse_title_body, ("House Tour Highlights<SEP>Welcome to the house.",),
     ("House Tour Highlights", "Welcome to the house.")),
    (parse_title_body, ("T<SEP>B",), ("T", "B")),
    (parse_title_body, ("A Day <SEP> Out we go.",), ("A Day", "Out we go.")),
    (parse_title_body, ("Steps<SEP>One half cup.\nThen stir.",), ("Steps", "One half cup.\nThen stir.")),
    (parse_tagged_phrases, ("the <VIS>spiral staircase</VIS> winds up", "the spiral staircase winds up"),
     [("spiral staircase", 4, 20)]),
    (parse_tagged_phrases, ("a <VIS>kitchen</VIS> and <VIS>pond</VIS>", "a kitchen and pond"),
     [("kitchen", 2, 9), ("pond", 14, 18)]),
    (parse_tagged_phrases, ("no tags at all", "no tags at all"), []),
    (parse_tagged_phrases, ("<VIS>pond</VIS> first", "pond first"), [("pond", 0, 4)]),
    (parse_titled_segments, ("<TITLE> Intro\n<SEG> Welcome home.\n<TITLE> Kitchen\n<SEG> The kitchen shines.",),
     [("Intro", "Welcome home."), ("Kitchen", "The kitchen shines.")]),
    (parse_titled_segments, ("<TITLE> All\n<SEG> One sentence.",), [("All", "One sentence.")]),
    (parse_titled_segments, ("<TITLE> A\n\n<SEG> First.\n\n<TITLE> B\n\n<SEG> Second.",),
     [("A", "First."), ("B", "Second.")]),
    (parse_titled_segments, ("<TITLE> S\n<SEG> Line one.\nLine two.",), [("S", "Line one.\nLine two.")]),
    (parse_replacement, ("Intro speech<NEW>Check out this pond.</NEW>Outro speech", "Intro speech", "Outro speech"),
     "Check out this pond."),
    (parse_replacement, ("<NEW>Opener.</NEW>After part.", None, "After part."), "Opener."),
    (parse_replacement, ("Before part.<NEW>Closer.</NEW>", "Before part.", None), "Closer."),
    (parse_replacement, ("A<NEW> spaced out </NEW>B", "A", "B"), "spaced out"),
    (parse_description_scores, ("A black image\n0\nA spiral staircase\n0.9", 2),
     [("A black image", 0.0), ("A spiral staircase", 0.9)]),
    (parse_description_scores, ("A kitchen\n\n0.75\n\nA garden\n\n0.25", 2),
     [("A kitchen", 0.75), ("A garden", 0.25)]),
    (parse_description_scores, ("Clamped high\n1.4\nClamped low\n-2", 2),
     [("Clamped high", 1.0), ("Clamped low", 0.0)]),
    (parse_description_scores, ("A pond\n0.5", 1), [("A pond", 0.5)]),
]

MALFORMED_COMPLETIONS = [
    (parse_title_body, ("no separator",)),
    (parse_title_body, ("a<SEP>b<SEP>c",)),
    (parse_title_body, ("<SEP>body only",)),
    (parse_title_body, ("title only<SEP>",)),
    (parse_title_body, ("",)),
    (parse_tagged_phrases, ("the <VIS>broken", "the broken")),
    (parse_tagged_phrases, ("odd</VIS> close", "odd close")),
    (parse_tagged_phrases, ("a <VIS></VIS> b", "a  b")),
    (parse_tagged_phrases, ("x <VIS>kitchin</VIS> y", "x kitchen y")),
    (parse_tagged_phrases, ("word <VIS>pond</VIS>", "other <VIS>pond</VIS>")),
    (parse_titled_segments, ("prose with no markers",)),
    (parse_titled_segments, ("<SEG> orphan segment",)),
    (parse_titled_segments, ("<TITLE> a\n<TITLE> b\n<SEG> s",)),
    (parse_titled_segments, ("<TITLE> a\n<SEG> s\n<TITLE> dangling",)),
    (parse_titled_segments, ("",)),
    (parse_replacement, ("missing closer<NEW>x", "missing closer", None)),
    (parse_replacement, ("wrong<NEW>x</NEW>after", "expected", "after")),
    (parse_replacement, ("a<NEW></NEW>b", "a", "b")),
    (parse_replacement, ("a<NEW>x</NEW>b<NEW>y</NEW>c", "a", "c")),
    (parse_description_scores, ("A kitchen\n0.9", 2)),
    (parse_description_scores, ("A kitchen\nnot a number", 1)),
    (parse_description_scores, ("0.4\n0.9", 1)),
    (parse_description_scores, ("", 1)),
]


def test_criterion_4_parser_golden_suite():
    with criterion(4, "parser golden suite (incl. black-image rule)", 5.0):
        assert len(GOLDEN_COMPLETIONS) >= 20
        assert len(MALFORMED_COMPLETIONS) >= 20
        for parser, args, expected in GOLDEN_COMPLETIONS:
            assert parser(*args) == expected
        for parser, args in MALFORMED_COMPLETIONS:
            with pytest.raises(ParseError):
                parser(*args)


def test_criterion_5_baseline_knapsack():
    from shortform.blender import knapsack_select

    with criterion(5, "knapsack equals brute-force optimum (<=12 sentences)", 20.0):
        rng = random.Random(505)
        for _ in range(100):
            n = rng.randint(1, 12)
            scores = [rng.randrange(1, 1024) / 1024.0 for _ in range(n)]  # dyadic
            weights = [rng.randint(5, 120) for _ in range(n)]  # deciseconds
            capacity = rng.randint(20, 500)
            chosen = knapsack_select(scores, weights, capacity)
            assert sum(weights[i] for i in chosen) <= capacity
            best = 0.0
            for r in range(n + 1):
                for combo in itertools.combinations(range(n), r):
                    if sum(weights[i] for i in combo) <= capacity:
                        best = max(best, sum(scores[i] for i in combo))
            assert sum(scores[i] for i in chosen) == best


def test_criterion_6_duration_envelope(tour_video, tmp_path):
    with criterion(6, f"all three modes land within ±15% of {TARGET_S:.0f}s", 300.0):
        for mode in ("abstractive", "extractive", "mixed"):
            result = run_pipeline(tour_video, mode, tmp_path, tag=mode)
            low, high = 0.85 * TARGET_S, 1.15 * TARGET_S
            assert low <= result.total_duration_s <= high, (
                f"{mode}: {result.total_duration_s:.1f}s outside [{low:.1f}, {high:.1f}]"
            )


def test_criterion_7_speed_fit():
    cfg = RenderConfig()
    with criterion(7, "speed-fit contract on 500 random duration pairs", 1.0):
        rng = random.Random(707)
        for _ in range(500):
            clip = rng.uniform(0.2, 90.0)
            speech = rng.uniform(0.2, 90.0)
            fit = fit_speed(clip, speech, cfg)
            ideal = clip / speech
            if cfg.speed_min <= ideal <= cfg.speed_max:
                assert abs(fit.output_s - speech) <= 0.050
                assert fit.trim_src_s == 0.0 and fit.freeze_s == 0.0
            elif ideal > cfg.speed_max:
                assert fit.speed == cfg.speed_max
                assert fit.trim_src_s == pytest.approx(clip - speech * cfg.speed_max)
                assert fit.output_s == pytest.approx(speech)
            else:
                assert fit.speed == cfg.speed_min
                assert fit.freeze_s == pytest.approx(speech - clip / cfg.speed_min)
                assert fit.output_s == pytest.approx(speech)


def test_criterion_8_end_to_end_determinism(tour_video, tmp_path):
    from fastapi.testclient import TestClient

    from shortform.cli import main
    from shortform.service import create_app, replay_events

    with criterion(8, "byte-identical EDLs across runs; event replay exact", 120.0):
        edls = []
        for name in ("r1", "r2"):
            out = str(tmp_path / name)
            assert main(
                ["run", tour_video, "--mode", "mixed", "--out", out,
                 "--seed", str(SEED), "--word-budget", str(WORD_BUDGET), "--preset", "draft"]
            ) == 0
            import json

            manifest = json.load(open(os.path.join(out, "manifest.json")))
            edls.append(open(manifest["outputs"]["edl"], "rb").read())
        assert edls[0] == edls[1]

        app = create_app(
            str(tmp_path / "svc"),
            provider_config=ProviderConfig(seed=SEED),
            cfg=PipelineConfig(word_budget=WORD_BUDGET),
        )
        with TestClient(app) as client:
            pid = "replay_acc"
            client.post("/projects", json={"video": tour_video, "project_id": pid})
            client.post(f"/projects/{pid}/generate?mode=abstractive", json={})
            doc = client.get(f"/projects/{pid}").json()
            entry_id = doc["timeline"][0]["entry_id"]
            for op, payload in (
                ("edit_speech", {"entry_id": entry_id, "text": "Exact replay words."}),
                ("toggle_mode", {"entry_id": entry_id}),
                ("add_clip", {"clip_id": doc["clips"][1]["clip_id"], "index": 0}),
            ):
                rev = client.get(f"/projects/{pid}").json()["revision"]
                r = client.post(
                    f"/projects/{pid}/mutations",
                    json={"base_revision": rev, "op": op, "payload": payload},
                )
                assert r.status_code == 200
            svc = app.state.service
            events = svc.store.read_events(pid)
            fresh = ProjectStore(str(tmp_path / "svc_fresh"))
            providers = build_providers(
                ProviderConfig(seed=SEED), short_words_target=int(WORD_BUDGET * 0.9)
            )
            replay_events(
                tour_video, events, fresh, providers,
                PipelineConfig(word_budget=WORD_BUDGET), MatchConfig(), BlendConfig(),
                project_id=pid,
            )
            assert fresh.state_bytes(pid) == svc.store.state_bytes(pid)


def test_criterion_9_blend_structural_check(tour_video, tmp_path):
    with criterion(9, "mixed EDL holds both modes; threshold 0 is the all-A fixed point", 60.0):
        mixed = run_pipeline(tour_video, "mixed", tmp_path, tag="mixed9")
        modes = {r.mode for r in mixed.edl.records}
        assert modes == {"abstractive", "extractive"}

        zero = run_pipeline(tour_video, "mixed", tmp_path, tag="zero9", threshold=0.0)
        pure = run_pipeline(tour_video, "abstractive", tmp_path, tag="pure9")
        assert open(zero.edl_path, "rb").read() == open(pure.edl_path, "rb").read()
