import os

import pytest

from shortform import fixtures
from shortform.blender import BlendConfig
from shortform.config import PipelineConfig
from shortform.ingest import ingest_video
from shortform.matcher import MatchConfig
from shortform.project_store import ProjectStore
from shortform.providers import ProviderConfig, build_providers

SEED = 0
WORD_BUDGET = 150
SHORT_WORDS_TARGET = 135


@pytest.fixture(scope="session")
def tour_video(tmp_path_factory):
    out = tmp_path_factory.mktemp("fixture")
    return fixtures.build_house_tour(str(out))


@pytest.fixture(scope="session")
def tiny_video(tmp_path_factory):
    out = tmp_path_factory.mktemp("fixture_tiny")
    return fixtures.build_tiny(str(out))


@pytest.fixture(scope="session")
def providers():
    return build_providers(ProviderConfig(seed=SEED), short_words_target=SHORT_WORDS_TARGET)


@pytest.fixture()
def pipeline_cfg():
    return PipelineConfig(word_budget=WORD_BUDGET)


@pytest.fixture()
def match_cfg():
    return MatchConfig()


@pytest.fixture()
def blend_cfg():
    return BlendConfig()


@pytest.fixture()
def store(tmp_path):
    return ProjectStore(str(tmp_path / "store"))


@pytest.fixture()
def tour_project(tour_video, providers, store):
    return ingest_video(tour_video, providers, store)


@pytest.fixture()
def tiny_project(tiny_video, providers, store):
    return ingest_video(tiny_video, providers, store)


@pytest.fixture(scope="session")
def generated_session(tour_video, providers, tmp_path_factory):
    """One abstractive generation shared by read-only tests."""
    from shortform import pipeline

    store = ProjectStore(str(tmp_path_factory.mktemp("gen_store")))
    project = ingest_video(tour_video, providers, store)
    result = pipeline.generate(
        project,
        store,
        providers,
        PipelineConfig(word_budget=WORD_BUDGET),
        MatchConfig(),
        BlendConfig(),
        mode="abstractive",
    )
    store.save(result.project)
    return result.project, store


def keyframes_for(project, store):
    from shortform.ingest import keyframe_path

    return {
        c.clip_id: keyframe_path(project, store, c.clip_id) for c in project.clips
    }


def reference_release_and_replace(n_concepts, clips, combined):
    """Independent restatement of the iterative release-and-replace procedure.

    ``combined(c, j)`` is the combined score of concept c for clip index j.
    Used as the oracle the production ``assign`` must match step for step.
    """
    order = {
        c: sorted(
            range(len(clips)),
            key=lambda j: (-combined(c, j), clips[j].start_s, clips[j].clip_id),
        )
        for c in range(n_concepts)
    }
    pos = {c: 0 for c in range(n_concepts)}
    while True:
        holders = {}
        for c in range(n_concepts):
            holders.setdefault(order[c][pos[c]], []).append(c)
        clashes = {j: cs for j, cs in holders.items() if len(cs) > 1}
        if not clashes:
            break
        for j in sorted(clashes, key=lambda j: (clips[j].start_s, clips[j].clip_id)):
            keep = max(clashes[j], key=lambda c: (combined(c, j), -c))
            for c in clashes[j]:
                if c != keep:
                    pos[c] += 1
    return {c: order[c][pos[c]] for c in range(n_concepts)}
