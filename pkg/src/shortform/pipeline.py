"""Generation pipeline: abstractive cut, optional blend, or the baseline.

Three modes mirror the comparison conditions:
  * ``abstractive`` — generated narration matched to clips
  * ``extractive``  — sentence-selection baseline over the original audio
  * ``mixed``       — abstractive cut with close-call slots blended to
                      extractive segments by coherence
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from . import abstractive, blender, ingest, matcher
from .blender import BlendConfig, BlendReport
from .config import PipelineConfig
from .errors import DomainError, NoSpeech
from .ingest import ProjectState
from .matcher import MatchConfig
from .providers import ProviderBundle

log = logging.getLogger(__name__)

MODES = ("abstractive", "extractive", "mixed")


@dataclass
class GenerateResult:
    project: ProjectState
    blend_report: BlendReport | None = None
    score_table_tsv: str | None = None


def _keyframe_map(project: ProjectState, store) -> dict[str, str]:
    return {
        clip.clip_id: ingest.keyframe_path(project, store, clip.clip_id)
        for clip in project.clips
    }


def _namespace_entry_ids(project: ProjectState) -> None:
    """Entry ids are served on project-less routes, so they carry the project id."""
    for i, entry in enumerate(project.timeline):
        entry.entry_id = f"{project.project_id}:e{i:03d}"


def generate(
    project: ProjectState,
    store,
    providers: ProviderBundle,
    cfg: PipelineConfig,
    match_cfg: MatchConfig,
    blend_cfg: BlendConfig,
    mode: str = "abstractive",
    guide_clip_ids: tuple[str, ...] = (),
) -> GenerateResult:
    """Run the pipeline for ``mode`` and replace the project timeline.

    Guide clips get an additive bonus on their combined score during
    assignment, which is exactly how user-selected clips steer the result.
    The project object is updated in place but not persisted; callers commit.
    """
    if mode not in MODES:
        raise DomainError(f"unknown mode: {mode} (expected one of {MODES})")
    if not project.words:
        raise NoSpeech("project has no transcript; nothing to summarize")
    for cid in guide_clip_ids:
        project.clip_by_id(cid)  # raises on unknown ids

    if mode == "extractive":
        project.timeline = blender.extractive_baseline(
            project, cfg.target_duration_s, providers, cfg
        )
        _namespace_entry_ids(project)
        project.generated_mode = mode
        project.entry_seq = len(project.timeline)
        return GenerateResult(project=project)

    keyframes = _keyframe_map(project, store)

    if project.clip_descriptions is None:
        project.clip_descriptions = abstractive.describe_clips(
            project.clips, [keyframes[c.clip_id] for c in project.clips], providers.chat, cfg
        )

    long_transcript = project.transcript_text()
    phrase_spans = providers.noun_phrases.extract_noun_phrases(long_transcript)
    seen: list[str] = []
    for span in phrase_spans:
        low = span.text.lower()
        if low not in seen:
            seen.append(low)

    short = abstractive.generate_short_transcript(long_transcript, seen, providers.chat, cfg)
    concepts = abstractive.extract_visual_concepts(
        short, project.clip_descriptions, providers.chat, cfg
    )
    segments = abstractive.segment_short_transcript(short, providers.chat, cfg)

    table = matcher.compute_score_table(
        concepts, project.clips, keyframes, project.clip_descriptions, short, match_cfg, providers
    )
    assignment = matcher.assign(
        concepts,
        project.clips,
        table,
        match_cfg,
        bonus_clip_ids=frozenset(guide_clip_ids),
        bonus=cfg.guide_bonus,
    )
    timeline = matcher.build_initial_timeline(
        short, assignment, segments, concepts, project.clips, keyframes, providers,
        default_voice=cfg.default_voice,
    )

    project.short_transcript = short
    project.concepts = concepts
    project.timeline = timeline
    _namespace_entry_ids(project)
    project.generated_mode = mode
    project.entry_seq = len(timeline)

    report = None
    if mode == "mixed":
        slots = blender.abstractive_slots(project, short, providers.noun_phrases)
        lf_segments = ingest.segment_longform(project, providers)
        candidates = blender.extractive_segments(project, lf_segments, providers.noun_phrases)
        decisions = blender.find_ambiguous_slots(
            slots, candidates, blend_cfg, providers, keyframes
        )
        permutation = blender.select_permutation(decisions, blend_cfg, providers)
        project.timeline = blender.apply_blend(project.timeline, permutation, decisions)
        report = BlendReport(
            threshold=blend_cfg.threshold, decisions=decisions, permutation=permutation
        )

    tsv = matcher.export_score_table(concepts, project.clips, table) if concepts else None
    return GenerateResult(project=project, blend_report=report, score_table_tsv=tsv)
