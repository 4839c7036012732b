"""Turn a raw long-form video into structured project state.

Ingestion tiles the video into clips from detected cuts, time-aligns the
transcript, attaches diarized speakers, extracts one keyframe per clip, and
persists everything as a project directory. All paths stored in project
state are relative to the project directory so a project is relocatable.
"""

from __future__ import annotations

import os
import shutil
import statistics
from dataclasses import asdict, dataclass, field

from . import media
from .errors import DomainError, NoSpeech
from .providers import ProviderBundle, cosine
from .timeline import TimelineEntry
from .transcript import ShortTranscript, VisualConcept

FORMAT_VERSION = 1
MIN_CLIP_SECONDS = 1.0
MIN_VIDEO_SECONDS = 30.0

_SENTENCE_END = (".", "!", "?")
MAX_SEGMENT_SENTENCES = 6
BOUNDARY_STD_FACTOR = 0.5


@dataclass(frozen=True)
class Word:
    text: str
    start_s: float
    end_s: float
    speaker_id: str

    def __post_init__(self):
        if self.start_s >= self.end_s:
            raise DomainError(f"word {self.text!r} has start >= end")

    @property
    def mid_s(self) -> float:
        return (self.start_s + self.end_s) / 2.0


@dataclass(frozen=True)
class Clip:
    clip_id: str
    start_s: float
    end_s: float
    keyframe: str  # project-relative image path
    speech: str
    rel_pos: float

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s

    @property
    def mid_s(self) -> float:
        return (self.start_s + self.end_s) / 2.0


@dataclass(frozen=True)
class NarrationSegmentLF:
    """A coherent multi-sentence span of the long-form transcript."""

    seg_id: str
    word_start: int
    word_end: int  # half-open word-index range
    text: str
    start_s: float
    end_s: float
    rel_pos: float


@dataclass
class ProjectState:
    project_id: str
    video: str  # project-relative media path
    duration_s: float
    fps: float
    clips: list[Clip] = field(default_factory=list)
    words: list[Word] = field(default_factory=list)
    speakers: list[dict] = field(default_factory=list)  # {speaker_id, voice_id}
    no_speech: bool = False
    short_transcript: ShortTranscript | None = None
    concepts: list[VisualConcept] = field(default_factory=list)
    clip_descriptions: list[str] | None = None
    timeline: list[TimelineEntry] = field(default_factory=list)
    generated_mode: str | None = None
    revision: int = 0
    entry_seq: int = 0  # monotonically increasing entry-id counter
    format_version: int = FORMAT_VERSION

    def clip_by_id(self, clip_id: str) -> Clip:
        for clip in self.clips:
            if clip.clip_id == clip_id:
                return clip
        raise DomainError(f"unknown clip_id: {clip_id}")

    def clip_index(self, clip_id: str) -> int:
        for i, clip in enumerate(self.clips):
            if clip.clip_id == clip_id:
                return i
        raise DomainError(f"unknown clip_id: {clip_id}")

    def entry_by_id(self, entry_id: str) -> TimelineEntry:
        for entry in self.timeline:
            if entry.entry_id == entry_id:
                return entry
        raise DomainError(f"unknown entry_id: {entry_id}")

    def transcript_text(self) -> str:
        return " ".join(w.text for w in self.words)

    def to_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "project_id": self.project_id,
            "video": self.video,
            "duration_s": self.duration_s,
            "fps": self.fps,
            "clips": [asdict(c) for c in self.clips],
            "words": [asdict(w) for w in self.words],
            "speakers": self.speakers,
            "no_speech": self.no_speech,
            "short_transcript": self.short_transcript.to_dict() if self.short_transcript else None,
            "concepts": [c.to_dict() for c in self.concepts],
            "clip_descriptions": self.clip_descriptions,
            "timeline": [e.to_dict() for e in self.timeline],
            "generated_mode": self.generated_mode,
            "revision": self.revision,
            "entry_seq": self.entry_seq,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProjectState":
        return cls(
            project_id=d["project_id"],
            video=d["video"],
            duration_s=d["duration_s"],
            fps=d["fps"],
            clips=[Clip(**c) for c in d["clips"]],
            words=[Word(**w) for w in d["words"]],
            speakers=d["speakers"],
            no_speech=d["no_speech"],
            short_transcript=(
                ShortTranscript.from_dict(d["short_transcript"]) if d["short_transcript"] else None
            ),
            concepts=[VisualConcept.from_dict(c) for c in d["concepts"]],
            clip_descriptions=d["clip_descriptions"],
            timeline=[TimelineEntry.from_dict(e) for e in d["timeline"]],
            generated_mode=d["generated_mode"],
            revision=d["revision"],
            entry_seq=d.get("entry_seq", 0),
            format_version=d["format_version"],
        )


# ---------------------------------------------------------------------------
# clip construction


def _clip_spans(cuts: list[float], duration: float) -> list[tuple[float, float]]:
    """Tile [0, duration] from cut timestamps, merging sub-second shots."""
    inner = sorted({c for c in cuts if 0.0 < c < duration})
    bounds = [0.0] + inner + [duration]
    spans = [(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)]
    merged: list[tuple[float, float]] = []
    for span in spans:
        if merged and span[1] - span[0] < MIN_CLIP_SECONDS:
            merged[-1] = (merged[-1][0], span[1])
        else:
            merged.append(span)
    # a too-short first shot merges into its successor
    if len(merged) > 1 and merged[0][1] - merged[0][0] < MIN_CLIP_SECONDS:
        merged[1] = (merged[0][0], merged[1][1])
        merged.pop(0)
    return merged


def _assign_words(words: list[Word], spans: list[tuple[float, float]], duration: float) -> list[str]:
    """Per-span speech: a word belongs to the span containing its midpoint."""
    texts = [[] for _ in spans]
    for word in words:
        mid = word.mid_s
        for i, (start, end) in enumerate(spans):
            last = i == len(spans) - 1
            if start <= mid < end or (last and mid <= duration):
                texts[i].append(word.text)
                break
    return [" ".join(t) for t in texts]


def keyframe_time(start_s: float, end_s: float, fps: float) -> float:
    """Temporal midpoint snapped down to the frame grid."""
    frame = int(((start_s + end_s) / 2.0) * fps)
    return frame / fps


def extract_keyframe(video, start_s: float, end_s: float, fps: float, out_path: str) -> str:
    """Write the clip's midpoint frame as a PNG; cached if already present."""
    if os.path.exists(out_path):
        return out_path
    t = min(keyframe_time(start_s, end_s, fps), max(0.0, video.duration_s - 1.0 / fps))
    frame = video.frame_at(t)
    media.save_keyframe_png(frame, video.tags_at(t), out_path)
    return out_path


# ---------------------------------------------------------------------------
# ingest


def ingest_video(video_path: str, providers: ProviderBundle, store, project_id: str | None = None) -> ProjectState:
    """Ingest a long-form video into a freshly persisted project."""
    src = media.open_video(video_path)
    if src.duration_s < MIN_VIDEO_SECONDS:
        raise DomainError(
            f"video is {src.duration_s:.1f} s; ingest requires >= {MIN_VIDEO_SECONDS:.0f} s"
        )
    pid = project_id or src.content_id
    project_dir = store.create_project_dir(pid)

    # the project owns a copy of the media (and any sidecars) so it is portable
    media_dir = os.path.join(project_dir, "media")
    os.makedirs(media_dir, exist_ok=True)
    base = os.path.basename(video_path)
    local_video = os.path.join(media_dir, base)
    if not os.path.exists(local_video):
        shutil.copyfile(video_path, local_video)
    for kind in ("words", "cuts", "speakers", "tags"):
        sidecar = media.sidecar_path(video_path, kind)
        if os.path.exists(sidecar):
            shutil.copyfile(sidecar, media.sidecar_path(local_video, kind))
    video = media.open_video(local_video)

    cuts = providers.scene_detector.detect_scenes(local_video)
    spans = _clip_spans(cuts, video.duration_s)

    turns = providers.diarizer.diarize(local_video)
    words: list[Word] = []
    for wt in providers.transcriber.transcribe(local_video):
        mid = (wt.start_s + wt.end_s) / 2.0
        speaker = next(
            (t.speaker_id for t in turns if t.start_s <= mid < t.end_s), "unknown"
        )
        words.append(Word(text=wt.text, start_s=wt.start_s, end_s=wt.end_s, speaker_id=speaker))
    words.sort(key=lambda w: w.start_s)

    speech_per_span = _assign_words(words, spans, video.duration_s)
    clips = []
    for i, ((start, end), speech) in enumerate(zip(spans, speech_per_span)):
        clip_id = f"c{i:03d}"
        rel_path = os.path.join("keyframes", f"{clip_id}.png")
        extract_keyframe(video, start, end, video.fps, os.path.join(project_dir, rel_path))
        clips.append(
            Clip(
                clip_id=clip_id,
                start_s=start,
                end_s=end,
                keyframe=rel_path,
                speech=speech,
                rel_pos=((start + end) / 2.0) / video.duration_s,
            )
        )

    seen: list[str] = []
    for t in turns:
        if t.speaker_id not in seen:
            seen.append(t.speaker_id)
    speakers = [{"speaker_id": s, "voice_id": f"spk:{s}"} for s in seen]

    project = ProjectState(
        project_id=pid,
        video=os.path.join("media", base),
        duration_s=video.duration_s,
        fps=video.fps,
        clips=clips,
        words=words,
        speakers=speakers,
        no_speech=not words,
    )
    store.save(project)
    return project


def open_project_video(project: ProjectState, store):
    return media.open_video(store.resolve(project.project_id, project.video))


def keyframe_path(project: ProjectState, store, clip_id: str) -> str:
    """Absolute keyframe path for a clip, re-extracting if the cache is gone."""
    clip = project.clip_by_id(clip_id)
    path = store.resolve(project.project_id, clip.keyframe)
    if not os.path.exists(path):
        video = open_project_video(project, store)
        extract_keyframe(video, clip.start_s, clip.end_s, video.fps, path)
    return path


# ---------------------------------------------------------------------------
# long-form segmentation


def _sentences_from_words(words: list[Word]) -> list[tuple[int, int]]:
    """Half-open word-index ranges for sentences; punctuation ends a sentence."""
    spans = []
    start = 0
    for i, word in enumerate(words):
        if word.text.rstrip('"”)').endswith(_SENTENCE_END):
            spans.append((start, i + 1))
            start = i + 1
    if start < len(words):
        spans.append((start, len(words)))
    return spans


def segment_longform(project: ProjectState, providers: ProviderBundle) -> list[NarrationSegmentLF]:
    """Partition the long-form transcript into coherent 1-6 sentence segments.

    Default segmenter: sentence split on word timestamps, with a boundary
    wherever the adjacent-sentence embedding cosine falls below the mean minus
    0.5 standard deviations, and segment length clamped to 6 sentences.
    """
    if not project.words:
        raise NoSpeech("project has no transcript to segment")
    sentence_ranges = _sentences_from_words(project.words)
    texts = [" ".join(w.text for w in project.words[a:b]) for a, b in sentence_ranges]

    boundaries = set()
    if len(texts) > 1:
        vecs = [providers.text_embedder.embed_text(t) for t in texts]
        sims = [cosine(vecs[i], vecs[i + 1]) for i in range(len(vecs) - 1)]
        mean = statistics.fmean(sims)
        std = statistics.pstdev(sims) if len(sims) > 1 else 0.0
        threshold = mean - BOUNDARY_STD_FACTOR * std
        boundaries = {i for i, s in enumerate(sims) if s < threshold}

    segments: list[NarrationSegmentLF] = []
    group_start = 0
    for i in range(len(texts)):
        run_len = i - group_start + 1
        if i in boundaries or run_len >= MAX_SEGMENT_SENTENCES or i == len(texts) - 1:
            word_start = sentence_ranges[group_start][0]
            word_end = sentence_ranges[i][1]
            seg_words = project.words[word_start:word_end]
            start_s, end_s = seg_words[0].start_s, seg_words[-1].end_s
            segments.append(
                NarrationSegmentLF(
                    seg_id=f"lf{len(segments):03d}",
                    word_start=word_start,
                    word_end=word_end,
                    text=" ".join(w.text for w in seg_words),
                    start_s=start_s,
                    end_s=end_s,
                    rel_pos=((start_s + end_s) / 2.0) / project.duration_s,
                )
            )
            group_start = i + 1
    return segments
