"""Render a timeline into audio/video output plus a deterministic EDL.

Abstractive entries synthesize their narration and fit the clip duration via
playback speed (clamped, with tail-trim or freeze residuals); extractive
entries keep their original audio, optionally denoised. Every entry's gain is
set so its integrated loudness hits the configured target. The EDL alone
determines the cut; rendering twice with the same seed is byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from dataclasses import dataclass

import numpy as np

from . import media
from .errors import DomainError, EmptyTimeline, RenderFailed, ShortformError
from .ingest import ProjectState, open_project_video
from .providers import ProviderBundle
from .timeline import EditDecisionList, EDLRecord

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RenderConfig:
    speed_min: float = 0.5
    speed_max: float = 2.0
    loudness_target_lufs: float = -14.0
    sample_rate: int = 16000
    crossfade_ms: int = 0  # hard cuts by default
    fps: float = 12.0  # output frame rate (draft quality skips video entirely)

    def __post_init__(self):
        if not (0 < self.speed_min <= 1.0 <= self.speed_max):
            raise DomainError("speed clamp must satisfy 0 < min <= 1 <= max")
        if self.sample_rate <= 0:
            raise DomainError("sample_rate must be positive")


@dataclass(frozen=True)
class SpeedFit:
    speed: float
    src_used_s: float  # source seconds actually played
    trim_src_s: float  # source seconds dropped from the tail (speed at max)
    freeze_s: float  # output seconds holding the final frame (speed at min)
    output_s: float


def fit_speed(clip_duration_s: float, speech_duration_s: float, cfg: RenderConfig) -> SpeedFit:
    """Fit a clip to its narration by adjusting playback speed.

    The ideal factor is clip/speech. Inside the clamp the output duration is
    exactly the speech duration. Past the fast end the clip plays at max
    speed and the leftover source is tail-trimmed; past the slow end it plays
    at min speed and the final frame holds for the remainder.
    """
    if clip_duration_s <= 0 or speech_duration_s <= 0:
        raise DomainError("durations must be positive")
    ideal = clip_duration_s / speech_duration_s
    if ideal > cfg.speed_max:
        used = speech_duration_s * cfg.speed_max
        return SpeedFit(
            speed=cfg.speed_max,
            src_used_s=used,
            trim_src_s=clip_duration_s - used,
            freeze_s=0.0,
            output_s=speech_duration_s,
        )
    if ideal < cfg.speed_min:
        played = clip_duration_s / cfg.speed_min
        return SpeedFit(
            speed=cfg.speed_min,
            src_used_s=clip_duration_s,
            trim_src_s=0.0,
            freeze_s=speech_duration_s - played,
            output_s=speech_duration_s,
        )
    return SpeedFit(
        speed=ideal,
        src_used_s=clip_duration_s,
        trim_src_s=0.0,
        freeze_s=0.0,
        output_s=speech_duration_s,
    )


# ---------------------------------------------------------------------------
# loudness (mono RMS model of integrated loudness)


def loudness_db(samples: np.ndarray) -> float | None:
    """Integrated loudness estimate; None for silence."""
    if samples.size == 0:
        return None
    mean_sq = float(np.mean(np.square(samples.astype(np.float64))))
    if mean_sq <= 0.0:
        return None
    return -0.691 + 10.0 * math.log10(mean_sq)


def gain_for(samples: np.ndarray, target_lufs: float) -> float:
    """Gain in dB that moves the samples to the target loudness; 0 for silence."""
    measured = loudness_db(samples)
    if measured is None:
        return 0.0
    return target_lufs - measured


def apply_gain(samples: np.ndarray, gain_db: float) -> np.ndarray:
    return (samples * (10.0 ** (gain_db / 20.0))).astype(np.float32)


# ---------------------------------------------------------------------------
# render


@dataclass
class RenderResult:
    edl: EditDecisionList
    edl_path: str
    audio_path: str
    video_path: str | None
    total_duration_s: float


def synth_key(text: str, voice_id: str) -> str:
    h = hashlib.blake2s()
    h.update(text.encode("utf-8"))
    h.update(b"\x00")
    h.update(voice_id.encode("utf-8"))
    return h.hexdigest()[:12]


def render(
    project: ProjectState,
    store,
    providers: ProviderBundle,
    cfg: RenderConfig,
    preset: str = "full",
    out_dir: str | None = None,
) -> RenderResult:
    """Render the project timeline.

    ``preset`` is "full" (audio + video track) or "draft" (audio + EDL only);
    the cut math is identical, so draft and full EDLs for one revision match
    byte for byte.
    """
    if preset not in ("full", "draft"):
        raise DomainError(f"unknown preset: {preset}")
    if not project.timeline:
        raise EmptyTimeline("project timeline is empty")
    video = open_project_video(project, store)
    sr = cfg.sample_rate
    out_dir = out_dir or os.path.join(
        store.project_dir(project.project_id), "renders", f"rev{project.revision:05d}"
    )
    os.makedirs(out_dir, exist_ok=True)

    records: list[EDLRecord] = []
    audio_parts: list[np.ndarray] = []
    plans = []  # (record, freeze_s) for the video pass
    for order, entry in enumerate(sorted(project.timeline, key=lambda e: e.order_index)):
        entry.validate()
        span_start, span_end = entry.effective_span()
        span_dur = span_end - span_start
        if entry.mode == "abstractive":
            try:
                speech = providers.synthesizer.synthesize_speech(entry.speech_text, entry.voice_id)
            except ShortformError as exc:
                raise RenderFailed(f"speech synthesis failed for entry {entry.entry_id}: {exc}")
            if speech.sample_rate != sr:
                raise RenderFailed(
                    f"synthesizer rate {speech.sample_rate} != render rate {sr}"
                )
            fit = fit_speed(span_dur, speech.duration_s, cfg)
            gain = gain_for(speech.samples, cfg.loudness_target_lufs)
            audio = apply_gain(speech.samples, gain)
            record = EDLRecord(
                order=order,
                mode="abstractive",
                clip_id=entry.clip_id,
                src_in=span_start,
                src_out=span_start + fit.src_used_s,
                speed=fit.speed,
                audio_src=f"synth:{synth_key(entry.speech_text, entry.voice_id)}",
                gain_db=gain,
                out_duration_s=fit.output_s,
            )
            plans.append((record, fit.freeze_s))
        else:
            audio = video.audio(span_start, span_end, sr)
            if entry.denoise:
                audio = providers.denoiser.denoise(audio, sr)
            gain = gain_for(audio, cfg.loudness_target_lufs)
            audio = apply_gain(audio, gain)
            record = EDLRecord(
                order=order,
                mode="extractive",
                clip_id=entry.clip_id,
                src_in=span_start,
                src_out=span_end,
                speed=1.0,
                audio_src="original",
                gain_db=gain,
                out_duration_s=span_dur,
            )
            plans.append((record, 0.0))
        records.append(record)
        want = int(round(record.out_duration_s * sr))
        if audio.size < want:
            audio = np.concatenate([audio, np.zeros(want - audio.size, dtype=np.float32)])
        audio_parts.append(audio[:want])

    edl = EditDecisionList(records=records)
    edl_path = os.path.join(out_dir, "short.edl")
    with open(edl_path, "w", encoding="utf-8") as f:
        f.write(edl.to_text())

    audio_path = os.path.join(out_dir, "short.wav")
    media.write_wav(audio_path, np.concatenate(audio_parts) if audio_parts else np.zeros(0, np.float32), sr)

    video_path = None
    if preset == "full":
        video_path = os.path.join(out_dir, "short.avi")
        _write_video_track(video, plans, cfg, video_path)

    manifest = {
        "preset": preset,
        "revision": project.revision,
        "total_duration_s": round(edl.total_duration_s, 3),
        "edl": os.path.basename(edl_path),
        "audio": os.path.basename(audio_path),
        "video": os.path.basename(video_path) if video_path else None,
    }
    with open(os.path.join(out_dir, "render.json"), "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")

    return RenderResult(
        edl=edl,
        edl_path=edl_path,
        audio_path=audio_path,
        video_path=video_path,
        total_duration_s=edl.total_duration_s,
    )


def _write_video_track(video, plans, cfg: RenderConfig, out_path: str) -> None:
    import cv2

    writer = cv2.VideoWriter(
        out_path,
        cv2.VideoWriter_fourcc(*"MJPG"),
        cfg.fps,
        (video.width, video.height),
    )
    if not writer.isOpened():
        raise RenderFailed(f"cannot open video writer for {out_path}")
    try:
        for record, _freeze in plans:
            n_frames = int(round(record.out_duration_s * cfg.fps))
            span = record.src_out - record.src_in
            for j in range(n_frames):
                t_out = j / cfg.fps
                t_src = record.src_in + min(t_out * record.speed, max(0.0, span - 1e-6))
                t_src = min(t_src, video.duration_s - 1e-6)
                frame = video.frame_at(t_src)
                writer.write(cv2.cvtColor(frame, cv2.COLOR_RGB2BGR))
    finally:
        writer.release()


def preview(
    project: ProjectState,
    store,
    providers: ProviderBundle,
    cfg: RenderConfig,
) -> RenderResult:
    """Draft-quality render cached per project revision."""
    out_dir = os.path.join(
        store.project_dir(project.project_id), "previews", f"rev{project.revision:05d}"
    )
    edl_path = os.path.join(out_dir, "short.edl")
    if os.path.exists(edl_path):
        with open(edl_path, "r", encoding="utf-8") as f:
            edl = EditDecisionList.parse(f.read())
        return RenderResult(
            edl=edl,
            edl_path=edl_path,
            audio_path=os.path.join(out_dir, "short.wav"),
            video_path=None,
            total_duration_s=edl.total_duration_s,
        )
    return render(project, store, providers, cfg, preset="draft", out_dir=out_dir)
