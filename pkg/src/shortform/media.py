"""Media access layer: fixture descriptor videos, sidecars, frames, audio.

Test and demo videos are small JSON descriptors (``*.vdesc``) that state
duration/fps/geometry; the pixels and audio are synthesized deterministically
on demand. Ground truth rides in sidecar files next to the video:

    <video>.words     start<TAB>end<TAB>speaker<TAB>text
    <video>.cuts      one cut timestamp per line
    <video>.speakers  start<TAB>end<TAB>speaker
    <video>.tags      start<TAB>end<TAB>tag

Times are seconds with 3 decimals. Real container files are decoded through
OpenCV when present, so the same code paths serve live footage.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass

import numpy as np
from PIL import Image
from PIL.PngImagePlugin import PngInfo

from .errors import BadMedia, FixtureMissing

VDESC_FORMAT = "vdesc/1"
PNG_TAGS_KEY = "media-tags"


def fmt_time(t: float) -> str:
    return f"{t:.3f}"


# ---------------------------------------------------------------------------
# sidecars


def sidecar_path(video_path: str, kind: str) -> str:
    return f"{video_path}.{kind}"


def _read_sidecar_lines(video_path: str, kind: str) -> list[str]:
    path = sidecar_path(video_path, kind)
    if not os.path.exists(path):
        raise FixtureMissing(f"missing sidecar {path}")
    with open(path, "r", encoding="utf-8") as f:
        return [ln.rstrip("\n") for ln in f if ln.strip()]


def read_words_sidecar(video_path: str) -> list[tuple[float, float, str, str]]:
    out = []
    for ln in _read_sidecar_lines(video_path, "words"):
        start, end, speaker, text = ln.split("\t", 3)
        out.append((float(start), float(end), speaker, text))
    return out


def read_cuts_sidecar(video_path: str) -> list[float]:
    return [float(ln) for ln in _read_sidecar_lines(video_path, "cuts")]


def read_speakers_sidecar(video_path: str) -> list[tuple[float, float, str]]:
    out = []
    for ln in _read_sidecar_lines(video_path, "speakers"):
        start, end, speaker = ln.split("\t", 2)
        out.append((float(start), float(end), speaker))
    return out


def read_tags_sidecar(video_path: str) -> list[tuple[float, float, str]]:
    out = []
    for ln in _read_sidecar_lines(video_path, "tags"):
        start, end, tag = ln.split("\t", 2)
        out.append((float(start), float(end), tag))
    return out


def write_sidecar(video_path: str, kind: str, rows: list[tuple]) -> None:
    with open(sidecar_path(video_path, kind), "w", encoding="utf-8") as f:
        for row in rows:
            f.write("\t".join(fmt_time(v) if isinstance(v, float) else str(v) for v in row))
            f.write("\n")


# ---------------------------------------------------------------------------
# fixture video


def _stable_digest(*parts: str) -> bytes:
    h = hashlib.blake2s()
    for p in parts:
        h.update(p.encode("utf-8"))
        h.update(b"\x00")
    return h.digest()


def _tag_color(tag: str) -> tuple[int, int, int]:
    if tag == "black":
        return (0, 0, 0)
    d = _stable_digest("color", tag)
    # keep colors mid-range so frames are never confused with the black case
    return tuple(60 + (b % 160) for b in d[:3])


@dataclass
class FixtureVideo:
    """A synthetic video backed by a ``.vdesc`` descriptor plus sidecars."""

    path: str
    duration_s: float
    fps: float
    width: int
    height: int
    content_id: str

    @classmethod
    def open(cls, path: str) -> "FixtureVideo":
        try:
            with open(path, "rb") as f:
                raw = f.read()
            desc = json.loads(raw.decode("utf-8"))
        except (OSError, ValueError) as exc:
            raise BadMedia(f"cannot read descriptor {path}: {exc}")
        if desc.get("format") != VDESC_FORMAT:
            raise BadMedia(f"{path} is not a {VDESC_FORMAT} descriptor")
        return cls(
            path=path,
            duration_s=float(desc["duration_s"]),
            fps=float(desc.get("fps", 25.0)),
            width=int(desc.get("width", 320)),
            height=int(desc.get("height", 180)),
            content_id=hashlib.sha1(raw).hexdigest()[:12],
        )

    def _tag_spans(self) -> list[tuple[float, float, str]]:
        try:
            return read_tags_sidecar(self.path)
        except FixtureMissing:
            return []

    def tags_at(self, t: float) -> list[str]:
        return [tag for start, end, tag in self._tag_spans() if start <= t < end]

    def frame_at(self, t: float) -> np.ndarray:
        """Synthesize the frame at time ``t`` (RGB uint8, deterministic)."""
        if not (0 <= t <= self.duration_s):
            raise BadMedia(f"frame time {t} outside [0, {self.duration_s}]")
        tags = self.tags_at(min(t, self.duration_s - 1e-9))
        frame = np.zeros((self.height, self.width, 3), dtype=np.uint8)
        frame[:, :] = _tag_color(" ".join(tags) if tags else "untagged")
        if tags != ["black"]:
            # a thin moving tick so consecutive frames differ
            x = int(t * 4) % self.width
            frame[:, x] = (255, 255, 255)
        return frame

    def audio(self, t0: float, t1: float, sample_rate: int) -> np.ndarray:
        """Synthesize mono audio for [t0, t1): one sine tone per speaker turn.

        Samples are a pure function of absolute time, so overlapping requests
        agree sample for sample. Gaps between turns are silent.
        """
        if t1 <= t0:
            return np.zeros(0, dtype=np.float32)
        n = int(round((t1 - t0) * sample_rate))
        t = t0 + np.arange(n, dtype=np.float64) / sample_rate
        out = np.zeros(n, dtype=np.float64)
        try:
            turns = read_speakers_sidecar(self.path)
        except FixtureMissing:
            turns = []
        for start, end, speaker in turns:
            mask = (t >= start) & (t < end)
            if not mask.any():
                continue
            freq = 180.0 + (_stable_digest("voice", speaker)[0] % 160)
            out[mask] += 0.1 * np.sin(2 * np.pi * freq * t[mask])
        return out.astype(np.float32)


class RealVideo:
    """Thin OpenCV wrapper for actual container files (live path)."""

    def __init__(self, path: str):
        import cv2

        cap = cv2.VideoCapture(path)
        if not cap.isOpened():
            raise BadMedia(f"cannot decode {path}")
        self.path = path
        self.fps = cap.get(cv2.CAP_PROP_FPS) or 25.0
        frames = cap.get(cv2.CAP_PROP_FRAME_COUNT)
        self.duration_s = frames / self.fps if frames else 0.0
        self.width = int(cap.get(cv2.CAP_PROP_FRAME_WIDTH))
        self.height = int(cap.get(cv2.CAP_PROP_FRAME_HEIGHT))
        self._cap = cap
        with open(path, "rb") as f:
            self.content_id = hashlib.sha1(f.read(1 << 20)).hexdigest()[:12]

    def tags_at(self, t: float) -> list[str]:
        return []

    def frame_at(self, t: float) -> np.ndarray:
        import cv2

        self._cap.set(cv2.CAP_PROP_POS_MSEC, max(0.0, t * 1000.0))
        ok, frame = self._cap.read()
        if not ok:
            raise BadMedia(f"cannot decode frame at {t}s from {self.path}")
        return cv2.cvtColor(frame, cv2.COLOR_BGR2RGB)

    def audio(self, t0: float, t1: float, sample_rate: int) -> np.ndarray:
        # OpenCV exposes no audio; live deployments demux before ingest.
        n = int(round((t1 - t0) * sample_rate))
        return np.zeros(max(0, n), dtype=np.float32)


def open_video(path: str):
    if not os.path.exists(path):
        raise BadMedia(f"no such file: {path}")
    if path.endswith(".vdesc"):
        return FixtureVideo.open(path)
    return RealVideo(path)


# ---------------------------------------------------------------------------
# keyframe PNGs (tags ride in a text chunk so image refs stay self-contained)


def save_keyframe_png(frame: np.ndarray, tags: list[str], path: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    info = PngInfo()
    if tags:
        info.add_text(PNG_TAGS_KEY, "\t".join(tags))
    Image.fromarray(frame).save(path, format="PNG", pnginfo=info)


def read_png_tags(path: str) -> list[str]:
    try:
        with Image.open(path) as img:
            raw = img.text.get(PNG_TAGS_KEY, "") if hasattr(img, "text") else ""
    except (OSError, ValueError) as exc:
        raise BadMedia(f"cannot read image {path}: {exc}")
    return [t for t in raw.split("\t") if t]


def load_image(path: str) -> np.ndarray:
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"))
    except (OSError, ValueError) as exc:
        raise BadMedia(f"cannot read image {path}: {exc}")


# ---------------------------------------------------------------------------
# WAV i/o (16-bit PCM mono)


def write_wav(path: str, samples: np.ndarray, sample_rate: int) -> None:
    import wave

    clipped = np.clip(samples, -1.0, 1.0)
    pcm = (clipped * 32767.0).astype("<i2")
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with wave.open(path, "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(sample_rate)
        w.writeframes(pcm.tobytes())


def read_wav(path: str) -> tuple[np.ndarray, int]:
    import wave

    with wave.open(path, "rb") as w:
        sr = w.getframerate()
        pcm = np.frombuffer(w.readframes(w.getnframes()), dtype="<i2")
    return pcm.astype(np.float32) / 32767.0, sr
