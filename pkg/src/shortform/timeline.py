"""Timeline entries and the edit decision list.

A timeline is the editable plan for the short-form video; the EDL is its
deterministic render plan, emitted as a line-oriented text document that is
golden-file tested byte for byte.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from .errors import DomainError

MIN_ENTRY_SECONDS = 0.5

EDL_VERSION = 1


@dataclass
class TimelineEntry:
    entry_id: str
    order_index: int
    mode: str  # "abstractive" | "extractive"
    clip_id: str
    # Base source span in the long-form video. Trims apply inside it.
    src_start_s: float
    src_end_s: float
    speech_text: str | None = None  # abstractive only
    voice_id: str | None = None  # abstractive only
    trim_head_s: float = 0.0
    trim_tail_s: float = 0.0
    speed_factor: float | None = None  # computed at render
    denoise: bool = False  # extractive only
    saved_speech_text: str | None = None  # stashed across mode toggles
    saved_voice_id: str | None = None
    concept_id: str | None = None
    segment_title: str | None = None

    def validate(self) -> "TimelineEntry":
        if self.mode not in ("abstractive", "extractive"):
            raise DomainError(f"unknown entry mode: {self.mode}")
        if self.mode == "abstractive":
            if not self.speech_text or not self.voice_id:
                raise DomainError("abstractive entries need speech_text and voice_id")
        else:
            if self.speech_text is not None:
                raise DomainError("extractive entries carry no speech_text")
        if self.trim_head_s < 0 or self.trim_tail_s < 0:
            raise DomainError("trims must be >= 0")
        if self.src_end_s <= self.src_start_s:
            raise DomainError("entry source span must be non-empty")
        if self.effective_span()[1] - self.effective_span()[0] < MIN_ENTRY_SECONDS - 1e-9:
            raise DomainError(f"trim must keep at least {MIN_ENTRY_SECONDS} s of clip")
        return self

    def effective_span(self) -> tuple[float, float]:
        return (self.src_start_s + self.trim_head_s, self.src_end_s - self.trim_tail_s)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TimelineEntry":
        return cls(**d)


@dataclass(frozen=True)
class EDLRecord:
    order: int
    mode: str
    clip_id: str
    src_in: float
    src_out: float
    speed: float
    audio_src: str  # "original" or "synth:<key>"
    gain_db: float
    out_duration_s: float

    def to_line(self) -> str:
        return "\t".join(
            (
                str(self.order),
                self.mode,
                self.clip_id,
                f"{self.src_in:.3f}",
                f"{self.src_out:.3f}",
                f"{self.speed:.3f}",
                self.audio_src,
                f"{self.gain_db:.2f}",
            )
        )


@dataclass
class EditDecisionList:
    records: list[EDLRecord] = field(default_factory=list)
    version: int = EDL_VERSION

    @property
    def total_duration_s(self) -> float:
        return sum(r.out_duration_s for r in self.records)

    def to_text(self) -> str:
        lines = [
            f"# format-version\t{self.version}",
            f"# total-duration\t{self.total_duration_s:.3f}",
        ]
        lines.extend(r.to_line() for r in self.records)
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "EditDecisionList":
        records = []
        version = EDL_VERSION
        for line in text.splitlines():
            if not line.strip():
                continue
            if line.startswith("#"):
                if line.startswith("# format-version"):
                    version = int(line.split("\t")[1])
                continue
            order, mode, clip_id, src_in, src_out, speed, audio_src, gain = line.split("\t")
            src_in_f, src_out_f, speed_f = float(src_in), float(src_out), float(speed)
            records.append(
                EDLRecord(
                    order=int(order),
                    mode=mode,
                    clip_id=clip_id,
                    src_in=src_in_f,
                    src_out=src_out_f,
                    speed=speed_f,
                    audio_src=audio_src,
                    gain_db=float(gain),
                    out_duration_s=(src_out_f - src_in_f) / speed_f,
                )
            )
        return cls(records=records, version=version)
