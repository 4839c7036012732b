"""Contracts for every external model or tool the pipeline consumes.

No other module performs model or network I/O except through these
interfaces. Each contract has a deterministic offline fake (see ``fakes``)
so the whole system runs and tests without touching the network.

Providers are stateless after construction and safe to call from multiple
workers.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError


@dataclass(frozen=True)
class ProviderConfig:
    """How to reach (or fake) the external services.

    Fake mode requires a seed; live mode requires an endpoint and a
    credentials env var name. Credentials never live in config files.
    """

    provider_kind: str = "fake"  # "live" | "fake"
    endpoint: str | None = None
    credentials_env: str = "SHORTFORM_API_KEY"
    seed: int | None = 0
    timeout_s: float = 30.0
    max_retries: int = 2

    def __post_init__(self):
        if self.provider_kind not in ("live", "fake"):
            raise DomainError(f"unknown provider_kind: {self.provider_kind}")
        if self.max_retries < 0:
            raise DomainError("max_retries must be >= 0")
        if self.provider_kind == "fake" and self.seed is None:
            raise DomainError("fake providers require a seed")
        if self.provider_kind == "live" and not self.endpoint:
            raise DomainError("live providers require an endpoint")


@dataclass(frozen=True)
class ChatRequest:
    """One chat-model call. Image order is preserved verbatim into the prompt."""

    system_text: str
    user_text: str
    images: tuple[str, ...] = ()
    temperature: float = 0.0

    def __post_init__(self):
        if not self.system_text or not self.user_text:
            raise DomainError("system_text and user_text must be non-empty")
        if self.temperature < 0:
            raise DomainError("temperature must be >= 0")


@dataclass(frozen=True)
class EmbeddingVector:
    values: np.ndarray
    model_id: str

    def __post_init__(self):
        norm = float(np.linalg.norm(self.values))
        if abs(norm - 1.0) > 1e-6:
            raise DomainError(f"embedding must be unit-normalized, |v|={norm}")


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Cosine similarity; mixing vectors from different models is an error."""
    if a.model_id != b.model_id:
        raise DomainError(f"cannot compare embeddings from {a.model_id} and {b.model_id}")
    return float(np.dot(a.values, b.values))


def cosine_01(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Cosine mapped from [-1, 1] onto [0, 1] so metrics share a range."""
    c = (cosine(a, b) + 1.0) / 2.0
    return min(1.0, max(0.0, c))


@dataclass(frozen=True)
class SpeechAudio:
    samples: np.ndarray  # float32 mono in [-1, 1]
    sample_rate: int
    duration_s: float


@dataclass(frozen=True)
class WordTiming:
    text: str
    start_s: float
    end_s: float


@dataclass(frozen=True)
class SpeakerTurn:
    speaker_id: str
    start_s: float
    end_s: float


@dataclass(frozen=True)
class PhraseSpan:
    text: str
    start: int
    end: int  # half-open char span


class ChatProvider(ABC):
    @abstractmethod
    def chat(self, req: ChatRequest) -> str:
        """Return the raw completion text for a chat request."""


class TextEmbedder(ABC):
    @abstractmethod
    def embed_text(self, text: str) -> EmbeddingVector:
        ...


class JointEmbedder(ABC):
    """Shared image/text embedding space; embed one modality per call."""

    @abstractmethod
    def embed_image_text(self, image: str | None = None, text: str | None = None) -> EmbeddingVector:
        ...


class SpeechSynthesizer(ABC):
    @abstractmethod
    def synthesize_speech(self, text: str, voice_id: str) -> SpeechAudio:
        ...


class CoherenceScorer(ABC):
    @abstractmethod
    def lm_loss(self, text: str) -> float:
        """Language-model loss of the text; lower means more coherent."""


class Transcriber(ABC):
    @abstractmethod
    def transcribe(self, video_ref: str) -> list[WordTiming]:
        ...


class Diarizer(ABC):
    @abstractmethod
    def diarize(self, video_ref: str) -> list[SpeakerTurn]:
        ...


class SceneCutDetector(ABC):
    @abstractmethod
    def detect_scenes(self, video_ref: str) -> list[float]:
        """Cut timestamps in seconds, strictly inside (0, duration)."""


class Denoiser(ABC):
    @abstractmethod
    def denoise(self, samples: np.ndarray, sample_rate: int) -> np.ndarray:
        ...


class NounPhraseExtractor(ABC):
    @abstractmethod
    def extract_noun_phrases(self, text: str) -> list[PhraseSpan]:
        ...


@dataclass
class ProviderBundle:
    """Everything the pipeline needs, grouped so call sites stay simple."""

    chat: ChatProvider
    text_embedder: TextEmbedder
    joint_embedder: JointEmbedder
    synthesizer: SpeechSynthesizer
    coherence: CoherenceScorer
    transcriber: Transcriber
    diarizer: Diarizer
    scene_detector: SceneCutDetector
    denoiser: Denoiser
    noun_phrases: NounPhraseExtractor
    config: ProviderConfig = field(default_factory=ProviderConfig)
