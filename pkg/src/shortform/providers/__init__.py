"""Provider contracts, deterministic fakes, and the bundle factory."""

from __future__ import annotations

from ..config import resolve_credentials
from ..errors import DomainError
from .base import (
    ChatProvider,
    ChatRequest,
    CoherenceScorer,
    Denoiser,
    Diarizer,
    EmbeddingVector,
    JointEmbedder,
    NounPhraseExtractor,
    PhraseSpan,
    ProviderBundle,
    ProviderConfig,
    SceneCutDetector,
    SpeakerTurn,
    SpeechAudio,
    SpeechSynthesizer,
    TextEmbedder,
    Transcriber,
    WordTiming,
    cosine,
    cosine_01,
)
from .fakes import DEFAULT_LEXICON, build_fake_bundle
from .live import LiveChatProvider, _NoLiveAdapter


def build_providers(
    cfg: ProviderConfig,
    lexicon: tuple[str, ...] = DEFAULT_LEXICON,
    short_words_target: int | None = None,
    sample_rate: int = 16000,
) -> ProviderBundle:
    """Construct the provider bundle for the configured mode."""
    if cfg.provider_kind == "fake":
        return build_fake_bundle(
            cfg,
            lexicon=lexicon,
            short_words_target=short_words_target,
            sample_rate=sample_rate,
        )
    if cfg.provider_kind == "live":
        fakes = build_fake_bundle(
            ProviderConfig(provider_kind="fake", seed=0),
            lexicon=lexicon,
            short_words_target=short_words_target,
            sample_rate=sample_rate,
        )
        # Live mode swaps in the HTTP chat adapter; the tool contracts keep
        # raising until a deployment wires real adapters in.
        return ProviderBundle(
            chat=LiveChatProvider(cfg, credentials=resolve_credentials({"credentials_env": cfg.credentials_env})),
            text_embedder=_NoLiveAdapter("text embedding"),
            joint_embedder=_NoLiveAdapter("joint image-text embedding"),
            synthesizer=_NoLiveAdapter("speech synthesis"),
            coherence=_NoLiveAdapter("language-model loss"),
            transcriber=_NoLiveAdapter("transcription"),
            diarizer=_NoLiveAdapter("diarization"),
            scene_detector=_NoLiveAdapter("scene detection"),
            denoiser=fakes.denoiser,
            noun_phrases=fakes.noun_phrases,
            config=cfg,
        )
    raise DomainError(f"unknown provider kind: {cfg.provider_kind}")
