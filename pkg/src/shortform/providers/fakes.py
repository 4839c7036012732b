"""Deterministic offline fakes for every provider contract.

Every fake is a pure function of its inputs and the configured seed: repeated
calls are bit-identical, which is what makes the whole pipeline testable at
desk scale. The chat fake recognizes each prompt family by its system text
and emits a template-conforming completion derived from the request payload.
"""

from __future__ import annotations

import hashlib
import random
import re

import numpy as np

from .. import media
from ..errors import DomainError, EmptyCompletion, UnknownVoice
from ..textutil import sentence_spans
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
)

# Vocabulary the fakes treat as "visually concrete". Fixtures draw their shot
# tags from this list; tests may pass their own.
DEFAULT_LEXICON = (
    "spiral staircase",
    "staircase",
    "kitchen island",
    "kitchen",
    "swimming pool",
    "pond",
    "bedroom",
    "garden",
    "living room",
    "fireplace",
    "backyard",
    "front door",
    "balcony",
    "bathroom",
    "garage",
    "dining room",
    "marble countertop",
    "walk in closet",
    "home office",
    "wine cellar",
)

_STOPWORDS = frozenset(
    "a an the of in on at to and or for with this that is are was were it its".split()
)


def _digest(*parts) -> bytes:
    h = hashlib.blake2s()
    for p in parts:
        h.update(str(p).encode("utf-8"))
        h.update(b"\x00")
    return h.digest()


def _digest_int(*parts) -> int:
    return int.from_bytes(_digest(*parts)[:8], "big")


def _tokens(text: str) -> list[str]:
    return [t for t in re.findall(r"[a-z0-9]+", text.lower()) if t not in _STOPWORDS]


# ---------------------------------------------------------------------------
# embeddings


class FakeTextEmbedder(TextEmbedder):
    """Hashed character-trigram counts, L2-normalized.

    Shared substrings share trigrams, so similarity behaves monotonically
    with surface overlap ("kitchen" is closer to "kitchen island" than to
    "swimming pool").
    """

    def __init__(self, dim: int = 256, model_id: str = "fake-text"):
        self.dim = dim
        self.model_id = model_id

    def _embed(self, text: str) -> EmbeddingVector:
        if not text:
            raise DomainError("cannot embed empty text")
        padded = f" {text.lower()} "
        counts = np.zeros(self.dim, dtype=np.float64)
        for i in range(len(padded) - 2):
            tri = padded[i : i + 3]
            counts[_digest_int(self.model_id, tri) % self.dim] += 1.0
        norm = np.linalg.norm(counts)
        if norm == 0:
            counts[0] = 1.0
            norm = 1.0
        return EmbeddingVector(values=counts / norm, model_id=self.model_id)

    def embed_text(self, text: str) -> EmbeddingVector:
        return self._embed(text)


class FakeJointEmbedder(JointEmbedder):
    """Joint image/text space driven by fixture tags.

    Images produced by the fixture media backend carry their tags in a PNG
    text chunk; embedding an image embeds its tag string with the same
    trigram hash used for text, so a keyframe tagged "staircase" sits next
    to the text "staircase" in the shared space.
    """

    def __init__(self, dim: int = 256, tag_reader=media.read_png_tags):
        self._text = FakeTextEmbedder(dim=dim, model_id="fake-joint")
        self._tag_reader = tag_reader

    def embed_image_text(self, image: str | None = None, text: str | None = None) -> EmbeddingVector:
        if (image is None) == (text is None):
            raise DomainError("embed exactly one of image or text per call")
        if text is not None:
            return self._text.embed_text(text)
        tags = self._tag_reader(image)
        if tags:
            return self._text.embed_text(" ".join(tags))
        with open(image, "rb") as f:
            return self._text.embed_text(hashlib.sha1(f.read()).hexdigest())


# ---------------------------------------------------------------------------
# speech and coherence


class FakeSpeechSynthesizer(SpeechSynthesizer):
    """Silence at 0.40 s per word (~150 wpm), bit-identical per input."""

    SECONDS_PER_WORD = 0.40

    def __init__(self, sample_rate: int = 16000):
        self.sample_rate = sample_rate

    def known_voice(self, voice_id: str) -> bool:
        return voice_id == "default" or voice_id.startswith("spk:")

    def synthesize_speech(self, text: str, voice_id: str) -> SpeechAudio:
        if not text or not text.strip():
            raise DomainError("cannot synthesize empty text")
        if not self.known_voice(voice_id):
            raise UnknownVoice(f"unknown voice: {voice_id}")
        duration = len(text.split()) * self.SECONDS_PER_WORD
        samples = np.zeros(int(round(duration * self.sample_rate)), dtype=np.float32)
        return SpeechAudio(samples=samples, sample_rate=self.sample_rate, duration_s=duration)


class FakeCoherenceScorer(CoherenceScorer):
    """Seeded hash of the text mapped into [1, 10); lower = more coherent."""

    def __init__(self, seed: int = 0):
        self.seed = seed

    def lm_loss(self, text: str) -> float:
        if not text:
            raise DomainError("cannot score empty text")
        frac = _digest_int("lm-loss", self.seed, text) / float(1 << 64)
        return 1.0 + 9.0 * frac


# ---------------------------------------------------------------------------
# fixture-backed tool fakes


class FixtureTranscriber(Transcriber):
    def transcribe(self, video_ref: str) -> list[WordTiming]:
        rows = media.read_words_sidecar(video_ref)
        return [WordTiming(text=text, start_s=s, end_s=e) for s, e, _spk, text in rows]


class FixtureDiarizer(Diarizer):
    def diarize(self, video_ref: str) -> list[SpeakerTurn]:
        rows = media.read_speakers_sidecar(video_ref)
        return [SpeakerTurn(speaker_id=spk, start_s=s, end_s=e) for s, e, spk in rows]


class FixtureSceneCutDetector(SceneCutDetector):
    def detect_scenes(self, video_ref: str) -> list[float]:
        return sorted(media.read_cuts_sidecar(video_ref))


class IdentityDenoiser(Denoiser):
    def denoise(self, samples: np.ndarray, sample_rate: int) -> np.ndarray:
        return np.array(samples, copy=True)


class LexiconNounPhraseExtractor(NounPhraseExtractor):
    """Longest-match scan over a fixed phrase lexicon.

    Matches are case-insensitive, word-bounded, non-overlapping, and reported
    left to right with half-open char spans into the original text.
    """

    def __init__(self, lexicon: tuple[str, ...] = DEFAULT_LEXICON):
        if not lexicon:
            raise DomainError("lexicon must be non-empty")
        ordered = sorted(set(lexicon), key=len, reverse=True)
        pattern = "|".join(re.escape(p) for p in ordered)
        self._regex = re.compile(rf"\b(?:{pattern})\b", re.IGNORECASE)

    def extract_noun_phrases(self, text: str) -> list[PhraseSpan]:
        if not text:
            raise DomainError("cannot extract phrases from empty text")
        return [
            PhraseSpan(text=m.group(0), start=m.start(), end=m.end())
            for m in self._regex.finditer(text)
        ]


# ---------------------------------------------------------------------------
# chat


class FakeChatProvider(ChatProvider):
    """Seed-deterministic completions for every known prompt family.

    The family is recognized from the system text; the payload is recovered
    from the user text using the template's own marker phrases. Output always
    conforms to the family's wire format, so the parsers see realistic input.
    """

    def __init__(
        self,
        seed: int = 0,
        lexicon: tuple[str, ...] = DEFAULT_LEXICON,
        tag_reader=media.read_png_tags,
        short_words_target: int = 153,
    ):
        self.seed = seed
        self.lexicon = lexicon
        self._phrases = LexiconNounPhraseExtractor(lexicon)
        self._tag_reader = tag_reader
        self.short_words_target = short_words_target

    # -- family dispatch ----------------------------------------------------

    def chat(self, req: ChatRequest) -> str:
        sys_text = req.system_text
        if "Generate a short-form video transcript" in sys_text:
            out = self._short_transcript(req)
        elif "identify the most relevant visual concepts" in sys_text:
            out = self._tag_concepts(req)
        elif "You will score these N images" in sys_text:
            out = self._score_images(req)
        elif "split it into segments" in sys_text:
            out = self._segment(req)
        elif "speech to be written" in sys_text:
            out = self._alternative_text(req)
        elif "editor's shot list" in sys_text:
            out = self._describe_image(req)
        elif "Write a short abstract summary" in sys_text:
            out = self._summarize(req)
        else:
            # unknown family: echo something deterministic rather than guess
            out = f"OK {_digest_int('chat', self.seed, sys_text, req.user_text) % 10**8}"
        if not out:
            raise EmptyCompletion("fake chat produced an empty completion")
        return out

    @staticmethod
    def _after(text: str, marker: str) -> str:
        at = text.find(marker)
        if at == -1:
            return ""
        return text[at + len(marker):]

    @staticmethod
    def _between(text: str, start: str, end: str) -> str:
        chunk = FakeChatProvider._after(text, start)
        at = chunk.find(end)
        return chunk if at == -1 else chunk[:at]

    # -- families -----------------------------------------------------------

    def _short_transcript(self, req: ChatRequest) -> str:
        visuals = self._between(
            req.user_text, "Here is the list of visuals: ", "\n\nHere is the long-form"
        ).strip()
        transcript = self._after(req.user_text, "Here is the long-form video transcript: ").strip()
        sentences = [transcript[a:b].strip() for a, b in sentence_spans(transcript)]
        sentences = [s for s in sentences if s]
        if not sentences:
            return "Untitled<SEP>Nothing to show here."
        intro, conclusion = sentences[0], sentences[-1]
        middles = sentences[1:-1] if len(sentences) > 2 else []

        target = self.short_words_target
        budget = max(0, target - len(intro.split()) - len(conclusion.split()))
        rng = random.Random(_digest_int("short", self.seed, transcript))
        order = list(range(len(middles)))
        rng.shuffle(order)
        chosen: list[int] = []
        used = 0
        for idx in order:
            n = len(middles[idx].split())
            if used + n > budget:
                continue
            chosen.append(idx)
            used += n
        chosen.sort()
        body_parts = [intro] + [middles[i] for i in chosen]
        if conclusion != intro:
            body_parts.append(conclusion)
        body = " ".join(body_parts)

        first_visual = visuals.split(",")[0].strip() if visuals else ""
        title = f"{first_visual.title()} Highlights" if first_visual else "Video Highlights"
        return f"{title}<SEP>{body}"

    def _tag_concepts(self, req: ChatRequest) -> str:
        sentence = self._between(
            req.user_text,
            "Here is the sentence for you to identify important visual concepts: ",
            "\n\nHere are the long-form video shot descriptions",
        ).strip()
        if not sentence:
            return req.user_text[:1] or "."
        spans = self._phrases.extract_noun_phrases(sentence)[:2]
        out = []
        cursor = 0
        for span in spans:
            out.append(sentence[cursor:span.start])
            out.append(f"<VIS>{sentence[span.start:span.end]}</VIS>")
            cursor = span.end
        out.append(sentence[cursor:])
        return "".join(out)

    def _score_images(self, req: ChatRequest) -> str:
        concept = self._between(
            req.user_text, "match this visual concept: ", ". Please remember"
        ).strip()
        m = re.search(r"\*\*\*(.+?)\*\*\*", concept)
        concept_tokens = set(_tokens(m.group(1) if m else concept))
        lines = []
        for ref in req.images:
            try:
                tags = self._tag_reader(ref)
            except Exception:
                tags = []
            if tags == ["black"] or not tags:
                lines.append("A black image")
                lines.append("0")
                continue
            tag_tokens = set(_tokens(" ".join(tags)))
            score = len(concept_tokens & tag_tokens) / max(1, len(concept_tokens))
            lines.append(f"A shot showing the {' and the '.join(tags)}")
            lines.append(f"{score:.2f}")
        return "\n".join(lines)

    def _segment(self, req: ChatRequest) -> str:
        transcript = self._after(req.user_text, "Transcript: ").strip()
        sentences = [transcript[a:b].strip() for a, b in sentence_spans(transcript)]
        sentences = [s for s in sentences if s]
        if not sentences:
            return "<TITLE> Empty\n<SEG> ."
        rng = random.Random(_digest_int("segment", self.seed, transcript))
        lines = []
        i = 0
        while i < len(sentences):
            size = min(rng.choice((1, 2, 2, 3)), len(sentences) - i)
            group = sentences[i : i + size]
            title = " ".join(group[0].split()[:3]).rstrip(".,!?")
            lines.append(f"<TITLE> {title}")
            lines.append(f"<SEG> {' '.join(group)}")
            i += size
        return "\n".join(lines)

    def _alternative_text(self, req: ChatRequest) -> str:
        def section(name: str, until: str | None) -> str:
            chunk = (
                self._between(req.user_text, f"{name}:", until)
                if until
                else self._after(req.user_text, f"{name}:")
            )
            lines = [ln.strip() for ln in chunk.splitlines() if ln.strip()]
            return " ".join(ln for ln in lines if not ln.startswith("[keyframe"))

        before = section("BEFORE", "REPLACE:")
        replace = section("REPLACE", "AFTER:")
        after = section("AFTER", None)
        dur_match = re.search(r"([0-9]+(?:\.[0-9]+)?)\s*seconds", replace)
        duration = float(dur_match.group(1)) if dur_match else 4.0
        words_needed = max(3, int(round(duration / FakeSpeechSynthesizer.SECONDS_PER_WORD)))

        rng = random.Random(_digest_int("alt", self.seed, req.user_text))
        openers = (
            "Now take a look at this part.",
            "Here is a closer look at this spot.",
            "And you have to see this next.",
        )
        fillers = (
            "It is honestly such a nice touch.",
            "This detail really stands out in person.",
            "You can tell a lot of care went into it.",
        )
        parts = [openers[rng.randrange(len(openers))]]
        while sum(len(p.split()) for p in parts) < words_needed:
            parts.append(fillers[rng.randrange(len(fillers))])
        new_text = " ".join(parts)
        return f"{before}<NEW>{new_text}</NEW>{after}"

    def _describe_image(self, req: ChatRequest) -> str:
        if not req.images:
            return "A video frame with no clear subject."
        try:
            tags = self._tag_reader(req.images[0])
        except Exception:
            tags = []
        if not tags or tags == ["black"]:
            return "A black image."
        return f"A shot showing the {' and the '.join(tags)}."

    def _summarize(self, req: ChatRequest) -> str:
        transcript = self._after(req.user_text, "Here is the transcript to summarize: ").strip()
        sentences = [transcript[a:b].strip() for a, b in sentence_spans(transcript)]
        sentences = [s for s in sentences if s]
        if not sentences:
            return "An empty video."
        picks = sentences[:1] + sentences[1:-1][:: max(1, len(sentences) // 5)][:4]
        if len(sentences) > 1:
            picks.append(sentences[-1])
        return " ".join(dict.fromkeys(picks))


# ---------------------------------------------------------------------------
# bundle factory


def build_fake_bundle(
    cfg: ProviderConfig,
    lexicon: tuple[str, ...] = DEFAULT_LEXICON,
    short_words_target: int | None = None,
    sample_rate: int = 16000,
) -> ProviderBundle:
    seed = cfg.seed or 0
    return ProviderBundle(
        chat=FakeChatProvider(
            seed=seed,
            lexicon=lexicon,
            short_words_target=short_words_target or 153,
        ),
        text_embedder=FakeTextEmbedder(),
        joint_embedder=FakeJointEmbedder(),
        synthesizer=FakeSpeechSynthesizer(sample_rate=sample_rate),
        coherence=FakeCoherenceScorer(seed=seed),
        transcriber=FixtureTranscriber(),
        diarizer=FixtureDiarizer(),
        scene_detector=FixtureSceneCutDetector(),
        denoiser=IdentityDenoiser(),
        noun_phrases=LexiconNounPhraseExtractor(lexicon),
        config=cfg,
    )
