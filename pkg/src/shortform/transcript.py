"""Generated short-form transcript types."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .errors import DomainError
from .textutil import contains_emoji_or_hashtag, sentence_spans


@dataclass(frozen=True)
class SentenceSpan:
    index: int
    text: str
    start: int
    end: int  # half-open char span into the body


@dataclass(frozen=True)
class ShortTranscript:
    title: str
    body: str
    sentences: tuple[SentenceSpan, ...]

    def __post_init__(self):
        if not self.title or not self.body:
            raise DomainError("title and body must be non-empty")
        if contains_emoji_or_hashtag(self.title) or contains_emoji_or_hashtag(self.body):
            raise DomainError("transcript must not contain emoji or hashtag characters")
        cursor = 0
        for s in self.sentences:
            if s.start != cursor or s.end <= s.start:
                raise DomainError("sentence spans must partition the body")
            if self.body[s.start : s.end] != s.text:
                raise DomainError("sentence text must equal its body slice")
            cursor = s.end
        if cursor != len(self.body):
            raise DomainError("sentence spans must cover the whole body")

    @classmethod
    def from_parts(cls, title: str, body: str) -> "ShortTranscript":
        spans = sentence_spans(body)
        sentences = tuple(
            SentenceSpan(index=i, text=body[a:b], start=a, end=b)
            for i, (a, b) in enumerate(spans)
        )
        return cls(title=title, body=body, sentences=sentences)

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "body": self.body,
            "sentences": [asdict(s) for s in self.sentences],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ShortTranscript":
        return cls(
            title=d["title"],
            body=d["body"],
            sentences=tuple(SentenceSpan(**s) for s in d["sentences"]),
        )


@dataclass(frozen=True)
class VisualConcept:
    """A visually concrete phrase in the body, to be illustrated by footage."""

    concept_id: str
    phrase: str
    sentence_index: int
    start: int
    end: int  # half-open char span into the body
    rel_pos: float  # span midpoint / body length, in [0, 1]

    def __post_init__(self):
        if self.end <= self.start:
            raise DomainError("concept span must be non-empty")
        if not (0.0 <= self.rel_pos <= 1.0):
            raise DomainError("rel_pos must be in [0, 1]")

    def validate_against(self, body: str) -> "VisualConcept":
        if body[self.start : self.end] != self.phrase:
            raise DomainError("concept phrase must be the verbatim body slice at its span")
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "VisualConcept":
        return cls(**d)
