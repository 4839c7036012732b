"""Small text helpers shared by the transcript-handling modules."""

from __future__ import annotations

import re
import unicodedata

_SENTENCE_END = re.compile(r"[.!?]+(?=\s|$)")
_WS = re.compile(r"\s+")


def sentence_spans(text: str) -> list[tuple[int, int]]:
    """Split ``text`` into sentence spans that partition it exactly.

    Each span runs from the start of a sentence to the start of the next one,
    so trailing whitespace belongs to the preceding span and
    ``"".join(text[a:b] for a, b in spans) == text``.
    """
    if not text:
        return []
    starts = [0]
    for m in _SENTENCE_END.finditer(text):
        nxt = m.end()
        while nxt < len(text) and text[nxt].isspace():
            nxt += 1
        if nxt < len(text):
            starts.append(nxt)
    spans = []
    for i, start in enumerate(starts):
        end = starts[i + 1] if i + 1 < len(starts) else len(text)
        spans.append((start, end))
    return spans


def normalize_ws(text: str) -> str:
    return _WS.sub(" ", text).strip()


def word_count(text: str) -> int:
    return len(text.split())


def is_emoji(ch: str) -> bool:
    if ch in "‍️":  # ZWJ / variation selector used in emoji sequences
        return True
    code = ord(ch)
    return (
        0x1F000 <= code <= 0x1FAFF
        or 0x2600 <= code <= 0x27BF
        or code in (0x2B50, 0x2B55)
        or unicodedata.category(ch) == "So"
    )


def contains_emoji_or_hashtag(text: str) -> bool:
    if "#" in text:
        return True
    return any(is_emoji(ch) for ch in text)


def strip_leading_ws(text: str) -> tuple[str, int]:
    """Return (stripped_text, number_of_leading_whitespace_chars)."""
    stripped = text.lstrip()
    return stripped, len(text) - len(stripped)
