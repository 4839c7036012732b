"""Strict parsers for every structured completion format the pipeline consumes.

All parsers are total: a completion either parses into the expected structure
or raises :class:`~shortform.errors.ParseError`. Nothing is ever returned
half-parsed, and parsers never mutate state, so callers are free to retry.

Wire formats handled here:
  * ``title<SEP>body``                       — narration generation
  * ``text <VIS>phrase</VIS> text``          — visual concept tagging
  * ``<TITLE> t`` / ``<SEG> s`` blocks       — transcript segmentation
  * ``before<NEW>text</NEW>after``           — speech replacement
  * alternating description / score lines    — clip scoring
"""

from __future__ import annotations

import re

from .errors import ParseError

SEP_TOKEN = "<SEP>"
VIS_OPEN, VIS_CLOSE = "<VIS>", "</VIS>"
TITLE_TOKEN, SEG_TOKEN = "<TITLE>", "<SEG>"
NEW_OPEN, NEW_CLOSE = "<NEW>", "</NEW>"


def parse_title_body(completion: str) -> tuple[str, str]:
    """Split a generation completion on the unique ``<SEP>`` separator."""
    if not completion or not completion.strip():
        raise ParseError("title_body", "empty completion")
    if completion.count(SEP_TOKEN) != 1:
        raise ParseError(
            "title_body",
            f"expected exactly one {SEP_TOKEN}, found {completion.count(SEP_TOKEN)}",
        )
    title, body = completion.split(SEP_TOKEN)
    title, body = title.strip(), body.strip()
    if not title:
        raise ParseError("title_body", "empty title before separator")
    if not body:
        raise ParseError("title_body", "empty body after separator")
    return title, body


def parse_tagged_phrases(tagged: str, original: str) -> list[tuple[str, int, int]]:
    """Extract ``<VIS>`` spans from a tagged sentence.

    Returns ``(phrase, start, end)`` triples with half-open char spans into
    ``original``. The completion must reproduce ``original`` exactly once the
    tags are removed — any altered, dropped, or inserted character outside the
    tags is a hard parse failure.
    """
    pieces: list[tuple[str, bool]] = []  # (text, inside_tag)
    rest = tagged
    while rest:
        open_at = rest.find(VIS_OPEN)
        if open_at == -1:
            if VIS_CLOSE in rest:
                raise ParseError("tagged_phrases", "closing tag without opener")
            pieces.append((rest, False))
            break
        pieces.append((rest[:open_at], False))
        rest = rest[open_at + len(VIS_OPEN):]
        close_at = rest.find(VIS_CLOSE)
        if close_at == -1:
            raise ParseError("tagged_phrases", "unterminated <VIS> tag")
        phrase = rest[:close_at]
        if VIS_OPEN in phrase:
            raise ParseError("tagged_phrases", "nested <VIS> tags")
        if not phrase:
            raise ParseError("tagged_phrases", "empty <VIS> phrase")
        pieces.append((phrase, True))
        rest = rest[close_at + len(VIS_CLOSE):]

    reconstructed = "".join(text for text, _ in pieces)
    if reconstructed != original:
        raise ParseError(
            "tagged_phrases",
            "untagged text does not reproduce the original sentence exactly",
        )
    out = []
    cursor = 0
    for text, inside in pieces:
        if inside:
            out.append((text, cursor, cursor + len(text)))
        cursor += len(text)
    return out


def parse_titled_segments(completion: str) -> list[tuple[str, str]]:
    """Parse strictly alternating ``<TITLE>`` / ``<SEG>`` blocks.

    A segment may span multiple lines; it ends at the next ``<TITLE>`` line or
    at the end of the completion.
    """
    if not completion or not completion.strip():
        raise ParseError("titled_segments", "empty completion")
    segments: list[tuple[str, str]] = []
    title: str | None = None
    seg_lines: list[str] | None = None
    for line in completion.splitlines():
        stripped = line.strip()
        if stripped.startswith(TITLE_TOKEN):
            if title is not None and seg_lines is None:
                raise ParseError("titled_segments", "two titles without a segment")
            if title is not None:
                segments.append((title, "\n".join(seg_lines).strip()))
            title = stripped[len(TITLE_TOKEN):].strip()
            if not title:
                raise ParseError("titled_segments", "empty title")
            seg_lines = None
        elif stripped.startswith(SEG_TOKEN):
            if title is None or seg_lines is not None:
                raise ParseError("titled_segments", "segment without a preceding title")
            body = stripped[len(SEG_TOKEN):].strip()
            if not body:
                raise ParseError("titled_segments", "empty segment")
            seg_lines = [body]
        elif stripped:
            if seg_lines is None:
                raise ParseError("titled_segments", f"unexpected line: {stripped[:40]!r}")
            seg_lines.append(stripped)
    if title is None:
        raise ParseError("titled_segments", "no <TITLE> blocks found")
    if seg_lines is None:
        raise ParseError("titled_segments", "trailing title without a segment")
    segments.append((title, "\n".join(seg_lines).strip()))
    return segments


def parse_replacement(completion: str, before: str | None, after: str | None) -> str:
    """Extract the text strictly between ``<NEW>`` and ``</NEW>``.

    The completion must echo the supplied neighbor speech around the tags
    (compared whitespace-trimmed); an empty neighbor must stay empty.
    """
    if completion.count(NEW_OPEN) != 1 or completion.count(NEW_CLOSE) != 1:
        raise ParseError("replacement", "expected exactly one <NEW>...</NEW> block")
    open_at = completion.find(NEW_OPEN)
    close_at = completion.find(NEW_CLOSE)
    if close_at < open_at:
        raise ParseError("replacement", "</NEW> precedes <NEW>")
    head = completion[:open_at].strip()
    new_text = completion[open_at + len(NEW_OPEN):close_at].strip()
    tail = completion[close_at + len(NEW_CLOSE):].strip()
    if not new_text:
        raise ParseError("replacement", "empty replacement text")
    expected_head = (before or "").strip()
    expected_tail = (after or "").strip()
    if head != expected_head:
        raise ParseError("replacement", "speech before <NEW> does not match the neighbor")
    if tail != expected_tail:
        raise ParseError("replacement", "speech after </NEW> does not match the neighbor")
    return new_text


_NUMBER = re.compile(r"^-?\d+(\.\d+)?$")


def parse_description_scores(completion: str, n: int) -> list[tuple[str, float]]:
    """Parse exactly ``n`` alternating description / score line pairs.

    Blank lines are ignored. Scores must be bare numbers and are clamped to
    [0, 1] after parsing; any other line count or a non-numeric score line is
    a parse failure.
    """
    if n < 1:
        raise ParseError("description_scores", "n must be >= 1")
    lines = [ln.strip() for ln in completion.splitlines() if ln.strip()]
    if len(lines) != 2 * n:
        raise ParseError(
            "description_scores",
            f"expected {2 * n} non-empty lines for {n} pairs, got {len(lines)}",
        )
    out = []
    for i in range(n):
        desc, score_line = lines[2 * i], lines[2 * i + 1]
        if not _NUMBER.match(score_line):
            raise ParseError(
                "description_scores", f"score line {2 * i + 2} is not a number: {score_line!r}"
            )
        if _NUMBER.match(desc):
            raise ParseError(
                "description_scores", f"description line {2 * i + 1} looks like a bare number"
            )
        score = min(1.0, max(0.0, float(score_line)))
        out.append((desc, score))
    return out
