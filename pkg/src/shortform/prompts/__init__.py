"""Prompt template loading and assembly.

Templates are plain-text package data with ``{name}`` placeholders, one pair
of files per prompt family (``<family>.system.txt`` / ``<family>.user.txt``).
Filling is a literal string substitution (not ``str.format``) so template text
containing braces can never break assembly. Tests diff assembled prompts
against golden files, so edits to the templates are deliberate acts.
"""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

from ..errors import DomainError

FAMILIES = (
    "short_transcript",
    "visual_concepts",
    "clip_scoring",
    "segmentation",
    "alternative_text",
    "clip_description",
    "baseline_summary",
)

_PLACEHOLDER = re.compile(r"\{([a-z_]+)\}")


@lru_cache(maxsize=None)
def load_template(family: str, role: str) -> str:
    if family not in FAMILIES:
        raise DomainError(f"unknown prompt family: {family}")
    if role not in ("system", "user"):
        raise DomainError(f"unknown prompt role: {role}")
    ref = resources.files("shortform.prompts").joinpath(f"{family}.{role}.txt")
    return ref.read_text(encoding="utf-8").rstrip("\n")


def fill(template: str, values: dict[str, str]) -> str:
    """Substitute every ``{name}`` placeholder; unknown or missing names fail."""
    names = set(_PLACEHOLDER.findall(template))
    missing = names - set(values)
    if missing:
        raise DomainError(f"missing placeholder values: {sorted(missing)}")
    out = template
    for name in names:
        out = out.replace("{" + name + "}", values[name])
    return out


def build(family: str, values: dict[str, str] | None = None) -> tuple[str, str]:
    """Return the assembled ``(system_text, user_text)`` pair for a family."""
    values = values or {}
    system = fill(load_template(family, "system"), values)
    user = fill(load_template(family, "user"), values)
    return system, user
