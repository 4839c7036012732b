"""Pipeline configuration.

Every knob the pipeline exposes lives here so the CLI and service share one
source of defaults. Weight vectors are validated to the simplex because the
scoring code assumes a convex combination.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace

from .errors import DomainError

Weights = tuple[float, float, float, float]

EQUAL_WEIGHTS: Weights = (0.25, 0.25, 0.25, 0.25)


def validate_weights(weights: Weights) -> Weights:
    if len(weights) != 4:
        raise DomainError("weights must have exactly 4 entries")
    if any(w < 0 for w in weights):
        raise DomainError("weights must be non-negative")
    total = sum(weights)
    if abs(total - 1.0) > 1e-9:
        raise DomainError(f"weights must sum to 1, got {total}")
    return weights


def normalize_weights(weights: tuple[float, ...]) -> tuple[float, ...]:
    """Rescale non-negative weights to sum to 1; all-zero falls back to equal."""
    if any(w < 0 for w in weights):
        raise DomainError("weights must be non-negative")
    total = sum(weights)
    if total <= 0:
        return tuple(1.0 / len(weights) for _ in weights)
    return tuple(w / total for w in weights)


@dataclass(frozen=True)
class PipelineConfig:
    """End-to-end knobs not owned by a single stage."""

    word_budget: int = 170
    seconds_per_word: float = 0.40
    default_voice: str = "default"
    # Retry budgets for malformed completions (total attempts per op).
    transcript_attempts: int = 3
    concept_attempts: int = 2
    alternative_attempts: int = 2
    segmentation_attempts: int = 2
    scoring_attempts: int = 3
    # Written forms the generated narration must never contain.
    abbreviation_blacklist: tuple[str, ...] = ("tbsp", "1/2", "BBQ")
    # Context window (in sentences) for concept extraction prompts.
    concept_context_sentences: int = 2
    # Additive combined-score bonus for user-selected guide clips.
    guide_bonus: float = 0.15
    max_workers: int = 4

    @property
    def target_duration_s(self) -> float:
        return self.word_budget * self.seconds_per_word


def load_provider_config_file(path: str) -> dict:
    """Read the key-value provider config document (flat JSON object)."""
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    if not isinstance(data, dict):
        raise DomainError("provider config must be a flat key-value object")
    return data


def resolve_credentials(data: dict) -> str | None:
    """Credentials come from the environment, never the config file itself."""
    env_name = data.get("credentials_env", "SHORTFORM_API_KEY")
    return os.environ.get(env_name)


def with_overrides(cfg: PipelineConfig, **kwargs) -> PipelineConfig:
    kwargs = {k: v for k, v in kwargs.items() if v is not None}
    return replace(cfg, **kwargs)
