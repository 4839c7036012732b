"""Retry with exponential backoff for live provider transports."""

from __future__ import annotations

import time
from typing import Callable, TypeVar

from ..errors import ProviderUnavailable

T = TypeVar("T")


class TransportError(Exception):
    """Raised by transports on network-level failure; retryable."""


def with_retries(
    fn: Callable[[], T],
    max_retries: int,
    base_delay_s: float = 1.0,
    max_delay_s: float = 30.0,
    sleep: Callable[[float], None] = time.sleep,
) -> T:
    """Call ``fn`` up to ``max_retries + 1`` times.

    Backoff doubles from ``base_delay_s`` and is capped at ``max_delay_s``.
    Only :class:`TransportError` is retried; anything else propagates.
    """
    attempts = max_retries + 1
    last: TransportError | None = None
    for attempt in range(attempts):
        try:
            return fn()
        except TransportError as exc:
            last = exc
            if attempt < attempts - 1:
                sleep(min(base_delay_s * (2 ** attempt), max_delay_s))
    raise ProviderUnavailable(f"transport failed after {attempts} attempts: {last}")
