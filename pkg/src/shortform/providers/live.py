"""Live adapters.

Only the chat contract ships with a transport here (a minimal JSON-over-HTTP
client); wrapping the real transcription/diarization/embedding tools is a
deployment concern and raises :class:`ProviderUnavailable` until an adapter
is configured. The retry/backoff contract is shared with any future adapter.
"""

from __future__ import annotations

import json
import urllib.error
import urllib.request
from typing import Callable

from ..errors import EmptyCompletion, ProviderUnavailable
from .base import ChatProvider, ChatRequest, ProviderConfig
from .retry import TransportError, with_retries


def _http_transport(cfg: ProviderConfig, credentials: str | None) -> Callable[[ChatRequest], str]:
    def send(req: ChatRequest) -> str:
        payload = json.dumps(
            {
                "system": req.system_text,
                "user": req.user_text,
                "images": list(req.images),
                "temperature": req.temperature,
            }
        ).encode("utf-8")
        headers = {"Content-Type": "application/json"}
        if credentials:
            headers["Authorization"] = f"Bearer {credentials}"
        request = urllib.request.Request(cfg.endpoint, data=payload, headers=headers)
        try:
            with urllib.request.urlopen(request, timeout=cfg.timeout_s) as resp:
                body = json.loads(resp.read().decode("utf-8"))
        except (urllib.error.URLError, OSError, ValueError) as exc:
            raise TransportError(str(exc))
        return body.get("text", "")

    return send


class LiveChatProvider(ChatProvider):
    def __init__(
        self,
        cfg: ProviderConfig,
        credentials: str | None = None,
        transport: Callable[[ChatRequest], str] | None = None,
        sleep=None,
    ):
        self.cfg = cfg
        self._transport = transport or _http_transport(cfg, credentials)
        self._sleep = sleep

    def chat(self, req: ChatRequest) -> str:
        kwargs = {"sleep": self._sleep} if self._sleep else {}
        text = with_retries(lambda: self._transport(req), self.cfg.max_retries, **kwargs)
        if not text:
            raise EmptyCompletion("live chat returned empty completion")
        return text


class _NoLiveAdapter:
    """Placeholder for live tools this build does not bundle."""

    def __init__(self, name: str):
        self._name = name

    def __getattr__(self, item):
        def _raise(*args, **kwargs):
            raise ProviderUnavailable(f"no live adapter bundled for {self._name}")

        return _raise
