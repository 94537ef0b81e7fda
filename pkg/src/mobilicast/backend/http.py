"""Chat-completions HTTP client with bounded exponential-backoff retries."""
from __future__ import annotations

import logging
import os
import time
from typing import Callable

import httpx

from ..errors import BackendUnavailable, MalformedResponse, RateLimited
from .base import Completion, DecodingConfig

logger = logging.getLogger(__name__)

API_KEY_ENV = "MOBILICAST_API_KEY"


class HttpBackend:
    """POSTs ``{model, messages, temperature, max_tokens[, top_k]}`` to ``endpoint``.

    Only HTTP 429 and transport errors are retried, waiting
    ``backoff_initial * backoff_factor**n`` seconds between attempts.
    """

    measures_latency = True

    def __init__(
        self,
        endpoint: str,
        model: str,
        *,
        api_key: str | None = None,
        max_attempts: int = 5,
        backoff_initial: float = 1.0,
        backoff_factor: float = 2.0,
        timeout: float = 60.0,
        send_top_k: bool = True,
        sleep: Callable[[float], None] = time.sleep,
        transport: httpx.BaseTransport | None = None,
    ):
        if max_attempts < 1:
            raise ValueError("max_attempts must be at least 1")
        self.endpoint = endpoint
        self.model = model
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self.max_attempts = max_attempts
        self.backoff_initial = backoff_initial
        self.backoff_factor = backoff_factor
        self.send_top_k = send_top_k
        self._sleep = sleep
        self._client = httpx.Client(timeout=timeout, transport=transport)
        self.backend_id = f"http:{model}"

    def close(self) -> None:
        self._client.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def payload(self, prompt: str, decoding: DecodingConfig) -> dict:
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": decoding.temperature,
            "max_tokens": decoding.max_tokens,
        }
        if decoding.top_k is not None and self.send_top_k:
            body["top_k"] = decoding.top_k
        return body

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        return headers

    @staticmethod
    def extract_text(data) -> str:
        try:
            choice = data["choices"][0]
        except (KeyError, IndexError, TypeError) as exc:
            raise MalformedResponse(f"response has no choices: {exc!r}") from exc
        message = choice.get("message") if isinstance(choice, dict) else None
        text = message.get("content") if isinstance(message, dict) else None
        if text is None and isinstance(choice, dict):
            text = choice.get("text")
        if not isinstance(text, str):
            raise MalformedResponse("first choice carries no text content")
        return text

    def complete(self, prompt: str, decoding: DecodingConfig | None = None, *, seed: int | None = None) -> Completion:
        if not prompt:
            raise ValueError("prompt must be non-empty")
        decoding = decoding or DecodingConfig()
        body = self.payload(prompt, decoding)
        delay = self.backoff_initial
        for attempt in range(1, self.max_attempts + 1):
            try:
                resp = self._client.post(self.endpoint, json=body, headers=self._headers())
            except httpx.TransportError as exc:
                last: Exception = BackendUnavailable(f"transport error: {exc}", attempts=attempt)
            else:
                if resp.status_code == 429:
                    last = RateLimited("rate limited (HTTP 429)", attempts=attempt)
                elif resp.status_code >= 400:
                    raise BackendUnavailable(f"HTTP {resp.status_code}", attempts=attempt)
                else:
                    try:
                        data = resp.json()
                    except ValueError as exc:
                        raise MalformedResponse(f"non-JSON body: {exc}", attempts=attempt) from exc
                    try:
                        return Completion(self.extract_text(data), attempt)
                    except MalformedResponse as exc:
                        exc.attempts = attempt
                        raise
            if attempt < self.max_attempts:
                logger.warning("%s; retrying in %.1fs (attempt %d/%d)", last, delay, attempt, self.max_attempts)
                self._sleep(delay)
                delay *= self.backoff_factor
        raise last

    def generate(self, prompt: str, decoding: DecodingConfig | None = None, *, seed: int | None = None) -> str:
        return self.complete(prompt, decoding, seed=seed).text
