"""Generator contract shared by the HTTP and mock backends."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Mapping, NamedTuple, Protocol

from ..persona import SurveyAssignment


@dataclass(frozen=True)
class DecodingConfig:
    temperature: float = 1.0
    top_k: int | None = None
    max_tokens: int = 1024

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be nonnegative")
        if self.top_k is not None and self.top_k < 1:
            raise ValueError("top_k must be at least 1")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be positive")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any] | None) -> "DecodingConfig":
        data = dict(data or {})
        return cls(
            temperature=float(data.get("temperature", 1.0)),
            top_k=None if data.get("top_k") is None else int(data["top_k"]),
            max_tokens=int(data.get("max_tokens", 1024)),
        )


# Open-weights setup: top-k sampling with k=50 at temperature 1.
TOP_K_50 = DecodingConfig(temperature=1.0, top_k=50)


class Completion(NamedTuple):
    text: str
    attempts: int = 1


class Backend(Protocol):
    backend_id: str
    # False when latency is not meaningful (the mock), keeping records reproducible
    measures_latency: bool

    def complete(self, prompt: str, decoding: DecodingConfig, *, seed: int | None = None) -> Completion:
        ...

    def generate(self, prompt: str, decoding: DecodingConfig, *, seed: int | None = None) -> str:
        ...


@dataclass(frozen=True)
class GenerationRecord:
    assignment: SurveyAssignment
    prompt: str
    raw_completion: str
    backend_id: str
    latency_ms: int
    attempt_count: int
    error: str | None = None

    def __post_init__(self):
        if self.attempt_count < 1:
            raise ValueError("attempt_count must be at least 1")

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> dict[str, Any]:
        return {
            "assignment": self.assignment.to_dict(),
            "prompt": self.prompt,
            "raw_completion": self.raw_completion,
            "backend_id": self.backend_id,
            "latency_ms": self.latency_ms,
            "attempt_count": self.attempt_count,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "GenerationRecord":
        return cls(
            assignment=SurveyAssignment.from_dict(data["assignment"]),
            prompt=str(data["prompt"]),
            raw_completion=str(data["raw_completion"]),
            backend_id=str(data["backend_id"]),
            latency_ms=int(data["latency_ms"]),
            attempt_count=int(data["attempt_count"]),
            error=data.get("error"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True)
