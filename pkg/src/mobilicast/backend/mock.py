"""Deterministic Markov diary generator used as a test double and statistical oracle."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from ..errors import ParseFailure, UnreadableInput
from ..model import LAST_MINUTE, ORDER11, TYPE11, DiaryEntry, TransitionModel, builtin_taxonomy
from ..parser import render_diary_table
from .base import Completion, DecodingConfig


def transition_from_matrix(matrix, order_types=ORDER11, scheme: str = TYPE11) -> TransitionModel:
    """Wrap a square probability matrix as an order-1 model (counts are zero)."""
    m = np.asarray(matrix, dtype=float)
    return TransitionModel(1, scheme, tuple(order_types), tuple(order_types), m,
                           np.zeros(m.shape, dtype=np.int64))


@dataclass(frozen=True)
class MockParams:
    transition: TransitionModel
    dwell_minutes: Mapping[str, tuple[int, int]]
    gap_minutes: tuple[int, int] = (5, 45)
    start_type: str = "Home"
    end_by_min: int = LAST_MINUTE
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        t = self.transition
        if t.order != 1 or t.scheme != TYPE11 or tuple(t.contexts) != ORDER11 \
                or tuple(t.destinations) != ORDER11:
            raise ValueError("mock transition must be an order-1 type11 model in canonical order")
        m = t.matrix
        if np.any(m < 0) or not np.allclose(m.sum(axis=1), 1.0, atol=1e-9):
            raise ValueError("mock transition must be row-stochastic")
        if np.any(np.diag(m) != 0):
            raise ValueError("mock transition must have a zero diagonal")
        lo, hi = self.gap_minutes
        if not 0 <= lo <= hi <= 120:
            raise ValueError("gap bounds must lie within [0, 120]")
        for typ in ORDER11:
            if typ not in self.dwell_minutes:
                raise ValueError(f"no dwell bounds for {typ!r}")
            d_lo, d_hi = self.dwell_minutes[typ]
            if not 1 <= d_lo <= d_hi:
                raise ValueError(f"dwell bounds for {typ!r} must be positive")
        if self.start_type not in ORDER11:
            raise ValueError(f"unknown start type {self.start_type!r}")
        if not 0 <= self.end_by_min <= LAST_MINUTE:
            raise ValueError("end_by_min must be a minute of the day")
        cum = np.cumsum(m, axis=1)
        for i, row in enumerate(m):
            # rounding must never let a draw land past the last positive cell
            cum[i, np.flatnonzero(row > 0)[-1]:] = 1.0
        object.__setattr__(self, "_cum", cum)

    def to_dict(self) -> dict[str, Any]:
        return {
            "transition": self.transition.matrix.tolist(),
            "types": list(ORDER11),
            "dwell_minutes": {k: list(v) for k, v in self.dwell_minutes.items()},
            "gap_minutes": list(self.gap_minutes),
            "start_type": self.start_type,
            "end_by_min": self.end_by_min,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "MockParams":
        try:
            types = tuple(data.get("types", ORDER11))
            if set(types) != set(ORDER11) or len(types) != len(ORDER11):
                raise ValueError("'types' must list the 11 location types")
            raw = np.asarray(data["transition"], dtype=float)
            perm = [types.index(t) for t in ORDER11]
            matrix = raw[np.ix_(perm, perm)]
            return cls(
                transition=transition_from_matrix(matrix),
                dwell_minutes={k: tuple(int(x) for x in v) for k, v in data["dwell_minutes"].items()},
                gap_minutes=tuple(int(x) for x in data.get("gap_minutes", (5, 45))),
                start_type=data.get("start_type", "Home"),
                end_by_min=int(data.get("end_by_min", LAST_MINUTE)),
            )
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise ParseFailure(f"invalid mock parameters: {exc}") from exc

    @classmethod
    def load(cls, path) -> "MockParams":
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.from_dict(json.load(fh))
        except OSError as exc:
            raise UnreadableInput(f"cannot read mock parameters {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ParseFailure(f"invalid mock parameters {path}: {exc}") from exc


def default_mock_params() -> MockParams:
    """A plausible weekday-ish chain: most trips leave from or return to Home."""
    n = len(ORDER11)
    home = ORDER11.index("Home")
    m = np.full((n, n), 0.02)
    m[:, home] = 0.5
    m[home] = 0.04
    m[home, ORDER11.index("Work")] = 0.3
    m[home, ORDER11.index("Shopping")] = 0.16
    np.fill_diagonal(m, 0.0)
    m /= m.sum(axis=1, keepdims=True)
    dwell = {t: (30, 240) for t in ORDER11}
    dwell["Home"] = (60, 480)
    dwell["Work"] = (120, 540)
    return MockParams(transition_from_matrix(m), dwell, gap_minutes=(5, 45))


def simulate_day(params: MockParams, rng: np.random.Generator) -> list[DiaryEntry]:
    """Sample one day of visits; the last visit always runs to 11:59 PM."""
    tax = builtin_taxonomy()
    g_lo, g_hi = params.gap_minutes
    cur = ORDER11.index(params.start_type)
    arrive = 0
    entries = []
    while True:
        d_lo, d_hi = params.dwell_minutes[ORDER11[cur]]
        depart = arrive + int(rng.integers(d_lo, d_hi + 1))
        next_arrive = depart + int(rng.integers(g_lo, g_hi + 1))
        typ = ORDER11[cur]
        if next_arrive > params.end_by_min:
            entries.append(DiaryEntry(typ, arrive, LAST_MINUTE, tax.representative[typ]))
            return entries
        entries.append(DiaryEntry(typ, arrive, depart, tax.representative[typ]))
        cur = min(int(np.searchsorted(params._cum[cur], rng.random(), side="right")), len(ORDER11) - 1)
        arrive = next_arrive


def mock_generate(params: MockParams, assignment, rng: np.random.Generator) -> str:
    """Render a simulated day as the markdown diary table the prompt asks for."""
    return render_diary_table(simulate_day(params, rng))


def _prompt_seed(base: int, prompt: str) -> int:
    digest = hashlib.sha256(f"{base}:{prompt}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


class MockBackend:
    """Backend contract over :func:`mock_generate`.

    Without an explicit per-call seed the stream is derived from the base seed
    and the prompt text, so repeat calls give byte-identical output.
    """

    measures_latency = False

    def __init__(self, params: MockParams | None = None, seed: int = 0, backend_id: str = "mock"):
        self.params = params or default_mock_params()
        self.seed = seed
        self.backend_id = backend_id

    def complete(self, prompt: str, decoding: DecodingConfig | None = None, *, seed: int | None = None) -> Completion:
        if not prompt:
            raise ValueError("prompt must be non-empty")
        rng = np.random.default_rng(seed if seed is not None else _prompt_seed(self.seed, prompt))
        return Completion(mock_generate(self.params, None, rng), 1)

    def generate(self, prompt: str, decoding: DecodingConfig | None = None, *, seed: int | None = None) -> str:
        return self.complete(prompt, decoding, seed=seed).text
