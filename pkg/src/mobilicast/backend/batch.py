"""Order-preserving, bounded-concurrency batch generation."""
from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Sequence

from ..errors import BackendError, ParseFailure, UnreadableInput
from ..ingest import write_text_atomic
from ..persona import SurveyAssignment, render_prompt
from .base import Backend, DecodingConfig, GenerationRecord


def run_batch(
    assignments: Sequence[SurveyAssignment],
    backend: Backend,
    decoding: DecodingConfig | None = None,
    concurrency_limit: int = 1,
    seeds: Sequence[int] | None = None,
    prompts: Sequence[str] | None = None,
) -> list[GenerationRecord]:
    """One record per assignment, in input order; failures become marked records."""
    if concurrency_limit < 1:
        raise ValueError("concurrency_limit must be at least 1")
    decoding = decoding or DecodingConfig()
    if seeds is not None and len(seeds) != len(assignments):
        raise ValueError("need exactly one seed per assignment")
    if prompts is None:
        prompts = [render_prompt(a) for a in assignments]

    def one(i: int) -> GenerationRecord:
        a, prompt = assignments[i], prompts[i]
        seed = None if seeds is None else seeds[i]
        start = time.perf_counter()
        try:
            text, attempts = backend.complete(prompt, decoding, seed=seed)
            error = None
        except Exception as exc:  # one bad generation must not abort the batch
            attempts = exc.attempts if isinstance(exc, BackendError) else 1
            text, error = "", f"{type(exc).__name__}: {exc}"
        latency = round((time.perf_counter() - start) * 1000) if backend.measures_latency else 0
        return GenerationRecord(a, prompt, text, backend.backend_id, latency, attempts, error)

    if concurrency_limit == 1:
        return [one(i) for i in range(len(assignments))]
    with ThreadPoolExecutor(max_workers=concurrency_limit) as pool:
        return list(pool.map(one, range(len(assignments))))


def records_to_jsonl(records: Iterable[GenerationRecord]) -> str:
    return "".join(r.to_json() + "\n" for r in records)


def write_records(records: Iterable[GenerationRecord], path) -> None:
    write_text_atomic(path, records_to_jsonl(records))


def read_records(path) -> list[GenerationRecord]:
    out = []
    try:
        with open(path, encoding="utf-8") as fh:
            for n, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    out.append(GenerationRecord.from_dict(json.loads(line)))
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise ParseFailure(f"{path}:{n}: malformed generation record ({exc})") from exc
    except OSError as exc:
        raise UnreadableInput(f"cannot read {path}: {exc}") from exc
    return out
