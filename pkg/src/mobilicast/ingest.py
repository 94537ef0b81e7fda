"""Readers and writers for prior files and canonical corpus files (JSON)."""
from __future__ import annotations

import datetime as dt
import json
import logging
import math
import os
import re
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from .errors import (
    EmptyCorpus,
    InvalidDiary,
    InvalidDistribution,
    IoFailure,
    MissingVariable,
    ParseFailure,
    UnreadableInput,
)
from .model import SOURCES, Corpus, DiaryEntry, TravelDiary

logger = logging.getLogger(__name__)

CONTROL_VARIABLES = (
    "sex",
    "age_group",
    "race",
    "school_enrollment",
    "labor_force",
    "employment",
    "occupation",
    "marital_status",
    "household_type",
    "children_under_18",
)
BOOLEAN_VARIABLES = frozenset(
    {"school_enrollment", "labor_force", "employment", "children_under_18"}
)
_TRUE = frozenset({"yes", "true", "1", "y"})
_FALSE = frozenset({"no", "false", "0", "n"})

RENORMALIZE_TOL = 1e-6
_AGE_GROUP = re.compile(r"^\s*(\d+)\s*(?:[-–]\s*(\d+)|\+)\s*$")


@dataclass(frozen=True)
class CategoricalPrior:
    variable_name: str
    outcomes: tuple[tuple[str, float], ...]

    def __post_init__(self):
        if not self.outcomes:
            raise InvalidDistribution(f"{self.variable_name}: no outcomes")
        probs = [p for _, p in self.outcomes]
        if any(not math.isfinite(p) or p < 0 for p in probs):
            raise InvalidDistribution(f"{self.variable_name}: negative or non-finite probability")
        if abs(sum(probs) - 1.0) > 1e-9:
            raise InvalidDistribution(f"{self.variable_name}: probabilities sum to {sum(probs)}")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.outcomes)

    @property
    def probabilities(self) -> tuple[float, ...]:
        return tuple(p for _, p in self.outcomes)


@dataclass(frozen=True)
class PriorSet:
    region_id: str
    priors: Mapping[str, CategoricalPrior]
    age_range: tuple[int, int]
    city_name: str = ""
    state: str = ""

    def __post_init__(self):
        missing = [v for v in CONTROL_VARIABLES if v not in self.priors]
        if missing:
            raise MissingVariable(f"priors missing control variable(s): {', '.join(missing)}")
        lo, hi = self.age_range
        if lo < 16 or hi < lo:
            raise InvalidDistribution(f"invalid age_range {self.age_range}; minimum age is 16")
        if not any(p > 0 and _overlaps(age_group_bounds(g, hi), self.age_range)
                   for g, p in self.priors["age_group"].outcomes):
            raise InvalidDistribution("no age group with positive mass intersects age_range")


def age_group_bounds(label: str, open_max: int) -> tuple[int, int]:
    """Parse ``"55-64"`` or ``"85+"``; open-ended groups close at ``open_max``."""
    m = _AGE_GROUP.match(label)
    if not m:
        raise ParseFailure(f"unrecognised age group label {label!r}")
    lo = int(m.group(1))
    hi = int(m.group(2)) if m.group(2) is not None else max(lo, open_max)
    if hi < lo:
        raise ParseFailure(f"empty age group {label!r}")
    return lo, hi


def _overlaps(a: tuple[int, int], b: tuple[int, int]) -> bool:
    return max(a[0], b[0]) <= min(a[1], b[1])


def parse_bool_label(label: str) -> bool:
    key = label.strip().lower()
    if key in _TRUE:
        return True
    if key in _FALSE:
        return False
    raise ParseFailure(f"boolean control variable label must be yes/no, got {label!r}")


def _read_json(path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, UnicodeDecodeError) as exc:
        raise UnreadableInput(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseFailure(f"{path}: invalid JSON ({exc})") from exc


def _build_prior(name: str, raw: Any) -> CategoricalPrior:
    if not isinstance(raw, list) or not raw:
        raise InvalidDistribution(f"{name}: expected a non-empty list of outcomes")
    outcomes = []
    for item in raw:
        try:
            label, p = str(item["label"]), float(item["p"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseFailure(f"{name}: malformed outcome {item!r}") from exc
        if not math.isfinite(p) or p < 0:
            raise InvalidDistribution(f"{name}: negative or non-finite probability {p}")
        if name in BOOLEAN_VARIABLES:
            parse_bool_label(label)
        outcomes.append((label, p))
    total = sum(p for _, p in outcomes)
    if abs(total - 1.0) > RENORMALIZE_TOL:
        raise InvalidDistribution(f"{name}: probabilities sum to {total}")
    outcomes = [(label, p / total) for label, p in outcomes]
    return CategoricalPrior(name, tuple(outcomes))


def priors_from_dict(data: Any) -> PriorSet:
    if not isinstance(data, dict):
        raise ParseFailure("prior file must hold a JSON object")
    try:
        region_id = str(data["region_id"])
        lo, hi = (int(x) for x in data["age_range"])
        raw_priors = data["priors"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseFailure(f"prior file missing or malformed field: {exc}") from exc
    if not isinstance(raw_priors, dict):
        raise ParseFailure("'priors' must be an object")
    missing = [v for v in CONTROL_VARIABLES if v not in raw_priors]
    if missing:
        raise MissingVariable(f"priors missing control variable(s): {', '.join(missing)}")
    priors = {name: _build_prior(name, raw_priors[name]) for name in CONTROL_VARIABLES}
    for label in priors["age_group"].labels:
        age_group_bounds(label, hi)
    return PriorSet(
        region_id=region_id,
        priors=priors,
        age_range=(lo, hi),
        city_name=str(data.get("city", region_id)),
        state=str(data.get("state", "")),
    )


def load_priors(path) -> PriorSet:
    return priors_from_dict(_read_json(path))


def diary_to_dict(diary: TravelDiary) -> dict:
    out: dict[str, Any] = {
        "persona_id": diary.persona_id,
        "date": diary.survey_date.isoformat(),
        "entries": [
            {"place": e.place_name, "arrive": e.arrival_min, "depart": e.departure_min,
             "code": e.nhts_code}
            for e in diary.entries
        ],
    }
    if diary.persona is not None:
        out["persona"] = dict(diary.persona)
    return out


def diary_from_dict(raw: Mapping[str, Any]) -> TravelDiary:
    """Build a diary; raises InvalidDiary on invariant violations, ParseFailure on shape."""
    try:
        entries_raw = raw["entries"]
        persona_id = str(raw["persona_id"])
        date = dt.date.fromisoformat(raw["date"])
        entries = []
        for e in entries_raw:
            values = [e["arrive"], e["depart"], e["code"]]
            if any(isinstance(v, bool) or not isinstance(v, int) for v in values):
                raise InvalidDiary(f"non-integer time or code in entry {e!r}")
            entries.append(DiaryEntry(str(e["place"]), *values))
    except (KeyError, TypeError) as exc:
        raise ParseFailure(f"malformed diary record: {exc!r}") from exc
    except ValueError as exc:
        raise InvalidDiary(f"bad date: {exc}") from exc
    persona = raw.get("persona")
    if persona is not None and not isinstance(persona, dict):
        raise ParseFailure("diary 'persona' must be an object")
    return TravelDiary(persona_id, date, tuple(entries), persona)


def corpus_to_dict(corpus: Corpus) -> dict:
    return {
        "region_id": corpus.region_id,
        "source": corpus.source,
        "diaries": [diary_to_dict(d) for d in corpus.diaries],
    }


def corpus_from_dict(data: Any, diagnostics: list[str] | None = None) -> Corpus:
    if not isinstance(data, dict):
        raise ParseFailure("corpus file must hold a JSON object")
    try:
        region_id = str(data["region_id"])
        source = data["source"]
        raw_diaries = data["diaries"]
    except KeyError as exc:
        raise ParseFailure(f"corpus file missing field {exc}") from exc
    if source not in SOURCES or not region_id:
        raise ParseFailure(f"invalid corpus header (region_id={region_id!r}, source={source!r})")
    if not isinstance(raw_diaries, list):
        raise ParseFailure("'diaries' must be a list")
    diaries = []
    for i, raw in enumerate(raw_diaries):
        try:
            diaries.append(diary_from_dict(raw))
        except InvalidDiary as exc:
            msg = f"diary #{i} ({raw.get('persona_id', '?') if isinstance(raw, dict) else '?'}) excluded: {exc}"
            logger.warning(msg)
            if diagnostics is not None:
                diagnostics.append(msg)
    if not diaries:
        raise EmptyCorpus(f"corpus {region_id!r} has no valid diaries")
    return Corpus(region_id, source, tuple(diaries))


def load_corpus(path, diagnostics: list[str] | None = None) -> Corpus:
    """Read a corpus file; invalid diaries are dropped and reported in ``diagnostics``."""
    return corpus_from_dict(_read_json(path), diagnostics)


def write_text_atomic(path, text: str) -> None:
    """Write via a sibling temp file so readers never see a partial file."""
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def dump_json(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, indent=2, sort_keys=False) + "\n"


def save_corpus(corpus: Corpus, path) -> None:
    write_text_atomic(path, dump_json(corpus_to_dict(corpus)))
