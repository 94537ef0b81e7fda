"""Survey assignment sampling (persona + date) and travel-diary prompt rendering."""
from __future__ import annotations

import bisect
import datetime as dt
import itertools
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from string import Template
from typing import Any, Mapping, NamedTuple

import numpy as np

from .errors import InvalidRange
from .ingest import PriorSet, age_group_bounds, parse_bool_label
from .model import NHTS_LABELS, Persona

WEEKDAYS = ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday")

NHTS_START = dt.date(2016, 4, 19)
NHTS_END = dt.date(2017, 4, 25)

# subj, Subj, poss, is, was, has, lives
_PRONOUNS = {
    "female": ("she", "She", "her", "is", "was", "has", "lives"),
    "male": ("he", "He", "his", "is", "was", "has", "lives"),
}
_NEUTRAL = ("they", "They", "their", "are", "were", "have", "live")


def weekday_name(date: dt.date) -> str:
    return WEEKDAYS[date.weekday()]


@dataclass(frozen=True)
class SurveyAssignment:
    persona_id: str
    persona: Persona
    survey_date: dt.date
    weekday: str = ""

    def __post_init__(self):
        expected = weekday_name(self.survey_date)
        if not self.weekday:
            object.__setattr__(self, "weekday", expected)
        elif self.weekday != expected:
            raise ValueError(f"{self.survey_date} is a {expected}, not {self.weekday}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "persona_id": self.persona_id,
            "persona": self.persona.to_dict(),
            "date": self.survey_date.isoformat(),
            "weekday": self.weekday,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SurveyAssignment":
        return cls(
            persona_id=str(data["persona_id"]),
            persona=Persona.from_dict(data["persona"]),
            survey_date=dt.date.fromisoformat(data["date"]),
            weekday=data.get("weekday", ""),
        )


class SurveyDate(NamedTuple):
    date: dt.date
    weekday: str


def _draw(prior, rng: np.random.Generator) -> str:
    cum = list(itertools.accumulate(prior.probabilities))
    u = rng.random() * cum[-1]
    idx = min(bisect.bisect_right(cum, u), len(cum) - 1)
    # zero-probability outcomes share a cumulative value with their predecessor
    while prior.probabilities[idx] == 0 and idx > 0:
        idx -= 1
    return prior.labels[idx]


def sample_persona(priors: PriorSet, rng: np.random.Generator) -> Persona:
    """Draw one respondent from independent marginals, then repair consistency.

    Every variable is drawn on every call (in a fixed order) so the number of
    random draws per persona is constant.
    """
    p = priors.priors
    lo, hi = priors.age_range
    sex = _draw(p["sex"], rng)

    groups = p["age_group"]
    usable = [
        (label, prob)
        for label, prob in groups.outcomes
        if max(age_group_bounds(label, hi)[0], lo) <= min(age_group_bounds(label, hi)[1], hi)
    ]
    restricted = _Restricted(tuple(l for l, _ in usable), tuple(q for _, q in usable))
    group = _draw(restricted, rng)
    g_lo, g_hi = age_group_bounds(group, hi)
    age = int(rng.integers(max(g_lo, lo), min(g_hi, hi) + 1))

    race = _draw(p["race"], rng)
    enrolled = parse_bool_label(_draw(p["school_enrollment"], rng))
    in_labor_force = parse_bool_label(_draw(p["labor_force"], rng))
    employed = parse_bool_label(_draw(p["employment"], rng))
    occupation = _draw(p["occupation"], rng)
    marital = _draw(p["marital_status"], rng)
    household = _draw(p["household_type"], rng)
    children = parse_bool_label(_draw(p["children_under_18"], rng))

    if not in_labor_force:
        employed = False
    if not employed:
        occupation = None

    return Persona(
        sex=sex,
        age=age,
        race=race,
        school_enrollment=enrolled,
        in_labor_force=in_labor_force,
        employed=employed,
        occupation=occupation,
        marital_status=marital,
        household_type=household,
        children_under_18=children,
        city_name=priors.city_name or priors.region_id,
        state=priors.state,
        region_id=priors.region_id,
    )


class _Restricted(NamedTuple):
    labels: tuple
    probabilities: tuple


def sample_date(start: dt.date, end: dt.date, rng: np.random.Generator) -> SurveyDate:
    """Uniform date over the inclusive range ``[start, end]``."""
    if start > end:
        raise InvalidRange(f"start {start} is after end {end}")
    span = (end - start).days
    date = start + dt.timedelta(days=int(rng.integers(0, span + 1)))
    return SurveyDate(date, weekday_name(date))


def plan_assignments(
    priors: PriorSet,
    start: dt.date,
    end: dt.date,
    count: int,
    seed: int,
) -> list[tuple[SurveyAssignment, int]]:
    """Sample ``count`` assignments, each with its own generation seed.

    Seeds are split hierarchically from ``seed`` so assignment ``i`` is the
    same no matter how many are requested after it.
    """
    if start > end:
        raise InvalidRange(f"start {start} is after end {end}")
    out = []
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(count)):
        sampling, generation = child.spawn(2)
        rng = np.random.default_rng(sampling)
        persona = sample_persona(priors, rng)
        date = sample_date(start, end, rng).date
        gen_seed = int(generation.generate_state(1, dtype=np.uint64)[0])
        out.append((SurveyAssignment(f"{priors.region_id}-{i:06d}", persona, date), gen_seed))
    return out


@lru_cache(maxsize=1)
def default_template() -> str:
    return (resources.files(__package__) / "assets" / "prompt_template.txt").read_text("utf-8")


def _article(word: str) -> str:
    return "an" if word[:1].lower() in "aeiou" else "a"


def describe_profile(meta: Mapping[str, Any]) -> str:
    """Persona sentences; absent fields drop their clause instead of guessing."""
    subj, Subj, poss, is_, _, has, lives = _pronouns(meta.get("sex"))
    sex = meta.get("sex")
    age = meta.get("age")
    race = meta.get("race")
    noun = sex if sex else "person"
    if age is not None:
        first = f"The individual is a {age}-year-old {noun}"
    elif sex:
        first = f"The individual is a {sex}"
    else:
        first = "The individual is a survey respondent"
    if race:
        first += f" whose racial background is '{race}'"
    parts = [first + "."]

    enrolled = meta.get("school_enrollment")
    labor = meta.get("in_labor_force")
    clauses = []
    if enrolled is not None:
        clauses.append(f"{is_} {'' if enrolled else 'not '}enrolled in school")
    if labor is not None:
        clauses.append(f"{is_} {'' if labor else 'not '}participating in the labor force")
    if clauses:
        parts.append(f"Currently, {subj} " + " and ".join(clauses) + ".")

    employed = meta.get("employed")
    occupation = meta.get("occupation")
    if employed and occupation:
        parts.append(f"{Subj} {is_} employed and working in the '{occupation}' field.")
    elif employed:
        parts.append(f"{Subj} {is_} employed.")
    elif employed is not None and labor:
        parts.append(f"{Subj} {is_} unemployed.")

    marital = meta.get("marital_status")
    household = meta.get("household_type")
    if marital and household:
        parts.append(
            f"Regarding {poss} marital status, {subj} {is_} {marital}, and {lives} in "
            f"{_article(household)} {household}."
        )
    elif marital:
        parts.append(f"Regarding {poss} marital status, {subj} {is_} {marital}.")
    elif household:
        parts.append(f"{Subj} {lives} in {_article(household)} {household}.")

    if meta.get("children_under_18"):
        parts.append(f"{Subj} {has} children under 18 years old in the household.")

    city = meta.get("city_name")
    state = meta.get("state")
    if city:
        parts.append(f"{Subj} {lives} in {city}{', ' + state if state else ''}.")
    return " ".join(parts)


def _pronouns(sex) -> tuple[str, ...]:
    return _PRONOUNS.get(str(sex).strip().lower() if sex else "", _NEUTRAL)


def code_list() -> str:
    return "\n".join(f"{code}: {label}" for code, label in NHTS_LABELS.items())


def render_metadata_prompt(
    meta: Mapping[str, Any], date: dt.date, template: str | None = None
) -> str:
    """Render the diary prompt from a possibly partial persona mapping."""
    subj, Subj, poss, is_, was, has, lives = _pronouns(meta.get("sex"))
    return Template(template or default_template()).substitute(
        profile=describe_profile(meta),
        subj=subj, Subj=Subj, poss=poss, was=was, has=has,
        date=date.isoformat(),
        weekday=weekday_name(date),
        codes=code_list(),
    )


def render_prompt(assignment: SurveyAssignment, template: str | None = None) -> str:
    return render_metadata_prompt(assignment.persona.to_dict(), assignment.survey_date, template)

