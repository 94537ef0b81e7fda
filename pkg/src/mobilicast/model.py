"""Domain types: location taxonomy, personas, diaries, corpora and derived models.

Everything here is immutable after construction and performs no I/O.
"""
from __future__ import annotations

import datetime as dt
from collections import Counter
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidDiary

TYPE11 = "type11"
TYPE6 = "type6"
SCHEMES = (TYPE11, TYPE6)

ACTUAL = "actual"
GENERATED = "generated"
SOURCES = (ACTUAL, GENERATED)

TABLE_COLUMNS = ("Place Visited", "Arrival Time", "Departure Time", "Location Type")

MINUTES_PER_DAY = 1440
LAST_MINUTE = MINUTES_PER_DAY - 1

NHTS_LABELS: dict[int, str] = {
    1: "Regular home activities (chores, sleep)",
    2: "Work from home (paid)",
    3: "Work",
    4: "Work-related meeting / trip",
    5: "Volunteer activities (not paid)",
    6: "Drop off / pick up someone",
    7: "Change type of transportation",
    8: "Attend school as a student",
    9: "Attend child care",
    10: "Attend adult care",
    11: "Buy goods (groceries, clothes, appliances, gas)",
    12: "Buy services (dry cleaners, banking, service a car, etc)",
    13: "Buy meals (go out for a meal, snack, carry-out)",
    14: "Other general errands (post office, library)",
    15: "Recreational activities (visit parks, movies, bars, etc)",
    16: "Exercise (go for a jog, walk, walk the dog, go to the gym, etc)",
    17: "Visit friends or relatives",
    18: "Health care visit (medical, dental, therapy)",
    19: "Religious or other community activities",
    97: "Something else",
}
NHTS_CODES = frozenset(NHTS_LABELS)

ORDER11 = (
    "Home", "Work", "Community", "In Transit", "Education", "Care",
    "Shopping", "Eat Meal", "Other", "Recreational", "Social",
)
ORDER6 = ("Home", "Work", "School", "Restaurant", "Recreation", "Other")

_MAP11 = {
    1: "Home", 2: "Home", 3: "Work", 4: "Work", 5: "Community",
    6: "In Transit", 7: "In Transit", 8: "Education", 9: "Care", 10: "Care",
    11: "Shopping", 12: "Shopping", 13: "Eat Meal", 14: "Other",
    15: "Recreational", 16: "Recreational", 17: "Social", 18: "Social",
    19: "Community", 97: "Other",
}
_MAP6 = {
    1: "Home", 2: "Home", 3: "Work", 4: "Work", 5: "Recreation",
    6: "Other", 7: "Other", 8: "School", 9: "Other", 10: "Other",
    11: "Other", 12: "Other", 13: "Restaurant", 14: "Other",
    15: "Recreation", 16: "Recreation", 17: "Other", 18: "Other",
    19: "Other", 97: "Other",
}
_REPRESENTATIVE11 = {
    "Home": 1, "Work": 3, "Community": 19, "In Transit": 7, "Education": 8,
    "Care": 9, "Shopping": 11, "Eat Meal": 13, "Other": 14,
    "Recreational": 15, "Social": 17,
}


@dataclass(frozen=True)
class LocationTaxonomy:
    nhts_codes: Mapping[int, str]
    map11: Mapping[int, str]
    map6: Mapping[int, str]
    order11: tuple[str, ...]
    order6: tuple[str, ...]
    representative: Mapping[str, int]

    def __post_init__(self):
        codes = set(self.nhts_codes)
        for name, mapping, order, n in (
            ("map11", self.map11, self.order11, 11),
            ("map6", self.map6, self.order6, 6),
        ):
            if set(mapping) != codes:
                raise ValueError(f"{name} is not total over the NHTS codes")
            if len(order) != n or len(set(order)) != n:
                raise ValueError(f"order for {name} must list {n} distinct types")
            if set(mapping.values()) != set(order):
                raise ValueError(f"{name} image differs from its type ordering")
        if len(set(self.representative.values())) != len(self.representative):
            raise ValueError("representative codes must be distinct")
        for t in self.order11:
            if self.map11.get(self.representative.get(t)) != t:
                raise ValueError(f"representative code for {t!r} does not map back")

    def mapping(self, scheme: str) -> Mapping[int, str]:
        if scheme == TYPE11:
            return self.map11
        if scheme == TYPE6:
            return self.map6
        raise ValueError(f"unknown scheme {scheme!r}")

    def order(self, scheme: str) -> tuple[str, ...]:
        if scheme == TYPE11:
            return self.order11
        if scheme == TYPE6:
            return self.order6
        raise ValueError(f"unknown scheme {scheme!r}")

    def classify(self, code: int, scheme: str = TYPE11) -> str:
        return self.mapping(scheme)[code]


_BUILTIN: LocationTaxonomy | None = None


def builtin_taxonomy() -> LocationTaxonomy:
    """The NHTS-2017 location codes with the 11-type and 6-type regroupings."""
    global _BUILTIN
    if _BUILTIN is None:
        _BUILTIN = LocationTaxonomy(
            nhts_codes=MappingProxyType(dict(NHTS_LABELS)),
            map11=MappingProxyType(dict(_MAP11)),
            map6=MappingProxyType(dict(_MAP6)),
            order11=ORDER11,
            order6=ORDER6,
            representative=MappingProxyType(dict(_REPRESENTATIVE11)),
        )
    return _BUILTIN


@dataclass(frozen=True)
class Persona:
    sex: str
    age: int
    race: str
    school_enrollment: bool
    in_labor_force: bool
    employed: bool
    occupation: str | None
    marital_status: str
    household_type: str
    children_under_18: bool
    city_name: str
    state: str
    region_id: str

    def __post_init__(self):
        if self.age < 16:
            raise ValueError(f"persona age {self.age} is below 16")
        if self.employed and not self.in_labor_force:
            raise ValueError("employed persona must be in the labor force")
        if (self.occupation is not None) != self.employed:
            raise ValueError("occupation must be present exactly when employed")

    def to_dict(self) -> dict[str, Any]:
        return {
            "sex": self.sex,
            "age": self.age,
            "race": self.race,
            "school_enrollment": self.school_enrollment,
            "in_labor_force": self.in_labor_force,
            "employed": self.employed,
            "occupation": self.occupation,
            "marital_status": self.marital_status,
            "household_type": self.household_type,
            "children_under_18": self.children_under_18,
            "city_name": self.city_name,
            "state": self.state,
            "region_id": self.region_id,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Persona":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__})


@dataclass(frozen=True)
class DiaryEntry:
    place_name: str
    arrival_min: int
    departure_min: int
    nhts_code: int

    def __post_init__(self):
        for t in (self.arrival_min, self.departure_min):
            if not 0 <= t <= LAST_MINUTE:
                raise InvalidDiary(f"time {t} outside minute-of-day range")
        if self.arrival_min > self.departure_min:
            raise InvalidDiary(
                f"arrival {self.arrival_min} after departure {self.departure_min}"
            )
        if self.nhts_code not in NHTS_CODES:
            raise InvalidDiary(f"unknown NHTS location code {self.nhts_code}")


@dataclass(frozen=True)
class TravelDiary:
    """One respondent-day. ``persona`` holds optional respondent metadata."""

    persona_id: str
    survey_date: dt.date
    entries: tuple[DiaryEntry, ...]
    persona: Mapping[str, Any] | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        if not self.entries:
            raise InvalidDiary("diary has no entries")
        for prev, cur in zip(self.entries, self.entries[1:]):
            if prev.departure_min > cur.arrival_min:
                raise InvalidDiary(
                    f"departure {prev.departure_min} after next arrival {cur.arrival_min}"
                )

    @property
    def codes(self) -> tuple[int, ...]:
        return tuple(e.nhts_code for e in self.entries)


@dataclass(frozen=True)
class Corpus:
    region_id: str
    source: str
    diaries: tuple[TravelDiary, ...]

    def __post_init__(self):
        object.__setattr__(self, "diaries", tuple(self.diaries))
        if not self.region_id:
            raise ValueError("corpus region_id must be non-empty")
        if self.source not in SOURCES:
            raise ValueError(f"corpus source must be one of {SOURCES}")

    def __len__(self) -> int:
        return len(self.diaries)


@dataclass(frozen=True, eq=False)
class TransitionModel:
    """Row-conditional transition probabilities with the counts behind them.

    ``contexts`` are single types for order 1 and ``(x_{t-2}, x_{t-1})`` pairs for
    order 2; columns follow ``destinations``.
    """

    order: int
    scheme: str
    contexts: tuple
    destinations: tuple[str, ...]
    matrix: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        for name in ("matrix", "counts"):
            arr = np.array(getattr(self, name), copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        shape = (len(self.contexts), len(self.destinations))
        if self.matrix.shape != shape or self.counts.shape != shape:
            raise ValueError(f"matrix/counts must have shape {shape}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def row_index(self, context) -> int:
        return self.contexts.index(context)

    def prob(self, context, destination: str) -> float:
        return float(self.matrix[self.row_index(context), self.destinations.index(destination)])

    def observed_rows(self) -> np.ndarray:
        return self.counts.sum(axis=1) > 0

    def as_dict(self) -> dict:
        return {
            "order": self.order,
            "scheme": self.scheme,
            "contexts": [list(c) if isinstance(c, tuple) else c for c in self.contexts],
            "destinations": list(self.destinations),
            "matrix": self.matrix.tolist(),
            "counts": self.counts.tolist(),
        }


def transition_contexts(order_types: Sequence[str], order: int) -> tuple:
    """Canonical row keys: every type for order 1, every ordered distinct pair for order 2."""
    if order == 1:
        return tuple(order_types)
    if order == 2:
        return tuple((a, b) for a in order_types for b in order_types if a != b)
    raise ValueError(f"transition order must be 1 or 2, got {order}")


@dataclass(frozen=True)
class ChainDistribution:
    counts: Mapping[tuple[str, ...], int]

    def __post_init__(self):
        counts = dict(self.counts)
        for chain, n in counts.items():
            if not chain:
                raise ValueError("activity chains must be non-empty")
            if any(a == b for a, b in zip(chain, chain[1:])):
                raise ValueError(f"chain {chain} has consecutive duplicates")
            if n <= 0:
                raise ValueError("chain counts must be positive")
        object.__setattr__(self, "counts", MappingProxyType(counts))

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __len__(self) -> int:
        return len(self.counts)

    def __contains__(self, chain) -> bool:
        return tuple(chain) in self.counts

    def frequency(self, chain) -> float:
        return self.counts.get(tuple(chain), 0) / self.total

    @classmethod
    def from_chains(cls, chains: Iterable[Sequence[str]]) -> "ChainDistribution":
        return cls(Counter(tuple(c) for c in chains))

    @classmethod
    def merge(cls, dists: Iterable["ChainDistribution"]) -> "ChainDistribution":
        total: Counter = Counter()
        for d in dists:
            total.update(d.counts)
        return cls(total)
