import datetime as dt

import numpy as np
import pytest

from mobilicast.ingest import priors_from_dict
from mobilicast.model import ORDER11, Corpus, DiaryEntry, TravelDiary, builtin_taxonomy

DAY = dt.date(2016, 5, 5)


def diary_from_codes(codes, persona_id="p", date=DAY, step=60, gap=10):
    """Diary visiting ``codes`` in order with fixed dwell and gap lengths."""
    entries = []
    t = 0
    for i, code in enumerate(codes):
        depart = 1439 if i == len(codes) - 1 else t + step
        entries.append(DiaryEntry(f"place {i}", t, depart, code))
        t = depart + gap
    return TravelDiary(persona_id, date, tuple(entries))


def corpus_from_codes(code_lists, region="R", source="generated"):
    return Corpus(region, source, tuple(diary_from_codes(c, f"p{i}") for i, c in enumerate(code_lists)))


def rep(*types):
    """NHTS codes for a sequence of 11-type names."""
    tax = builtin_taxonomy()
    return [tax.representative[t] for t in types]


def respondent_priors_dict(**overrides):
    """Single-outcome priors reproducing the sample respondent profile."""
    one = lambda label: [{"label": label, "p": 1.0}]  # noqa: E731
    priors = {
        "sex": one("female"),
        "age_group": one("55-64"),
        "race": one("White alone"),
        "school_enrollment": one("no"),
        "labor_force": one("yes"),
        "employment": one("yes"),
        "occupation": one("Business and financial operations occupations"),
        "marital_status": one("married"),
        "household_type": one("married couple family"),
        "children_under_18": one("no"),
    }
    priors.update(overrides)
    return {
        "region_id": "41860",
        "city": "San Francisco",
        "state": "CA",
        "age_range": [16, 99],
        "priors": priors,
    }


def mixed_priors_dict():
    return {
        "region_id": "41860",
        "city": "San Francisco",
        "state": "CA",
        "age_range": [16, 90],
        "priors": {
            "sex": [{"label": "female", "p": 0.51}, {"label": "male", "p": 0.49}],
            "age_group": [
                {"label": "0-15", "p": 0.15}, {"label": "16-34", "p": 0.3},
                {"label": "35-64", "p": 0.4}, {"label": "65+", "p": 0.15},
            ],
            "race": [{"label": "White alone", "p": 0.6}, {"label": "Asian alone", "p": 0.4}],
            "school_enrollment": [{"label": "yes", "p": 0.2}, {"label": "no", "p": 0.8}],
            "labor_force": [{"label": "yes", "p": 0.65}, {"label": "no", "p": 0.35}],
            "employment": [{"label": "yes", "p": 0.94}, {"label": "no", "p": 0.06}],
            "occupation": [
                {"label": "Business and financial operations occupations", "p": 0.5},
                {"label": "Sales and related occupations", "p": 0.5},
            ],
            "marital_status": [{"label": "married", "p": 0.5}, {"label": "never married", "p": 0.5}],
            "household_type": [
                {"label": "married couple family", "p": 0.6}, {"label": "nonfamily household", "p": 0.4},
            ],
            "children_under_18": [{"label": "yes", "p": 0.3}, {"label": "no", "p": 0.7}],
        },
    }


@pytest.fixture
def taxonomy():
    return builtin_taxonomy()


@pytest.fixture
def respondent_priors():
    return priors_from_dict(respondent_priors_dict())


@pytest.fixture
def mixed_priors():
    return priors_from_dict(mixed_priors_dict())


def random_stochastic(rng, n=len(ORDER11), zero_diag=True, alpha=1.0):
    m = rng.dirichlet(np.ones(n) * alpha, size=n)
    if zero_diag:
        np.fill_diagonal(m, 0.0)
        m /= m.sum(axis=1, keepdims=True)
    return m
