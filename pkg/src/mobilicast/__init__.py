"""Synthetic travel-diary generation and multi-level evaluation against survey data."""
from .errors import MobilicastError
from .model import (
    ORDER6,
    ORDER11,
    TYPE6,
    TYPE11,
    ChainDistribution,
    Corpus,
    DiaryEntry,
    LocationTaxonomy,
    Persona,
    TransitionModel,
    TravelDiary,
    builtin_taxonomy,
)

__version__ = "0.1.0"

__all__ = [
    "ORDER6",
    "ORDER11",
    "TYPE6",
    "TYPE11",
    "ChainDistribution",
    "Corpus",
    "DiaryEntry",
    "LocationTaxonomy",
    "MobilicastError",
    "Persona",
    "TransitionModel",
    "TravelDiary",
    "builtin_taxonomy",
]
