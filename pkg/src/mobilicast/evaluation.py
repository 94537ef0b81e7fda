"""Corpus comparison at pattern, trip and activity-chain level."""
from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .errors import EmptyCorpus, NoTrips, ShapeMismatch
from .model import (
    ChainDistribution,
    Corpus,
    LocationTaxonomy,
    TransitionModel,
    TravelDiary,
    builtin_taxonomy,
    transition_contexts,
)


def _require(corpus: Corpus) -> None:
    if not corpus.diaries:
        raise EmptyCorpus(f"corpus {corpus.region_id!r} has no diaries")


# -- pattern level -----------------------------------------------------------

def travel_time_minutes(diary: TravelDiary) -> int:
    """Total minutes spent between consecutive places."""
    e = diary.entries
    return sum(nxt.arrival_min - cur.departure_min for cur, nxt in zip(e, e[1:]))


def has_time_data(corpus: Corpus) -> bool:
    """False when every visit is zero-length, i.e. the source carried no times."""
    return any(e.arrival_min != e.departure_min for d in corpus.diaries for e in d.entries)


@dataclass(frozen=True)
class PatternStats:
    n_diaries: int
    avg_locations: float
    avg_travel_hours: float
    location_count_histogram: dict[int, int]
    travel_time_quartiles: tuple[float, float, float, float, float]
    whiskers: tuple[float, float]

    def to_dict(self, include_travel: bool = True) -> dict:
        out = asdict(self)
        out["location_count_histogram"] = {str(k): v for k, v in self.location_count_histogram.items()}
        out["travel_time_quartiles"] = list(self.travel_time_quartiles)
        out["whiskers"] = list(self.whiskers)
        if not include_travel:
            for key in ("avg_travel_hours", "travel_time_quartiles", "whiskers"):
                out.pop(key)
        return out


def pattern_stats(corpus: Corpus) -> PatternStats:
    _require(corpus)
    counts = [len(d.entries) for d in corpus.diaries]
    hours = np.array([travel_time_minutes(d) / 60 for d in corpus.diaries], dtype=float)
    q = np.percentile(hours, [0, 25, 50, 75, 100], method="linear")
    iqr = q[3] - q[1]
    lo_fence, hi_fence = q[1] - 1.5 * iqr, q[3] + 1.5 * iqr
    inside = hours[(hours >= lo_fence) & (hours <= hi_fence)]
    return PatternStats(
        n_diaries=len(counts),
        avg_locations=sum(counts) / len(counts),
        avg_travel_hours=float(hours.mean()),
        location_count_histogram=dict(sorted(Counter(counts).items())),
        travel_time_quartiles=tuple(float(x) for x in q),
        whiskers=(float(inside.min()), float(inside.max())),
    )


# -- trip level ----------------------------------------------------------------

def activity_sequence(diary: TravelDiary, taxonomy: LocationTaxonomy, scheme: str) -> tuple[str, ...]:
    """Reclassified visit types with consecutive repeats collapsed."""
    mapping = taxonomy.mapping(scheme)
    seq: list[str] = []
    for e in diary.entries:
        t = mapping[e.nhts_code]
        if not seq or seq[-1] != t:
            seq.append(t)
    return tuple(seq)


def _sequences(corpus: Corpus, taxonomy: LocationTaxonomy, scheme: str) -> list[tuple[str, ...]]:
    return [activity_sequence(d, taxonomy, scheme) for d in corpus.diaries]


def transition_model(
    corpus: Corpus,
    taxonomy: LocationTaxonomy | None = None,
    scheme: str = "type11",
    order: int = 1,
) -> TransitionModel:
    _require(corpus)
    taxonomy = taxonomy or builtin_taxonomy()
    types = taxonomy.order(scheme)
    contexts = transition_contexts(types, order)
    row = {c: i for i, c in enumerate(contexts)}
    col = {t: i for i, t in enumerate(types)}
    counts = np.zeros((len(contexts), len(types)), dtype=np.int64)
    for seq in _sequences(corpus, taxonomy, scheme):
        for t in range(order, len(seq)):
            ctx = seq[t - 1] if order == 1 else (seq[t - 2], seq[t - 1])
            counts[row[ctx], col[seq[t]]] += 1
    totals = counts.sum(axis=1, keepdims=True)
    matrix = np.divide(counts, totals, out=np.zeros(counts.shape), where=totals > 0)
    return TransitionModel(order, scheme, contexts, types, matrix, counts)


def frobenius_diff(a: TransitionModel, b: TransitionModel, observed_only: bool = False) -> float:
    """Frobenius norm of ``a - b``; optionally restricted to rows either model observed."""
    if (a.order, a.scheme, a.contexts, a.destinations) != (b.order, b.scheme, b.contexts, b.destinations):
        raise ShapeMismatch("transition models differ in order, scheme or layout")
    diff = a.matrix - b.matrix
    if observed_only:
        diff = diff[a.observed_rows() | b.observed_rows()]
    return float(np.sqrt(np.sum(diff * diff)))


@dataclass(frozen=True)
class DestinationProbs:
    """Trip-destination shares; ``second`` covers trips with a two-step history."""

    types: tuple[str, ...]
    first: np.ndarray
    second: np.ndarray
    n_trips: int
    n_trips_second: int

    def to_dict(self) -> dict:
        return {
            "types": list(self.types),
            "first": self.first.tolist(),
            "second": self.second.tolist(),
            "n_trips": self.n_trips,
            "n_trips_second": self.n_trips_second,
        }


def destination_probs(
    corpus: Corpus, taxonomy: LocationTaxonomy | None = None, scheme: str = "type11"
) -> DestinationProbs:
    taxonomy = taxonomy or builtin_taxonomy()
    types = taxonomy.order(scheme)
    col = {t: i for i, t in enumerate(types)}
    first = np.zeros(len(types))
    second = np.zeros(len(types))
    for seq in _sequences(corpus, taxonomy, scheme):
        for t in range(1, len(seq)):
            first[col[seq[t]]] += 1
            if t >= 2:
                second[col[seq[t]]] += 1
    n1, n2 = int(first.sum()), int(second.sum())
    if n1 == 0:
        raise NoTrips(f"corpus {corpus.region_id!r} contains no trips")
    if n2:
        second /= n2
    return DestinationProbs(types, first / n1, second, n1, n2)


# -- activity-chain level -----------------------------------------------------

def chain_distribution(
    corpus: Corpus, taxonomy: LocationTaxonomy | None = None, scheme: str = "type11"
) -> ChainDistribution:
    _require(corpus)
    return ChainDistribution.from_chains(_sequences(corpus, taxonomy or builtin_taxonomy(), scheme))


def _coverage(dist: ChainDistribution, other: ChainDistribution) -> tuple[float, float]:
    shared = [c for c in dist.counts if c in other.counts]
    unique = 100.0 * len(shared) / len(dist.counts) if dist.counts else 0.0
    weighted = 100.0 * sum(dist.counts[c] for c in shared) / dist.total if dist.counts else 0.0
    return unique, weighted


def chain_precision(gen: ChainDistribution, reference: ChainDistribution) -> tuple[float, float]:
    """Share of generated chains (distinct, count-weighted) present in ``reference``."""
    return _coverage(gen, reference)


def chain_recall(gen: ChainDistribution, actual: ChainDistribution) -> tuple[float, float]:
    """Share of actual chains (distinct, count-weighted) that were generated."""
    return _coverage(actual, gen)


def weighted_overlap(gen: ChainDistribution, actual: ChainDistribution) -> float:
    """Histogram intersection of the relative chain frequencies, in percent."""
    g, a = gen.total, actual.total
    if not g or not a:
        return 0.0
    # sum of min(n_g/g, n_a/a) evaluated as min(n_g*a, n_a*g)/(g*a) so that
    # equal distributions give exactly 100
    inter = sum(min(n * a, actual.counts[c] * g) for c, n in gen.counts.items() if c in actual.counts)
    return 100.0 * inter / (g * a)


@dataclass(frozen=True)
class ChainMetrics:
    precision_loc: tuple[float, float]
    precision_all: tuple[float, float]
    recall: tuple[float, float]
    weighted_overlap_pct: float

    def to_dict(self) -> dict:
        return {
            "precision_loc": {"unique_pct": self.precision_loc[0], "weighted_pct": self.precision_loc[1]},
            "precision_all": {"unique_pct": self.precision_all[0], "weighted_pct": self.precision_all[1]},
            "recall": {"unique_pct": self.recall[0], "weighted_pct": self.recall[1]},
            "weighted_overlap_pct": self.weighted_overlap_pct,
        }


def chain_metrics(
    gen: ChainDistribution, actual: ChainDistribution, all_actual: ChainDistribution | None = None
) -> ChainMetrics:
    all_actual = all_actual if all_actual is not None else actual
    return ChainMetrics(
        precision_loc=chain_precision(gen, actual),
        precision_all=chain_precision(gen, all_actual),
        recall=chain_recall(gen, actual),
        weighted_overlap_pct=weighted_overlap(gen, actual),
    )


class _Encoder(dict):
    def __missing__(self, key):
        self[key] = len(self)
        return self[key]

    def encode(self, seq: Iterable[Hashable]) -> list[int]:
        return [self[x] for x in seq]


def levenshtein(a: Sequence[Hashable], b: Sequence[Hashable]) -> int:
    """Token-level edit distance (unit insert, delete and substitute costs)."""
    enc = _Encoder()
    return int(kernels.levenshtein(enc.encode(a), enc.encode(b)))


def unmatched_distance_histogram(gen: ChainDistribution, actual: ChainDistribution) -> dict[int, float]:
    """For generated chains never seen in ``actual``: % by distance to the nearest actual chain."""
    unmatched = [c for c in gen.counts if c not in actual.counts]
    if not unmatched or not actual.counts:
        return {}
    enc = _Encoder()
    candidates = [enc.encode(c) for c in sorted(actual.counts)]
    dists = Counter(int(kernels.nearest_distance(enc.encode(c), candidates)) for c in unmatched)
    return {d: 100.0 * n / len(unmatched) for d, n in sorted(dists.items())}


@dataclass(frozen=True)
class MatchCurve:
    """Cumulative counts over actual chains ranked by frequency (rank is 1-based)."""

    chains: tuple[tuple[str, ...], ...]
    actual: tuple[tuple[int, int], ...]
    generated: tuple[tuple[int, int], ...]
    actual_counts: tuple[int, ...]
    generated_counts: tuple[int, ...]

    def top(self, n: int = 100) -> list[dict]:
        return [
            {"rank": r, "chain": " -> ".join(c), "actual_count": a, "generated_count": g}
            for r, c, a, g in zip(range(1, n + 1), self.chains, self.actual_counts, self.generated_counts)
        ]


def cumulative_match_curve(actual: ChainDistribution, gen: ChainDistribution) -> MatchCurve:
    ranked = sorted(actual.counts.items(), key=lambda kv: (-kv[1], kv[0]))
    chains = tuple(c for c, _ in ranked)
    a_counts = tuple(n for _, n in ranked)
    g_counts = tuple(gen.counts.get(c, 0) for c in chains)
    a_run = g_run = 0
    a_curve, g_curve = [], []
    for rank, (a, g) in enumerate(zip(a_counts, g_counts), 1):
        a_run += a
        g_run += g
        a_curve.append((rank, a_run))
        g_curve.append((rank, g_run))
    return MatchCurve(chains, tuple(a_curve), tuple(g_curve), a_counts, g_counts)


# -- full report ------------------------------------------------------------------

def _delta(gen: PatternStats, act: PatternStats, include_travel: bool) -> dict:
    out = {
        "n_diaries": gen.n_diaries - act.n_diaries,
        "avg_locations": gen.avg_locations - act.avg_locations,
    }
    if include_travel:
        out["avg_travel_hours"] = gen.avg_travel_hours - act.avg_travel_hours
    return out


def evaluate(
    actual: Corpus,
    generated: Corpus,
    references: Sequence[Corpus] = (),
    taxonomy: LocationTaxonomy | None = None,
    scheme: str = "type11",
) -> dict:
    """Full comparison of ``generated`` against ``actual`` as a JSON-ready dict.

    ``references`` are the actual corpora of every city, used for the
    all-locations precision; ``actual`` is always included among them.
    Travel-time figures are dropped when either corpus carries no times.
    """
    taxonomy = taxonomy or builtin_taxonomy()
    _require(actual)
    _require(generated)
    include_travel = has_time_data(actual) and has_time_data(generated)

    p_act, p_gen = pattern_stats(actual), pattern_stats(generated)
    trip: dict = {"frobenius": {}}
    for order in (1, 2):
        ta = transition_model(actual, taxonomy, scheme, order)
        tg = transition_model(generated, taxonomy, scheme, order)
        trip["frobenius"][f"order{order}"] = frobenius_diff(ta, tg)
    try:
        da = destination_probs(actual, taxonomy, scheme)
        dg = destination_probs(generated, taxonomy, scheme)
    except NoTrips:
        da = dg = None
    if da is not None:
        trip["destination"] = {
            "types": list(da.types),
            "actual": da.first.tolist(),
            "generated": dg.first.tolist(),
            "difference": (da.first - dg.first).tolist(),
        }
        trip["destination_second_order"] = {
            "types": list(da.types),
            "actual": da.second.tolist(),
            "generated": dg.second.tolist(),
            "difference": (da.second - dg.second).tolist(),
        }

    c_act = chain_distribution(actual, taxonomy, scheme)
    c_gen = chain_distribution(generated, taxonomy, scheme)
    others = [chain_distribution(r, taxonomy, scheme) for r in references if r is not actual]
    c_all = ChainDistribution.merge([c_act, *others])
    curve = cumulative_match_curve(c_act, c_gen)
    return {
        "scheme": scheme,
        "actual_region": actual.region_id,
        "generated_region": generated.region_id,
        "pattern": {
            "actual": p_act.to_dict(include_travel),
            "generated": p_gen.to_dict(include_travel),
            "delta": _delta(p_gen, p_act, include_travel),
            "travel_time_available": include_travel,
        },
        "trip": trip,
        "chain": {
            "metrics": chain_metrics(c_gen, c_act, c_all).to_dict(),
            "unmatched_distance_histogram": {
                str(k): v for k, v in unmatched_distance_histogram(c_gen, c_act).items()
            },
            "cumulative_match": {
                "actual": [list(p) for p in curve.actual],
                "generated": [list(p) for p in curve.generated],
            },
            "top_chains": curve.top(100),
        },
    }


def plot_tables(report: Mapping) -> dict[str, list[list]]:
    """CSV-ready tables (header row first) derived from an :func:`evaluate` report."""
    pat = report["pattern"]
    hist_a = pat["actual"]["location_count_histogram"]
    hist_g = pat["generated"]["location_count_histogram"]
    keys = sorted({int(k) for k in (*hist_a, *hist_g)})
    tables: dict[str, list[list]] = {
        "location_count_histogram": [["locations", "actual", "generated"]]
        + [[k, hist_a.get(str(k), 0), hist_g.get(str(k), 0)] for k in keys],
    }
    if pat["travel_time_available"]:
        tables["travel_time_quartiles"] = [
            ["corpus", "min", "q1", "median", "q3", "max", "whisker_low", "whisker_high"]
        ] + [[name, *pat[name]["travel_time_quartiles"], *pat[name]["whiskers"]]
             for name in ("actual", "generated")]
    for key, name in (("destination", "destination_diff_order1"),
                      ("destination_second_order", "destination_diff_order2")):
        if key in report["trip"]:
            d = report["trip"][key]
            tables[name] = [["type", "actual", "generated", "difference"]] + [
                list(row) for row in zip(d["types"], d["actual"], d["generated"], d["difference"])
            ]
    cm = report["chain"]["cumulative_match"]
    tables["cumulative_match"] = [["rank", "actual_cumulative", "generated_cumulative"]] + [
        [a[0], a[1], g[1]] for a, g in zip(cm["actual"], cm["generated"])
    ]
    tables["top_chains"] = [["rank", "chain", "actual_count", "generated_count"]] + [
        [r["rank"], r["chain"], r["actual_count"], r["generated_count"]]
        for r in report["chain"]["top_chains"]
    ]
    return tables

