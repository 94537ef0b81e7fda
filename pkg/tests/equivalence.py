"""Comparison of the package metrics against the brute-force oracles on one corpus pair."""

from mobilicast import evaluation as ev
from mobilicast.model import NHTS_CODES, Corpus, builtin_taxonomy

import oracles
from conftest import diary_from_codes


def random_corpus(rng, region, max_diaries=20, max_len=7, codes=NHTS_CODES):
    """A small alphabet per corpus so chains repeat and consecutive duplicates collapse."""
    pool = sorted(codes)
    alphabet = rng.choice(pool, size=int(rng.integers(2, 7)), replace=False)
    n = int(rng.integers(1, max_diaries + 1))
    lists = [[int(c) for c in rng.choice(alphabet, size=int(rng.integers(1, max_len + 1)))] for _ in range(n)]
    return Corpus(region, "generated", tuple(diary_from_codes(c, f"{region}{i}") for i, c in enumerate(lists)))


def oracle_seqs(corpus, scheme):
    mapping = builtin_taxonomy().mapping(scheme)
    return [oracles.collapse([mapping[e.nhts_code] for e in d.entries]) for d in corpus.diaries]


def max_discrepancy(actual, generated, scheme="type11"):
    """Largest absolute difference between package and oracle over every compared quantity."""
    tax = builtin_taxonomy()
    types = tax.order(scheme)
    errs = [0.0]
    seq_a, seq_g = oracle_seqs(actual, scheme), oracle_seqs(generated, scheme)

    for order in (1, 2):
        model = ev.transition_model(actual, tax, scheme, order)
        brute = oracles.brute_transitions(seq_a, types, order)
        assert set(brute) == set(model.contexts)
        for ctx, row in brute.items():
            for dest, p in row.items():
                errs.append(abs(model.prob(ctx, dest) - p))

    if any(len(s) > 1 for s in seq_a):
        dp = ev.destination_probs(actual, tax, scheme)
        for vec, start in ((dp.first, 1), (dp.second, 2)):
            brute = oracles.brute_destinations(seq_a, types, start)
            errs.extend(abs(vec[i] - brute[t]) for i, t in enumerate(types))

    ca, cg = oracles.brute_chain_counts(seq_a), oracles.brute_chain_counts(seq_g)
    da, dg = ev.chain_distribution(actual, tax, scheme), ev.chain_distribution(generated, tax, scheme)
    assert dict(da.counts) == ca and dict(dg.counts) == cg
    for got, want in (
        (ev.chain_precision(dg, da), oracles.brute_precision(cg, ca)),
        (ev.chain_recall(dg, da), oracles.brute_precision(ca, cg)),
    ):
        errs.extend(abs(x - y) for x, y in zip(got, want))
    errs.append(abs(ev.weighted_overlap(dg, da) - oracles.brute_overlap(cg, ca)))
    curve = ev.cumulative_match_curve(da, dg)
    assert [r for r, _ in curve.generated] == [r for r, _ in oracles.brute_curve(ca, cg)]
    errs.extend(abs(x - y) for (_, x), (_, y) in zip(curve.generated, oracles.brute_curve(ca, cg)))
    errs.extend(abs(x - y) for (_, x), (_, y) in zip(curve.actual, oracles.brute_curve(ca, ca)))
    return max(errs)
