"""Brute-force reference implementations, written independently of the package code.

They work on plain lists of type names and favour obviousness over speed.
"""
from itertools import product


def collapse(types):
    out = []
    for t in types:
        if not out or out[-1] != t:
            out.append(t)
    return out


def brute_transitions(seqs, types, order):
    """{context: {dest: prob}} by explicitly scanning every window for every cell."""
    contexts = list(types) if order == 1 else [(a, b) for a, b in product(types, types) if a != b]
    result = {}
    for ctx in contexts:
        key = [ctx] if order == 1 else list(ctx)
        row_counts = {}
        for dest in types:
            n = 0
            for s in seqs:
                for i in range(len(s) - order):
                    if s[i:i + order] == key and s[i + order] == dest:
                        n += 1
            row_counts[dest] = n
        total = sum(row_counts.values())
        result[ctx] = {d: (c / total if total else 0.0) for d, c in row_counts.items()}
    return result


def brute_destinations(seqs, types, min_index=1):
    trips = [s[i] for s in seqs for i in range(min_index, len(s))]
    return {t: (trips.count(t) / len(trips) if trips else 0.0) for t in types}


def brute_chain_counts(seqs):
    counts = {}
    for s in seqs:
        counts[tuple(s)] = counts.get(tuple(s), 0) + 1
    return counts


def brute_precision(gen, ref):
    """(unique %, weighted %) of ``gen`` chains found in ``ref``; both count dicts."""
    distinct = list(gen)
    hits = [c for c in distinct if ref.get(c, 0) > 0]
    return (100 * len(hits) / len(distinct),
            100 * sum(gen[c] for c in hits) / sum(gen.values()))


def brute_overlap(gen, act):
    g, a = sum(gen.values()), sum(act.values())
    keys = set(gen) | set(act)
    return 100 * sum(min(gen.get(k, 0) / g, act.get(k, 0) / a) for k in keys)


def brute_curve(actual, gen):
    ranked = sorted(actual, key=lambda c: (-actual[c], c))
    curve, run = [], 0
    for r, c in enumerate(ranked, 1):
        run += gen.get(c, 0)
        curve.append((r, run))
    return curve


def dp_levenshtein(a, b):
    """Full-table Wagner-Fischer DP."""
    n, m = len(a), len(b)
    table = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        table[i][0] = i
    for j in range(m + 1):
        table[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            table[i][j] = min(
                table[i - 1][j] + 1,
                table[i][j - 1] + 1,
                table[i - 1][j - 1] + (0 if a[i - 1] == b[j - 1] else 1),
            )
    return table[n][m]


def brute_ward(points):
    """O(n^3) Ward agglomeration from centroids and sizes, no Lance-Williams.

    Returns a list of (frozenset members, height) per merge, with
    height = sqrt(2 * increase in within-cluster sum of squares). Ties go to
    the pair with the smallest (min member, min member).
    """
    import math
    clusters = [frozenset([i]) for i in range(len(points))]
    dim = len(points[0])

    def centroid(c):
        return [sum(points[i][k] for i in c) / len(c) for k in range(dim)]

    merges = []
    while len(clusters) > 1:
        best = None
        for x in range(len(clusters)):
            for y in range(x + 1, len(clusters)):
                a, b = clusters[x], clusters[y]
                ca, cb = centroid(a), centroid(b)
                dist2 = sum((p - q) ** 2 for p, q in zip(ca, cb))
                cost = len(a) * len(b) / (len(a) + len(b)) * dist2
                key = (cost, min(a), min(b)) if min(a) < min(b) else (cost, min(b), min(a))
                if best is None or key < best[0]:
                    best = (key, x, y)
        (cost, _, _), x, y = best
        merged = clusters[x] | clusters[y]
        merges.append((merged, math.sqrt(2 * cost)))
        clusters = [c for i, c in enumerate(clusters) if i not in (x, y)] + [merged]
    return merges


def partition_after(merges, n, k):
    """Partition (set of frozensets) after applying the first n - k merges."""
    clusters = {frozenset([i]) for i in range(n)}
    for members, _ in merges[: n - k]:
        clusters = {c for c in clusters if not c <= members} | {members}
    return clusters
