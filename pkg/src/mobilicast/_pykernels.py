"""Pure-Python kernels; reference twin of ``_ckernels.pyx``."""
from __future__ import annotations

from typing import Sequence


def levenshtein(a: Sequence[int], b: Sequence[int]) -> int:
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i] + [0] * len(b)
        for j, y in enumerate(b, 1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y))
        prev = cur
    return prev[-1]


def nearest_distance(query: Sequence[int], candidates: Sequence[Sequence[int]]) -> int:
    """Smallest edit distance from ``query`` to any candidate (-1 if none)."""
    best = -1
    for c in candidates:
        if best >= 0 and abs(len(c) - len(query)) >= best:
            continue
        d = levenshtein(query, c)
        if best < 0 or d < best:
            best = d
            if best == 0:
                break
    return best


def ward_lance_williams(dist) -> list[tuple[int, int, float, int]]:
    """Ward agglomeration over a square matrix of squared Euclidean distances.

    Returns ``(id_a, id_b, merge_cost, size)`` rows with scipy-style ids
    (new cluster ``n + step``). Ties go to the smallest slot pair, where a
    slot is the smallest original index in the cluster.
    """
    n = len(dist)
    d = [[float(dist[i][j]) for j in range(n)] for i in range(n)]
    active = [True] * n
    size = [1] * n
    ident = list(range(n))
    merges = []
    for step in range(n - 1):
        best = None
        bi = bj = -1
        for i in range(n):
            if not active[i]:
                continue
            for j in range(i + 1, n):
                if active[j] and (best is None or d[i][j] < best):
                    best, bi, bj = d[i][j], i, j
        ni, nj = size[bi], size[bj]
        for k in range(n):
            if active[k] and k != bi and k != bj:
                nk = size[k]
                v = ((ni + nk) * d[bi][k] + (nj + nk) * d[bj][k] - nk * best) / (ni + nj + nk)
                d[bi][k] = d[k][bi] = v
        a, b = sorted((ident[bi], ident[bj]))
        merges.append((a, b, best, ni + nj))
        active[bj] = False
        size[bi] = ni + nj
        ident[bi] = n + step
    return merges
