# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; must stay result-identical to ``_pykernels``."""
from libc.stdlib cimport malloc, free


cdef int _lev(long[:] a, long[:] b, int* prev, int* cur) nogil:
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0], i, j
    cdef int best, v
    cdef int* tmp
    for j in range(m + 1):
        prev[j] = <int>j
    for i in range(1, n + 1):
        cur[0] = <int>i
        for j in range(1, m + 1):
            best = prev[j] + 1
            v = cur[j - 1] + 1
            if v < best:
                best = v
            v = prev[j - 1] + (a[i - 1] != b[j - 1])
            if v < best:
                best = v
            cur[j] = best
        tmp = prev
        prev = cur
        cur = tmp
    return prev[m]


def _as_array(seq):
    import numpy as np
    return np.ascontiguousarray(seq, dtype=np.int_)


def levenshtein(a, b):
    cdef long[:] x = _as_array(a)
    cdef long[:] y = _as_array(b)
    if x.shape[0] < y.shape[0]:
        x, y = y, x
    cdef Py_ssize_t m = y.shape[0]
    if m == 0:
        return int(x.shape[0])
    cdef int* buf = <int*>malloc(2 * (m + 1) * sizeof(int))
    if buf == NULL:
        raise MemoryError()
    cdef int r
    try:
        r = _lev(x, y, buf, buf + m + 1)
    finally:
        free(buf)
    return r


def nearest_distance(query, candidates):
    cdef long[:] q = _as_array(query)
    cdef long[:] c
    cdef long[:] x
    cdef long[:] y
    cdef int best = -1, d
    cdef Py_ssize_t longest = q.shape[0], lq = q.shape[0], lc
    arrays = [_as_array(cand) for cand in candidates]
    for arr in arrays:
        if arr.shape[0] > longest:
            longest = arr.shape[0]
    cdef int* buf = <int*>malloc(2 * (longest + 1) * sizeof(int))
    if buf == NULL:
        raise MemoryError()
    try:
        for arr in arrays:
            c = arr
            lc = c.shape[0]
            if best >= 0 and abs(lc - lq) >= best:
                continue
            if lc >= lq:
                x, y = c, q
            else:
                x, y = q, c
            if y.shape[0] == 0:
                d = <int>x.shape[0]
            else:
                d = _lev(x, y, buf, buf + y.shape[0] + 1)
            if best < 0 or d < best:
                best = d
                if best == 0:
                    break
    finally:
        free(buf)
    return best


def ward_lance_williams(dist):
    import numpy as np
    cdef double[:, :] d = np.array(dist, dtype=np.float64, copy=True)
    cdef Py_ssize_t n = d.shape[0], i, j, k, bi, bj, step
    cdef double best, v
    cdef long ni, nj, nk
    cdef char[:] active = np.ones(n, dtype=np.int8)
    cdef long[:] size = np.ones(n, dtype=np.int_)
    cdef long[:] ident = np.arange(n, dtype=np.int_)
    cdef bint found
    merges = []
    for step in range(n - 1):
        found = False
        best = 0.0
        bi = bj = -1
        for i in range(n):
            if not active[i]:
                continue
            for j in range(i + 1, n):
                if active[j] and (not found or d[i, j] < best):
                    best = d[i, j]
                    bi = i
                    bj = j
                    found = True
        ni = size[bi]
        nj = size[bj]
        for k in range(n):
            if active[k] and k != bi and k != bj:
                nk = size[k]
                v = ((ni + nk) * d[bi, k] + (nj + nk) * d[bj, k] - nk * best) / (ni + nj + nk)
                d[bi, k] = v
                d[k, bi] = v
        a, b = sorted((int(ident[bi]), int(ident[bj])))
        merges.append((a, b, float(best), int(ni + nj)))
        active[bj] = 0
        size[bi] = ni + nj
        ident[bi] = n + step
    return merges
