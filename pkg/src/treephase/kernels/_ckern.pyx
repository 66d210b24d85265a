# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled sampling kernels.

Bit-compatible with the numpy backend in ``_pykern``: same splitmix-based
counter scheme, same inverse-CDF tie handling.  The hot loop fuses hashing,
symbol lookup and cocycle accumulation into one pass per trial.
"""

from libc.math cimport exp
from libc.stdlib cimport free, malloc

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"

cdef unsigned long long GOLDEN = 0x9E3779B97F4A7C15ULL
cdef unsigned long long M1 = 0xBF58476D1CE4E5B9ULL
cdef unsigned long long M2 = 0x94D049BB133111EBULL
cdef double U53 = 1.0 / 9007199254740992.0

_INT64_MAX = 2**63 - 1


cdef inline unsigned long long _mix(unsigned long long z) nogil:
    z = (z ^ (z >> 30)) * M1
    z = (z ^ (z >> 27)) * M2
    return z ^ (z >> 31)


cdef inline unsigned long long _at(unsigned long long state, unsigned long long index) nogil:
    return _mix(state + (index + 1) * GOLDEN)


cdef inline double _u01(unsigned long long h) nogil:
    return <double>(h >> 11) * U53


cdef inline Py_ssize_t _invcdf(double u, const double[::1] cum) nogil:
    cdef Py_ssize_t i = 0
    cdef Py_ssize_t last = cum.shape[0] - 1
    while i < last and u >= cum[i]:
        i += 1
    return i


def derive_seeds(seed, lo, hi):
    cdef unsigned long long s = <unsigned long long>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef Py_ssize_t n = hi - lo
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] out = np.empty(n, dtype=np.uint64)
    cdef unsigned long long base = <unsigned long long>lo
    cdef Py_ssize_t i
    for i in range(n):
        out[i] = _at(s, base + <unsigned long long>i)
    return out


def derive_seed(seed, index):
    return int(derive_seeds(seed, index, index + 1)[0])


def uniform_grid(tseeds, counters):
    cdef unsigned long long[::1] ts = np.ascontiguousarray(tseeds, dtype=np.uint64)
    cdef unsigned long long[::1] cs = np.ascontiguousarray(counters, dtype=np.uint64)
    cdef Py_ssize_t nt = ts.shape[0], nc = cs.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((nt, nc), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(nt):
            for j in range(nc):
                o[i, j] = _u01(_at(ts[i], cs[j]))
    return out


def pair_uniforms(tseeds, counters):
    cdef unsigned long long[::1] ts = np.ascontiguousarray(tseeds, dtype=np.uint64)
    cdef unsigned long long[::1] cs = np.ascontiguousarray(counters, dtype=np.uint64)
    cdef Py_ssize_t n = ts.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            o[i] = _u01(_at(ts[i], cs[i]))
    return out


def symbol_grid(tseeds, counters, cum):
    cdef unsigned long long[::1] ts = np.ascontiguousarray(tseeds, dtype=np.uint64)
    cdef unsigned long long[::1] cs = np.ascontiguousarray(counters, dtype=np.uint64)
    cdef double[::1] c = np.ascontiguousarray(cum, dtype=np.float64)
    cdef Py_ssize_t nt = ts.shape[0], nc = cs.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=2] out = np.empty((nt, nc), dtype=np.int64)
    cdef long long[:, ::1] o = out
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(nt):
            for j in range(nc):
                o[i, j] = _invcdf(_u01(_at(ts[i], cs[j])), c)
    return out


def pair_symbols(tseeds, counters, cum):
    cdef unsigned long long[::1] ts = np.ascontiguousarray(tseeds, dtype=np.uint64)
    cdef unsigned long long[::1] cs = np.ascontiguousarray(counters, dtype=np.uint64)
    cdef double[::1] c = np.ascontiguousarray(cum, dtype=np.float64)
    cdef Py_ssize_t n = ts.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.empty(n, dtype=np.int64)
    cdef long long[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            o[i] = _invcdf(_u01(_at(ts[i], cs[i])), c)
    return out


def tree_level_sums(first_deg, rest_deg, depth, seed, t_lo, t_hi,
                    cum_toward, cum_away, val_toward, val_away, scale):
    """Per-trial, per-level sums of exp(scale * S_v); see the numpy twin."""
    cdef double[::1] cum_t = np.ascontiguousarray(cum_toward, dtype=np.float64)
    cdef double[::1] cum_a = np.ascontiguousarray(cum_away, dtype=np.float64)
    cdef double[::1] val_t = np.ascontiguousarray(val_toward, dtype=np.float64)
    cdef double[::1] val_a = np.ascontiguousarray(val_away, dtype=np.float64)
    cdef Py_ssize_t first = first_deg, rest = rest_deg, dep = depth
    cdef Py_ssize_t ntr = t_hi - t_lo
    cdef double sc = scale

    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((ntr, dep + 1), dtype=np.float64)
    cdef double[:, ::1] o = out
    if ntr == 0:
        return out

    # Level widths and breadth-first offsets, with an int64 counter guard.
    # Only non-negative list indices here: wraparound is compiled out.
    widths_py = [1]
    offs_py = [0]
    for n_ in range(1, dep + 1):
        widths_py.append(first if n_ == 1 else widths_py[n_ - 1] * rest)
        offs_py.append(offs_py[n_ - 1] + widths_py[n_ - 1])
    if dep > 0 and 2 * (offs_py[dep] + widths_py[dep] - 1) + 1 > _INT64_MAX:
        from ..errors import Overflow
        raise Overflow(f"edge counters at depth {dep} exceed int64")

    cdef cnp.ndarray[cnp.int64_t, ndim=1] widths = np.asarray(widths_py, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] offs = np.asarray(offs_py, dtype=np.int64)
    cdef long long[::1] wv = widths
    cdef long long[::1] ov = offs

    cdef unsigned long long[::1] tseeds = derive_seeds(seed, t_lo, t_hi)
    cdef Py_ssize_t maxw = widths_py[dep] if dep > 0 else 1

    cdef double *s_prev = <double *> malloc(maxw * sizeof(double))
    cdef double *s_cur = <double *> malloc(maxw * sizeof(double))
    if s_prev == NULL or s_cur == NULL:
        free(s_prev)
        free(s_cur)
        raise MemoryError()

    cdef Py_ssize_t t, n, j, parent
    cdef unsigned long long ts, vid
    cdef double acc, s
    cdef double *tmp
    try:
        with nogil:
            for t in range(ntr):
                ts = tseeds[t]
                o[t, 0] = 1.0
                s_prev[0] = 0.0
                for n in range(1, dep + 1):
                    acc = 0.0
                    for j in range(wv[n]):
                        parent = 0 if n == 1 else j / rest
                        vid = <unsigned long long>(ov[n] + j)
                        s = s_prev[parent]
                        s += val_t[_invcdf(_u01(_at(ts, 2 * vid)), cum_t)]
                        s += val_a[_invcdf(_u01(_at(ts, 2 * vid + 1)), cum_a)]
                        s_cur[j] = s
                        acc += exp(sc * s)
                    o[t, n] = acc
                    tmp = s_prev
                    s_prev = s_cur
                    s_cur = tmp
    finally:
        free(s_prev)
        free(s_cur)
    return out
