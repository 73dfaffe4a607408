# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled composition scan kernel; same contract as ``_pykernel.scan``.

Odometer enumeration with prefix sums so each step touches only the
chunks whose digit changed, plus streaming 2-D Pareto fronts.
"""

import numpy as np
cimport numpy as cnp
from libcpp.vector cimport vector

cnp.import_array()


cdef struct Point:
    double e
    double g
    long long i


cdef void _insert(vector[Point]& front, double e, double g, long long idx) noexcept nogil:
    # front is sorted by e asc; g strictly increases between distinct points
    cdef Py_ssize_t n = front.size()
    cdef Py_ssize_t lo = 0, hi = n, mid, j, k
    cdef Point p
    # first position with front.e > e
    while lo < hi:
        mid = (lo + hi) // 2
        if front[mid].e <= e:
            lo = mid + 1
        else:
            hi = mid
    if lo > 0:
        p = front[lo - 1]
        if p.g > g or (p.g == g and p.e < e):
            return
    # first position with front.e >= e
    lo = 0
    hi = n
    while lo < hi:
        mid = (lo + hi) // 2
        if front[mid].e < e:
            lo = mid + 1
        else:
            hi = mid
    # drop points the candidate dominates, keep identical ones
    j = lo
    k = lo
    while j < n and front[j].g <= g:
        if front[j].e == e and front[j].g == g:
            front[k] = front[j]
            k += 1
        j += 1
    if j > k:
        front.erase(front.begin() + k, front.begin() + j)
    p.e = e
    p.g = g
    p.i = idx
    front.insert(front.begin() + k, p)


def scan(a, b, c, real, counts, double required, double qdu, double rate,
         double sentinel, double budget, bint normalized=False):
    cdef double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef double[::1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef double[::1] rv = np.ascontiguousarray(real, dtype=np.float64)
    cdef long long[::1] cnt = np.ascontiguousarray(counts, dtype=np.int64)
    cdef Py_ssize_t n = cnt.shape[0]
    cdef Py_ssize_t k

    if n == 0:
        return 0, 0, np.empty(0, np.int64), np.empty(0, np.int64), -1

    cdef long long[::1] off = np.zeros(n, dtype=np.int64)
    for k in range(1, n):
        off[k] = off[k - 1] + cnt[k - 1]

    cdef long long[::1] digit = np.zeros(n, dtype=np.int64)
    cdef double[::1] pa = np.zeros(n, dtype=np.float64)
    cdef double[::1] pb = np.zeros(n, dtype=np.float64)
    cdef double[::1] pc = np.zeros(n, dtype=np.float64)
    cdef double[::1] pm = np.zeros(n, dtype=np.float64)

    cdef long long total = 1
    for k in range(n):
        total *= cnt[k]

    cdef vector[Point] strict
    cdef vector[Point] relaxed
    cdef long long idx = 0, valid = 0, nearest = -1
    cdef double near_e = np.inf, near_g = -np.inf
    cdef double tec, bs, cs, m, agr, rem, ext
    cdef double ta, tb, tc, tm
    cdef long long pos
    cdef Py_ssize_t dirty = 0

    with nogil:
        while idx < total:
            # refresh prefix sums from the first changed chunk
            for k in range(dirty, n):
                pos = off[k] + digit[k]
                if k == 0:
                    ta = 0.0
                    tb = 0.0
                    tc = 0.0
                    tm = 0.0
                else:
                    ta = pa[k - 1]
                    tb = pb[k - 1]
                    tc = pc[k - 1]
                    tm = pm[k - 1]
                pa[k] = ta + av[pos]
                pb[k] = tb + bv[pos]
                pc[k] = tc + cv[pos]
                pm[k] = tm + rv[pos]
            tec = pa[n - 1]
            if tec > 0:
                valid += 1
                bs = pb[n - 1]
                cs = pc[n - 1]
                m = pm[n - 1]
                if normalized:
                    agr = bs / cs
                else:
                    agr = bs / (m * tec * qdu)
                rem = required - tec * agr
                if rem < 0:
                    rem = 0.0
                if rem == 0.0:
                    ext = 0.0
                elif rate <= 0:
                    ext = sentinel
                else:
                    ext = rem / rate * 60.0
                if ext < near_e or (ext == near_e and agr > near_g):
                    near_e = ext
                    near_g = agr
                    nearest = idx
                if ext <= budget:
                    _insert(relaxed, ext, agr, idx)
                    if tec >= required:
                        _insert(strict, ext, agr, idx)
            # odometer step, last chunk fastest
            idx += 1
            k = n - 1
            while k >= 0:
                digit[k] += 1
                if digit[k] < cnt[k]:
                    break
                digit[k] = 0
                k -= 1
            dirty = k if k >= 0 else 0

    s_idx = np.array([strict[k].i for k in range(<Py_ssize_t>strict.size())], dtype=np.int64)
    r_idx = np.array([relaxed[k].i for k in range(<Py_ssize_t>relaxed.size())], dtype=np.int64)
    return int(total), int(valid), s_idx, r_idx, int(nearest)
