"""Numpy fallback for the composition scan kernel.

Walks every one-partial-per-chunk combination in mixed-radix order (the
last chunk varies fastest, as ``itertools.product``), scores it and keeps
the two Pareto fronts needed by the constraint rule. Combinations are
processed in fixed-size blocks so memory stays bounded.
"""

import numpy as np

BLOCK = 1 << 16


def front_2d(ext, agr, idx):
    """Non-dominated subset for (min ext, max agr). Identical points all survive.

    Returns the kept ``(ext, agr, idx)`` sorted by ext asc, agr desc, idx asc.
    """
    if len(idx) == 0:
        return ext, agr, idx
    order = np.lexsort((idx, -agr, ext))
    e, g, i = ext[order], agr[order], idx[order]
    prev = np.empty_like(g)
    prev[0] = -np.inf
    np.maximum.accumulate(g[:-1], out=prev[1:])
    new_max = g > prev
    setter = np.maximum.accumulate(np.where(new_max, np.arange(len(g)), 0))
    setter_prev = np.concatenate(([0], setter[:-1]))
    tie = (g == prev) & (e == e[setter_prev])
    keep = new_max | tie
    return e[keep], g[keep], i[keep]


def _merge(front, e, g, i):
    return front_2d(
        np.concatenate((front[0], e)),
        np.concatenate((front[1], g)),
        np.concatenate((front[2], i)),
    )


def scan(a, b, c, real, counts, required, qdu, rate, sentinel, budget, normalized=False):
    """Score every combination and return
    ``(examined, valid, strict_front, relaxed_front, nearest)``.

    ``strict_front`` holds flat indices of the front among candidates with
    ``ext <= budget`` and ``tec >= required``; ``relaxed_front`` drops the
    energy condition. ``nearest`` is the lowest-ext valid candidate, or -1.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    real = np.asarray(real, dtype=np.float64)
    counts = np.asarray(counts, dtype=np.int64)
    n = len(counts)
    offsets = np.concatenate(([0], np.cumsum(counts)[:-1])).astype(np.int64)
    strides = np.ones(n, dtype=np.int64)
    for k in range(n - 2, -1, -1):
        strides[k] = strides[k + 1] * counts[k + 1]
    total = int(np.prod(counts)) if n else 0

    empty = (np.empty(0), np.empty(0), np.empty(0, dtype=np.int64))
    strict, relaxed = empty, empty
    valid_count = 0
    nearest, near_e, near_g = -1, np.inf, -np.inf

    for start in range(0, total, BLOCK):
        idx = np.arange(start, min(start + BLOCK, total), dtype=np.int64)
        tec = np.zeros(len(idx))
        bs = np.zeros(len(idx))
        cs = np.zeros(len(idx))
        m = np.zeros(len(idx))
        for k in range(n):
            pos = offsets[k] + (idx // strides[k]) % counts[k]
            tec += a[pos]
            bs += b[pos]
            cs += c[pos]
            m += real[pos]
        valid = tec > 0
        if not valid.any():
            continue
        idx, tec, bs, cs, m = idx[valid], tec[valid], bs[valid], cs[valid], m[valid]
        valid_count += len(idx)
        if normalized:
            agr = bs / cs
        else:
            agr = bs / (m * tec * qdu)
        rem = required - tec * agr
        rem[rem < 0] = 0.0
        if rate <= 0:
            ext = np.full(len(idx), float(sentinel))
        else:
            ext = rem / rate * 60.0
        ext[rem == 0.0] = 0.0

        best = np.lexsort((idx, -agr, ext))[0]
        if (ext[best], -agr[best]) < (near_e, -near_g):
            nearest, near_e, near_g = int(idx[best]), ext[best], agr[best]

        ok = ext <= budget
        if not ok.any():
            continue
        e, g, i, t = ext[ok], agr[ok], idx[ok], tec[ok]
        relaxed = _merge(relaxed, *front_2d(e, g, i))
        hit = t >= required
        if hit.any():
            strict = _merge(strict, *front_2d(e[hit], g[hit], i[hit]))

    return total, valid_count, strict[2], relaxed[2], nearest
