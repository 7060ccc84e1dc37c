"""Hot loops of the distance-greedy allocator.

Each kernel exists twice: a loop version compiled with numba and a numpy /
plain-python fallback with the same contract.  ``STABLE_ALLOC_NUMBA=0``
selects the fallback (see ``_accel``).  Both versions evaluate distances with
the operation order documented in ``geometry`` so that they agree bit for bit.

Grid geometry is passed as ``axis_coords``: a ``(d, max_m)`` array whose row
``i`` holds the cell-center coordinates along axis ``i`` (padded with NaN).
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import njit


def _axis_range(c, r, h, m, periodic):
    """Index window ``[lo, hi]`` of cells along one axis that may lie within ``r`` of ``c``.

    Returns ``(lo, hi, full)``; ``full`` means the whole axis is covered once.
    """
    if not math.isfinite(r):
        return 0, m - 1, True
    lo = int(math.floor((c - r) / h - 0.5)) - 1
    hi = int(math.ceil((c + r) / h - 0.5)) + 1
    if periodic:
        if hi - lo + 1 >= m:
            return 0, m - 1, True
        return lo, hi, False
    if lo < 0:
        lo = 0
    if hi > m - 1:
        hi = m - 1
    return lo, hi, False


_window = njit(_axis_range) or _axis_range


def _band_pairs_loop(centers, active, axis_coords, res, spacing, sides, periodic, free, r_lo, r_hi, out_d, out_c, out_x, fill):
    # two modes: fill=False counts matches, fill=True writes them
    d = centers.shape[1]
    lo = np.empty(d, np.int64)
    hi = np.empty(d, np.int64)
    k = np.empty(d, np.int64)
    strides = np.empty(d, np.int64)
    s = 1
    for i in range(d - 1, -1, -1):
        strides[i] = s
        s *= res[i]
    count = 0
    for a in range(active.shape[0]):
        c = active[a]
        for i in range(d):
            w = _window(centers[c, i], r_hi, spacing[i], res[i], periodic)
            lo[i] = w[0]
            hi[i] = w[1]
            k[i] = lo[i]
        empty = False
        for i in range(d):
            if hi[i] < lo[i]:
                empty = True
        if empty:
            continue
        while True:
            flat = 0
            acc = 0.0
            for i in range(d):
                kk = k[i]
                if periodic:
                    kk = kk % res[i]
                flat += kk * strides[i]
                diff = abs(axis_coords[i, kk] - centers[c, i])
                if periodic:
                    diff = min(diff, sides[i] - diff)
                acc = acc + diff * diff
            if free[flat]:
                dist = math.sqrt(acc)
                if dist > r_lo and dist <= r_hi:
                    if fill:
                        out_d[count] = dist
                        out_c[count] = c
                        out_x[count] = flat
                    count += 1
            # odometer increment, last axis fastest
            j = d - 1
            while j >= 0:
                k[j] += 1
                if k[j] <= hi[j]:
                    break
                k[j] = lo[j]
                j -= 1
            if j < 0:
                break
    return count


_band_pairs_nb = njit(_band_pairs_loop)


def _band_pairs_numpy(centers, active, axis_coords, res, spacing, sides, periodic, free, r_lo, r_hi):
    d = centers.shape[1]
    strides = np.ones(d, dtype=np.int64)
    for i in range(d - 2, -1, -1):
        strides[i] = strides[i + 1] * res[i + 1]
    out_d, out_c, out_x = [], [], []
    for c in active.tolist():
        flat = np.zeros(1, dtype=np.int64)
        acc = np.zeros(1, dtype=np.float64)
        for i in range(d):
            lo, hi, _ = _axis_range(centers[c, i], r_hi, spacing[i], res[i], periodic)
            ks = np.arange(lo, hi + 1, dtype=np.int64)
            if periodic:
                ks = ks % res[i]
            diff = np.abs(axis_coords[i, ks] - centers[c, i])
            if periodic:
                diff = np.minimum(diff, sides[i] - diff)
            flat = (flat[:, None] + ks[None, :] * strides[i]).ravel()
            acc = (acc[:, None] + (diff * diff)[None, :]).ravel()
        dist = np.sqrt(acc)
        keep = free[flat] & (dist > r_lo) & (dist <= r_hi)
        out_d.append(dist[keep])
        out_x.append(flat[keep])
        out_c.append(np.full(int(keep.sum()), c, dtype=np.int64))
    if not out_d:
        return np.empty(0), np.empty(0, np.int64), np.empty(0, np.int64)
    return np.concatenate(out_d), np.concatenate(out_c), np.concatenate(out_x)


def band_pairs(centers, active, axis_coords, res, spacing, sides, periodic, free, r_lo, r_hi):
    """All (distance, center, cell) with ``center`` in ``active``, ``free[cell]`` and ``r_lo < distance <= r_hi``.

    Output order is unspecified; callers sort by the tie rule.
    """
    if _band_pairs_nb is None:
        return _band_pairs_numpy(centers, active, axis_coords, res, spacing, sides, periodic, free, r_lo, r_hi)
    args = (centers, active, axis_coords, res, spacing, sides, periodic, free, float(r_lo), float(r_hi))
    dummy_f = np.empty(0)
    dummy_i = np.empty(0, np.int64)
    n = _band_pairs_nb(*args, dummy_f, dummy_i, dummy_i, False)
    out_d = np.empty(n)
    out_c = np.empty(n, np.int64)
    out_x = np.empty(n, np.int64)
    _band_pairs_nb(*args, out_d, out_c, out_x, True)
    return out_d, out_c, out_x


def _greedy_commit_loop(pair_c, pair_x, assign, load, quota, n_free, n_active):
    """Commit sorted pairs; returns updated ``(n_free, n_active)``."""
    for t in range(pair_c.shape[0]):
        if n_free == 0 or n_active == 0:
            break
        x = pair_x[t]
        if assign[x] >= 0:
            continue
        c = pair_c[t]
        if load[c] >= quota:
            continue
        assign[x] = c
        load[c] += 1
        n_free -= 1
        if load[c] == quota:
            n_active -= 1
    return n_free, n_active


_greedy_commit_nb = njit(_greedy_commit_loop)


def _greedy_commit_python(pair_c, pair_x, assign, load, quota, n_free, n_active):
    # the commit is inherently sequential; plain lists beat per-element numpy access
    a = assign.tolist()
    ld = load.tolist()
    for c, x in zip(pair_c.tolist(), pair_x.tolist()):
        if n_free == 0 or n_active == 0:
            break
        if a[x] >= 0 or ld[c] >= quota:
            continue
        a[x] = c
        ld[c] += 1
        n_free -= 1
        if ld[c] == quota:
            n_active -= 1
    assign[:] = a
    load[:] = ld
    return n_free, n_active


def greedy_commit(pair_c, pair_x, assign, load, quota, n_free, n_active):
    fn = _greedy_commit_nb if _greedy_commit_nb is not None else _greedy_commit_python
    n_free, n_active = fn(pair_c, pair_x, assign, load, int(quota), int(n_free), int(n_active))
    return int(n_free), int(n_active)
