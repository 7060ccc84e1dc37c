"""Stability, validity and agreement checks for allocations.

Written against the definitions only.  A cell ``x`` *desires* center ``c``
when it is unclaimed or ``c`` is strictly closer than its own center; ``c``
*covets* ``x`` when ``c`` is below quota or holds a cell strictly farther
than ``x``.  A pair is unstable when both hold.

The accelerated scan limits each center to a search radius: a sated center
can only covet cells closer than its farthest held cell, and an unsated
center can only be desired by unclaimed cells or by cells whose current
distance exceeds the pair distance.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._accel import njit
from .errors import InvalidInputError
from .geometry import paired_distances, pairwise_distances

UNCLAIMED = -1


@dataclass(frozen=True, order=True)
class UnstablePair:
    cell: int
    center: int
    distance: float
    current_distance: float  # inf when the cell is unclaimed
    site_desires: bool = True
    center_covets: bool = True


def _state(alloc):
    if alloc.grid.region != alloc.centers.region:
        raise InvalidInputError("allocation grid and centers live in different regions")
    a = alloc.assignment
    n = len(alloc.centers)
    load = np.bincount(a[a >= 0], minlength=n)
    cur = np.full(a.shape[0], np.inf)
    claimed = np.flatnonzero(a >= 0)
    if claimed.size:
        cur[claimed] = paired_distances(alloc.grid.cell_centers(claimed), alloc.centers.coords[a[claimed]], alloc.grid.region)
    far = np.full(n, -np.inf)
    if claimed.size:
        np.maximum.at(far, a[claimed], cur[claimed])
    return a, load, cur, far


def _scan_loop(centers, axis_coords, res, sides, periodic, assign, cur, far, unsated, rho, out_x, out_c, out_d, fill):
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
    for c in range(centers.shape[0]):
        r = rho[c]
        if r < 0:
            continue
        for i in range(d):
            h = sides[i] / res[i]
            if r == np.inf:
                lo[i] = 0
                hi[i] = res[i] - 1
            else:
                lo[i] = int(math.floor((centers[c, i] - r) / h)) - 1
                hi[i] = int(math.floor((centers[c, i] + r) / h)) + 1
                if periodic:
                    if hi[i] - lo[i] + 1 >= res[i]:
                        lo[i] = 0
                        hi[i] = res[i] - 1
                else:
                    lo[i] = max(lo[i], 0)
                    hi[i] = min(hi[i], res[i] - 1)
            k[i] = lo[i]
        while True:
            flat = 0
            acc = 0.0
            for i in range(d):
                kk = k[i] % res[i]
                flat += kk * strides[i]
                diff = abs(axis_coords[i, kk] - centers[c, i])
                if periodic:
                    diff = min(diff, sides[i] - diff)
                acc = acc + diff * diff
            dist = math.sqrt(acc)
            if assign[flat] != c and dist < cur[flat] and (unsated[c] or dist < far[c]):
                if fill:
                    out_x[count] = flat
                    out_c[count] = c
                    out_d[count] = dist
                count += 1
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


_scan_nb = njit(_scan_loop)


def _axis_coords(grid):
    out = np.full((grid.dimension, max(grid.resolution)), np.nan)
    for i, (L, m) in enumerate(zip(grid.region.sides, grid.resolution)):
        out[i, :m] = (np.arange(m) + 0.5) * L / m
    return out


def _search_radius(load, quota, far, cur):
    unsated = load < quota
    rho = np.where(unsated, np.inf, far)  # far is -inf for an empty sated center
    if unsated.any() and np.isfinite(cur).all():
        # nobody is unclaimed, so only cells with a larger current distance can desire
        rho[unsated] = cur.max()
    return unsated, rho


def _pairs_accelerated(alloc, a, load, cur, far):
    unsated, rho = _search_radius(load, alloc.quota, far, cur)
    grid = alloc.grid
    if _scan_nb is not None:
        args = (
            np.ascontiguousarray(alloc.centers.coords), _axis_coords(grid), np.asarray(grid.resolution, np.int64),
            grid.region.side_array, grid.region.periodic, a, cur, far, unsated, rho,
        )
        n = _scan_nb(*args, np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0), False)
        xs, cs, ds = np.empty(n, np.int64), np.empty(n, np.int64), np.empty(n)
        _scan_nb(*args, xs, cs, ds, True)
        return xs, cs, ds
    # numpy path: dense scan over blocks of centers within their search radius
    cells = grid.cell_centers()
    xs, cs, ds = [], [], []
    idx = np.flatnonzero(rho >= 0)
    block = max(1, 4_000_000 // max(1, grid.n_cells))
    for start in range(0, idx.size, block):
        sel = idx[start:start + block]
        D = pairwise_distances(cells, alloc.centers.coords[sel], grid.region)
        bad = (a[:, None] != sel[None, :]) & (D < cur[:, None]) & (unsated[sel][None, :] | (D < far[sel][None, :]))
        x, j = np.nonzero(bad)
        xs.append(x)
        cs.append(sel[j])
        ds.append(D[x, j])
    if not xs:
        return np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0)
    return np.concatenate(xs), np.concatenate(cs), np.concatenate(ds)


def _pairs_naive(alloc, a, load, cur, far):
    # literal reading of the definitions over every (cell, center) pair
    D = pairwise_distances(alloc.grid.cell_centers(), alloc.centers.coords, alloc.grid.region)
    n_cells, n = D.shape
    held = np.zeros((n_cells, n), dtype=bool)
    claimed = a >= 0
    held[np.flatnonzero(claimed), a[claimed]] = True
    desires = (a[:, None] == UNCLAIMED) | (D < cur[:, None])
    desires &= a[:, None] != np.arange(n)[None, :]
    held_dist = np.where(held, D, -np.inf)
    farthest = held_dist.max(axis=0) if n_cells else np.full(n, -np.inf)
    covets = (load < alloc.quota)[None, :] | (D < farthest[None, :])
    x, c = np.nonzero(desires & covets)
    return x, c, D[x, c]


def verify_stability(alloc, method: str = "accelerated") -> list:
    """Every unstable (cell, center) pair of ``alloc``, sorted by (cell, center).

    ``method`` is ``"accelerated"`` (search-radius scan) or ``"naive"``
    (dense evaluation of the definitions).
    """
    a, load, cur, far = _state(alloc)
    if len(alloc.centers) == 0:
        return []
    if method == "accelerated":
        x, c, d = _pairs_accelerated(alloc, a, load, cur, far)
    elif method == "naive":
        x, c, d = _pairs_naive(alloc, a, load, cur, far)
    else:
        raise InvalidInputError(f"unknown method {method!r}")
    order = np.lexsort((c, x))
    return [
        UnstablePair(int(x[i]), int(c[i]), float(d[i]), float(cur[x[i]]), True, True)
        for i in order
    ]


def is_stable(alloc) -> bool:
    return not verify_stability(alloc)


@dataclass
class ValidationReport:
    passed: bool
    violations: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def validate(alloc) -> ValidationReport:
    """Capacity, totality and the no-unclaimed-with-unsated exclusion."""
    violations = []
    a = np.asarray(alloc.assignment)
    n = len(alloc.centers)
    if a.shape != (alloc.grid.n_cells,):
        violations.append({"kind": "totality", "detail": f"{a.size} entries for {alloc.grid.n_cells} cells"})
        return ValidationReport(False, violations)
    bad = np.flatnonzero((a < UNCLAIMED) | (a >= n))
    for x in bad.tolist():
        violations.append({"kind": "totality", "cell": x, "detail": f"invalid center {int(a[x])}"})
    ok = (a >= 0) & (a < n)
    load = np.bincount(a[ok], minlength=n)
    for c in np.flatnonzero(load > alloc.quota).tolist():
        violations.append({"kind": "capacity", "center": c, "load": int(load[c]), "quota": int(alloc.quota)})
    unclaimed = int(np.count_nonzero(a == UNCLAIMED))
    unsated = np.flatnonzero(load < alloc.quota)
    if unclaimed and unsated.size:
        violations.append({
            "kind": "exclusion",
            "unclaimed_cells": unclaimed,
            "unsated_centers": int(unsated.size),
            "detail": "unclaimed cells coexist with unsated centers",
        })
    return ValidationReport(not violations, violations)


@dataclass
class ComparisonReport:
    disagreements: np.ndarray
    tie_cells: np.ndarray

    @property
    def n_disagreements(self) -> int:
        return int(self.disagreements.size)

    @property
    def confined_to_ties(self) -> bool:
        return bool(np.isin(self.disagreements, self.tie_cells).all())

    def to_dict(self):
        return {
            "n_disagreements": self.n_disagreements,
            "disagreements": self.disagreements.tolist(),
            "tie_cells": self.tie_cells.tolist(),
            "confined_to_ties": self.confined_to_ties,
        }


def _tie_involved(alloc, cells, a, b):
    """Cells among ``cells`` that sit on an exact distance tie relevant to either assignment.

    A cell qualifies when it is equidistant from two centers, or when one of
    its two candidate centers is equidistant from it and another cell.
    """
    grid, cs = alloc.grid, alloc.centers
    if cells.size == 0 or len(cs) == 0:
        return cells[:0]
    D = pairwise_distances(grid.cell_centers(cells), cs.coords, grid.region)
    out = []
    centers_needed = np.unique(np.concatenate([a[cells], b[cells]]))
    centers_needed = centers_needed[centers_needed >= 0]
    col = {int(c): pairwise_distances(grid.cell_centers(), cs.coords[c][None, :], grid.region)[:, 0] for c in centers_needed}
    for i, x in enumerate(cells.tolist()):
        row = D[i]
        tied = np.unique(row).size < row.size
        if not tied:
            for c in (int(a[x]), int(b[x])):
                if c >= 0 and np.count_nonzero(col[c] == row[c]) > 1:
                    tied = True
                    break
        if tied:
            out.append(x)
    return np.asarray(out, dtype=np.int64)


def compare(first, second) -> ComparisonReport:
    """Cells assigned differently by two allocations of the same instance."""
    if not first.same_instance(second):
        raise InvalidInputError("allocations belong to different instances")
    a, b = first.assignment, second.assignment
    diff = np.flatnonzero(a != b)
    return ComparisonReport(diff, _tie_involved(first, diff, a, b))


def nearest_center_map(grid, cs, block: int = 8192) -> np.ndarray:
    """Index of the nearest center for every cell, smaller index winning exact ties."""
    if len(cs) == 0:
        return np.full(grid.n_cells, UNCLAIMED, dtype=np.int64)
    out = np.empty(grid.n_cells, dtype=np.int64)
    for start in range(0, grid.n_cells, block):
        idx = np.arange(start, min(start + block, grid.n_cells))
        D = pairwise_distances(grid.cell_centers(idx), cs.coords, grid.region)
        out[idx] = np.argmin(D, axis=1)
    return out


def stability_report(alloc, max_pairs: int = 100) -> dict:
    pairs = verify_stability(alloc)
    report = validate(alloc)
    return {
        "stable": not pairs,
        "n_unstable_pairs": len(pairs),
        "unstable_pairs": [asdict(p) for p in pairs[:max_pairs]],
        "valid": report.passed,
        "violations": report.violations,
    }
