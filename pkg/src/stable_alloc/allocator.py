"""Stable allocations of grid cells to centers.

Three procedures are provided:

* :func:`allocate_site_optimal` -- stages in which every unresolved cell applies
  to its nearest center that has not rejected it, and each center keeps its
  ``quota`` nearest applicants.
* :func:`allocate_center_optimal` -- stages in which every center applies to its
  ``quota`` nearest cells that have not rejected it, and each cell keeps its
  nearest applicant.
* :func:`allocate_greedy` -- the sphere-growth picture: (cell, center) pairs are
  committed in increasing distance order while the cell is free and the
  center below quota.  This is the production path.

Ties are broken everywhere by the key ``(distance, center index, cell index)``.
Under that single strict order the stable assignment is unique, so the three
procedures return identical assignments.  The two stage procedures build
dense ``cells x centers`` distance matrices and are meant for moderate sizes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import InvalidInputError
from .geometry import paired_distances, pairwise_distances
from .grid import Grid, quota_cells
from .sources import CenterSet

UNCLAIMED = -1
ALGORITHMS = ("site", "center", "greedy")
DENSE_LIMIT = 40_000_000


@dataclass(frozen=True)
class StageState:
    """Snapshot after one stage of a Gale-Shapley procedure.

    ``radius`` holds the rejection radius (site-optimal) or application radius
    (center-optimal) of every center; ``inf`` when the center saw fewer than
    ``quota`` candidates.
    """

    stage: int
    radius: np.ndarray
    rejections: int
    shortlisted: np.ndarray  # cells held per center after the stage


@dataclass(eq=False)
class Allocation:
    grid: Grid
    centers: CenterSet
    alpha: float
    quota: int
    assignment: np.ndarray
    algorithm: str = "greedy"
    stages: int = 0
    history: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int64)
        if a.shape != (self.grid.n_cells,):
            raise InvalidInputError(f"assignment must have {self.grid.n_cells} entries, got {a.shape}")
        if a.size and (a.min() < UNCLAIMED or a.max() >= len(self.centers)):
            raise InvalidInputError("assignment refers to a nonexistent center")
        self.assignment = a

    @property
    def n_centers(self) -> int:
        return len(self.centers)

    @property
    def loads(self) -> np.ndarray:
        a = self.assignment
        return np.bincount(a[a >= 0], minlength=self.n_centers).astype(np.int64)

    @property
    def n_unclaimed(self) -> int:
        return int(np.count_nonzero(self.assignment == UNCLAIMED))

    def allocation_distances(self) -> np.ndarray:
        """Distance from each cell center to its center; ``inf`` when unclaimed."""
        out = np.full(self.grid.n_cells, np.inf)
        claimed = np.flatnonzero(self.assignment >= 0)
        if claimed.size:
            cells = self.grid.cell_centers(claimed)
            ctr = self.centers.coords[self.assignment[claimed]]
            out[claimed] = paired_distances(cells, ctr, self.grid.region)
        return out

    def same_instance(self, other: "Allocation") -> bool:
        return self.grid == other.grid and self.centers == other.centers and self.quota == other.quota


def tie_rule_order(dist, center, cell) -> np.ndarray:
    """Permutation sorting pairs by ``(distance, center, cell)``."""
    return np.lexsort((cell, center, dist))


def _check_instance(grid: Grid, cs: CenterSet, alpha):
    if grid.region != cs.region:
        raise InvalidInputError("grid and centers must share a region")
    return quota_cells(alpha, grid)


def _trivial(grid, cs, alpha, quota, algorithm):
    # zero quota or no centers: nothing can be claimed
    if quota == 0 or len(cs) == 0:
        return Allocation(grid, cs, alpha, quota, np.full(grid.n_cells, UNCLAIMED), algorithm, 0)
    return None


def _dense_distances(grid, cs):
    if grid.n_cells * len(cs) > DENSE_LIMIT:
        raise InvalidInputError(
            f"{grid.n_cells} cells x {len(cs)} centers is too large for the reference stage procedures; "
            "use allocate_greedy"
        )
    return pairwise_distances(grid.cell_centers(), cs.coords, grid.region)


def allocate_site_optimal(grid: Grid, cs: CenterSet, alpha: float, record: bool = False) -> Allocation:
    """Site-proposing Gale-Shapley stages.

    In each stage every cell that still has a candidate applies to the
    nearest center that has not rejected it (cells already shortlisted apply
    again to their current center).  Each center shortlists its ``quota``
    nearest applicants and rejects the rest.  The procedure stops at the
    first stage without rejections.  With ``record=True`` the per-stage
    rejection radii are kept in ``history``.

    Only centers receiving new applicants can change their shortlist, so each
    stage re-ranks just those centers' pools.
    """
    quota = _check_instance(grid, cs, alpha)
    out = _trivial(grid, cs, alpha, quota, "site")
    if out is not None:
        return out
    D = _dense_distances(grid, cs)
    n_cells, n_centers = D.shape
    pref = np.argsort(D, axis=1, kind="stable")  # cell's centers by (distance, index)
    ptr = np.zeros(n_cells, dtype=np.int64)
    held = np.full(n_cells, UNCLAIMED, dtype=np.int64)  # current shortlisting center
    radius = np.full(n_centers, np.inf)
    history = []
    applicants = np.arange(n_cells)
    stage = 0
    limit = n_cells * n_centers + 1
    while True:
        stage += 1
        if stage > limit:
            raise RuntimeError("site-optimal stages did not terminate")
        target = pref[applicants, ptr[applicants]]
        touched = np.unique(target)
        keep_mask = np.isin(held, touched)
        pool_cells = np.concatenate([np.flatnonzero(keep_mask), applicants])
        pool_ctr = np.concatenate([held[keep_mask], target])
        dist = D[pool_cells, pool_ctr]
        order = tie_rule_order(dist, pool_ctr, pool_cells)
        # regroup by center, keeping the (distance, cell) order inside each group
        order = order[np.argsort(pool_ctr[order], kind="stable")]
        c_sorted = pool_ctr[order]
        rank = np.arange(order.size) - np.searchsorted(c_sorted, c_sorted, side="left")
        kept = order[rank < quota]
        lost = order[rank >= quota]
        held[pool_cells[lost]] = UNCLAIMED
        held[pool_cells[kept]] = pool_ctr[kept]
        if record:
            radius[touched] = np.inf
            at_quota = order[rank == quota - 1]
            radius[pool_ctr[at_quota]] = dist[at_quota]
            history.append(StageState(stage, radius.copy(), int(lost.size), np.bincount(held[held >= 0], minlength=n_centers)))
        if lost.size == 0:
            break
        rejected = pool_cells[lost]
        ptr[rejected] += 1
        applicants = rejected[ptr[rejected] < n_centers]
        if applicants.size == 0:
            break
    return Allocation(grid, cs, alpha, quota, held, "site", stage, history)


def allocate_center_optimal(grid: Grid, cs: CenterSet, alpha: float, record: bool = False) -> Allocation:
    """Center-proposing Gale-Shapley stages.

    In each stage every center applies to its ``quota`` nearest cells among
    those that have not rejected it.  Each cell shortlists the nearest center
    that applied and rejects the others.  The procedure stops at the first
    stage without rejections.  With ``record=True`` the per-stage
    application radii are kept in ``history``.

    A cell can only reject a center after that center applied to it, so a
    center's application set is always a prefix of its preference list minus
    the cells that rejected it; the prefix grows by one cell per rejection.
    """
    quota = _check_instance(grid, cs, alpha)
    out = _trivial(grid, cs, alpha, quota, "center")
    if out is not None:
        return out
    D = _dense_distances(grid, cs)
    n_cells, n_centers = D.shape
    cpref = np.argsort(D.T, axis=1, kind="stable")  # center's cells by (distance, index)
    frontier = np.zeros(n_centers, dtype=np.int64)
    deficit = np.full(n_centers, min(quota, n_cells), dtype=np.int64)
    holder = np.full(n_cells, UNCLAIMED, dtype=np.int64)
    total_rej = np.zeros(n_centers, dtype=np.int64)
    history = []
    stage = 0
    limit = n_cells * n_centers + 1
    while True:
        stage += 1
        if stage > limit:
            raise RuntimeError("center-optimal stages did not terminate")
        grow = np.minimum(deficit, n_cells - frontier)
        ctr = np.repeat(np.arange(n_centers), grow)
        pos = np.arange(ctr.size) - np.repeat(np.cumsum(grow) - grow, grow) + frontier[ctr]
        frontier += grow
        cell = cpref[ctr, pos]
        # current holders of the newly approached cells compete with the new applicants
        prev = np.unique(cell)
        prev = prev[holder[prev] >= 0]
        all_cell = np.concatenate([prev, cell])
        all_ctr = np.concatenate([holder[prev], ctr])
        dist = D[all_cell, all_ctr]
        order = tie_rule_order(dist, all_ctr, all_cell)
        order = order[np.argsort(all_cell[order], kind="stable")]
        x_sorted = all_cell[order]
        first = np.ones(order.size, dtype=bool)
        first[1:] = x_sorted[1:] != x_sorted[:-1]
        winners = order[first]
        losers = order[~first]
        holder[all_cell[winners]] = all_ctr[winners]
        deficit = np.bincount(all_ctr[losers], minlength=n_centers)
        total_rej += deficit
        if record:
            held = np.bincount(holder[holder >= 0], minlength=n_centers)
            # application radius: distance to the farthest applied cell, once quota cells are in play
            radius = np.full(n_centers, np.inf)
            idx = np.flatnonzero((frontier > 0) & (frontier - total_rej + deficit >= min(quota, n_cells)))
            radius[idx] = D[cpref[idx, frontier[idx] - 1], idx]
            history.append(StageState(stage, radius, int(losers.size), held))
        if losers.size == 0:
            break
    return Allocation(grid, cs, alpha, quota, holder, "center", stage, history)


def _unit_ball_volume(d):
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def _axis_coords(grid: Grid) -> np.ndarray:
    d = grid.dimension
    m = max(grid.resolution)
    out = np.full((d, m), np.nan)
    for i, (L, mi) in enumerate(zip(grid.region.sides, grid.resolution)):
        out[i, :mi] = (np.arange(mi) + 0.5) * L / mi
    return out


def allocate_greedy(grid: Grid, cs: CenterSet, alpha: float, growth: float = 1.5) -> Allocation:
    """Commit (cell, center) pairs in increasing tie-rule order.

    The pair stream is produced lazily in distance bands ``(r_lo, r_hi]``.
    Each band only pairs centers still below quota with cells still free, so
    sated centers and claimed cells drop out of all later work.  The run stops
    once every cell is claimed or every center sated, or after the last band.
    """
    quota = _check_instance(grid, cs, alpha)
    out = _trivial(grid, cs, alpha, quota, "greedy")
    if out is not None:
        return out
    n_cells, n_centers = grid.n_cells, len(cs)
    assign = np.full(n_cells, UNCLAIMED, dtype=np.int64)
    load = np.zeros(n_centers, dtype=np.int64)
    centers = np.ascontiguousarray(cs.coords)
    axis_coords = _axis_coords(grid)
    res = np.asarray(grid.resolution, dtype=np.int64)
    spacing = grid.spacing
    sides = grid.region.side_array
    periodic = grid.region.periodic
    diameter = grid.region.diameter

    # first band: a ball holding a center's quota, or its fair share of the region if smaller
    mass = min(quota, n_cells / n_centers) * grid.cell_mass
    r_hi = max((mass / _unit_ball_volume(grid.dimension)) ** (1.0 / grid.dimension), float(spacing.max()))
    r_lo = -1.0
    n_free, n_active = n_cells, n_centers
    bands = 0
    while n_free and n_active:
        bands += 1
        active = np.flatnonzero(load < quota)
        free = assign == UNCLAIMED
        d, c, x = kernels.band_pairs(centers, active, axis_coords, res, spacing, sides, periodic, free, r_lo, r_hi)
        order = tie_rule_order(d, c, x)
        n_free, n_active = kernels.greedy_commit(c[order], x[order], assign, load, quota, n_free, n_active)
        if math.isinf(r_hi):
            break
        r_lo = r_hi
        r_hi = r_hi * growth
        if r_hi >= diameter:
            r_hi = math.inf
    return Allocation(grid, cs, alpha, quota, assign, "greedy", bands)


def allocate(grid: Grid, cs: CenterSet, alpha: float, algorithm: str = "greedy") -> Allocation:
    if algorithm == "site":
        return allocate_site_optimal(grid, cs, alpha)
    if algorithm == "center":
        return allocate_center_optimal(grid, cs, alpha)
    if algorithm == "greedy":
        return allocate_greedy(grid, cs, alpha)
    raise InvalidInputError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
