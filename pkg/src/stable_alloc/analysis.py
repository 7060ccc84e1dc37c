"""Statistics of allocations: phases, allocation distances, territories, demand.

Expectations seen from a typical center are estimated by plain averages over
the centers of a torus window.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .errors import InvalidInputError
from .geometry import Point, distances_to, pairwise_distances

UNCLAIMED = -1
SUBCRITICAL = "subcritical"
CRITICAL = "critical"
SUPERCRITICAL = "supercritical"


@dataclass(frozen=True)
class PhaseStats:
    intensity: float
    alpha: float
    effective_alpha: float  # quota * cell_mass
    unclaimed_fraction: float
    mean_residual_appetite: float | None  # None without centers
    phase: str
    quantization_tolerance: float

    @property
    def identity_gap(self) -> float:
        """``intensity * residual - unclaimed - (intensity * alpha - 1)``; bounded by the quantization tolerance."""
        if self.mean_residual_appetite is None or math.isinf(self.alpha):
            return math.nan
        lhs = self.intensity * self.mean_residual_appetite - self.unclaimed_fraction
        return lhs - (self.intensity * self.alpha - 1.0)

    def to_dict(self):
        d = asdict(self)
        d["identity_gap"] = self.identity_gap
        return d


def phase_stats(alloc) -> PhaseStats:
    grid = alloc.grid
    n = len(alloc.centers)
    volume = grid.region.volume
    intensity = n / volume
    mass = grid.cell_mass
    unclaimed = alloc.n_unclaimed * mass / volume
    if n:
        residual = float(np.mean((alloc.quota - alloc.loads) * mass))
    else:
        residual = None
    if n * alloc.quota < grid.n_cells:
        phase = SUBCRITICAL
    elif n * alloc.quota == grid.n_cells:
        phase = CRITICAL
    else:
        phase = SUPERCRITICAL
    return PhaseStats(
        intensity=intensity,
        alpha=float(alloc.alpha),
        effective_alpha=alloc.quota * mass,
        unclaimed_fraction=unclaimed,
        mean_residual_appetite=residual,
        phase=phase,
        quantization_tolerance=intensity * mass / 2 + 1e-12,
    )


@dataclass(frozen=True)
class DistanceSample:
    """Allocation distance of every cell (``inf`` when unclaimed) for one window."""

    values: np.ndarray
    window: float

    @property
    def claimed(self) -> np.ndarray:
        return self.values[np.isfinite(self.values)]


def distance_samples(alloc) -> DistanceSample:
    return DistanceSample(alloc.allocation_distances(), max(alloc.grid.region.sides))


@dataclass(frozen=True)
class TrendReport:
    windows: list
    exponent: float
    means: list
    stderrs: list
    increasing: bool
    relative_change: float  # between the two largest windows
    stabilized: bool
    threshold: float

    def to_dict(self):
        return asdict(self)


def moment(sample, p: float) -> float:
    """Mean of ``X**p`` over the claimed cells of one sample."""
    x = sample.claimed if isinstance(sample, DistanceSample) else np.asarray(sample, dtype=float)
    x = x[np.isfinite(x)]
    if x.size == 0:
        return math.nan
    return float(np.mean(np.power(x, p)))


def tail_trend(samples_by_window, p: float, threshold: float = 0.10, min_seeds: int = 5) -> TrendReport:
    """Growth or stabilization of the empirical ``E[X^p]`` across window sizes.

    ``samples_by_window`` maps a window size to a list of per-seed samples
    (``DistanceSample`` or arrays).  Per-seed moments are averaged; standard
    errors use the across-seed spread.
    """
    windows = sorted(samples_by_window)
    if len(windows) < 3:
        raise InvalidInputError("tail_trend needs at least 3 window sizes")
    means, errs = [], []
    for L in windows:
        per_seed = [moment(s, p) for s in samples_by_window[L]]
        if len(per_seed) < min_seeds:
            raise InvalidInputError(f"window {L} has {len(per_seed)} seeds; need at least {min_seeds}")
        v = np.asarray(per_seed)
        means.append(float(v.mean()))
        errs.append(float(v.std(ddof=1) / math.sqrt(v.size)))
    increasing = all(b > a for a, b in zip(means, means[1:]))
    rel = abs(means[-1] - means[-2]) / abs(means[-2]) if means[-2] else math.inf
    return TrendReport(windows, float(p), means, errs, increasing, rel, rel < threshold, threshold)


@dataclass(frozen=True)
class TerritoryGeometry:
    center: int
    radius: float  # farthest held cell; 0 for an empty territory
    components: int
    load: int


def _adjacency_offsets(d, diagonal):
    if not diagonal:
        return [tuple(1 if j == i else 0 for j in range(d)) for i in range(d)]
    offs = []
    for off in np.ndindex(*(3,) * d):
        o = tuple(v - 1 for v in off)
        # one representative of each +/- pair
        if any(o) and next(v for v in o if v) > 0:
            offs.append(o)
    return offs


def component_labels(alloc, diagonal: bool = False) -> np.ndarray:
    """Connected-component label of every cell; cells are joined when adjacent and assigned to the same center.

    Adjacency is across faces (optionally also edges and corners) and wraps
    around on a torus.  Unclaimed cells form their own components.
    """
    grid = alloc.grid
    shape = grid.resolution
    lab = alloc.assignment.reshape(shape)
    idx = np.arange(grid.n_cells).reshape(shape)
    rows, cols = [], []
    for off in _adjacency_offsets(grid.dimension, diagonal):
        shifted_lab = lab
        shifted_idx = idx
        valid = np.ones(shape, dtype=bool)
        for axis, o in enumerate(off):
            if o == 0:
                continue
            shifted_lab = np.roll(shifted_lab, -o, axis=axis)
            shifted_idx = np.roll(shifted_idx, -o, axis=axis)
            if not grid.region.periodic:
                sl = [slice(None)] * grid.dimension
                sl[axis] = slice(shape[axis] - o, None) if o > 0 else slice(None, -o)
                valid[tuple(sl)] = False
        same = valid & (lab == shifted_lab) & (shifted_idx != idx)
        rows.append(idx[same])
        cols.append(shifted_idx[same])
    r = np.concatenate(rows) if rows else np.empty(0, np.int64)
    c = np.concatenate(cols) if cols else np.empty(0, np.int64)
    graph = sparse.coo_matrix((np.ones(r.size, dtype=np.int8), (r, c)), shape=(grid.n_cells, grid.n_cells))
    _, labels = connected_components(graph, directed=False)
    return labels


def territory_geometry(alloc, diagonal: bool = False, min_mass: float = 0.0) -> list:
    """Radius, component count and load of every center's territory.

    With ``min_mass > 0`` only components of at least that mass are counted,
    which discards slivers too thin to be resolved at the grid spacing.
    """
    a = alloc.assignment
    n = len(alloc.centers)
    dist = alloc.allocation_distances()
    claimed = a >= 0
    radius = np.zeros(n)
    if claimed.any():
        np.maximum.at(radius, a[claimed], dist[claimed])
    labels = component_labels(alloc, diagonal)
    comps = np.zeros(n, dtype=np.int64)
    if claimed.any():
        pairs, sizes = np.unique(np.stack([a[claimed], labels[claimed]], axis=1), axis=0, return_counts=True)
        big = sizes * alloc.grid.cell_mass >= min_mass
        comps = np.bincount(pairs[big, 0], minlength=n)
    loads = alloc.loads
    return [TerritoryGeometry(c, float(radius[c]), int(comps[c]), int(loads[c])) for c in range(n)]


def load_within(alloc, radii) -> np.ndarray:
    """Cells held by each center at distance ``<= r``, for every ``r`` in ``radii``.

    Returns an array of shape ``(n_centers, len(radii))``.
    """
    radii = np.asarray(radii, dtype=float)
    a = alloc.assignment
    claimed = a >= 0
    dist = alloc.allocation_distances()[claimed]
    owner = a[claimed]
    order = np.lexsort((dist, owner))
    owner, dist = owner[order], dist[order]
    n = len(alloc.centers)
    starts = np.searchsorted(owner, np.arange(n + 1))
    out = np.zeros((n, radii.size), dtype=np.int64)
    for c in range(n):
        out[c] = np.searchsorted(dist[starts[c]:starts[c + 1]], radii, side="right")
    return out


def territories_in_ball(alloc, point, radius: float) -> int:
    """Number of distinct territories holding a cell whose center lies within ``radius`` of ``point``."""
    p = point.coords if isinstance(point, Point) else point
    d = distances_to(alloc.grid.cell_centers(), np.asarray(p, dtype=float), alloc.grid.region)
    held = alloc.assignment[(d < radius) & (alloc.assignment >= 0)]
    return int(np.unique(held).size)


@dataclass(frozen=True)
class DemandReport:
    center: int
    cell: int
    window: float
    desire_volume: float  # mass of cells that desire ``center``
    covet_count: int  # centers that covet ``cell``
    unclaimed_mass: float
    unsated_centers: int

    def to_dict(self):
        return asdict(self)


def demand_diagnostics(alloc, probe) -> DemandReport:
    """Desire volume of a center and covet count of a cell near ``probe``.

    ``probe`` is either a center index (the cell containing that center is
    used) or a point (its nearest center and containing cell are used).
    """
    grid, cs = alloc.grid, alloc.centers
    if len(cs) == 0:
        raise InvalidInputError("demand diagnostics need at least one center")
    if isinstance(probe, (int, np.integer)):
        center = int(probe)
        point = cs.coords[center]
    else:
        point = np.asarray(probe.coords if isinstance(probe, Point) else probe, dtype=float)
        center = int(np.argmin(distances_to(cs.coords, point, grid.region)))
    cell = int(grid.locate(point)[0])
    X = alloc.allocation_distances()
    d_center = distances_to(grid.cell_centers(), cs.coords[center], grid.region)
    desire = float(np.count_nonzero(d_center < X) * grid.cell_mass)

    a = alloc.assignment
    loads = alloc.loads
    radius = np.full(len(cs), -np.inf)
    claimed = a >= 0
    np.maximum.at(radius, a[claimed], X[claimed])
    d_cell = pairwise_distances(grid.cell_centers([cell]), cs.coords, grid.region)[0]
    covets = (loads < alloc.quota) | (d_cell < radius)
    if a[cell] >= 0:
        covets[a[cell]] = False
    return DemandReport(
        center=center,
        cell=cell,
        window=max(grid.region.sides),
        desire_volume=desire,
        covet_count=int(np.count_nonzero(covets)),
        unclaimed_mass=alloc.n_unclaimed * grid.cell_mass,
        unsated_centers=int(np.count_nonzero(loads < alloc.quota)),
    )
