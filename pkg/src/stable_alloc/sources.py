"""Center-set generators and the centers CSV format.

All random generators use numpy's PCG64 bit generator seeded with the given
integer (``numpy.random.Generator(numpy.random.PCG64(seed))``), so a
(parameters, seed) pair always yields the same centers.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CentersFormatError, InvalidInputError
from .geometry import Region, region_volume


@dataclass(frozen=True, eq=False)
class CenterSet:
    """Ordered, pairwise distinct centers inside a region.

    The label of a center is its row index in ``coords``.
    """

    region: Region
    coords: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coords, dtype=np.float64).reshape(-1, self.region.dimension)
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)
        if len(c):
            if not np.all((c >= 0) & (c < self.region.side_array)):
                raise InvalidInputError("all centers must lie inside the region")
            if len(np.unique(c, axis=0)) != len(c):
                raise InvalidInputError("centers must be pairwise distinct")

    def __len__(self):
        return self.coords.shape[0]

    def __eq__(self, other):
        if not isinstance(other, CenterSet):
            return NotImplemented
        return self.region == other.region and np.array_equal(self.coords, other.coords)

    @property
    def labels(self) -> np.ndarray:
        return np.arange(len(self), dtype=np.int64)

    @property
    def intensity(self) -> float:
        """Empirical intensity: centers per unit volume."""
        return len(self) / region_volume(self.region)

    def union(self, other: "CenterSet") -> "CenterSet":
        """Centers of ``self`` followed by those of ``other`` (labels of ``self`` are kept)."""
        if other.region != self.region:
            raise InvalidInputError("cannot merge center sets over different regions")
        return CenterSet(self.region, np.vstack([self.coords, other.coords]))


def _rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def _uniform_points(rng, n, region):
    L = region.side_array
    pts = rng.random((n, region.dimension)) * L
    # redraw rows that rounded onto the upper boundary or duplicate an earlier row
    while True:
        bad = np.any(pts >= L, axis=1)
        _, first = np.unique(pts, axis=0, return_index=True)
        dup = np.ones(len(pts), dtype=bool)
        dup[first] = False
        bad |= dup
        if not bad.any():
            return pts
        pts[bad] = rng.random((int(bad.sum()), region.dimension)) * L


def sample_uniform(count: int, region: Region, seed: int) -> CenterSet:
    """``count`` independent uniform points (a Poisson process conditioned on its count)."""
    if count < 0:
        raise InvalidInputError("count must be nonnegative")
    return CenterSet(region, _uniform_points(_rng(seed), int(count), region))


def sample_poisson(intensity: float, region: Region, seed: int) -> CenterSet:
    """Poisson process of the given intensity: ``N ~ Poisson(intensity * volume)`` uniform points."""
    if not (intensity >= 0 and math.isfinite(intensity)):
        raise InvalidInputError(f"intensity must be a finite nonnegative number, got {intensity}")
    rng = _rng(seed)
    n = int(rng.poisson(intensity * region_volume(region)))
    return CenterSet(region, _uniform_points(rng, n, region))


def sample_lattice(region: Region, spacing: float, jitter: float = 0.0, seed: int = 0) -> CenterSet:
    """One center per lattice cell, at the cell corner plus a uniform offset in ``[-jitter, jitter]^d``.

    Centers are ordered row-major over the lattice multi-index (last axis fastest).
    Offsets leaving the region are wrapped back into it.
    """
    if not spacing > 0:
        raise InvalidInputError("spacing must be positive")
    if not 0 <= jitter < spacing / 2:
        raise InvalidInputError("jitter must satisfy 0 <= jitter < spacing/2")
    counts = []
    for L in region.sides:
        k = round(L / spacing)
        if k < 1 or abs(k * spacing - L) > 1e-9 * L:
            raise InvalidInputError(f"side {L} is not an integer multiple of spacing {spacing}")
        counts.append(k)
    idx = np.array(list(itertools.product(*(range(k) for k in counts))), dtype=np.float64)
    pts = idx.reshape(-1, region.dimension) * spacing
    if jitter > 0:
        pts = pts + _rng(seed).uniform(-jitter, jitter, size=pts.shape)
        pts = np.mod(pts, region.side_array)
        pts = np.where(pts >= region.side_array, 0.0, pts)
    return CenterSet(region, pts)


def save_centers(cs: CenterSet, path) -> None:
    """Write ``cs`` as CSV with a ``x0,...,x{d-1}`` header, shortest round-trip float formatting."""
    d = cs.region.dimension
    lines = [",".join(f"x{i}" for i in range(d))]
    lines.extend(",".join(repr(float(v)) for v in row) for row in cs.coords)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_centers(path, region: Region) -> CenterSet:
    text = Path(path).read_text(encoding="utf-8")
    rows = text.splitlines()
    d = region.dimension
    expected = [f"x{i}" for i in range(d)]
    if not rows or [h.strip() for h in rows[0].split(",")] != expected:
        raise CentersFormatError(f"header must be {','.join(expected)}", line=1)
    L = region.side_array
    coords = []
    seen = {}
    for lineno, raw in enumerate(rows[1:], start=2):
        if not raw.strip():
            continue
        parts = raw.split(",")
        if len(parts) != d:
            raise CentersFormatError(f"expected {d} values, got {len(parts)}", line=lineno)
        try:
            row = tuple(float(p) for p in parts)
        except ValueError:
            raise CentersFormatError(f"not a number in {raw!r}", line=lineno) from None
        if not all(math.isfinite(v) for v in row):
            raise CentersFormatError("non-finite coordinate", line=lineno)
        if not all(0 <= v < s for v, s in zip(row, L)):
            raise CentersFormatError(f"point {row} outside the region", line=lineno)
        if row in seen:
            raise CentersFormatError(f"duplicate of the point on line {seen[row]}", line=lineno)
        seen[row] = lineno
        coords.append(row)
    return CenterSet(region, np.array(coords, dtype=np.float64).reshape(-1, d))
