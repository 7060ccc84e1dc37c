"""Equal-mass discretization of Lebesgue measure on a region.

Cells are indexed row-major (C order) over the multi-index ``(k_0, ..., k_{d-1})``,
the last axis varying fastest.  Cell ``k`` has center ``(k_i + 0.5) * L_i / m_i``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .geometry import Region, region_volume

INFINITE = math.inf


@dataclass(frozen=True)
class Grid:
    region: Region
    resolution: tuple

    def __post_init__(self):
        res = tuple(int(m) for m in self.resolution)
        if len(res) != self.region.dimension:
            raise InvalidInputError(f"resolution needs {self.region.dimension} entries, got {len(res)}")
        if any(m < 1 for m in res) or any(int(m) != m for m in self.resolution):
            raise InvalidInputError(f"resolution entries must be positive integers, got {self.resolution}")
        object.__setattr__(self, "resolution", res)

    @property
    def dimension(self) -> int:
        return self.region.dimension

    @property
    def n_cells(self) -> int:
        return math.prod(self.resolution)

    @property
    def spacing(self) -> np.ndarray:
        return self.region.side_array / np.asarray(self.resolution, dtype=np.float64)

    @property
    def cell_mass(self) -> float:
        return region_volume(self.region) / self.n_cells

    def multi_index(self, index) -> np.ndarray:
        return np.stack(np.unravel_index(np.asarray(index), self.resolution), axis=-1)

    def flat_index(self, multi) -> np.ndarray:
        return np.ravel_multi_index(tuple(np.asarray(multi).T), self.resolution)

    def cell_centers(self, index=None) -> np.ndarray:
        """Coordinates of the given cells (all cells if ``index`` is None), shape ``(n, d)``."""
        if index is None:
            index = np.arange(self.n_cells)
        k = self.multi_index(index).astype(np.float64)
        return (k + 0.5) * self.region.side_array / np.asarray(self.resolution, dtype=np.float64)

    def locate(self, coords) -> np.ndarray:
        """Flat index of the cell containing each point."""
        c = np.asarray(coords, dtype=np.float64).reshape(-1, self.dimension)
        m = np.asarray(self.resolution)
        k = np.floor(c / self.spacing).astype(np.int64)
        k = np.clip(k, 0, m - 1)
        return self.flat_index(k)

    def to_dict(self) -> dict:
        return {"region": self.region.to_dict(), "resolution": list(self.resolution)}


def build_grid(region: Region, resolution) -> Grid:
    if isinstance(resolution, int):
        resolution = (resolution,) * region.dimension
    return Grid(region, tuple(resolution))


def quota_cells(alpha: float, grid: Grid) -> int:
    """Whole cells a center of appetite ``alpha`` may hold: ``round(alpha / cell_mass)``.

    ``INFINITE`` maps to the total cell count; halves round up.
    """
    if alpha is None or math.isnan(alpha) or alpha < 0:
        raise InvalidInputError(f"appetite must be >= 0 or INFINITE, got {alpha}")
    if math.isinf(alpha):
        return grid.n_cells
    return int(math.floor(alpha / grid.cell_mass + 0.5))


def quantization_error(alpha: float, grid: Grid) -> float:
    """``|quota * cell_mass - alpha|``; zero for INFINITE appetite."""
    if math.isinf(alpha):
        return 0.0
    return abs(quota_cells(alpha, grid) * grid.cell_mass - alpha)


def critical_alpha(grid: Grid, n_centers: int) -> float:
    """Appetite giving quota ``n_cells / n_centers`` exactly; requires divisibility."""
    if n_centers < 1 or grid.n_cells % n_centers:
        raise InvalidInputError(f"{n_centers} centers do not divide {grid.n_cells} cells")
    return (grid.n_cells // n_centers) * grid.cell_mass
