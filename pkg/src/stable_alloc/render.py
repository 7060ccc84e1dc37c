"""Binary PPM (P6) rendering of two-dimensional allocations."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedDimensionError
from .geometry import paired_distances

FLAT = "flat"
ANNULI = "annuli"


@dataclass(frozen=True)
class RenderSpec:
    """How to draw an allocation.

    ``annulus_width`` defaults to a quarter of the radius of a ball whose
    area equals the effective appetite (or the mean area per center when the
    appetite is infinite).  ``marker_size`` is the half-width of the square
    drawn on each center: a ``(2s-1)``-pixel square for ``s >= 1``; 0 disables markers.
    """

    px_per_unit: float = 16.0
    palette_seed: int = 0
    style: str = FLAT
    unclaimed_color: tuple = (255, 255, 255)
    marker_color: tuple = (0, 0, 0)
    marker_size: int = 1
    annulus_width: float | None = None

    def image_size(self, sides) -> tuple:
        return int(round(sides[0] * self.px_per_unit)), int(round(sides[1] * self.px_per_unit))


def palette(n: int, seed: int) -> np.ndarray:
    """Two colors per territory, shape ``(n, 2, 3)``; the second is a darker shade of the first."""
    rng = np.random.Generator(np.random.PCG64(seed))
    base = rng.integers(70, 236, size=(n, 3))
    dark = (base * 0.6).astype(np.int64)
    return np.stack([base, dark], axis=1).astype(np.uint8)


def _default_width(alloc):
    grid = alloc.grid
    n = max(len(alloc.centers), 1)
    area = grid.region.volume / n if math.isinf(alloc.alpha) else alloc.quota * grid.cell_mass
    return max(math.sqrt(area / math.pi) / 4.0, 1e-12)


def render_pixels(alloc, spec: RenderSpec = RenderSpec()) -> np.ndarray:
    """RGB array of shape ``(height, width, 3)``, top row first (largest second coordinate)."""
    grid = alloc.grid
    if grid.dimension != 2:
        raise UnsupportedDimensionError(f"rendering needs a 2-d region, got dimension {grid.dimension}")
    if spec.style not in (FLAT, ANNULI):
        raise ValueError(f"unknown style {spec.style!r}")
    L0, L1 = grid.region.sides
    width, height = spec.image_size(grid.region.sides)
    xs = (np.arange(width) + 0.5) * (L0 / width)
    ys = L1 - (np.arange(height) + 0.5) * (L1 / height)
    px = np.stack(np.meshgrid(xs, ys, indexing="xy"), axis=-1).reshape(-1, 2)
    owner = alloc.assignment[grid.locate(px)]
    img = np.empty((px.shape[0], 3), dtype=np.uint8)
    img[:] = np.asarray(spec.unclaimed_color, dtype=np.uint8)
    colors = palette(len(alloc.centers), spec.palette_seed)
    claimed = owner >= 0
    shade = np.zeros(px.shape[0], dtype=np.int64)
    if spec.style == ANNULI and claimed.any():
        w = spec.annulus_width or _default_width(alloc)
        d = paired_distances(px[claimed], alloc.centers.coords[owner[claimed]], grid.region)
        shade[claimed] = np.floor(d / w).astype(np.int64) % 2
    img[claimed] = colors[owner[claimed], shade[claimed]]
    img = img.reshape(height, width, 3)
    if spec.marker_size > 0 and len(alloc.centers):
        s = spec.marker_size
        cols = np.floor(alloc.centers.coords[:, 0] / L0 * width).astype(np.int64)
        rows = np.floor((L1 - alloc.centers.coords[:, 1]) / L1 * height).astype(np.int64)
        for r, c in zip(rows.tolist(), cols.tolist()):
            rr = np.arange(r - s + 1, r + s) % height if s > 1 else np.array([min(r, height - 1)])
            cc = np.arange(c - s + 1, c + s) % width if s > 1 else np.array([min(c, width - 1)])
            img[np.ix_(rr, cc)] = np.asarray(spec.marker_color, dtype=np.uint8)
    return img


def encode_ppm(pixels: np.ndarray) -> bytes:
    height, width, _ = pixels.shape
    return f"P6\n{width} {height}\n255\n".encode("ascii") + np.ascontiguousarray(pixels, dtype=np.uint8).tobytes()


def render(alloc, spec: RenderSpec = RenderSpec()) -> bytes:
    """P6 image bytes of ``alloc``."""
    return encode_ppm(render_pixels(alloc, spec))
