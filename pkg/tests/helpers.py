"""Instance builders and comparison helpers shared by the test modules."""
import numpy as np

from stable_alloc import CenterSet, Region, build_grid
from stable_alloc.analysis import load_within


def random_instance(rng, d=2, m=12, side=4.0, n_centers=None, kind="torus", ties=False):
    region = Region(kind, (side,) * d)
    grid = build_grid(region, (m,) * d)
    k = n_centers if n_centers is not None else int(rng.integers(2, 9))
    if ties:
        # centers on the cell-corner lattice: many exactly equidistant cells
        step = side / m
        pts = rng.integers(0, m, size=(k, d)) * step
    else:
        pts = rng.random((k, d)) * side
    pts = np.unique(pts, axis=0)
    return grid, CenterSet(region, pts)


def all_radii(*allocs):
    vals = [a.allocation_distances() for a in allocs]
    r = np.unique(np.concatenate(vals))
    return r  # includes inf when any cell is unclaimed


def loads_at(alloc, radii):
    return load_within(alloc, np.append(radii[np.isfinite(radii)], np.inf))


def alpha_for(grid, cs, ratio):
    """Appetite giving ``alpha * intensity == ratio``."""
    return ratio * grid.region.volume / len(cs)


# one line per acceptance criterion, printed again in the terminal summary
ACCEPTANCE_LINES = []


def record(number, title, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}" + (f" -- {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok
