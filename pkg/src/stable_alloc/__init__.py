"""Stable allocations of discretized Lebesgue measure to point sets.

Typical use::

    from stable_alloc import Region, build_grid, sample_poisson, allocate_greedy, verify_stability

    region = Region.torus(16, 16)
    grid = build_grid(region, (64, 64))
    centers = sample_poisson(1.0, region, seed=0)
    alloc = allocate_greedy(grid, centers, alpha=0.5)
    assert not verify_stability(alloc)
"""
from ._accel import backend_name
from .allocator import (
    UNCLAIMED,
    Allocation,
    StageState,
    allocate,
    allocate_center_optimal,
    allocate_greedy,
    allocate_site_optimal,
)
from .analysis import (
    demand_diagnostics,
    distance_samples,
    load_within,
    phase_stats,
    tail_trend,
    territory_geometry,
)
from .errors import CentersFormatError, InvalidInputError, UnsupportedDimensionError
from .geometry import Point, Region, distance, region_volume
from .grid import INFINITE, Grid, build_grid, critical_alpha, quota_cells
from .oracle import TinyInstance, oracle_deferred_acceptance, oracle_enumerate
from .render import RenderSpec, render
from .sources import CenterSet, load_centers, sample_lattice, sample_poisson, sample_uniform, save_centers
from .verifier import UnstablePair, compare, validate, verify_stability

__version__ = "0.1.0"
