"""The brute-force oracle against hand-derived answers and against the allocators."""
import numpy as np
import pytest

from stable_alloc import (
    CenterSet,
    InvalidInputError,
    Region,
    TinyInstance,
    allocate_center_optimal,
    allocate_greedy,
    allocate_site_optimal,
    build_grid,
    oracle_deferred_acceptance,
    oracle_enumerate,
)
from stable_alloc.geometry import pairwise_distances
from stable_alloc.oracle import is_stable

ALLOCATORS = (allocate_site_optimal, allocate_center_optimal, allocate_greedy)


def test_ring_instance_by_hand(ring_instance):
    grid, cs = ring_instance
    D = pairwise_distances(grid.cell_centers(), cs.coords, grid.region)
    inst = TinyInstance.uniform_quota(D.tolist(), 4)
    expected = [0, 0, 0, 0, 1, 1, 1, 1]
    assert oracle_deferred_acceptance(inst, "sites") == expected
    assert oracle_deferred_acceptance(inst, "centers") == expected
    assert oracle_enumerate(inst) == [expected]


def test_two_cells_two_centers_hand():
    # cell 0 prefers center 1, center 1 prefers cell 1 -> the unique stable match crosses
    inst = TinyInstance([[2.0, 1.0], [3.0, 0.5]], (1, 1))
    assert oracle_enumerate(inst) == [[0, 1]]


def test_zero_quota_leaves_everything_unclaimed():
    inst = TinyInstance([[1.0], [2.0]], (0,))
    assert oracle_enumerate(inst) == [[-1, -1]]


def test_size_limits():
    with pytest.raises(InvalidInputError):
        TinyInstance([[0.0]] * 17, (1,))


def test_mutual_nearest_pairs_match():
    assert oracle_enumerate(TinyInstance([[1.0, 2.0], [2.0, 1.0]], (1, 1))) == [[0, 1]]
    assert oracle_enumerate(TinyInstance([[2.0, 1.0], [1.0, 2.0]], (1, 1))) == [[1, 0]]


def test_tie_free_detection():
    assert TinyInstance([[1.0, 2.0], [3.0, 4.0]], (1, 1)).is_tie_free()
    assert not TinyInstance([[1.0, 1.0], [3.0, 4.0]], (1, 1)).is_tie_free()


def _random_tiny(rng):
    d = int(rng.integers(1, 3))
    if d == 1:
        res = (int(rng.integers(2, 13)),)
    else:
        res = tuple(int(v) for v in rng.integers(1, 4, size=2))
        if res[0] * res[1] < 2:
            res = (2, 2)
    kind = "torus" if rng.random() < 0.7 else "box"
    if rng.random() < 0.3:
        # half-integer geometry produces exact ties
        side = tuple(float(r) for r in res)
        region = Region(kind, side)
        k = int(rng.integers(1, 5))
        pts = np.unique(rng.integers(0, 2 * np.array(res), size=(k, d)) / 2.0, axis=0)
    else:
        side = tuple(float(v) for v in rng.uniform(0.5, 3.0, size=d))
        region = Region(kind, side)
        k = int(rng.integers(1, 5))
        pts = rng.random((k, d)) * np.array(side)
    grid = build_grid(region, res)
    cs = CenterSet(region, pts)
    alpha = float(rng.choice([0.1, 0.3, 0.5, 1.0, 2.0])) * grid.region.volume / len(cs)
    if rng.random() < 0.1:
        alpha = float("inf")
    return grid, cs, alpha


def test_allocators_inside_oracle_stable_set():
    rng = np.random.default_rng(2024)
    tie_free = 0
    for _ in range(500):
        grid, cs, alpha = _random_tiny(rng)
        assert grid.n_cells <= 12 and len(cs) <= 4
        outs = [f(grid, cs, alpha) for f in ALLOCATORS]
        quota = outs[0].quota
        inst = TinyInstance.uniform_quota(
            pairwise_distances(grid.cell_centers(), cs.coords, grid.region).tolist(), quota
        )
        stable = oracle_enumerate(inst)
        for out in outs:
            assignment = out.assignment.tolist()
            assert is_stable(inst, assignment)
            assert assignment in stable
        if inst.is_tie_free():
            tie_free += 1
            assert len(stable) == 1
            for out in outs:
                assert out.assignment.tolist() == stable[0]
    assert tie_free > 100


def test_deferred_acceptance_matches_enumeration_on_metric_instances():
    rng = np.random.default_rng(5)
    for _ in range(200):
        grid, cs, alpha = _random_tiny(rng)
        q = min(grid.n_cells, int(rng.integers(0, 5)))
        inst = TinyInstance.uniform_quota(
            pairwise_distances(grid.cell_centers(), cs.coords, grid.region).tolist(), q
        )
        stable = oracle_enumerate(inst)
        assert oracle_deferred_acceptance(inst, "sites") in stable
        assert oracle_deferred_acceptance(inst, "centers") in stable
