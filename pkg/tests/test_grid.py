import math

import numpy as np
import pytest

from stable_alloc import INFINITE, InvalidInputError, Region, build_grid, critical_alpha, quota_cells
from stable_alloc.grid import quantization_error


def test_cell_count_and_mass():
    g = build_grid(Region.torus(2, 3), (4, 6))
    assert g.n_cells == 24
    assert g.cell_mass == pytest.approx(0.25)


def test_cell_centers_row_major():
    g = build_grid(Region.torus(1, 1), (2, 2))
    np.testing.assert_array_equal(g.cell_centers(), [[0.25, 0.25], [0.25, 0.75], [0.75, 0.25], [0.75, 0.75]])


def test_locate_inverts_centers():
    g = build_grid(Region.torus(3, 5, 2), (6, 10, 4))
    idx = np.arange(g.n_cells)
    np.testing.assert_array_equal(g.locate(g.cell_centers()), idx)
    np.testing.assert_array_equal(g.flat_index(g.multi_index(idx)), idx)


def test_scalar_resolution_broadcasts():
    assert build_grid(Region.torus(1, 1, 1), 3).resolution == (3, 3, 3)


@pytest.mark.parametrize("alpha, q", [(0.5, 2), (1.0, 4), (0.375, 2), (0.3, 1), (0.0, 0)])
def test_quota_rounding(alpha, q):
    g = build_grid(Region.torus(1.0), (4,))  # cell mass 0.25
    assert quota_cells(alpha, g) == q


def test_infinite_quota_is_all_cells():
    g = build_grid(Region.torus(2, 2), (8, 8))
    assert quota_cells(INFINITE, g) == 64


def test_quantization_error_bound():
    g = build_grid(Region.torus(1.0), (4,))
    assert quantization_error(0.3, g) == pytest.approx(0.05)
    assert quantization_error(0.3, g) <= g.cell_mass / 2


def test_negative_alpha_rejected():
    with pytest.raises(InvalidInputError):
        quota_cells(-0.1, build_grid(Region.torus(1.0), (4,)))


def test_critical_alpha():
    g = build_grid(Region.torus(4, 4), (16, 16))
    a = critical_alpha(g, 16)
    assert quota_cells(a, g) * 16 == g.n_cells
    with pytest.raises(InvalidInputError):
        critical_alpha(g, 7)


def test_bad_resolution():
    with pytest.raises(InvalidInputError):
        build_grid(Region.torus(1, 1), (4,))
    with pytest.raises(InvalidInputError):
        build_grid(Region.torus(1, 1), (0, 4))


def test_region_roundtrip_dict():
    g = build_grid(Region.box(1.5, 2.0), (3, 4))
    assert Region.from_dict(g.region.to_dict()) == g.region
    assert math.isclose(g.region.volume, 3.0)
