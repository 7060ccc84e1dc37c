import numpy as np
import pytest

from stable_alloc import (
    CenterSet,
    CentersFormatError,
    InvalidInputError,
    Region,
    load_centers,
    sample_lattice,
    sample_poisson,
    save_centers,
)


def test_zero_intensity_is_empty():
    assert len(sample_poisson(0.0, Region.torus(4, 4), 1)) == 0


def test_negative_intensity_rejected():
    with pytest.raises(InvalidInputError):
        sample_poisson(-1.0, Region.torus(4, 4), 1)


def test_poisson_deterministic():
    r = Region.torus(5, 5)
    assert sample_poisson(1.3, r, 7) == sample_poisson(1.3, r, 7)
    assert sample_poisson(1.3, r, 7) != sample_poisson(1.3, r, 8)


def test_poisson_mean_count():
    # Monte Carlo over 1000 seeds on volume 64; frozen mean 64.13
    region = Region.torus(8, 8)
    counts = [len(sample_poisson(1.0, region, s)) for s in range(1000)]
    assert 62.5 <= np.mean(counts) <= 65.5


def test_poisson_subbox_counts_chi_square():
    region = Region.torus(4, 4)
    tot = np.zeros(16)
    for s in range(200):
        k = np.floor(sample_poisson(1.0, region, s).coords).astype(int)
        np.add.at(tot, k[:, 0] * 4 + k[:, 1], 1)
    chi2 = ((tot - tot.mean()) ** 2 / tot.mean()).sum()
    assert chi2 < 37.7  # 99.9% quantile, 15 degrees of freedom


def test_poisson_points_inside_and_distinct():
    cs = sample_poisson(3.0, Region.box(3, 2, 1), 11)
    assert np.all(cs.coords < cs.region.side_array) and np.all(cs.coords >= 0)
    assert len(np.unique(cs.coords, axis=0)) == len(cs)


def test_lattice_unit_square():
    cs = sample_lattice(Region.torus(1, 1), 0.5)
    np.testing.assert_array_equal(cs.coords, [[0, 0], [0, 0.5], [0.5, 0], [0.5, 0.5]])


def test_lattice_without_jitter_ignores_seed():
    r = Region.torus(2, 2)
    assert sample_lattice(r, 0.5, 0.0, seed=1) == sample_lattice(r, 0.5, 0.0, seed=99)


def test_lattice_collinear():
    cs = sample_lattice(Region.torus(4.0), 1.0)
    assert len(cs) == 4
    assert cs.intensity == 1.0


def test_lattice_jitter_bounds():
    cs = sample_lattice(Region.torus(4, 4), 1.0, 0.2, seed=3)
    offsets = cs.coords - np.round(cs.coords)
    assert np.all(np.abs(offsets) <= 0.2 + 1e-12)


def test_lattice_spacing_must_divide():
    with pytest.raises(InvalidInputError):
        sample_lattice(Region.torus(1, 1), 0.3)
    with pytest.raises(InvalidInputError):
        sample_lattice(Region.torus(1, 1), 0.5, jitter=0.25)


def test_centers_roundtrip(tmp_path):
    cs = sample_poisson(100 / 16, Region.torus(4, 4), 5)
    save_centers(cs, tmp_path / "c.csv")
    back = load_centers(tmp_path / "c.csv", cs.region)
    assert back == cs
    assert back.coords.tobytes() == cs.coords.tobytes()


def test_empty_file_with_header(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("x0,x1\n")
    assert len(load_centers(p, Region.torus(1, 1))) == 0


def test_out_of_region_line_reported(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("x0,x1\n0.1,0.2\n0.3,1.5\n")
    with pytest.raises(CentersFormatError) as err:
        load_centers(p, Region.torus(1, 1))
    assert err.value.line == 3


@pytest.mark.parametrize("body, line", [("0.1\n", 2), ("0.1,abc\n", 2), ("0.1,0.2\n0.1,0.2\n", 3)])
def test_malformed_rows(tmp_path, body, line):
    p = tmp_path / "c.csv"
    p.write_text("x0,x1\n" + body)
    with pytest.raises(CentersFormatError) as err:
        load_centers(p, Region.torus(1, 1))
    assert err.value.line == line


def test_centerset_rejects_duplicates():
    with pytest.raises(InvalidInputError):
        CenterSet(Region.torus(1, 1), [[0.1, 0.1], [0.1, 0.1]])
