import math

import numpy as np
import pytest

from central_configs import regions
from central_configs.exceptions import DomainError
from central_configs.families import trapezium

PI = math.pi


def test_grid_axis_uses_cell_centers():
    axis = regions.grid_axis(4)
    np.testing.assert_allclose(axis, [PI / 16, 3 * PI / 16, 5 * PI / 16, 7 * PI / 16])


def test_grid_axis_resolution():
    with pytest.raises(DomainError):
        regions.grid_axis(1)


def test_unknown_family():
    with pytest.raises(DomainError, match="no region"):
        regions.allowed_mask("rhombus", 8)


@pytest.mark.slow
def test_convex_kite_area():
    # the admissible polygon covers one sixth of the quadrant
    assert regions.allowed_fraction("kite-convex", 512) == pytest.approx(1 / 6, rel=0.01)


def test_concave_kite_has_two_components():
    mask = regions.allowed_mask("kite-concave", 256)
    assert regions.count_components(mask) == 2


def test_convex_kite_is_connected():
    assert regions.count_components(regions.allowed_mask("kite-convex", 128)) == 1


def test_count_components_of_empty_mask():
    assert regions.count_components(np.zeros((4, 4), dtype=bool)) == 0


def test_grid_rows():
    rows = regions.region_grid("kite-convex", 32)
    assert len(rows) == 32 * 32
    assert all(len(row) == len(regions.GRID_HEADER) for row in rows)
    for alpha, beta, allowed, m1, m4 in rows:
        if allowed:
            assert m1 > 0 and m4 > 0
        else:
            assert m1 is None and m4 is None


def test_grid_alpha_varies_fastest():
    rows = regions.region_grid("kite-concave", 8)
    assert rows[0][1] == rows[1][1]
    assert rows[0][0] < rows[1][0]


def test_trapezium_grid_has_no_ratios():
    rows = regions.region_grid("trapezium", 16)
    assert any(row[2] for row in rows)
    assert all(row[3] is None and row[4] is None for row in rows)


def test_trapezium_curve():
    rows = regions.trapezium_curve(25)
    assert len(rows) == 25
    for alpha, beta, ratio in rows:
        assert trapezium.trapezium_region(alpha, beta)
        assert 0 < ratio < 1
    ratios = [row[2] for row in rows]
    assert np.all(np.diff(ratios) > 0)


def test_trapezium_curve_needs_points():
    with pytest.raises(DomainError):
        regions.trapezium_curve(1)
