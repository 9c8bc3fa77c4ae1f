import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sensejam import UlaGeometry, angle_grid, steering, steering_derivative

angles = st.floats(min_value=-math.pi / 2, max_value=math.pi / 2)


def test_geometry_validation():
    with pytest.raises(ValueError):
        UlaGeometry(0)
    with pytest.raises(ValueError):
        UlaGeometry(4, 0.0)
    assert UlaGeometry(1).n_elements == 1


def test_steering_broadside_is_all_ones():
    a = steering(UlaGeometry(12, 0.5), 0.0)
    assert np.allclose(a, np.ones(12), atol=1e-15)


def test_steering_two_elements_at_30_degrees():
    # exp(j*pi*sin(30deg)) = exp(j*pi/2) = j
    a = steering(UlaGeometry(2, 0.5), math.radians(30.0))
    assert np.allclose(a, [1.0, 1.0j], atol=1e-12)


def test_steering_conjugate_symmetry():
    geom = UlaGeometry(4, 0.5)
    th = math.radians(17.0)
    assert np.allclose(steering(geom, -th), steering(geom, th).conj(), atol=1e-12)


@given(
    n=st.integers(min_value=1, max_value=16),
    spacing=st.floats(min_value=0.05, max_value=2.0),
    theta=angles,
)
def test_steering_unit_modulus(n, spacing, theta):
    a = steering(UlaGeometry(n, spacing), theta)
    assert np.abs(np.abs(a) - 1.0).max() <= 1e-12
    assert a[0] == 1.0


def test_derivative_vanishes_at_endfire():
    geom = UlaGeometry(12, 0.5)
    for th in (math.pi / 2, -math.pi / 2):
        assert np.abs(steering_derivative(geom, th)).max() <= 1e-12


def test_derivative_first_entry_zero():
    geom = UlaGeometry(7, 0.3)
    assert steering_derivative(geom, 0.4)[0] == 0.0


def test_derivative_hand_value_at_broadside():
    d = steering_derivative(UlaGeometry(3, 0.5), 0.0)
    assert np.allclose(d, [0.0, 1j * math.pi, 2j * math.pi], atol=1e-12)


def test_derivative_matches_finite_differences():
    rng = np.random.default_rng(3)
    geom = UlaGeometry(9, 0.5)
    h = 1e-6
    for theta in rng.uniform(-1.4, 1.4, size=100):
        fd = (steering(geom, theta + h) - steering(geom, theta - h)) / (2 * h)
        an = steering_derivative(geom, theta)
        denom = max(float(np.abs(an).max()), 1e-9)
        assert np.abs(fd - an).max() / denom <= 1e-6


def test_grid_baseline_counts():
    grid = angle_grid(
        (-math.pi / 2, math.pi / 2), math.radians(1.0),
        0.0, math.radians(5.0), math.radians(45.0),
    )
    assert len(grid) == 181
    assert grid.mainlobe.size == 11
    assert grid.theta_s == 0.0
    assert math.isclose(grid.theta_d, math.radians(45.0), rel_tol=1e-12)
    assert grid.all_but_target.size == 180


def test_grid_degenerate_mainlobe():
    grid = angle_grid(
        (-math.pi / 2, math.pi / 2), math.radians(1.0),
        0.0, 0.0, math.radians(45.0),
    )
    assert grid.mainlobe.tolist() == [grid.target_index]


def test_grid_partition():
    grid = angle_grid(
        (-math.pi / 2, math.pi / 2), math.radians(1.0),
        math.radians(10.0), math.radians(3.0), math.radians(-20.0),
    )
    union = np.union1d(grid.mainlobe, grid.sidelobe)
    assert union.size == len(grid)
    assert np.intersect1d(grid.mainlobe, grid.sidelobe).size == 0


def test_grid_snaps_off_grid_anchors():
    grid = angle_grid(
        (-math.pi / 2, math.pi / 2), math.radians(1.0),
        math.radians(0.3), math.radians(2.0), math.radians(44.7),
    )
    assert grid.theta_s == 0.0
    assert math.isclose(grid.theta_d, math.radians(45.0), rel_tol=1e-12)


def test_grid_rejects_bad_inputs():
    span = (-math.pi / 2, math.pi / 2)
    with pytest.raises(ValueError):
        angle_grid(span, 2 * math.pi, 0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        angle_grid(span, math.radians(1.0), 2.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        angle_grid(span, -1.0, 0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        angle_grid((0.5, 0.5), math.radians(1.0), 0.5, 0.0, 0.5)
