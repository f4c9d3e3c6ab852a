import logging

import numpy as np
import pytest
from scipy.stats import chi2

from gsm_field import geometry
from gsm_field.errors import DimensionMismatch, InvalidRange, NotPositiveDefinite, NotSymmetric, ParseError
from gsm_field.geometry import Ellipsoid


def test_ellipsoid_validation():
    with pytest.raises(DimensionMismatch):
        Ellipsoid([0, 0, 0, 0], np.eye(4))
    with pytest.raises(DimensionMismatch):
        Ellipsoid([0, 0, 0], np.eye(2))
    with pytest.raises(NotSymmetric):
        Ellipsoid([0, 0], [[1, 0.5], [0, 1]])
    # The asymmetry tolerance is absolute
    with pytest.raises(NotSymmetric):
        Ellipsoid([0, 0], [[1e4, 1e-9], [0, 1e4]])
    Ellipsoid([0, 0], [[1, 5e-11], [0, 1]])
    with pytest.raises(NotPositiveDefinite):
        Ellipsoid([0, 0], [[1, 0], [0, -1]])
    with pytest.raises(InvalidRange):
        Ellipsoid.from_axes([0, 0], [1, 0])


def test_ellipsoid_is_immutable():
    ellipsoid = Ellipsoid([0, 0, 0], np.eye(3))
    with pytest.raises(ValueError):
        ellipsoid.center[0] = 1


def test_from_axes():
    ellipsoid = Ellipsoid.from_axes([1, 2, 3], [1, 2, 3])
    np.testing.assert_allclose(ellipsoid.axes, [3, 2, 1])
    np.testing.assert_allclose(ellipsoid.shape, np.diag([1, 1 / 4, 1 / 9]))
    np.testing.assert_allclose(ellipsoid.cache.inv_sqrt @ ellipsoid.cache.inv_sqrt, ellipsoid.cache.inv, atol=1e-12)


def test_quadratic_form_and_contains():
    ellipsoid = Ellipsoid.from_axes([0, 0, 0], [2, 2, 2])
    assert ellipsoid.quadratic_form([2, 0, 0]) == pytest.approx(1)
    np.testing.assert_array_equal(ellipsoid.contains([[1.9, 0, 0], [2.1, 0, 0]]), [True, False])


def test_symmetric_eigh_sign_convention(rng):
    matrix = rng.normal(size=(3, 3))
    values, vectors = geometry.symmetric_eigh(matrix @ matrix.T)
    assert np.all(np.diff(values) >= 0)
    pivots = np.argmax(np.abs(vectors), axis=0)
    assert np.all(vectors[pivots, np.arange(3)] > 0)


def test_regularize():
    values = np.linalg.eigvalsh(geometry.regularize(np.diag([1.0, 0.0, -1.0]), 1e-3))
    np.testing.assert_allclose(values, [1e-3, 1e-3, 1.0])


def test_isocontour_axes(rng):
    rotation = geometry.haar_rotation(rng)
    covariance = rotation @ np.diag([0.04, 0.01, 0.0025]) @ rotation.T
    for level in [1, 2, 3]:
        ellipsoid = geometry.isocontour_ellipsoid([1, 2, 3], covariance, level)
        np.testing.assert_allclose(ellipsoid.axes, level * np.sqrt([0.04, 0.01, 0.0025]), rtol=1e-9)


@pytest.mark.parametrize('level', [1, 2, 3])
def test_isocontour_coverage(level, rng):
    rotation = geometry.haar_rotation(rng)
    covariance = rotation @ np.diag([0.04, 0.01, 0.0025]) @ rotation.T
    ellipsoid = geometry.isocontour_ellipsoid(np.zeros(3), covariance, level)
    samples = rng.multivariate_normal(np.zeros(3), covariance, size=1000000)
    assert np.mean(ellipsoid.contains(samples)) == pytest.approx(chi2.cdf(level ** 2, 3), abs=0.002)


def test_isocontour_invalid_level():
    with pytest.raises(InvalidRange):
        geometry.isocontour_ellipsoid(np.zeros(3), np.eye(3), 0)


def test_haar_rotation():
    rotations = geometry.haar_rotation(seed=3, size=40000)
    np.testing.assert_allclose(np.linalg.det(rotations), 1)
    np.testing.assert_allclose(rotations[0] @ rotations[0].T, np.eye(3), atol=1e-12)
    # The Haar measure has vanishing mean
    np.testing.assert_allclose(rotations.mean(axis=0), 0, atol=0.02)


def test_random_ellipsoid():
    a = geometry.random_ellipsoid(7)
    b = geometry.random_ellipsoid(7)
    np.testing.assert_array_equal(a.shape, b.shape)
    np.testing.assert_array_equal(a.center, b.center)
    assert np.all((a.axes >= 0.1) & (a.axes <= 0.5))
    assert np.all(np.abs(a.center) <= 10)
    fixed = geometry.random_ellipsoid(7, axis_range=(0.2, 0.2))
    np.testing.assert_allclose(fixed.axes, 0.2)
    with pytest.raises(InvalidRange):
        geometry.random_ellipsoid(7, axis_range=(0.5, 0.1))


def test_robot_ellipsoid():
    robot = geometry.robot_ellipsoid()
    np.testing.assert_allclose(robot.axes, [0.15, 0.15, 0.07])
    np.testing.assert_allclose(np.abs(robot.cache.rotation[:, -1]), [0, 0, 1], atol=1e-12)

    robot = geometry.robot_ellipsoid([0.3, 0.15, 0.07], yaw=45, center=[1, 0, 0])
    direction = np.array([1, 1, 0]) / np.sqrt(2)
    assert robot.quadratic_form([1, 0, 0] + 0.3 * direction) == pytest.approx(1)
    assert robot.quadratic_form([1.3, 0, 0]) > 1


def test_translate_rotate():
    ellipsoid = Ellipsoid.from_axes([1, 0, 0], [0.5, 0.2, 0.1])
    moved = ellipsoid.with_center([0, 0, 5])
    assert moved.cache is ellipsoid.cache
    np.testing.assert_allclose(ellipsoid.translate([1, 1, 1]).center, [2, 1, 1])

    rotation = np.array([[0, -1, 0], [1, 0, 0], [0, 0, 1]], dtype=float)
    rotated = ellipsoid.rotate(rotation)
    np.testing.assert_allclose(rotated.center, [0, 1, 0], atol=1e-12)
    # The long axis now points along y
    assert rotated.quadratic_form([0, 1.5, 0]) == pytest.approx(1)
    with pytest.raises(DimensionMismatch):
        ellipsoid.with_center([0, 0])


def test_ellipsoid_file_round_trip(tmp_path, rng, caplog):
    caplog.set_level(logging.DEBUG, logger='gsm_field.geometry')
    ellipsoids = [geometry.random_ellipsoid(rng) for _ in range(5)] + \
        [Ellipsoid([1, 2], [[2, 0.5], [0.5, 1]])]
    filename = str(tmp_path / 'ellipsoids.txt')
    geometry.save_ellipsoids(ellipsoids, filename)
    loaded = geometry.load_ellipsoids(filename)
    assert len(loaded) == len(ellipsoids)
    assert "loaded 6 ellipsoids" in caplog.text
    for a, b in zip(ellipsoids, loaded):
        np.testing.assert_array_equal(a.center, b.center)
        np.testing.assert_allclose(a.shape, b.shape, rtol=1e-12)


def test_ellipsoid_file_errors(tmp_path):
    filename = tmp_path / 'bad.txt'
    filename.write_text("0 0 0 1 0 0 1 0 1\n1 2 3\n")
    with pytest.raises(ParseError) as info:
        geometry.load_ellipsoids(str(filename))
    assert info.value.line == 2

    filename.write_text("# only a comment\n")
    with pytest.raises(ParseError):
        geometry.load_ellipsoids(str(filename))
