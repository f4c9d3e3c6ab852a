import numpy as np
import pytest

from gsm_field.geometry import Ellipsoid
from gsm_field.scenes import corner_cloud, wall_cloud
from gsm_field.surface_model import GaussianComponent, SurfaceModel, fit_gmm


def sphere(center, radius=1.0):
    return Ellipsoid.from_axes(center, [radius] * len(center))


def disc_component(weight, mean, axes, level=1.0):
    """
    Component whose `level` isocontour ellipsoid has the given axis-aligned semi-axes.
    """
    return GaussianComponent(weight, np.asarray(mean, dtype=float), np.diag((np.asarray(axes) / level) ** 2))


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture(scope='session')
def wall_points():
    return wall_cloud(4000, 0.01, seed=1)


@pytest.fixture(scope='session')
def wall_model(wall_points):
    return fit_gmm(wall_points, 8, seed=2)


@pytest.fixture(scope='session')
def corner_points():
    return corner_cloud(8000, 0.01, seed=3)


@pytest.fixture(scope='session')
def corner_model(corner_points):
    return fit_gmm(corner_points, 16, seed=4)


@pytest.fixture
def two_sphere_model():
    components = [disc_component(0.5, [0, 0, 0], [0.5] * 3), disc_component(0.5, [3, 0, 0], [0.5] * 3)]
    return SurfaceModel(components, level=1.0)
