"""
Synthetic point clouds with known geometry.
"""
import numpy as np

from .errors import InvalidRange
from .util import as_rng


def wall_cloud(n=10000, noise=0.01, seed=None, width=4.0, height=2.0):
    """
    Sample a noisy planar wall in the plane `y = 0`.

    Parameters
    ----------
    n : int
        number of points
    noise : float
        standard deviation of the Gaussian noise perpendicular to the wall (meters)
    seed : int, np.random.Generator or None
        random number generator seed
    width : float
        extent along the x-axis, centered on the origin
    height : float
        extent along the z-axis, starting at the origin
    """
    rng = as_rng(seed)
    return np.column_stack([
        rng.uniform(-width / 2, width / 2, n),
        noise * rng.standard_normal(n),
        rng.uniform(0, height, n),
    ])


def wall_normal(position):
    """
    Get the unit normal of the wall facing `position`.
    """
    return np.array([0.0, 1.0 if position[1] >= 0 else -1.0, 0.0])


def corner_cloud(n=10000, noise=0.01, seed=None, size=2.0):
    """
    Sample a noisy inside corner made of the faces `y = 0` and `x = 0` with `0 <= x, y, z <= size`.
    """
    rng = as_rng(seed)
    a = rng.uniform(0, size, n)
    z = rng.uniform(0, size, n)
    offset = noise * rng.standard_normal(n)
    first = np.arange(n) < n // 2
    return np.column_stack([
        np.where(first, a, offset),
        np.where(first, offset, a),
        z,
    ])


def corner_normal(position):
    """
    Get the unit normal of the corner face closest to a position inside the corner.
    """
    if position[1] <= position[0]:
        return np.array([0.0, 1.0, 0.0])
    return np.array([1.0, 0.0, 0.0])


SCENES = {
    'wall': (wall_cloud, wall_normal),
    'corner': (corner_cloud, corner_normal),
}


def make_scene(kind, n=10000, noise=0.01, seed=None):
    """
    Sample a named synthetic scene (`wall` or `corner`).
    """
    if kind not in SCENES:
        raise InvalidRange("unknown scene '{}'; expected one of {}".format(kind, sorted(SCENES)))
    if n < 1 or noise < 0:
        raise InvalidRange("scenes require a positive number of points and nonnegative noise")
    return SCENES[kind][0](n, noise, seed)
