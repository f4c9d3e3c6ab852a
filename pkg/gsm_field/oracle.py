"""
Brute-force reference values for distances, normals and collision probabilities based on sampling.
"""
import logging
from collections import namedtuple

import numpy as np
from scipy import linalg
from scipy.spatial import cKDTree

from .distance import pair_collides
from .errors import InvalidRange, TooFewPoints
from .util import as_rng

logger = logging.getLogger(__name__)

NORMAL_NEIGHBOURS = 30


SampledSurface = namedtuple('SampledSurface', ['points', 'ellipsoid', 'count'])
SampledSurface.__doc__ = """
Points on the boundary of an ellipsoid.

Attributes
----------
points : np.ndarray
    boundary points with one point per row
ellipsoid : Ellipsoid
    ellipsoid the points were sampled from
count : int
    number of points
"""


def sample_unit_sphere(n, dim=3, seed=None):
    """
    Draw points uniformly on the unit sphere by normalising Gaussian vectors.
    """
    rng = as_rng(seed)
    x = rng.standard_normal((n, dim))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def sample_surface(ellipsoid, n, seed=None):
    """
    Sample points on the boundary of an ellipsoid.

    Parameters
    ----------
    ellipsoid : Ellipsoid
        ellipsoid to sample
    n : int
        number of points
    seed : int, np.random.Generator or None
        random number generator seed

    Returns
    -------
    surface : SampledSurface
        sampled boundary

    Notes
    -----
    Points on the unit sphere are mapped through `shape^-1/2` so the samples are not uniform with respect to area.
    """
    if n < 1:
        raise InvalidRange("the number of samples must be positive but got {}".format(n))
    u = sample_unit_sphere(n, ellipsoid.dim, seed)
    return SampledSurface(ellipsoid.center + u @ ellipsoid.cache.inv_sqrt, ellipsoid, n)


def translate_surface(surface, center):
    """
    Move a sampled surface together with its ellipsoid to a new center.
    """
    center = np.asarray(center, dtype=float)
    offset = center - surface.ellipsoid.center
    return SampledSurface(surface.points + offset, surface.ellipsoid.with_center(center), surface.count)


def oracle_pair_distance(e1, e2, n=100000, seed=None):
    """
    Approximate the distance between two ellipsoids by the closest pair of boundary samples.

    Parameters
    ----------
    e1, e2 : Ellipsoid
        ellipsoids
    n : int
        number of boundary samples per ellipsoid
    seed : int, np.random.Generator or None
        random number generator seed

    Returns
    -------
    distance : float
        sampled distance or zero if either ellipsoid contains a sample or the center of the other
    """
    rng = as_rng(seed)
    s1 = sample_surface(e1, n, rng)
    s2 = sample_surface(e2, n, rng)
    if e1.contains(e2.center) or e2.contains(e1.center) or np.any(e2.contains(s1.points)) or \
            np.any(e1.contains(s2.points)):
        return 0.0
    distances, _ = cKDTree(s2.points).query(s1.points)
    return float(distances.min())


class PointCloudOracle(object):
    """
    Distance and normal queries against a point cloud.

    Parameters
    ----------
    cloud : np.ndarray
        point cloud with one point per row
    neighbours : int
        number of neighbours used to estimate normals
    """
    def __init__(self, cloud, neighbours=NORMAL_NEIGHBOURS):
        self.cloud = np.asarray(cloud, dtype=float)
        if len(self.cloud) < neighbours:
            raise TooFewPoints("normal estimation requires at least {} points but got {}".format(
                neighbours, len(self.cloud)))
        self.neighbours = neighbours
        self.tree = cKDTree(self.cloud)

    def penetrates(self, ellipsoid):
        """
        Check whether any cloud point lies inside an ellipsoid.
        """
        candidates = self.tree.query_ball_point(ellipsoid.center, np.max(ellipsoid.axes))
        return bool(candidates) and bool(np.any(ellipsoid.contains(self.cloud[candidates])))

    def normal(self, point, toward):
        """
        Estimate the surface normal at a cloud point from the covariance of its neighbours.

        Parameters
        ----------
        point : np.ndarray
            cloud point
        toward : np.ndarray
            the normal is oriented toward this point
        """
        _, indices = self.tree.query(point, k=self.neighbours)
        _, vectors = linalg.eigh(np.cov(self.cloud[indices].T))
        normal = vectors[:, 0]
        if normal @ (toward - point) < 0:
            normal = -normal
        return normal

    def query(self, surface):
        """
        Get the distance between a sampled robot surface and the cloud and the normal at the closest cloud point.

        Parameters
        ----------
        surface : SampledSurface
            sampled robot boundary

        Returns
        -------
        distance : float
            closest sample distance or zero if the robot contains a cloud point
        normal : np.ndarray
            unit normal oriented toward the robot center
        """
        distances, indices = self.tree.query(surface.points)
        best = np.argmin(distances)
        closest = self.cloud[indices[best]]
        normal = self.normal(closest, surface.ellipsoid.center)
        if self.penetrates(surface.ellipsoid):
            return 0.0, normal
        return float(distances[best]), normal


def oracle_cloud_distance_and_normal(robot_samples, cloud):
    """
    Get the distance between a sampled robot surface and a point cloud together with the estimated surface normal.

    See `PointCloudOracle.query` for details.
    """
    return PointCloudOracle(cloud).query(robot_samples)


def sample_centers(center, draws, seed=None):
    """
    Draw samples from the distribution of an uncertain center.

    Parameters
    ----------
    center : UncertainCenter
        distribution to sample from
    draws : int
        number of samples
    seed : int, np.random.Generator or None
        random number generator seed
    """
    rng = as_rng(seed)
    try:
        factor = linalg.cholesky(center.covariance, lower=True)
    except linalg.LinAlgError:
        # Rank-deficient covariances use the symmetric square root
        values, vectors = linalg.eigh(center.covariance)
        factor = vectors * np.sqrt(np.maximum(values, 0))
    return center.mean + rng.standard_normal((draws, center.mean.shape[0])) @ factor.T


def monte_carlo_collision(robot, center, obstacle, draws=100000, seed=None):
    """
    Estimate the collision probability of an ellipsoid with uncertain center by sampling.

    Parameters
    ----------
    robot : Ellipsoid
        robot ellipsoid; only its shape is used
    center : UncertainCenter
        distribution of the robot center
    obstacle : Ellipsoid
        obstacle ellipsoid
    draws : int
        number of samples
    seed : int, np.random.Generator or None
        random number generator seed

    Returns
    -------
    frequency : float
        fraction of sampled centers at which the ellipsoids collide
    standard_error : float
        binomial standard error of the frequency
    """
    if draws < 1:
        raise InvalidRange("the number of draws must be positive but got {}".format(draws))
    hits = sum(pair_collides(robot.with_center(b), obstacle) for b in sample_centers(center, draws, seed))
    frequency = hits / draws
    return frequency, float(np.sqrt(frequency * (1 - frequency) / draws))
