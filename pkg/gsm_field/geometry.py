"""
Solid ellipsoids `{x : (x - c)^T P (x - c) <= 1}` with cached spectral factors.
"""
import logging

import numpy as np
from scipy import linalg
from scipy.spatial.transform import Rotation
from scipy.stats import special_ortho_group

from .errors import DimensionMismatch, InvalidRange, NotPositiveDefinite, NotSymmetric, ParseError
from .util import as_rng, mkdir_p, symmetrize

logger = logging.getLogger(__name__)

# Eigenvalues of shape and covariance matrices at or below this value are rejected
EIGENVALUE_FLOOR = 1e-8
SYMMETRY_TOL = 1e-10
DEFAULT_LEVEL = 3.0
AXIS_RANGE = (0.1, 0.5)
POSITION_RANGE = (-10.0, 10.0)
ROBOT_AXES = (0.15, 0.15, 0.07)
ROBOT_YAW = 45.0


def symmetric_eigh(matrix):
    """
    Eigendecomposition of a symmetric matrix with a deterministic sign convention.

    Parameters
    ----------
    matrix : array_like
        symmetric matrix (symmetrized before the decomposition)

    Returns
    -------
    values : np.ndarray
        eigenvalues in ascending order
    vectors : np.ndarray
        eigenvectors as columns; the largest-magnitude component of each column is positive
    """
    values, vectors = linalg.eigh(symmetrize(matrix))
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1
    return values, vectors * signs


def regularize(matrix, floor=EIGENVALUE_FLOOR):
    """
    Clamp the eigenvalues of a symmetric matrix from below.

    Parameters
    ----------
    matrix : array_like
        symmetric matrix
    floor : float
        smallest admissible eigenvalue
    """
    values, vectors = symmetric_eigh(matrix)
    return symmetrize((vectors * np.maximum(values, floor)) @ vectors.T)


class SpectralCache(object):
    """
    Spectral factors `R diag(values) R^T` of a symmetric positive-definite matrix.

    Matrix powers are evaluated by raising the diagonal entrywise so that no matrix inversion or matrix square root
    is ever required.

    Parameters
    ----------
    rotation : np.ndarray
        orthogonal matrix of eigenvectors (columns)
    eigenvalues : np.ndarray
        positive eigenvalues in ascending order
    """
    __slots__ = ('rotation', 'eigenvalues', 'matrix', 'inv', 'sqrt', 'inv_sqrt')

    def __init__(self, rotation, eigenvalues):
        self.rotation = rotation
        self.eigenvalues = eigenvalues
        self.matrix = self.power(1.0)
        self.inv = self.power(-1.0)
        self.sqrt = self.power(0.5)
        self.inv_sqrt = self.power(-0.5)

    def power(self, exponent):
        """
        Evaluate a real power of the matrix through the eigenbasis.

        Parameters
        ----------
        exponent : float
            exponent applied to the eigenvalues
        """
        return symmetrize((self.rotation * self.eigenvalues ** exponent) @ self.rotation.T)


def _check_spectrum(values, what):
    if values[0] <= EIGENVALUE_FLOOR:
        raise NotPositiveDefinite("{} has eigenvalue {:.3g} at or below the floor {:.0e}".format(
            what, values[0], EIGENVALUE_FLOOR))


class Ellipsoid(object):
    """
    Solid ellipsoid `{x : (x - center)^T shape (x - center) <= 1}`.

    Instances are immutable; the spectral factors of `shape` are computed once on construction.

    Parameters
    ----------
    center : array_like
        center of the ellipsoid (meters)
    shape : array_like
        symmetric positive-definite quadratic-form matrix (1/m^2)
    """
    def __init__(self, center, shape):
        center = np.array(center, dtype=float)
        shape = np.array(shape, dtype=float)
        if center.ndim != 1 or center.shape[0] not in (2, 3):
            raise DimensionMismatch("center must be a vector of dimension 2 or 3 but got shape {}".format(
                center.shape))
        if shape.shape != (center.shape[0],) * 2:
            raise DimensionMismatch("shape must be {0}x{0} but got {1}".format(center.shape[0], shape.shape))
        asymmetry = np.max(np.abs(shape - shape.T))
        if asymmetry > SYMMETRY_TOL:
            raise NotSymmetric("shape is not symmetric (max asymmetry {:.3g})".format(asymmetry))

        shape = symmetrize(shape)
        values, vectors = symmetric_eigh(shape)
        _check_spectrum(values, 'shape')
        self._init(center, shape, SpectralCache(vectors, values))

    def _init(self, center, shape, cache):
        self.center = center
        self.shape = shape
        self.cache = cache
        self.center.setflags(write=False)
        self.shape.setflags(write=False)

    @classmethod
    def from_spectral(cls, center, rotation, eigenvalues):
        """
        Create an ellipsoid from known spectral factors without decomposing the shape again.

        Parameters
        ----------
        center : array_like
            center of the ellipsoid
        rotation : array_like
            orthogonal matrix whose columns are the principal axes
        eigenvalues : array_like
            eigenvalues of the shape matrix matching the columns of `rotation`
        """
        eigenvalues = np.asarray(eigenvalues, dtype=float)
        rotation = np.asarray(rotation, dtype=float)
        order = np.argsort(eigenvalues)
        eigenvalues = eigenvalues[order]
        rotation = rotation[:, order]
        _check_spectrum(eigenvalues, 'shape')
        cache = SpectralCache(rotation, eigenvalues)
        self = cls.__new__(cls)
        self._init(np.array(center, dtype=float), cache.matrix.copy(), cache)
        return self

    @classmethod
    def from_axes(cls, center, axes, rotation=None):
        """
        Create an ellipsoid from semi-axis lengths and a rotation.

        Parameters
        ----------
        center : array_like
            center of the ellipsoid
        axes : array_like
            semi-axis lengths (meters)
        rotation : array_like, optional
            orthogonal matrix whose columns are the directions of the semi-axes (default is the identity)
        """
        axes = np.asarray(axes, dtype=float)
        if np.any(axes <= 0):
            raise InvalidRange("semi-axes must be positive but got {}".format(axes))
        rotation = np.eye(len(axes)) if rotation is None else rotation
        return cls.from_spectral(center, rotation, 1.0 / axes ** 2)

    @property
    def dim(self):
        return self.center.shape[0]

    @property
    def axes(self):
        """
        Semi-axis lengths matching the columns of `cache.rotation` (descending).
        """
        return 1.0 / np.sqrt(self.cache.eigenvalues)

    def quadratic_form(self, points):
        """
        Evaluate `(x - center)^T shape (x - center)` for one or more points.

        Parameters
        ----------
        points : array_like
            point or array of points with the spatial dimension last
        """
        delta = np.asarray(points, dtype=float) - self.center
        return np.einsum('...i,ij,...j->...', delta, self.shape, delta)

    def contains(self, points, tol=0.0):
        """
        Check whether points lie inside or on the ellipsoid.

        Parameters
        ----------
        points : array_like
            point or array of points with the spatial dimension last
        tol : float
            tolerance added to the unit level
        """
        return self.quadratic_form(points) <= 1.0 + tol

    def with_center(self, center):
        """
        Get a copy of the ellipsoid moved to a new center (the spectral cache is shared).

        Parameters
        ----------
        center : array_like
            new center
        """
        center = np.array(center, dtype=float)
        if center.shape != self.center.shape:
            raise DimensionMismatch("expected a center of shape {} but got {}".format(self.center.shape,
                                                                                      center.shape))
        other = self.__class__.__new__(self.__class__)
        other._init(center, self.shape, self.cache)
        return other

    def translate(self, offset):
        """
        Get a copy of the ellipsoid translated by `offset`.
        """
        return self.with_center(self.center + np.asarray(offset, dtype=float))

    def rotate(self, rotation):
        """
        Get a copy of the ellipsoid rotated about the origin (both the center and the principal axes rotate).

        Parameters
        ----------
        rotation : array_like
            orthogonal matrix
        """
        rotation = np.asarray(rotation, dtype=float)
        return self.from_spectral(rotation @ self.center, rotation @ self.cache.rotation, self.cache.eigenvalues)

    def __repr__(self):
        return "Ellipsoid(center={}, axes={})".format(np.array2string(self.center, precision=4),
                                                      np.array2string(self.axes, precision=4))


def make_ellipsoid(center, shape):
    """
    Create an ellipsoid from its center and quadratic-form matrix.

    See `Ellipsoid` for details.
    """
    return Ellipsoid(center, shape)


def isocontour_ellipsoid(mean, covariance, level=DEFAULT_LEVEL):
    """
    Get the solid ellipsoid bounded by the `level`-th isocontour of a Gaussian density.

    Parameters
    ----------
    mean : array_like
        mean of the Gaussian
    covariance : array_like
        symmetric positive-definite covariance (m^2)
    level : float
        Mahalanobis radius `l` of the isocontour; the ellipsoid has shape `covariance^-1 / l^2`

    Notes
    -----
    The coverage of the `l`-th isocontour is the chi-square CDF with `q` degrees of freedom evaluated at `l^2`,
    e.g. about 97.07% for `l = 3` in three dimensions (the univariate 3-sigma rule gives 99.7%).
    """
    if not level > 0:
        raise InvalidRange("isocontour level must be positive but got {}".format(level))
    mean = np.asarray(mean, dtype=float)
    covariance = np.asarray(covariance, dtype=float)
    if covariance.shape != (mean.shape[0],) * 2:
        raise DimensionMismatch("covariance must be {0}x{0} but got {1}".format(mean.shape[0], covariance.shape))
    values, vectors = symmetric_eigh(covariance)
    _check_spectrum(values, 'covariance')
    return Ellipsoid.from_spectral(mean, vectors, 1.0 / (values * level ** 2))


def haar_rotation(seed=None, dim=3, size=None):
    """
    Draw rotation matrices from the Haar measure on the special orthogonal group.

    Parameters
    ----------
    seed : int, np.random.Generator or None
        random number generator seed
    dim : int
        dimension of the rotations
    size : int, optional
        number of rotations to draw; a single matrix is returned if not given
    """
    rng = as_rng(seed)
    if size is None:
        return special_ortho_group.rvs(dim, random_state=rng)
    return np.reshape(special_ortho_group.rvs(dim, size=size, random_state=rng), (size, dim, dim))


def _check_range(name, interval, positive=False):
    lower, upper = interval
    if lower > upper or (positive and lower <= 0):
        raise InvalidRange("invalid {} [{}, {}]".format(name, lower, upper))


def random_ellipsoid(seed=None, axis_range=AXIS_RANGE, position_range=POSITION_RANGE, dim=3):
    """
    Draw a random ellipsoid with uniform semi-axes, uniform center coordinates and a Haar rotation.

    Parameters
    ----------
    seed : int, np.random.Generator or None
        random number generator seed
    axis_range : (float, float)
        interval for the semi-axis lengths (meters)
    position_range : (float, float)
        interval for each center coordinate (meters)
    dim : int
        spatial dimension
    """
    _check_range('axis range', axis_range, positive=True)
    _check_range('position range', position_range)
    rng = as_rng(seed)
    rotation = haar_rotation(rng, dim)
    axes = rng.uniform(axis_range[0], axis_range[1], dim)
    center = rng.uniform(position_range[0], position_range[1], dim)
    return Ellipsoid.from_axes(center, axes, rotation)


def robot_ellipsoid(axes=ROBOT_AXES, yaw=ROBOT_YAW, pitch=0.0, roll=0.0, center=None):
    """
    Create the robot body ellipsoid.

    Parameters
    ----------
    axes : array_like
        semi-axis lengths along the body x, y and z axes (meters)
    yaw, pitch, roll : float
        intrinsic z-y-x Euler angles (degrees)
    center : array_like, optional
        position of the robot (default is the origin)
    """
    rotation = Rotation.from_euler('ZYX', [yaw, pitch, roll], degrees=True).as_matrix()
    center = np.zeros(3) if center is None else center
    return Ellipsoid.from_axes(center, axes, rotation)


def _triu_size(dim):
    return dim * (dim + 1) // 2


def ellipsoid_record(ellipsoid):
    """
    Get the serialized record `center..., upper-triangular shape (row-major)...` of an ellipsoid.
    """
    rows, cols = np.triu_indices(ellipsoid.dim)
    return np.concatenate([ellipsoid.center, ellipsoid.shape[rows, cols]])


def parse_ellipsoid_record(values):
    """
    Create an ellipsoid from a serialized record (see `ellipsoid_record`).
    """
    values = np.asarray(values, dtype=float)
    for dim in (2, 3):
        if len(values) == dim + _triu_size(dim):
            break
    else:
        raise DimensionMismatch("an ellipsoid record has 5 (2D) or 9 (3D) values but got {}".format(len(values)))
    shape = np.zeros((dim, dim))
    rows, cols = np.triu_indices(dim)
    shape[rows, cols] = values[dim:]
    shape[cols, rows] = values[dim:]
    return Ellipsoid(values[:dim], shape)


def load_ellipsoids(filename):
    """
    Load ellipsoids from a text file with one record per line and '#' comments.

    Parameters
    ----------
    filename : str
        path to read from
    """
    ellipsoids = []
    with open(filename) as fp:
        for number, line in enumerate(fp, 1):
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            try:
                ellipsoids.append(parse_ellipsoid_record([float(token) for token in line.split()]))
            except ValueError as ex:
                raise ParseError(str(ex), filename, number)
    if not ellipsoids:
        raise ParseError("no ellipsoid records", filename)
    logger.debug("loaded %d ellipsoids from %s", len(ellipsoids), filename)
    return ellipsoids


def save_ellipsoids(ellipsoids, filename):
    """
    Save ellipsoids to a text file with one record per line.

    Parameters
    ----------
    ellipsoids : list of Ellipsoid
        ellipsoids to save
    filename : str
        path to write to
    """
    mkdir_p(filename)
    with open(filename, 'w') as fp:
        fp.write("# center... shape upper triangle (row-major)...\n")
        for ellipsoid in ellipsoids:
            fp.write(" ".join(repr(float(value)) for value in ellipsoid_record(ellipsoid)) + "\n")
