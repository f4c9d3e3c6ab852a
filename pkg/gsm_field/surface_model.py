"""
Gaussian mixture surface models: fitting, file input and output, and nearest-neighbour queries over the means.
"""
import logging
from collections import namedtuple

import numpy as np
from scipy import linalg
from scipy.spatial import cKDTree
from scipy.special import logsumexp

from .errors import (DegenerateComponent, DimensionMismatch, EmptyModel, InvalidK, InvalidModel, ParseError,
                     TooFewPoints)
from .geometry import DEFAULT_LEVEL, isocontour_ellipsoid, regularize
from .util import as_rng, mkdir_p, timeit

logger = logging.getLogger(__name__)

COVARIANCE_FLOOR = 1e-6
MIN_WEIGHT = 1e-8
WEIGHT_TOL = 1e-6
MAGIC = 'GSM'


GaussianComponent = namedtuple('GaussianComponent', ['weight', 'mean', 'covariance'])


def log_gaussian(points, mean, covariance):
    """
    Evaluate the log-density of a multivariate Gaussian.

    Parameters
    ----------
    points : np.ndarray
        points with the spatial dimension last
    mean : np.ndarray
        mean of the distribution
    covariance : np.ndarray
        positive-definite covariance of the distribution
    """
    points = np.atleast_2d(points)
    cholesky = linalg.cholesky(covariance, lower=True)
    z = linalg.solve_triangular(cholesky, (points - mean).T, lower=True)
    dim = mean.shape[0]
    return -0.5 * np.sum(z ** 2, axis=0) - np.sum(np.log(np.diag(cholesky))) - 0.5 * dim * np.log(2 * np.pi)


class SurfaceModel(object):
    """
    Gaussian mixture model of a surface whose components are realised as isocontour ellipsoids.

    Parameters
    ----------
    components : list of GaussianComponent
        weighted Gaussian components; the weights must sum to one
    level : float
        isocontour level used to realise the component ellipsoids
    """
    def __init__(self, components, level=DEFAULT_LEVEL):
        self.components = tuple(GaussianComponent(float(weight), np.asarray(mean, dtype=float),
                                                  np.asarray(covariance, dtype=float))
                                for weight, mean, covariance in components)
        self.level = float(level)

        if self.components:
            dims = {component.mean.shape[0] for component in self.components}
            if len(dims) > 1:
                raise DimensionMismatch("components have inconsistent dimensions {}".format(sorted(dims)))
            weights = self.weights
            if np.any(weights <= 0) or np.any(weights > 1) or abs(weights.sum() - 1) > WEIGHT_TOL:
                raise InvalidModel("component weights must lie in (0, 1] and sum to one but sum to {}".format(
                    weights.sum()))

        self.ellipsoids = tuple(isocontour_ellipsoid(component.mean, component.covariance, self.level)
                                for component in self.components)
        if self.components:
            self.means = np.array([component.mean for component in self.components])
            self.index = cKDTree(self.means)
        else:
            self.means = np.empty((0, 3))
            self.index = None

    @property
    def size(self):
        return len(self.components)

    @property
    def dim(self):
        return self.means.shape[1]

    @property
    def weights(self):
        return np.array([component.weight for component in self.components])

    def with_level(self, level):
        """
        Get a copy of the model whose components are realised at a different isocontour level.
        """
        return self.__class__(self.components, level)

    def knn(self, point, k):
        """
        Get the indices of the `k` component means nearest to a point.

        Parameters
        ----------
        point : array_like
            query point
        k : int
            number of neighbours (clamped to the number of components)

        Returns
        -------
        indices : np.ndarray
            component indices in ascending order of Euclidean distance; ties are broken by the lowest index
        """
        if self.size == 0:
            raise EmptyModel("the surface model has no components")
        if k < 1:
            raise InvalidK("the number of neighbours must be positive but got {}".format(k))
        point = np.asarray(point, dtype=float)
        k = min(int(k), self.size)
        distances, _ = self.index.query(point, k=k)
        radius = np.atleast_1d(distances)[-1]
        # Gather every mean tied with the k-th neighbour so that ties resolve by index
        candidates = np.asarray(self.index.query_ball_point(point, radius * (1 + 1e-9) + 1e-12), dtype=int)
        distances = np.linalg.norm(self.means[candidates] - point, axis=1)
        order = np.lexsort((candidates, distances))
        return candidates[order][:k]

    def log_density(self, points):
        """
        Evaluate the log-density of the mixture.

        Parameters
        ----------
        points : array_like
            points with the spatial dimension last
        """
        if self.size == 0:
            raise EmptyModel("the surface model has no components")
        terms = [np.log(component.weight) + log_gaussian(points, component.mean, component.covariance)
                 for component in self.components]
        return logsumexp(terms, axis=0)

    def density(self, points):
        """
        Evaluate the density of the mixture.
        """
        return np.exp(self.log_density(points))

    def __repr__(self):
        return "SurfaceModel(size={}, level={})".format(self.size, self.level)


def knn(model, point, k):
    """
    Get the indices of the `k` component means of `model` nearest to `point` (see `SurfaceModel.knn`).
    """
    return model.knn(point, k)


def kmeans_plusplus(points, n_clusters, seed=None):
    """
    Choose initial cluster centers by k-means++ seeding.

    Parameters
    ----------
    points : np.ndarray
        data points
    n_clusters : int
        number of centers
    seed : int, np.random.Generator or None
        random number generator seed

    Returns
    -------
    indices : np.ndarray
        indices of the points chosen as centers
    """
    rng = as_rng(seed)
    n = len(points)
    indices = [rng.integers(n)]
    sq_distances = np.sum((points - points[indices[0]]) ** 2, axis=1)
    for _ in range(1, n_clusters):
        total = sq_distances.sum()
        if total > 0:
            index = rng.choice(n, p=sq_distances / total)
        else:
            index = rng.choice(np.setdiff1d(np.arange(n), indices))
        indices.append(index)
        sq_distances = np.minimum(sq_distances, np.sum((points - points[index]) ** 2, axis=1))
    return np.asarray(indices)


def _maximization(points, responsibilities, covariance_floor):
    counts = responsibilities.sum(axis=0)
    keep = counts / len(points) >= MIN_WEIGHT
    if not np.all(keep):
        logger.warning("dropping %d degenerate component(s)", np.sum(~keep))
        if not np.any(keep):
            raise DegenerateComponent("all mixture components collapsed")
        responsibilities = responsibilities[:, keep]
        counts = counts[keep]

    weights = counts / counts.sum()
    means = responsibilities.T @ points / counts[:, None]
    covariances = []
    for k in range(len(weights)):
        residuals = points - means[k]
        covariance = (responsibilities[:, k, None] * residuals).T @ residuals / counts[k]
        covariances.append(regularize(covariance, covariance_floor))
    return weights, means, covariances


@timeit(__name__)
def fit_gmm(points, n_components, seed=None, max_iter=200, tol=1e-5, level=DEFAULT_LEVEL,
            covariance_floor=COVARIANCE_FLOOR, callback=None):
    """
    Fit a Gaussian mixture surface model to a point cloud by expectation maximisation.

    Parameters
    ----------
    points : array_like
        point cloud with one point per row
    n_components : int
        number of mixture components
    seed : int, np.random.Generator or None
        random number generator seed for the k-means++ initialisation
    max_iter : int
        maximum number of EM iterations
    tol : float
        stop once the relative change of the log-likelihood falls below `tol`
    level : float
        isocontour level of the returned model
    covariance_floor : float
        smallest admissible covariance eigenvalue (m^2)
    callback : callable, optional
        called as `callback(iteration, log_likelihood)` after every E-step

    Returns
    -------
    model : SurfaceModel
        fitted model
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] not in (2, 3):
        raise DimensionMismatch("points must be an (n, 2) or (n, 3) array but got shape {}".format(points.shape))
    if not np.all(np.isfinite(points)):
        raise ParseError("points must be finite")
    if n_components < 1 or len(points) < n_components:
        raise TooFewPoints("cannot fit {} components to {} points".format(n_components, len(points)))

    # Initialise from hard k-means++ assignments
    centers = points[kmeans_plusplus(points, n_components, seed)]
    labels = np.argmin(np.sum((points[:, None, :] - centers[None]) ** 2, axis=2), axis=1)
    responsibilities = np.zeros((len(points), n_components))
    responsibilities[np.arange(len(points)), labels] = 1
    weights, means, covariances = _maximization(points, responsibilities, covariance_floor)

    previous = None
    for iteration in range(1, max_iter + 1):
        log_prob = np.column_stack([np.log(weight) + log_gaussian(points, mean, covariance)
                                    for weight, mean, covariance in zip(weights, means, covariances)])
        log_norm = logsumexp(log_prob, axis=1)
        log_likelihood = log_norm.sum()
        if callback:
            callback(iteration, log_likelihood)
        if previous is not None and abs(log_likelihood - previous) <= tol * abs(log_likelihood):
            break
        previous = log_likelihood
        if iteration == max_iter:
            logger.warning("EM did not converge within %d iterations", max_iter)
            break
        weights, means, covariances = _maximization(points, np.exp(log_prob - log_norm[:, None]),
                                                    covariance_floor)

    logger.info("fitted %d components in %d iterations with log-likelihood %.6g", len(weights), iteration,
                log_likelihood)
    return SurfaceModel([GaussianComponent(*args) for args in zip(weights, means, covariances)], level)


def _records(fp):
    for number, line in enumerate(fp, 1):
        line = line.split('#', 1)[0].strip()
        if line:
            yield number, line.split()


def load_model(filename, level=None):
    """
    Load a surface model.

    Parameters
    ----------
    filename : str
        path to a model file with header `GSM q M l` followed by `M` records
        `weight mean... covariance-upper-triangle...`
    level : float, optional
        isocontour level overriding the level stored in the file
    """
    with open(filename) as fp:
        records = list(_records(fp))
    if not records:
        raise ParseError("empty model file", filename)

    number, header = records[0]
    if len(header) != 4 or header[0] != MAGIC:
        raise ParseError("expected header '{} q M l'".format(MAGIC), filename, number)
    try:
        dim, size, stored_level = int(header[1]), int(header[2]), float(header[3])
    except ValueError as ex:
        raise ParseError(str(ex), filename, number)
    if dim not in (2, 3) or size < 0:
        raise ParseError("invalid dimension {} or size {}".format(dim, size), filename, number)
    if len(records) - 1 != size:
        raise ParseError("expected {} component records but found {}".format(size, len(records) - 1), filename)

    rows, cols = np.triu_indices(dim)
    width = 1 + dim + len(rows)
    components = []
    for number, tokens in records[1:]:
        if len(tokens) != width:
            raise ParseError("expected {} values but got {}".format(width, len(tokens)), filename, number)
        try:
            values = np.array([float(token) for token in tokens])
        except ValueError as ex:
            raise ParseError(str(ex), filename, number)
        covariance = np.zeros((dim, dim))
        covariance[rows, cols] = values[1 + dim:]
        covariance[cols, rows] = values[1 + dim:]
        components.append(GaussianComponent(values[0], values[1:1 + dim], covariance))

    return SurfaceModel(components, stored_level if level is None else level)


def save_model(model, filename):
    """
    Save a surface model (see `load_model` for the format).
    """
    mkdir_p(filename)
    rows, cols = np.triu_indices(model.dim)
    with open(filename, 'w') as fp:
        fp.write("{} {} {} {!r}\n".format(MAGIC, model.dim, model.size, model.level))
        for component in model.components:
            values = np.concatenate([[component.weight], component.mean, component.covariance[rows, cols]])
            fp.write(" ".join(repr(float(value)) for value in values) + "\n")


def _load_ply(filename):
    with open(filename) as fp:
        lines = fp.readlines()
    if not lines or lines[0].strip() != 'ply':
        raise ParseError("missing 'ply' magic", filename, 1)

    count = None
    properties = []
    element = None
    for number, line in enumerate(lines[1:], 2):
        tokens = line.split()
        if not tokens or tokens[0] in ('comment', 'obj_info'):
            continue
        if tokens[0] == 'format' and tokens[1] != 'ascii':
            raise ParseError("only ascii PLY files are supported", filename, number)
        elif tokens[0] == 'element':
            element = tokens[1]
            if element == 'vertex':
                count = int(tokens[2])
        elif tokens[0] == 'property' and element == 'vertex':
            properties.append(tokens[-1])
        elif tokens[0] == 'end_header':
            start = number
            break
    else:
        raise ParseError("missing 'end_header'", filename)

    if count is None or not {'x', 'y', 'z'} <= set(properties):
        raise ParseError("PLY file has no vertex element with x, y and z properties", filename)
    columns = [properties.index(name) for name in 'xyz']
    points = []
    for number, line in enumerate(lines[start:start + count], start + 1):
        tokens = line.split()
        try:
            points.append([float(tokens[column]) for column in columns])
        except (ValueError, IndexError) as ex:
            raise ParseError(str(ex), filename, number)
    if len(points) != count:
        raise ParseError("expected {} vertices but found {}".format(count, len(points)), filename)
    return np.asarray(points, dtype=float).reshape(-1, 3)


def load_point_cloud(filename):
    """
    Load a point cloud from an ASCII XYZ file (`x y z` per line, '#' comments) or an ASCII PLY file.

    Parameters
    ----------
    filename : str
        path to read from
    """
    if filename.lower().endswith('.ply'):
        points = _load_ply(filename)
    else:
        points = []
        with open(filename) as fp:
            for number, tokens in _records(fp):
                if len(tokens) != 3:
                    raise ParseError("expected 3 coordinates but got {}".format(len(tokens)), filename, number)
                try:
                    points.append([float(token) for token in tokens])
                except ValueError as ex:
                    raise ParseError(str(ex), filename, number)
        points = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(points) == 0:
        raise ParseError("the point cloud is empty", filename)
    return points


def save_point_cloud(points, filename):
    """
    Save a point cloud as an ASCII XYZ file.
    """
    mkdir_p(filename)
    np.savetxt(filename, np.asarray(points), fmt='%.9g', header='x y z')
