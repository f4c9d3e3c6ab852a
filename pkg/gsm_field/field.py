"""
Evaluation of distance, gradient and probability fields on planar slices, their CSV files and error metrics.
"""
import logging
from collections import namedtuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from .distance import surface_distance
from .errors import InvalidRange, ParseError, ShapeMismatch
from .oracle import PointCloudOracle, sample_surface, translate_surface
from .probability import DEFAULT_K, UncertainCenter, surface_collision_probability
from .util import mkdir_p, timeit

logger = logging.getLogger(__name__)

DEFAULT_RESOLUTION = 200
ORTHOGONALITY_TOL = 1e-9


class FieldGrid(object):
    """
    Uniform grid of cells on a planar slice.

    Cell `(i, j)` is centered at `origin + s[j] * axis_u + t[i] * axis_v` where `s` and `t` are evenly spaced over
    `[-extent / 2, extent / 2]` along each axis.

    Parameters
    ----------
    origin : array_like
        center of the slice
    axis_u, axis_v : array_like
        orthonormal axes spanning the slice
    extent_u, extent_v : float
        side lengths of the slice (meters)
    res_u, res_v : int
        number of cells along each axis
    """
    def __init__(self, origin, axis_u, axis_v, extent_u, extent_v, res_u=DEFAULT_RESOLUTION,
                 res_v=DEFAULT_RESOLUTION):
        self.origin = np.asarray(origin, dtype=float)
        self.axis_u = np.asarray(axis_u, dtype=float)
        self.axis_v = np.asarray(axis_v, dtype=float)
        if not self.origin.shape == self.axis_u.shape == self.axis_v.shape == (3,):
            raise ParseError("slice origin and axes must be 3-vectors")
        for axis in (self.axis_u, self.axis_v):
            if abs(np.linalg.norm(axis) - 1) > ORTHOGONALITY_TOL:
                raise InvalidRange("slice axes must have unit length but got {}".format(axis))
        if abs(self.axis_u @ self.axis_v) > ORTHOGONALITY_TOL:
            raise InvalidRange("slice axes must be orthogonal")
        if not (extent_u > 0 and extent_v > 0):
            raise InvalidRange("slice extents must be positive")
        if res_u < 1 or res_v < 1:
            raise InvalidRange("slice resolutions must be positive")
        self.extent_u, self.extent_v = float(extent_u), float(extent_v)
        self.res_u, self.res_v = int(res_u), int(res_v)

    @classmethod
    def parse(cls, text):
        """
        Parse a slice of the form `"ox oy oz,ux uy uz,vx vy vz,eu ev,ru rv"`.

        The resolution group may be omitted to use the default resolution.
        """
        groups = [group.split() for group in text.split(',')]
        if len(groups) not in (4, 5):
            raise ParseError("expected 'origin,u,v,extents[,res]' but got '{}'".format(text))
        try:
            origin, axis_u, axis_v, extents = [[float(x) for x in group] for group in groups[:4]]
            res = [int(x) for x in groups[4]] if len(groups) == 5 else [DEFAULT_RESOLUTION] * 2
        except ValueError as ex:
            raise ParseError("invalid slice '{}': {}".format(text, ex))
        if len(extents) != 2 or len(res) != 2:
            raise ParseError("slice extents and resolution need two values each")
        return cls(origin, axis_u, axis_v, extents[0], extents[1], res[0], res[1])

    @property
    def shape(self):
        return self.res_v, self.res_u

    @property
    def offsets(self):
        """
        Offsets `(s, t)` of the cell centers along each axis.
        """
        return (np.linspace(-self.extent_u / 2, self.extent_u / 2, self.res_u),
                np.linspace(-self.extent_v / 2, self.extent_v / 2, self.res_v))

    def points(self):
        """
        Cell centers indexed by `[i, j]` with the spatial dimension last.
        """
        s, t = self.offsets
        return self.origin + s[None, :, None] * self.axis_u + t[:, None, None] * self.axis_v

    def __repr__(self):
        return "FieldGrid(origin={}, extent=({}, {}), res=({}, {}))".format(
            self.origin.tolist(), self.extent_u, self.extent_v, self.res_u, self.res_v)


DistanceField = namedtuple('DistanceField', ['points', 'distance', 'gradient', 'valid'])
DistanceField.__doc__ = """
Distances and unit gradients on a slice; invalid cells have NaN gradients.
"""

ProbabilityField = namedtuple('ProbabilityField', ['points', 'probability', 'degraded'])

MetricsReport = namedtuple('MetricsReport', ['rmse', 'ces', 'cells'])
MetricsReport.__doc__ = """
Error metrics of a predicted field against a reference field.

Attributes
----------
rmse : float
    root mean squared distance error over cells with finite distances in both fields (meters)
ces : float
    cosine error score `sqrt(mean((1 - cos)^2))` of the gradients over cells valid in both fields
cells : int
    number of cells valid in both fields
"""


def _cells(grid, progress):
    points = grid.points()
    cells = np.ndindex(*grid.shape)
    return points, tqdm(cells, total=grid.res_u * grid.res_v, disable=not progress, leave=False)


@timeit(__name__, 'info')
def evaluate_distance_field(robot, model, grid, prune=None, progress=False):
    """
    Evaluate the distance and distance gradient of a robot against a surface model at every cell of a slice.

    Parameters
    ----------
    robot : Ellipsoid
        robot ellipsoid; it is translated to each cell with fixed orientation
    model : SurfaceModel
        surface model
    grid : FieldGrid
        slice to evaluate
    prune : int, optional
        only scan the `prune` components nearest to each cell
    progress : bool
        show a progress bar
    """
    points, cells = _cells(grid, progress)
    distance = np.empty(grid.shape)
    gradient = np.empty(grid.shape + (3,))
    for i, j in cells:
        result = surface_distance(robot.with_center(points[i, j]), model, prune)
        distance[i, j] = result.distance
        gradient[i, j] = result.gradient
    return DistanceField(points, distance, gradient, np.all(np.isfinite(gradient), axis=-1))


@timeit(__name__, 'info')
def evaluate_probability_field(robot, model, grid, variance, k=DEFAULT_K, blend=True, progress=False):
    """
    Evaluate the collision probability of a robot with isotropic center uncertainty at every cell of a slice.

    Parameters
    ----------
    robot : Ellipsoid
        robot ellipsoid
    model : SurfaceModel
        surface model
    grid : FieldGrid
        slice to evaluate
    variance : float
        variance of each coordinate of the robot center (m^2)
    k : int
        number of blended components
    blend : bool
        blend the nearest components or use the closest component only
    progress : bool
        show a progress bar
    """
    if variance < 0:
        raise InvalidRange("the variance must be nonnegative but got {}".format(variance))
    points, cells = _cells(grid, progress)
    probability = np.empty(grid.shape)
    degraded = np.zeros(grid.shape, dtype=bool)
    for i, j in cells:
        result = surface_collision_probability(robot, UncertainCenter.spherical(points[i, j], variance), model, k,
                                               blend)
        probability[i, j] = result.value
        degraded[i, j] = result.degraded
    if degraded.any():
        logger.info("%d of %d cells are degraded", degraded.sum(), degraded.size)
    return ProbabilityField(points, probability, degraded)


@timeit(__name__, 'info')
def evaluate_truth_field(robot, cloud, grid, samples=2000, seed=None, progress=False):
    """
    Evaluate reference distances and normals of a robot against a point cloud at every cell of a slice.

    Parameters
    ----------
    robot : Ellipsoid
        robot ellipsoid
    cloud : np.ndarray
        point cloud
    grid : FieldGrid
        slice to evaluate
    samples : int
        number of boundary samples of the robot
    seed : int, np.random.Generator or None
        random number generator seed for the boundary samples
    progress : bool
        show a progress bar

    Notes
    -----
    Cells at which the robot contains a cloud point are invalid and have distance zero.
    """
    oracle = PointCloudOracle(cloud)
    surface = sample_surface(robot, samples, seed)
    points, cells = _cells(grid, progress)
    distance = np.empty(grid.shape)
    gradient = np.empty(grid.shape + (3,))
    for i, j in cells:
        distance[i, j], gradient[i, j] = oracle.query(translate_surface(surface, points[i, j]))
    valid = distance > 0
    gradient[~valid] = np.nan
    return DistanceField(points, distance, gradient, valid)


def compute_metrics(predicted, truth):
    """
    Compare a predicted distance field with a reference field.

    Parameters
    ----------
    predicted, truth : DistanceField
        fields on the same grid

    Returns
    -------
    report : MetricsReport
        distance and gradient errors
    """
    if predicted.distance.shape != truth.distance.shape:
        raise ShapeMismatch("cannot compare fields of shape {} and {}".format(predicted.distance.shape,
                                                                            truth.distance.shape))
    finite = np.isfinite(predicted.distance) & np.isfinite(truth.distance)
    rmse = np.sqrt(np.mean((predicted.distance[finite] - truth.distance[finite]) ** 2)) if finite.any() else np.nan

    valid = predicted.valid & truth.valid
    a, b = predicted.gradient[valid], truth.gradient[valid]
    if valid.any():
        cos = np.sum(a * b, axis=1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
        ces = np.sqrt(np.mean((1 - cos) ** 2))
    else:
        ces = np.nan
    return MetricsReport(float(rmse), float(ces), int(valid.sum()))


def total_variation(values):
    """
    Sum of absolute differences between consecutive finite values.
    """
    values = np.asarray(values, dtype=float)
    return float(np.sum(np.abs(np.diff(values[np.isfinite(values)]))))


def _index_frame(points):
    i, j = np.indices(points.shape[:2])
    return pd.DataFrame({'i': i.ravel(), 'j': j.ravel()})


def _to_csv(frame, filename):
    mkdir_p(filename)
    frame.to_csv(filename, index=False, na_rep='nan', lineterminator='\n')


def write_distance_field(field, prefix):
    """
    Write `PREFIX.dist.csv` and `PREFIX.grad.csv`.

    Returns
    -------
    filenames : list
        names of the files written
    """
    valid = field.valid.ravel().astype(int)
    dist = _index_frame(field.points)
    for column, values in zip('xyz', field.points.reshape(-1, 3).T):
        dist[column] = values
    dist['distance'] = field.distance.ravel()
    dist['valid'] = valid

    grad = _index_frame(field.points)
    for column, values in zip(['gx', 'gy', 'gz'], field.gradient.reshape(-1, 3).T):
        grad[column] = values
    grad['valid'] = valid

    filenames = [prefix + '.dist.csv', prefix + '.grad.csv']
    _to_csv(dist, filenames[0])
    _to_csv(grad, filenames[1])
    return filenames


def write_probability_field(field, prefix):
    """
    Write `PREFIX.prob.csv`.
    """
    frame = _index_frame(field.points)
    for column, values in zip('xyz', field.points.reshape(-1, 3).T):
        frame[column] = values
    frame['probability'] = field.probability.ravel()
    frame['degraded'] = field.degraded.ravel().astype(int)
    filename = prefix + '.prob.csv'
    _to_csv(frame, filename)
    return filename


def write_polylines(polylines, filename):
    """
    Write isocontour polylines as rows `segment,x,y,z`.
    """
    frames = [pd.DataFrame({'segment': segment, 'x': line[:, 0], 'y': line[:, 1], 'z': line[:, 2]})
              for segment, line in enumerate(polylines)]
    frame = pd.concat(frames) if frames else pd.DataFrame(columns=['segment', 'x', 'y', 'z'])
    _to_csv(frame, filename)
    return filename


def _read_grid_csv(filename, columns):
    try:
        frame = pd.read_csv(filename)
    except pd.errors.ParserError as ex:
        raise ParseError(str(ex), filename)
    except pd.errors.EmptyDataError:
        raise ParseError("empty file", filename)
    missing = set(['i', 'j'] + columns) - set(frame.columns)
    if missing:
        raise ParseError("missing columns {}".format(sorted(missing)), filename)
    if frame.empty:
        raise ParseError("no cells", filename)
    shape = frame['i'].max() + 1, frame['j'].max() + 1
    if len(frame) != shape[0] * shape[1]:
        raise ParseError("expected {} cells but found {}".format(shape[0] * shape[1], len(frame)), filename)
    frame = frame.sort_values(['i', 'j'])
    return shape, {column: frame[column].to_numpy(dtype=float).reshape(shape) for column in columns}


def read_distance_field(prefix):
    """
    Read a distance field written by `write_distance_field`.
    """
    shape, dist = _read_grid_csv(prefix + '.dist.csv', ['x', 'y', 'z', 'distance', 'valid'])
    grad_shape, grad = _read_grid_csv(prefix + '.grad.csv', ['gx', 'gy', 'gz', 'valid'])
    if shape != grad_shape:
        raise ShapeMismatch("distance and gradient files of '{}' have shapes {} and {}".format(
            prefix, shape, grad_shape))
    points = np.stack([dist[column] for column in 'xyz'], axis=-1)
    gradient = np.stack([grad[column] for column in ['gx', 'gy', 'gz']], axis=-1)
    return DistanceField(points, dist['distance'], gradient, (dist['valid'] > 0) & (grad['valid'] > 0))
