"""
Upper bounds on the collision probability of an ellipsoid whose center is Gaussian distributed.
"""
import logging
from collections import namedtuple

import numpy as np
from scipy import linalg

from .distance import (MIN_GRADIENT_DISTANCE, _collision_form, _is_colliding, _shifted_terms, pair_distance,
                       shifted_cholesky, surface_distance)
from .errors import (DimensionMismatch, EmptyModel, InvalidK, InvalidRange, NotPositiveDefinite, NotSymmetric,
                     SingularSystem)
from .geometry import SYMMETRY_TOL
from .util import symmetrize

logger = logging.getLogger(__name__)

DEFAULT_K = 9
ETA_START = 0.25
ETA_STEP = 0.5
MAX_ESCALATIONS = 50
PSD_TOL = 1e-12
ALIGNMENT_TOL = 1e-9
# Width of the distance kernel of the blending weights (meters)
BLEND_WIDTH = 0.05


class UncertainCenter(object):
    """
    Gaussian distribution of an ellipsoid center.

    Parameters
    ----------
    mean : array_like
        mean position (meters)
    covariance : array_like
        symmetric positive semi-definite covariance (m^2); zero gives the deterministic limit
    """
    def __init__(self, mean, covariance):
        self.mean = np.array(mean, dtype=float)
        covariance = np.array(covariance, dtype=float)
        if self.mean.ndim != 1 or covariance.shape != (self.mean.shape[0],) * 2:
            raise DimensionMismatch("expected a vector mean and a square covariance but got shapes {} and {}".format(
                self.mean.shape, covariance.shape))
        if np.max(np.abs(covariance - covariance.T)) > SYMMETRY_TOL:
            raise NotSymmetric("covariance is not symmetric")
        self.covariance = symmetrize(covariance)
        smallest = linalg.eigvalsh(self.covariance)[0]
        if smallest < -PSD_TOL * max(1.0, np.max(np.abs(self.covariance))):
            raise NotPositiveDefinite("covariance has negative eigenvalue {:.3g}".format(smallest))

    @classmethod
    def spherical(cls, mean, variance):
        """
        Create a center distribution with isotropic covariance `variance * I`.
        """
        mean = np.asarray(mean, dtype=float)
        return cls(mean, variance * np.eye(mean.shape[0]))

    def __repr__(self):
        return "UncertainCenter(mean={}, covariance={})".format(self.mean.tolist(), self.covariance.tolist())


ProbabilityResult = namedtuple('ProbabilityResult', ['bound', 'expectation', 'variance', 'eta', 'lambda_sq_inv',
                                                     'escalations', 'degraded'])
ProbabilityResult.__doc__ = """
Collision probability bound of an ellipsoid pair.

Attributes
----------
bound : float
    upper bound on the collision probability clamped to [0, 1]
expectation : float
    expectation of the quadratic form `v`
variance : float
    variance of the quadratic form `v`
eta : float
    multiplier of the standard deviation at which the denominator of the bound is positive
lambda_sq_inv : float
    collision threshold `1 / lambda^2` on `v`
escalations : int
    number of times `eta` was increased
degraded : bool
    whether escalation hit its cap and the bound defaulted to one
"""

Contribution = namedtuple('Contribution', ['index', 'weight', 'probability', 'gradient', 'normal'])

BlendedProbability = namedtuple('BlendedProbability', ['value', 'contributions', 'degraded'])
BlendedProbability.__doc__ = """
Collision probability of an ellipsoid against a surface model.

Attributes
----------
value : float
    weighted mean of the component probabilities
contributions : list of Contribution
    index, weight, probability, distance gradient and robot-facing normal of each candidate component
degraded : bool
    whether all weights vanished (occluded region) or a component bound hit the escalation cap
"""


def quadratic_form_moments(a_bar, c, center):
    """
    Evaluate the mean and variance of `v = (c - b)^T A (c - b)` for Gaussian `b`.

    Parameters
    ----------
    a_bar : np.ndarray
        symmetric positive-definite matrix `A`
    c : np.ndarray
        fixed point
    center : UncertainCenter
        distribution of `b`

    Returns
    -------
    expectation : float
        `tr(A S) + y^T A y` with `y = c - mean` and `S` the covariance
    variance : float
        `2 tr((A S)^2) + 4 y^T A S A y`
    """
    a_bar = np.asarray(a_bar, dtype=float)
    c = np.asarray(c, dtype=float)
    dim = center.mean.shape[0]
    if a_bar.shape != (dim, dim) or c.shape != (dim,):
        raise DimensionMismatch("inconsistent dimensions {}, {} and {}".format(a_bar.shape, c.shape, dim))
    y = c - center.mean
    product = a_bar @ center.covariance
    ay = a_bar @ y
    expectation = np.trace(product) + y @ ay
    variance = 2 * np.trace(product @ product) + 4 * ay @ center.covariance @ ay
    return float(expectation), float(max(variance, 0.0))


def escalate(expectation, variance, lambda_sq_inv):
    """
    Find the smallest `eta` in `0.25, 0.75, 1.25, ...` for which `E[v] + eta sqrt(V[v]) - 1 / lambda^2` is positive.

    Returns
    -------
    bound : float
        probability bound clamped to [0, 1]
    eta : float
        multiplier at which the search stopped
    escalations : int
        number of increments
    degraded : bool
        whether the search hit `MAX_ESCALATIONS`
    """
    std = np.sqrt(variance)
    for escalations in range(MAX_ESCALATIONS + 1):
        eta = ETA_START + ETA_STEP * escalations
        denominator = expectation + eta * std - lambda_sq_inv
        if denominator > 0:
            return float(np.clip(eta * std / denominator, 0, 1)), eta, escalations, False
    logger.warning("eta escalation capped after %d increments; reporting a collision", MAX_ESCALATIONS)
    return 1.0, eta, MAX_ESCALATIONS, True


def pair_collision_probability(robot, center, obstacle):
    """
    Bound the probability that an ellipsoid with uncertain center collides with a fixed ellipsoid.

    Parameters
    ----------
    robot : Ellipsoid
        robot ellipsoid; only its shape is used
    center : UncertainCenter
        distribution of the robot center
    obstacle : Ellipsoid
        obstacle ellipsoid

    Returns
    -------
    result : ProbabilityResult
        bound and the moments it was computed from

    Notes
    -----
    `lambda` and the matrix `B^1/2 A^-1 B^1/2` are evaluated at the mean of the center. A mean configuration that
    already collides has bound one.
    """
    robot = robot.with_center(center.mean)
    if robot.contains(obstacle.center) or obstacle.contains(robot.center):
        return ProbabilityResult(1.0, np.nan, np.nan, ETA_START, np.nan, 0, False)

    offset, c_matrix, lam = _shifted_terms(robot, obstacle)
    factor = shifted_cholesky(c_matrix, lam)
    lambda_sq_inv = 1.0 / lam ** 2
    if _is_colliding(_collision_form(robot, offset, factor), lam):
        return ProbabilityResult(1.0, np.nan, np.nan, ETA_START, lambda_sq_inv, 0, False)

    sqrt = robot.cache.sqrt
    a_bar = symmetrize(sqrt @ linalg.cho_solve(factor, sqrt))
    expectation, variance = quadratic_form_moments(a_bar, obstacle.center, center)
    bound, eta, escalations, degraded = escalate(expectation, variance, lambda_sq_inv)
    return ProbabilityResult(bound, expectation, variance, eta, lambda_sq_inv, escalations, degraded)


def surface_normal(ellipsoid, point):
    """
    Get the direction of the shortest semi-axis of an ellipsoid oriented toward `point`.
    """
    normal = ellipsoid.cache.rotation[:, -1]
    if normal @ (np.asarray(point) - ellipsoid.center) < 0:
        normal = -normal
    return normal


def blend_weights(robot_center, components):
    """
    Evaluate the alignment weights of surface components.

    Parameters
    ----------
    robot_center : array_like
        center of the robot
    components : list of (Ellipsoid, np.ndarray)
        component ellipsoids and the unit distance gradients of the robot with respect to them

    Returns
    -------
    weights : np.ndarray
        `max(0, gradient . normal)` where `normal` is the robot-facing flattest direction of each component;
        alignments below `ALIGNMENT_TOL` vanish
    """
    weights = np.array([float(gradient @ surface_normal(ellipsoid, robot_center))
                        for ellipsoid, gradient in components])
    weights[weights < ALIGNMENT_TOL] = 0.0
    return weights


def distance_kernel(distances, width=BLEND_WIDTH):
    """
    Evaluate the Gaussian kernel `exp(-((d - min d) / width)^2)` of component distances.

    The kernel of the closest candidate is one.
    """
    distances = np.asarray(distances, dtype=float)
    return np.exp(-((distances - distances.min()) / width) ** 2)


def _component_gradient(robot, ellipsoid):
    try:
        solution = pair_distance(robot, ellipsoid)
    except SingularSystem:
        solution = None
    if solution is not None and not solution.colliding and solution.distance >= MIN_GRADIENT_DISTANCE:
        return solution.distance, solution.d_star / solution.distance
    # Colliding components point from their center toward the robot
    direction = robot.center - ellipsoid.center
    norm = np.linalg.norm(direction)
    if norm == 0:
        return 0.0, surface_normal(ellipsoid, robot.center)
    return 0.0, direction / norm


def _single(robot, center, model, index):
    ellipsoid = model.ellipsoids[index]
    _, gradient = _component_gradient(robot, ellipsoid)
    result = pair_collision_probability(robot, center, ellipsoid)
    contribution = Contribution(index, 1.0, result.bound, gradient, surface_normal(ellipsoid, robot.center))
    return BlendedProbability(result.bound, [contribution], result.degraded)


def surface_collision_probability(robot, center, model, k=DEFAULT_K, blend=True, width=BLEND_WIDTH):
    """
    Estimate the collision probability of an ellipsoid with uncertain center against a surface model.

    Parameters
    ----------
    robot : Ellipsoid
        robot ellipsoid; only its shape is used
    center : UncertainCenter
        distribution of the robot center
    model : SurfaceModel
        surface model
    k : int
        number of nearest components to blend (clamped to the model size)
    blend : bool
        blend the `k` nearest components or use the bound of the closest component only
    width : float
        width of the distance kernel of the blending weights (meters)

    Returns
    -------
    result : BlendedProbability
        blended probability and per-component contributions

    Notes
    -----
    The weight of a candidate is its alignment `max(0, gradient . normal)` times the distance kernel relative to
    the closest candidate. A mean configuration that collides with any component has probability one and its
    only contribution is the colliding component with the lowest index.
    """
    if model.size == 0:
        raise EmptyModel("the surface model has no components")
    if k < 1:
        raise InvalidK("the number of blended components must be positive but got {}".format(k))
    if width <= 0:
        raise InvalidRange("the blending width must be positive but got {}".format(width))
    robot = robot.with_center(center.mean)
    query = surface_distance(robot, model)

    if not blend:
        return _single(robot, center, model, query.closest)
    if query.colliding:
        index = query.closest
        ellipsoid = model.ellipsoids[index]
        _, gradient = _component_gradient(robot, ellipsoid)
        contribution = Contribution(index, 1.0, 1.0, gradient, surface_normal(ellipsoid, robot.center))
        return BlendedProbability(1.0, [contribution], False)

    candidates = []
    for index in model.knn(center.mean, k):
        ellipsoid = model.ellipsoids[index]
        distance, gradient = _component_gradient(robot, ellipsoid)
        candidates.append((index, distance, gradient, pair_collision_probability(robot, center, ellipsoid)))

    alignment = blend_weights(robot.center, [(model.ellipsoids[index], gradient)
                                             for index, _, gradient, _ in candidates])
    weights = alignment * distance_kernel([distance for _, distance, _, _ in candidates], width)
    contributions = [Contribution(index, weight, result.bound, gradient,
                                  surface_normal(model.ellipsoids[index], robot.center))
                     for (index, _, gradient, result), weight in zip(candidates, weights)]
    degraded = any(result.degraded for *_, result in candidates)

    total = weights.sum()
    if total > 0:
        value = float(np.dot(weights, [contribution.probability for contribution in contributions]) / total)
        return BlendedProbability(value, contributions, degraded)

    logger.debug("all blending weights vanish at %s; using the closest candidate", center.mean)
    position = min(range(len(candidates)), key=lambda i: (candidates[i][1], i))
    return BlendedProbability(contributions[position].probability, contributions, True)
