"""
Distance, collision check and distance gradient between ellipsoids and against a surface model.

The pair distance is obtained from two eigenvalue problems without explicit matrix inverses or square roots: all
powers of the shape matrices are applied through their cached spectral factors and every linear
system is solved by factorization.
"""
import logging
from collections import namedtuple

import numpy as np
from scipy import linalg

from .errors import CholeskyFailure, EmptyModel, SingularSystem, UndefinedGradient
from .geometry import symmetric_eigh
from .util import symmetrize

logger = logging.getLogger(__name__)

SINGULAR_RTOL = 1e-12
# Relative slack on the collision threshold so that touching ellipsoids count as colliding
TOUCH_RTOL = 1e-9
MIN_GRADIENT_DISTANCE = 1e-9


DistanceSolution = namedtuple('DistanceSolution', ['lam', 'mu', 'alpha', 'd_star', 'distance', 'colliding'])
DistanceSolution.__doc__ = """
Solution of the pair distance problem.

Attributes
----------
lam : float
    minimal eigenvalue of the first eigenvalue problem (negative if the first center lies outside the second
    ellipsoid, NaN if a center lies inside the other ellipsoid)
mu : float
    minimal eigenvalue of the second eigenvalue problem (NaN when colliding)
alpha : np.ndarray
    solution of the lambda-shifted linear system (NaN when colliding)
d_star : np.ndarray
    vector from the closest point of the second ellipsoid to the closest point of the first (NaN when colliding)
distance : float
    norm of `d_star` or zero when colliding
colliding : bool
    whether the ellipsoids touch or intersect
"""

SurfaceQueryResult = namedtuple('SurfaceQueryResult', ['distance', 'gradient', 'closest', 'd_star', 'colliding',
                                                       'per_component'])
SurfaceQueryResult.__doc__ = """
Distance between an ellipsoid and a surface model.

Attributes
----------
distance : float
    minimum distance over the scanned components
gradient : np.ndarray
    unit vector pointing from the closest component toward the robot (NaN when undefined)
closest : int
    index of the closest component (ties are broken by the lowest index)
d_star : np.ndarray
    distance vector of the closest component
colliding : bool
    whether the robot touches or intersects the closest component
per_component : list of (int, float)
    component indices and distances in scan order
"""


def solve(matrix, rhs):
    """
    Solve a square linear system using a column-pivoted QR decomposition.

    Parameters
    ----------
    matrix : np.ndarray
        square coefficient matrix
    rhs : np.ndarray
        right-hand side

    Raises
    ------
    SingularSystem
        if a diagonal entry of the triangular factor is below `SINGULAR_RTOL` times the max-norm of `matrix`
    """
    q, r, permutation = linalg.qr(matrix, pivoting=True)
    scale = np.max(np.abs(matrix))
    if scale == 0 or np.min(np.abs(np.diag(r))) <= SINGULAR_RTOL * scale:
        raise SingularSystem("linear system is singular to working precision")
    solution = np.empty(matrix.shape[1])
    solution[permutation] = linalg.solve_triangular(r, q.T @ rhs)
    return solution


def minimal_eigenvalue(matrix):
    """
    Get the lowest real part among the (possibly complex) eigenvalues of a real matrix.

    Parameters
    ----------
    matrix : np.ndarray
        real square matrix

    Notes
    -----
    The eigenvalues are read off the real Schur form, whose 2x2 diagonal blocks hold complex conjugate pairs with
    real part equal to half the trace of the block.
    """
    schur_form, _ = linalg.schur(matrix, output='real')
    n = schur_form.shape[0]
    result = np.inf
    i = 0
    while i < n:
        if i + 1 < n and schur_form[i + 1, i] != 0:
            result = min(result, 0.5 * (schur_form[i, i] + schur_form[i + 1, i + 1]))
            i += 2
        else:
            result = min(result, schur_form[i, i])
            i += 1
    return result


def _centers_inside(e1, e2):
    return bool(e2.contains(e1.center) or e1.contains(e2.center))


def _shifted_terms(e1, e2):
    """
    Evaluate the offset `c - b`, the matrix `B^1/2 C^-1 B^1/2` and the minimal eigenvalue `lambda`.
    """
    b, c = e1.cache, e2.cache
    offset = e2.center - e1.center
    q_values, q_vectors = symmetric_eigh(b.inv_sqrt @ e2.shape @ b.inv_sqrt)
    c_tilde = solve(b.inv_sqrt @ (q_vectors * np.sqrt(q_values)) @ q_vectors.T, offset)
    c_matrix = symmetrize(b.sqrt @ c.inv @ b.sqrt)
    eye = np.eye(e1.dim)
    m1 = np.block([[c_matrix, -eye], [-np.outer(c_tilde, c_tilde), c_matrix]])
    return offset, c_matrix, minimal_eigenvalue(m1)


def shifted_cholesky(c_matrix, lam):
    """
    Cholesky factor of `A = (lambda I - C~)^2`.

    Raises
    ------
    CholeskyFailure
        if `A` is not positive definite to working precision
    """
    shifted = lam * np.eye(c_matrix.shape[0]) - c_matrix
    try:
        return linalg.cho_factor(symmetrize(shifted @ shifted), lower=True)
    except linalg.LinAlgError as ex:
        raise CholeskyFailure("shifted matrix is not positive definite for lambda = {:.6g}: {}".format(lam, ex))


def _collision_form(e1, offset, factor):
    """
    Evaluate `y^T B^1/2 A^-1 B^1/2 y` given the Cholesky factor of `A`.
    """
    z = linalg.solve_triangular(factor[0], e1.cache.sqrt @ offset, lower=True)
    return z @ z


def _is_colliding(form, lam):
    if lam >= 0:
        logger.warning("non-negative lambda %g for separated centers; reporting a collision", lam)
        return True
    return form <= (1.0 + TOUCH_RTOL) / lam ** 2


def pair_collides(e1, e2):
    """
    Check whether two ellipsoids touch or intersect.

    Parameters
    ----------
    e1, e2 : Ellipsoid
        ellipsoids to check

    Returns
    -------
    colliding : bool
        `True` if the ellipsoids touch or intersect
    """
    if _centers_inside(e1, e2):
        return True
    offset, c_matrix, lam = _shifted_terms(e1, e2)
    return _is_colliding(_collision_form(e1, offset, shifted_cholesky(c_matrix, lam)), lam)


def _colliding_solution(dim, lam=np.nan):
    nan = np.full(dim, np.nan)
    return DistanceSolution(lam, np.nan, nan, nan, 0.0, True)


def pair_distance(e1, e2):
    """
    Estimate the closest distance between two ellipsoids.

    Parameters
    ----------
    e1 : Ellipsoid
        first ellipsoid `(b, B)`, typically the robot
    e2 : Ellipsoid
        second ellipsoid `(c, C)`, typically a surface component

    Returns
    -------
    solution : DistanceSolution
        distance, distance vector and the intermediate eigenvalues

    Notes
    -----
    The estimate is the distance from the point of `e2` that minimises the quadratic form of `e1` to `e1` itself. It
    is exact if `e1` is a sphere and an upper bound on the distance otherwise.
    """
    if _centers_inside(e1, e2):
        return _colliding_solution(e1.dim)

    b = e1.cache
    offset, c_matrix, lam = _shifted_terms(e1, e2)
    if _is_colliding(_collision_form(e1, offset, shifted_cholesky(c_matrix, lam)), lam):
        return _colliding_solution(e1.dim, lam)

    eye = np.eye(e1.dim)
    alpha = solve(b.inv_sqrt @ (lam * eye - c_matrix) @ b.sqrt, offset)
    b_tilde = -lam * (b.inv_sqrt @ alpha)
    m2 = np.block([[b.inv, -eye], [-np.outer(b_tilde, b_tilde), b.inv]])
    mu = minimal_eigenvalue(m2)
    d_star = solve(mu * eye - b.inv, -mu * lam * alpha)
    return DistanceSolution(lam, mu, alpha, d_star, float(np.linalg.norm(d_star)), False)


def unit_gradient(solution):
    """
    Get the distance gradient approximation `d* / |d*|` of a pair solution.

    Raises
    ------
    UndefinedGradient
        if the ellipsoids collide or are closer than `MIN_GRADIENT_DISTANCE`
    """
    if solution.colliding or solution.distance < MIN_GRADIENT_DISTANCE:
        raise UndefinedGradient("the gradient is undefined at distance {:.3g}".format(solution.distance))
    return solution.d_star / solution.distance


def surface_distance(robot, model, prune=None):
    """
    Get the distance between the robot ellipsoid and the closest component ellipsoid of a surface model.

    Parameters
    ----------
    robot : Ellipsoid
        robot body
    model : SurfaceModel
        surface model
    prune : int, optional
        only scan the `prune` components whose means are nearest to the robot center (default scans all components)

    Returns
    -------
    result : SurfaceQueryResult
        distance, gradient and closest component
    """
    if model.size == 0:
        raise EmptyModel("the surface model has no components")
    if prune is None or prune >= model.size:
        indices = range(model.size)
    else:
        indices = model.knn(robot.center, prune)

    best = None
    per_component = []
    for index in indices:
        try:
            solution = pair_distance(robot, model.ellipsoids[index])
        except SingularSystem:
            logger.warning("singular system for component %d; treating the pair as touching", index)
            solution = _colliding_solution(robot.dim)
        per_component.append((index, solution.distance))
        if best is None or (solution.distance, index) < (best[1].distance, best[0]):
            best = index, solution

    index, solution = best
    try:
        gradient = unit_gradient(solution)
    except UndefinedGradient:
        gradient = np.full(robot.dim, np.nan)
    return SurfaceQueryResult(solution.distance, gradient, index, solution.d_star, solution.colliding,
                              per_component)


def surface_gradient(robot, model, prune=None):
    """
    Get the unit distance gradient of the robot with respect to a surface model.

    The gradient points from the closest surface component toward the robot, i.e. in the direction of increasing
    clearance.

    Raises
    ------
    UndefinedGradient
        if the robot collides with the surface
    """
    result = surface_distance(robot, model, prune)
    if result.colliding or result.distance < MIN_GRADIENT_DISTANCE:
        raise UndefinedGradient("the robot touches component {}".format(result.closest))
    return result.gradient
