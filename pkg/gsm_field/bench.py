"""
Single-threaded timing of ellipsoid initialisation, distance and gradient, and collision probability.
"""
import logging
import platform
from time import perf_counter

import pandas as pd
from tqdm import tqdm

from .distance import pair_distance, unit_gradient
from .errors import InvalidRange, NumericalError
from .geometry import Ellipsoid, random_ellipsoid
from .probability import UncertainCenter, pair_collision_probability
from .util import as_rng

logger = logging.getLogger(__name__)

COLUMNS = ['Init', 'Dist+Grad', 'Coll. Prob.', 'Total']
WARMUP = 100
BENCH_VARIANCE = 0.01


def generate_pairs(n, seed=None):
    """
    Generate the centers and shape matrices of `n` random ellipsoid pairs.

    Returns
    -------
    pairs : list
        tuples `(center1, shape1, center2, shape2)`
    """
    rng = as_rng(seed)
    pairs = []
    for _ in range(n):
        e1, e2 = random_ellipsoid(rng), random_ellipsoid(rng)
        pairs.append((e1.center.copy(), e1.shape.copy(), e2.center.copy(), e2.shape.copy()))
    return pairs


def time_pair(center1, shape1, center2, shape2, variance=BENCH_VARIANCE):
    """
    Time the phases of a single pair query.

    Returns
    -------
    timings : tuple
        initialisation, distance and gradient, and collision probability durations (seconds)

    Raises
    ------
    NumericalError
        if a phase fails; the gradient of a colliding pair is skipped rather than reported as a failure
    """
    uncertain = UncertainCenter.spherical(center1, variance)

    start = perf_counter()
    e1 = Ellipsoid(center1, shape1)
    e2 = Ellipsoid(center2, shape2)
    init = perf_counter()
    solution = pair_distance(e1, e2)
    if not solution.colliding:
        unit_gradient(solution)
    distance = perf_counter()
    pair_collision_probability(e1, uncertain, e2)
    probability = perf_counter()
    return init - start, distance - init, probability - distance


def run_benchmark(n, seed=None, warmup=WARMUP, variance=BENCH_VARIANCE, progress=False):
    """
    Time `n` random pairs after discarding `warmup` untimed queries.

    Pairs whose queries fail are logged and dropped from the table.

    Returns
    -------
    timings : pd.DataFrame
        per-pair durations in microseconds with columns `COLUMNS`, indexed by pair
    """
    if n < 1:
        raise InvalidRange("the number of pairs must be positive but got {}".format(n))
    pairs = generate_pairs(n, seed)
    for i in range(warmup):
        try:
            time_pair(*pairs[i % n], variance=variance)
        except NumericalError:
            pass

    timings = {}
    for index, pair in enumerate(tqdm(pairs, disable=not progress, leave=False)):
        try:
            timings[index] = time_pair(*pair, variance=variance)
        except NumericalError as ex:
            logger.warning("pair %d failed: %s", index, ex)
    failed = n - len(timings)
    if failed:
        logger.warning("dropped %d of %d pairs from the timings", failed, n)
    if not timings:
        raise NumericalError("all {} benchmark pairs failed".format(n))

    frame = pd.DataFrame.from_dict(timings, orient='index', columns=COLUMNS[:3]) * 1e6
    frame['Total'] = frame[COLUMNS[:3]].sum(axis=1)
    return frame


def summarize(timings, device=None):
    """
    Summarize per-pair timings as a single row of `mean ± std` microseconds.
    """
    row = {'Device': device or platform.processor() or platform.machine()}
    for column in COLUMNS:
        row[column] = "{:.1f} ± {:.1f}".format(timings[column].mean(), timings[column].std(ddof=0))
    return pd.DataFrame([row], columns=['Device'] + COLUMNS)
