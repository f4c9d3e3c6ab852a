import errno
import functools
import logging
import os
from os import makedirs, path
from time import perf_counter

import numpy as np


ENV_PREFIX = 'GSM_FIELD_'


def as_rng(seed=None):
    """
    Get a random number generator.

    Parameters
    ----------
    seed : int, np.random.Generator or None
        seed for a new generator or an existing generator which is returned unchanged
    """
    return np.random.default_rng(seed)


def symmetrize(matrix):
    """
    Get the symmetric part `(S + S^T) / 2` of a square matrix.

    Parameters
    ----------
    matrix : array_like
        square matrix
    """
    matrix = np.asarray(matrix, dtype=float)
    return 0.5 * (matrix + matrix.T)


def env_default(name, default, type=str):
    """
    Resolve a default value from the environment.

    Parameters
    ----------
    name : str
        name of the option; the variable `GSM_FIELD_<NAME>` is consulted with dashes replaced by underscores
    default : any
        value to use if the variable is not set
    type : callable
        conversion applied to the value of the variable
    """
    key = ENV_PREFIX + name.strip('-').replace('-', '_').upper()
    value = os.environ.get(key)
    if value is None:
        return default
    return type(value)


def mkdir_p(p):
    """
    Create the parent directory of a file if it does not exist.

    Parameters
    ----------
    p : str
        the file whose directory to create
    """
    head, _ = path.split(p)
    if not head:
        return
    try:
        makedirs(head)
    except OSError as exc:
        if exc.errno == errno.EEXIST and path.isdir(head):
            pass
        else:
            raise


class Timer(object):
    """
    Timer object that can be used as a `with` statement.

    Parameters
    ----------
    message : str
        message formatted with the duration in seconds upon exit
    logger : str, logging.Logger or None
        logger to report the duration to or `None` to stay silent
    level : str
        logging level for the report
    """
    def __init__(self, message="duration : {0:.3f} s", logger=None, level='info'):
        self.logger = logger
        self.level = level.lower()
        self.start = self.end = self.duration = None
        self.message = message

    def __enter__(self):
        self.start = perf_counter()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.end = perf_counter()
        self.duration = self.end - self.start

        if self.logger:
            logger = self.logger if isinstance(self.logger, logging.Logger) else logging.getLogger(self.logger)
            getattr(logger, self.level)(self.message.format(self.duration))


class timeit:
    """
    Time the execution of a function and log the results.

    Parameters
    ----------
    logger : str
        name of the logger
    level : str
        logging level for the reporting
    """
    def __init__(self, logger=__name__, level='debug'):
        self.logger = logger
        self.level = level.lower()

    def __call__(self, func):
        @functools.wraps(func)
        def inner(*args, **kwargs):
            with Timer(func.__name__ + " : {0:.3f} s", self.logger, self.level):
                return func(*args, **kwargs)

        return inner
