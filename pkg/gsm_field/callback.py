"""
Callbacks reporting the progress of iterative fits such as `fit_gmm`.
"""
import logging


class CallbackChain(object):
    """
    Chain together callbacks.
    """
    def __init__(self, *callbacks, **kwargs):
        self.callbacks = callbacks
        if 'return_value' in kwargs:
            self.return_value = kwargs['return_value']

    def __call__(self, *args, **kwargs):
        result = None
        for callback in self.callbacks:
            result = callback(*args, **kwargs)

        return getattr(self, 'return_value', result)


class PeriodicCallback(object):
    """
    Callback that is only executed on every `period`-th call, starting with the first.
    """
    def __init__(self, callback, period=1):
        self.period = period
        self.callback = callback
        self.calls = 0

    def __call__(self, *args, **kwargs):
        if not self.period:
            return
        self.calls += 1
        if (self.calls - 1) % self.period == 0:
            return self.callback(*args, **kwargs)


class LoggingCallback(object):
    """
    Callback that logs the iteration and log-likelihood of a fit.

    Parameters
    ----------
    logger : str or logging.Logger
        logger to report to
    level : str
        logging level
    format : str
        message formatted with the positional arguments of the call
    """
    def __init__(self, logger=None, level='info', format="iteration {0}: log-likelihood {1:.6g}"):
        self.logger = logger if isinstance(logger, logging.Logger) else logging.getLogger(logger)
        self.format = format
        self.level = level.lower()
        if not hasattr(self.logger, self.level):
            raise KeyError(self.level)

    def __call__(self, *args):
        getattr(self.logger, self.level)(self.format.format(*args))


class HistoryCallback(object):
    """
    Callback that records the iterations and log-likelihoods of a fit.
    """
    def __init__(self):
        self.iterations = []
        self.log_likelihoods = []

    def __call__(self, iteration, log_likelihood):
        self.iterations.append(iteration)
        self.log_likelihoods.append(log_likelihood)

    @property
    def final(self):
        """
        Tuple of the last iteration and log-likelihood or `None` if nothing was recorded.
        """
        if not self.iterations:
            return None
        return self.iterations[-1], self.log_likelihoods[-1]
