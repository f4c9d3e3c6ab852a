import functools
import logging
from argparse import ArgumentDefaultsHelpFormatter, ArgumentParser

from tqdm import tqdm

from .errors import GSMError, ParseError
from .util import Timer, env_default


class Pipeline(object):
    """
    Abstract base class for command line tools.

    Individual commands are implemented as instance methods starting with `run_`. A method `init_<command>` receives
    the subparser of the command and declares its arguments using `add_argument`. The parsed arguments are available
    as `self.args` while a command runs.

    Parameters
    ----------
    prog : str, optional
        program name shown in the usage
    library_loggers : tuple
        names of further loggers that report through the handler of the pipeline
    """
    description = None

    def __init__(self, prog=None, library_loggers=()):
        self.args = None
        self.logger = logging.getLogger(self.__class__.__name__)
        self.library_loggers = [logging.getLogger(name) for name in library_loggers]
        self.parser = ArgumentParser(prog, description=self.description,
                                     formatter_class=ArgumentDefaultsHelpFormatter)
        self.parser.add_argument('--verbose', '-v', action='store_true', help="report debugging output")
        self.parser.add_argument('--quiet', '-q', action='store_true', help="only report warnings and errors")
        self.init_argument_parser()

    @property
    def available_commands(self):
        """
        Get the commands supported by the pipeline.
        """
        return {name[4:]: getattr(self, name) for name in dir(self) if name.startswith('run_')}

    def init_argument_parser(self):
        """
        Create a subparser for every command and let `init_<command>` declare its arguments.
        """
        subparsers = self.parser.add_subparsers(dest='command', metavar='command')
        subparsers.required = True
        for name, method in sorted(self.available_commands.items()):
            doc = (method.__doc__ or '').strip().split('\n')[0]
            subparser = subparsers.add_parser(name, help=doc, description=doc,
                                              formatter_class=ArgumentDefaultsHelpFormatter)
            init = getattr(self, 'init_' + name, None)
            if init:
                init(subparser)

    def add_argument(self, parser, name, *args, **kwargs):
        """
        Add an option whose default may be overridden by the environment variable `GSM_FIELD_<NAME>`.
        """
        if kwargs.get('action') not in ('store_true', 'store_false'):
            default = kwargs.get('default')
            try:
                default = env_default(name, default, kwargs.get('type', str))
            except ValueError as ex:
                raise ParseError("invalid environment default for {}: {}".format(name, ex))
            kwargs['default'] = default
            if kwargs.get('required') and default is not None:
                kwargs['required'] = False
        parser.add_argument(name, *args, **kwargs)

    def log(self, level, message, *args, **kwargs):
        message = str(message).format(*args, **kwargs)
        self.logger.log(level, message)

    def info(self, message, *args, **kwargs):
        self.log(logging.INFO, message, *args, **kwargs)

    def warn(self, message, *args, **kwargs):
        self.log(logging.WARNING, message, *args, **kwargs)

    def debug(self, message, *args, **kwargs):
        self.log(logging.DEBUG, message, *args, **kwargs)

    def critical(self, message, *args, **kwargs):
        self.log(logging.CRITICAL, message, *args, **kwargs)

    def parse_args(self, argv=None):
        """
        Parse the command line arguments.

        Parameters
        ----------
        argv : list, optional
            arguments to parse (defaults to `sys.argv[1:]`)
        """
        self.args = self.parser.parse_args(argv)
        return self.args

    def run(self, argv=None):
        """
        Run the command specified by the command line arguments.

        Returns
        -------
        exit_code : int
            zero on success or the exit code of the error that terminated the command
        """
        args = self.parse_args(argv)
        level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter('%(message)s'))
        loggers = [self.logger] + self.library_loggers
        for logger in loggers:
            logger.setLevel(level)
            logger.addHandler(handler)

        try:
            self.info("========== Start    {} ==========", args.command)
            with Timer(logger=None) as timer:
                self.available_commands[args.command]()
            self.info("========== Executed {} in {:.3f} seconds ==========", args.command, timer.duration)
            return 0
        except GSMError as ex:
            self.critical("{}: {}", ex.__class__.__name__, ex)
            return ex.exit_code
        except OSError as ex:
            self.critical("{}: {}", ex.__class__.__name__, ex)
            return ParseError.exit_code
        finally:
            for logger in loggers:
                logger.removeHandler(handler)

    @property
    def progress(self):
        return bool(self.args) and not self.args.quiet

    @functools.wraps(tqdm)
    def tqdm(self, *args, **kwargs):
        if 'disable' not in kwargs:
            kwargs['disable'] = not self.progress
        return tqdm(*args, **kwargs)
