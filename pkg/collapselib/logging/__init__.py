import logging
import sys
import typing

from collapselib.logging.handlers.console import ColoramaStreamHandler
from collapselib.logging.levels import *


# Loggers that generate lots of messages during numerical runs
_SUPPRESSED_LOGGERS = [
    'joblib'
]


class ExtendedLogger(logging.Logger):
    """ Extended logger class with additional logging levels and simulation context (seed and trial) attached to
    each record. """

    @staticmethod
    def _update_kwargs(in_kwargs: typing.Dict[str, typing.Any], seed: typing.Optional[int],
                       trial: typing.Optional[int], stack_offset: int = 1) -> None:
        if 'extra' not in in_kwargs:
            in_kwargs['extra'] = {}

        in_kwargs['extra'].update({'seed': seed, 'trial': trial})

        if 'stacklevel' in in_kwargs:
            in_kwargs['stacklevel'] += stack_offset
        else:
            in_kwargs['stacklevel'] = 1 + stack_offset

    def log(self, level: int, msg: object, *args: object, seed: typing.Optional[int] = None,
            trial: typing.Optional[int] = None, **kwargs: typing.Any) -> None:
        """ Log 'msg % args' with specified level.

        :param level: log severity level
        :param msg: log message
        :param args: message and additional arguments passed to _log
        :param seed: master seed of the run producing this record, if any
        :param trial: trial or trajectory index producing this record, if any
        :param kwargs: additional keyword arguments passed to _log
        """
        self._update_kwargs(kwargs, seed, trial)
        super().log(level, msg, *args, **kwargs)

    def meta(self, msg: object, *args: object, seed: typing.Optional[int] = None,
             trial: typing.Optional[int] = None, **kwargs: typing.Any) -> None:
        """ Log 'msg % args' with severity 'META'.

        Useful for logging about logging (eg. creation or destruction of logger objects).
        """
        self._update_kwargs(kwargs, seed, trial)
        super().log(META, msg, *args, **kwargs)

    def trace(self, msg: object, *args: object, seed: typing.Optional[int] = None,
              trial: typing.Optional[int] = None, **kwargs: typing.Any) -> None:
        """ Log 'msg % args' with severity 'TRACE'.

        Useful for low-level tracing, more detailed that typical debug messages.
        """
        self._update_kwargs(kwargs, seed, trial)
        super().log(TRACE, msg, *args, **kwargs)

    def event(self, msg: object, *args: object, seed: typing.Optional[int] = None,
              trial: typing.Optional[int] = None, **kwargs: typing.Any) -> None:
        """ Log 'msg % args' with severity 'EVENT'.

        Used for individual stochastic events such as a single localization or the outcome of one counting trial.
        Expect a very large number of these records, they are below DEBUG for that reason.
        """
        self._update_kwargs(kwargs, seed, trial)
        super().log(EVENT, msg, *args, **kwargs)

    def debug(self, msg: object, *args: object, seed: typing.Optional[int] = None,
              trial: typing.Optional[int] = None, **kwargs: typing.Any) -> None:
        self._update_kwargs(kwargs, seed, trial)
        super().debug(msg, *args, **kwargs)

    def info(self, msg: object, *args: object, seed: typing.Optional[int] = None,
             trial: typing.Optional[int] = None, **kwargs: typing.Any) -> None:
        self._update_kwargs(kwargs, seed, trial)
        super().info(msg, *args, **kwargs)

    def warning(self, msg: object, *args: object, seed: typing.Optional[int] = None,
                trial: typing.Optional[int] = None, **kwargs: typing.Any) -> None:
        self._update_kwargs(kwargs, seed, trial)
        super().warning(msg, *args, **kwargs)

    def error(self, msg: object, *args: object, seed: typing.Optional[int] = None,
              trial: typing.Optional[int] = None, **kwargs: typing.Any) -> None:
        self._update_kwargs(kwargs, seed, trial)
        super().error(msg, *args, **kwargs)

    def exception(self, msg: object, *args: object, **kwargs: typing.Any) -> None:
        self._update_kwargs(kwargs, None, None, 2)
        super().exception(msg, *args, **kwargs)

    def critical(self, msg: object, *args: object, seed: typing.Optional[int] = None,
                 trial: typing.Optional[int] = None, **kwargs: typing.Any) -> None:
        self._update_kwargs(kwargs, seed, trial)
        super().critical(msg, *args, **kwargs)


# Replace base logging class with extended version
logging.setLoggerClass(ExtendedLogger)


def get_logger(name: typing.Optional[str] = None) -> ExtendedLogger:
    """ Wrapper for standard getLogger method.

    :param name: name of logger, otherwise root logger is returned
    :return: derived Logger
    """
    logger = logging.getLogger(name)
    logger = typing.cast(ExtendedLogger, logger)

    # Ensure logger is enabled
    logger.disabled = False

    return logger


def basic_logging(filename: typing.Optional[str] = None, suppress_suggested: bool = True,
                  include_process: bool = False, include_source: bool = False, **kwargs: typing.Any) -> None:
    """ Wrapper for standard basic logging that uses a colourised stderr stream by default. Report output is written
    to stdout or files, so console logging never mixes with it.

    :param filename: optional log file, appended to the handlers
    :param suppress_suggested: if True some recommended loggers will be raised to the INFO level to reduce log spam
    :param include_process: include process name, useful when ensembles run in worker processes
    :param include_source: include source file and line
    :param kwargs: keyword arguments passed to logging.basicConfig
    """
    if 'handlers' not in kwargs:
        kwargs['handlers'] = [ColoramaStreamHandler(sys.stderr)]

    if 'format' not in kwargs:
        kwargs['format'] = (
            '%(asctime)s.%(msecs)03d [%(levelname).1s] ' +
            ('%(processName)s ' if include_process else '') +
            '%(name)s' +
            (' [%(filename)s:%(lineno)d]' if include_source else '') +
            ': %(message)s'
        )

    if 'datefmt' not in kwargs:
        kwargs['datefmt'] = '%y%m%d %H:%M:%S'

    if filename is not None:
        # Manually add to handlers list
        kwargs['handlers'].append(logging.FileHandler(filename, encoding='utf-8'))

    if 'level' in kwargs and type(kwargs['level']) is str:
        # Convert string to level number, supports additional levels without modding logging.basicConfig
        kwargs['level'] = NAME_TO_LEVEL[kwargs['level'].upper()]

    kwargs.setdefault('force', True)

    logging.basicConfig(**kwargs)

    if suppress_suggested:
        for logger_name in _SUPPRESSED_LOGGERS:
            logging.getLogger(logger_name).setLevel(INFO)
