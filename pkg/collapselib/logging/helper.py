import platform
import sys
import typing

from collapselib import __version__, dependencies, logging


def log_run_context(seed: typing.Optional[int] = None, logger: typing.Optional[logging.ExtendedLogger] = None,
                    level: int = logging.INFO) -> None:
    """ Log everything needed to reproduce a run: arguments, interpreter and dependency versions.

    :param seed: master seed for the run
    :param logger: target logger, defaults to this module's logger
    :param level: log level
    """
    if logger is None:
        logger = logging.get_logger(__name__)

    # Launch arguments
    logger.log(level, f"Launch arguments: {' '.join(sys.argv)}", seed=seed)

    # Platform version
    logger.log(level, f"Interpreter: {sys.executable}")
    logger.log(level, "Version: {}".format(sys.version.replace('\n', ' ')))
    logger.log(level, f"Platform: {platform.python_implementation()} ({platform.machine()})")

    # Library stack
    logger.log(level, f"collapselib {__version__}; " +
               ', '.join(f"{name} {version}" for name, version in sorted(dependencies.versions.items())))
