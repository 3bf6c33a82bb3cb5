from timeit import default_timer
from typing import Dict, Optional, Tuple, Type, TypeVar

from collapselib import logging


TMeta = TypeVar('TMeta', bound=type)


class LoggedMeta(type):
    """ Metaclass that creates a logger instance for all derived classes. """

    def __new__(cls: Type[TMeta], name: str, bases: Tuple[Type[object]], classdict: Dict[str, str]) -> TMeta:
        x = type.__new__(cls, name, bases, classdict)

        # Assign class logger
        x._logged_cls = logging.get_logger(name + ':cls')  # type: ignore[attr-defined]
        x._logged_cls.meta('Created', stacklevel=2)  # type: ignore[attr-defined]

        return x


class _LoggedBase(object):
    _logged_cls: logging.ExtendedLogger

    def __init__(self, logger_instance_name: Optional[str] = None):
        """ Base class that contains a logger attached to both the class definition (allowing use in class or static
        methods) and to class instances. An optional string can be appended to the logger name.

        :param logger_instance_name: optional string to append to logger name
        """
        self._logged_obj = logging.get_logger(self.__class__.__name__ + ':' + (logger_instance_name or 'obj'))
        self._logged_obj.meta('Created', stacklevel=2)

    def logger(self) -> logging.ExtendedLogger:
        """ Get reference to the logger attached to this object.

        :return: instance ExtendedLogger
        """
        return self._logged_obj

    @classmethod
    def class_logger(cls) -> logging.ExtendedLogger:
        """ Get reference to the logger attached to the class definition.

        :return: class ExtendedLogger
        """
        return cls._logged_cls

    def timed(self, label: str, level: Optional[int] = None) -> '_Timer':
        """ Context manager logging the wall time taken by a block, used around ensemble and trial runs.

        :param label: description of the timed block
        :param level: log level, defaults to DEBUG
        :return: context manager
        """
        return _Timer(self.logger(), label, level or logging.DEBUG)


class _Timer(object):
    def __init__(self, logger: logging.ExtendedLogger, label: str, level: int):
        self._logger = logger
        self._label = label
        self._level = level
        self._tic = 0.0

    def __enter__(self) -> '_Timer':
        self._tic = default_timer()
        self._logger.log(self._level, f"Start {self._label}", stacklevel=2)

        return self

    def __exit__(self, *_: object) -> None:
        self._logger.log(self._level, f"Complete {self._label} ({default_timer() - self._tic:.6g} sec)",
                         stacklevel=2)


class Logged(_LoggedBase, metaclass=LoggedMeta):
    pass
