import os.path
import re
from typing import Iterable, MutableMapping, Optional


_VALUE_DELIMITER = '='


class PairParseError(ValueError):
    pass


def parse_path(value: str) -> str:
    """ Parser for paths, converts relative paths into real paths. Resolves user paths relative to '~'.

    :param value: input str
    :return: real path str
    """
    return os.path.realpath(os.path.expanduser(value))


def parse_pair(value: str, value_separator: Optional[str] = None, escape: bool = True) -> MutableMapping[str, str]:
    """ Parse a single key-value pair from string input, eg. 'alpha_loc=1e10 cm**-2'.

    :param value: input str
    :param value_separator: character(s) used to separate keys and values, defaults to '='
    :param escape: if True value separator may be escaped by a preceding '\' in input str
    :return: dict
    """
    value_separator = value_separator or _VALUE_DELIMITER

    # Strip spacing and separate
    value = value.strip()

    if escape:
        value_set = re.split(r'(?<!\\)' + re.escape(value_separator), value)
    else:
        value_set = value.split(value_separator)

    if len(value) == 0:
        return {}
    elif len(value_set) == 1:
        raise PairParseError(f"Missing value separator \"{value_separator}\" in pair \"{value}\"")
    elif len(value_set) == 2:
        key = value_set[0].strip()

        if not key:
            raise PairParseError(f"Missing key in pair \"{value}\"")

        return {
            key: value_set[1].strip().replace('\\' + value_separator, value_separator)
        }
    else:
        raise PairParseError(f"Multiple value separator \"{value_separator}\" in pair \"{value}\"")


def parse_pairs(values: Iterable[str], value_separator: Optional[str] = None) -> MutableMapping[str, str]:
    """ Merge several key-value pairs, later pairs take precedence.

    :param values: iterable of input str
    :param value_separator: character(s) used to separate keys and values, defaults to '='
    :return: dict
    """
    pairs: MutableMapping[str, str] = {}

    for value in values:
        pairs.update(parse_pair(value, value_separator))

    return pairs
