""" Deterministic JSON and CSV report output. Identical reports always serialize to identical bytes. """
import csv
import io
import json
import os.path
import sys
import typing

import numpy as np

from collapselib import logging
from collapselib.numeric.logprob import LogValue


__all__ = ['format_float', 'log_columns', 'dumps_json', 'dumps_csv', 'write']


_logger = logging.get_logger(__name__)

# Enough significant digits to round trip a double
FLOAT_DIGITS = 17


def format_float(x: float) -> str:
    return f"{x:.{FLOAT_DIGITS}g}"


def log_columns(name: str, value: LogValue) -> typing.Dict[str, typing.Any]:
    """ CSV rendering of a log domain quantity as a sign column and a log10 magnitude column. """
    return {
        f"{name}_sign": value.sign,
        f"{name}_log10_mag": '' if value.log10_mag is None else value.log10_mag
    }


def _json_default(x: typing.Any) -> typing.Any:
    if isinstance(x, LogValue):
        return x.to_json()

    if isinstance(x, np.integer):
        return int(x)

    if isinstance(x, np.floating):
        return float(x)

    if isinstance(x, np.ndarray):
        return x.tolist()

    if isinstance(x, np.bool_):
        return bool(x)

    raise TypeError(f"Object of type {type(x).__name__} is not JSON serializable")


def dumps_json(payload: typing.Mapping[str, typing.Any]) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + '\n'


def _csv_cell(x: typing.Any) -> str:
    if isinstance(x, (bool, np.bool_)):
        return 'true' if x else 'false'

    if isinstance(x, (int, np.integer)):
        return str(int(x))

    if isinstance(x, (float, np.floating)):
        return format_float(float(x))

    if x is None:
        return ''

    return str(x)


def dumps_csv(header: typing.Sequence[str], rows: typing.Iterable[typing.Sequence[typing.Any]]) -> str:
    """ Render rows as CSV with a header line, floats with 17 significant digits and '\\n' line endings.

    :param header: column names
    :param rows: iterable of row sequences, each matching the header
    :return: str
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)

    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"Row with {len(row)} cells does not match {len(header)} columns")

        writer.writerow([_csv_cell(x) for x in row])

    return buffer.getvalue()


def write(content: str, path: typing.Optional[str] = None) -> None:
    """ Write a rendered report to a file, or to stdout when no path is given.

    :param content: rendered report
    :param path: output file path
    """
    if path is None:
        sys.stdout.write(content)
        sys.stdout.flush()
        return

    directory = os.path.dirname(path)

    if directory:
        os.makedirs(directory, exist_ok=True)

    with open(path, 'w', encoding='utf-8', newline='') as f:
        f.write(content)

    _logger.info(f"Report written to {path}")
