from attr import __version__ as __attrs_version
from colorama import __version__ as __colorama_version
from joblib import __version__ as __joblib_version
from numpy import __version__ as __numpy_version
from pint import __version__ as __pint_version
from scipy import __version__ as __scipy_version
from yaml import __version__ as __yaml_version


__all__ = ['versions']

versions = {
    'attrs': __attrs_version,
    'colorama': __colorama_version,
    'joblib': __joblib_version,
    'numpy': __numpy_version,
    'pint': __pint_version,
    'pyyaml': __yaml_version,
    'scipy': __scipy_version
}
