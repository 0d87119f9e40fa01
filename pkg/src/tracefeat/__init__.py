"""Trace-transform colour image descriptors and supervised domain classification."""
from ._accel import HAVE_NUMBA, default_backend
from .errors import ContractError, DataError

__version__ = "0.1.0"
