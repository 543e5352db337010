"""Photon-counting characterisation of single-mode squeezed vacuum states."""

from ._core import *  # noqa: F401,F403
from ._core import DomainError, EstimationError, UnphysicalError  # noqa: F401

__version__ = "0.1.0"
