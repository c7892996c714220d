"""Verifiable federated learning with fixed-point training proofs."""

from ._zkfl import *  # noqa: F401,F403
from ._zkfl import __doc__  # noqa: F401

__version__ = "0.1.0"
