"""Speculative decoding engine with relaxed latent-neighbor acceptance."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
