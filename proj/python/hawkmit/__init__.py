"""Competing-campaign Hawkes processes with budgeted mitigation policies."""

from hawkmit._core import *  # noqa: F401,F403
from hawkmit._core import __version__  # noqa: F401
