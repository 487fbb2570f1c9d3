"""Kernel-smoothed Brownian flow simulation and level-crossing analytics."""

from .quad import (
    QuadResult,
    StabilityError,
    ConvergenceError,
    integrate_adaptive,
    oscillatory_core,
    hartman_watson_i,
)

__version__ = "0.1.0"
