"""Simulation of zero-noise extrapolation under time-correlated dephasing."""
from ._kernels import BACKEND, HAVE_NUMBA
from .arma import ArmaModel, NoiseGenerator, periodogram, preset, scale_power, spectrum, stretch_model

__version__ = "0.1.0"
