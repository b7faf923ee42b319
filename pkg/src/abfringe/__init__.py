"""Time-dependent Aharonov-Bohm phase and three-crystal interferometer simulator."""

__version__ = "0.1.0"

from .constants import CONSTANTS, PhysicalConstants  # noqa: E402
