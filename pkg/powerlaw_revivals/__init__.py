"""Recurrence times of periodically driven power-law potentials.

Closed-form classical periods and quantum revival times from the WKB spectrum
and the Mathieu reduction of an isolated nonlinear resonance, cross-checked by
a grid eigensolver, a split-operator propagator and autocorrelation analysis.
"""

from .const import VERSION
from .exceptions import RevivalsError
from .recurrence import RecurrenceTimes, driven_times, undriven_times
from .resonance import DriveSpec, mathieu_char_value, quasienergy
from .spectrum import PotentialSpec, SpectrumModel, build_spectrum_model, wkb_energy

__version__ = VERSION

__all__ = [
    "DriveSpec",
    "PotentialSpec",
    "RecurrenceTimes",
    "RevivalsError",
    "SpectrumModel",
    "build_spectrum_model",
    "driven_times",
    "mathieu_char_value",
    "quasienergy",
    "undriven_times",
    "wkb_energy",
]
