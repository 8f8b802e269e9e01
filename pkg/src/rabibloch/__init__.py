"""Rabi-Bloch oscillations in driven two-level chains: simulation, theory and spectra."""
from .core import (AmplitudeState, ChainParams, GaussianPacket, NumericalFailure, ParameterError,
                   make_initial_state, norm, validate)
from .dynamics import IntegrationSettings, Trajectory, auto_settings, evolve

__version__ = "0.1.0"

__all__ = [
    "AmplitudeState", "ChainParams", "GaussianPacket", "IntegrationSettings",
    "NumericalFailure", "ParameterError", "Trajectory", "auto_settings", "evolve",
    "make_initial_state", "norm", "validate", "__version__",
]
