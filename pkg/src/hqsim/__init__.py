"""Simulation toolkit for a GaAs hybrid qubit with energy-selective readout."""

from .hq_model import (
    DEFAULT_PARAMS,
    BracketError,
    LevelSet,
    ModelParams,
    build_hamiltonian,
    dispersion_scan,
    find_detuning_for_frequency,
    gate_to_detuning,
    levels,
    qubit_splitting,
    sweet_spot,
)

__version__ = "0.1.0"
