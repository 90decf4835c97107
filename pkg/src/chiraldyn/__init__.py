"""Open chiral two-level dynamics: mean-field chiral interactions, continuous
measurement dephasing, stochastic trajectory ensembles and analytic Bloch
solutions."""

__version__ = "0.1.0"

from .analytic import bloch_evolve_analytic, delta_z, evolve_series
from .ensemble import EnsembleConfig, purity_decay_ordering, run_ensemble
from .meanfield import propagate, propagate_mixed, propagate_pure
from .scenarios import PRESETS, Scenario, compare_pure_mixed, preset, run_scenario
from .series import EnsembleResult, TimeSeries
from .stochastic import NoiseStream, run_trajectory
from .types import (
    BlochVector,
    DensityMatrix2,
    InitialState,
    ModelParams,
    RawParams,
    StateAmplitudes,
)

__all__ = [
    "BlochVector", "DensityMatrix2", "EnsembleConfig", "EnsembleResult", "InitialState",
    "ModelParams", "NoiseStream", "PRESETS", "RawParams", "Scenario", "StateAmplitudes",
    "TimeSeries", "bloch_evolve_analytic", "compare_pure_mixed", "delta_z", "evolve_series",
    "preset", "propagate", "propagate_mixed", "propagate_pure", "purity_decay_ordering",
    "run_ensemble", "run_scenario", "run_trajectory",
]
