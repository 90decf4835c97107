"""Time-series containers shared by the analytic, deterministic and stochastic engines."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .types import PROPAGATION_TOL, DensityMatrix2, StateError


@dataclass
class TimeSeries:
    """Density-matrix elements sampled on a time grid.

    ``times`` is in rescaled units for the mean-field and stochastic engines
    and in physical units for the analytic (raw parameter) engine.
    """

    times: np.ndarray
    rho_LL: np.ndarray
    rho_RR: np.ndarray
    rho_LR: np.ndarray
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.rho_LL = np.asarray(self.rho_LL, dtype=float)
        self.rho_RR = np.asarray(self.rho_RR, dtype=float)
        self.rho_LR = np.asarray(self.rho_LR, dtype=complex)
        n = self.times.shape[0]
        if any(a.shape != (n,) for a in (self.rho_LL, self.rho_RR, self.rho_LR)):
            raise ValueError("all series must share the time grid length")
        if n > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self) -> int:
        return self.times.shape[0]

    @property
    def X(self) -> np.ndarray:
        return 2.0 * self.rho_LR.real

    @property
    def Y(self) -> np.ndarray:
        return 2.0 * self.rho_LR.imag

    @property
    def Z(self) -> np.ndarray:
        return self.rho_RR - self.rho_LL

    @property
    def coherence2(self) -> np.ndarray:
        return np.abs(self.rho_LR) ** 2

    @property
    def purity(self) -> np.ndarray:
        # from the (averaged) density matrix, never per-trajectory
        return self.rho_LL ** 2 + self.rho_RR ** 2 + 2.0 * self.coherence2

    def state(self, i: int) -> DensityMatrix2:
        return DensityMatrix2(float(self.rho_LL[i]), float(self.rho_RR[i]), complex(self.rho_LR[i]))

    def check_valid(self, tol: float = PROPAGATION_TOL) -> None:
        trace_err = np.max(np.abs(self.rho_LL + self.rho_RR - 1.0))
        if trace_err > tol:
            raise StateError(f"trace deviates from 1 by {trace_err:.3e}")
        excess = np.max(self.coherence2 - self.rho_LL * self.rho_RR)
        if excess > tol:
            raise StateError(f"positivity violated by {excess:.3e}")

    def same_grid(self, other: TimeSeries) -> bool:
        return len(self) == len(other) and np.array_equal(self.times, other.times)


@dataclass
class EnsembleResult(TimeSeries):
    """Ensemble-averaged series with Monte-Carlo standard errors.

    ``stderr`` maps observable names (``rho_RR``, ``X``, ``Y``, ``Z``,
    ``purity``, ``coherence2``) to standard-error series.
    """

    stderr: dict[str, np.ndarray] = field(default_factory=dict)
    n_traj: int = 1
    aborted: list[int] = field(default_factory=list)
