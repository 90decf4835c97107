"""Closed-form dynamics of the dephasing-only two-level system (v = 0).

The Bloch equations

    dX/dt = -4 gamma X
    dY/dt = -4 gamma Y + 2 omega Z
    dZ/dt = -2 omega Y

decouple into X and a 2x2 linear system for (Y, Z) with matrix
``A = [[-4g, 2w], [-2w, 0]]``.  Writing ``B = A + 2g I`` one has
``B @ B = mu2 I`` with ``mu2 = 4 (g^2 - w^2)``, so

    exp(A t) = exp(-2 g t) [C(t) I + S(t) B],
    C(t) = cosh(mu t),  S(t) = sinh(mu t) / mu.

``C`` and ``S`` are entire functions of ``mu2``; they become cos/sin in
the tunneling-dominant regime (mu2 < 0) and reduce to ``1`` and ``t`` at
the critical point omega = gamma, so one expression covers all regimes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .series import TimeSeries
from .types import BlochVector, InitialState, RawParams, bloch_from_rho

# below this |mu| (and |mu| t) the series form of C, S is used
_SERIES_MU = 1e-6


class Regime(str, Enum):
    TUNNELING_DOMINANT = "tunneling-dominant"
    DEPHASING_DOMINANT = "dephasing-dominant"
    CRITICAL = "critical"


@dataclass(frozen=True)
class AnalyticRegime:
    regime: Regime
    rate: float  # s = 2 sqrt(w^2 - g^2) or s~ = 2 sqrt(g^2 - w^2); 0 at the critical point


def regime(p: RawParams) -> AnalyticRegime:
    mu2 = 4.0 * (p.gamma ** 2 - p.omega ** 2)
    if mu2 == 0.0:
        return AnalyticRegime(Regime.CRITICAL, 0.0)
    if mu2 < 0.0:
        return AnalyticRegime(Regime.TUNNELING_DOMINANT, math.sqrt(-mu2))
    return AnalyticRegime(Regime.DEPHASING_DOMINANT, math.sqrt(mu2))


def _damped_cs(p: RawParams, t):
    """Return ``exp(-2 g t) C(t)`` and ``exp(-2 g t) S(t)`` for scalar or array ``t``."""
    t = np.asarray(t, dtype=float)
    g, w = p.gamma, p.omega
    mu2 = 4.0 * (g * g - w * w)
    mu = math.sqrt(abs(mu2))
    if mu < _SERIES_MU and np.all(mu * t < 1e-3):
        x = mu2 * t * t
        c = 1.0 + x / 2.0 + x * x / 24.0
        s = t * (1.0 + x / 6.0 + x * x / 120.0)
        damp = np.exp(-2.0 * g * t)
        return damp * c, damp * s
    if mu2 < 0.0:
        damp = np.exp(-2.0 * g * t)
        return damp * np.cos(mu * t), damp * np.sin(mu * t) / mu
    # combine the growing branch with the decay so large (g t) cannot overflow
    up = np.exp((mu - 2.0 * g) * t)
    down = np.exp(-(mu + 2.0 * g) * t)
    return 0.5 * (up + down), 0.5 * (up - down) / mu


def bloch_evolve_arrays(b0: BlochVector, p: RawParams, t):
    """Vectorized evolution; returns ``(X, Y, Z)`` arrays shaped like ``t``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be non-negative")
    g, w = p.gamma, p.omega
    dc, ds = _damped_cs(p, t)
    X = b0.X * np.exp(-4.0 * g * t)
    Y = dc * b0.Y + ds * (-2.0 * g * b0.Y + 2.0 * w * b0.Z)
    Z = dc * b0.Z + ds * (-2.0 * w * b0.Y + 2.0 * g * b0.Z)
    return X, Y, Z


def bloch_evolve_analytic(b0: BlochVector, p: RawParams, t: float) -> BlochVector:
    if t < 0:
        raise ValueError(f"time must be non-negative (got {t!r})")
    X, Y, Z = bloch_evolve_arrays(b0, p, t)
    return BlochVector(float(X), float(Y), float(Z))


def delta_z(Y0_pure: float, p: RawParams, t):
    """Population gap ``Z_pure(t) - Z_mixed(t)``.

    The mixed state carries the same initial populations as the pure one
    but no coherence, so the gap evolves from ``(Y, Z) = (Y0, 0)`` and
    ``Delta Z = -2 omega Y0 exp(-2 gamma t) S(t)``.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("time must be non-negative")
    _, ds = _damped_cs(p, t_arr)
    out = -2.0 * p.omega * Y0_pure * ds
    return float(out) if np.ndim(t) == 0 else out


def distinguishability_decay_rate(p: RawParams) -> float:
    """Late-time exponential decay rate of ``|Delta Z|``.

    ``2 gamma`` (envelope) when tunneling dominates, ``2 gamma - s~``
    when dephasing dominates.
    """
    r = regime(p)
    if r.regime is Regime.DEPHASING_DOMINANT:
        return 2.0 * p.gamma - r.rate
    return 2.0 * p.gamma


def purity_rate(b: BlochVector, gamma: float) -> float:
    return -4.0 * gamma * (b.X * b.X + b.Y * b.Y)


def evolve_series(initial: InitialState, p: RawParams, times) -> TimeSeries:
    """Analytic density-matrix series for a pure or mixed initial state."""
    b0 = bloch_from_rho(initial.density_matrix())
    X, Y, Z = bloch_evolve_arrays(b0, p, times)
    return TimeSeries(
        times=np.asarray(times, dtype=float),
        rho_LL=0.5 * (1.0 - Z),
        rho_RR=0.5 * (1.0 + Z),
        rho_LR=0.5 * (X + 1j * Y),
        meta={"engine": "analytic", "omega": p.omega, "gamma": p.gamma, "initial": initial.label},
    )
