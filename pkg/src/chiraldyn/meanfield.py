"""Deterministic propagation of the mean-field amplitude equations (Gamma = 0)."""

from __future__ import annotations

import logging
import math

import numpy as np

from . import _kernels
from .series import TimeSeries
from .types import (
    InitialState,
    ModelParams,
    NumericalError,
    StateAmplitudes,
    StateError,
)

log = logging.getLogger(__name__)

DT_RANGE = (1e-4, 1e-3)
MAX_NORM_DRIFT = 1e-6
_EMPTY_NOISE = np.zeros(0, dtype=complex)


def default_dt(v: float) -> float:
    """1e-3, refined to 1e-4 close to the self-trapping separatrix (|v| near 4)."""
    return 1e-4 if 3.5 <= abs(v) <= 4.5 else 1e-3


def check_dt(dt: float) -> None:
    lo, hi = DT_RANGE
    if not (lo * (1 - 1e-12) <= dt <= hi * (1 + 1e-12)):
        log.warning("time step %g outside the validated range [%g, %g]", dt, lo, hi)


def step_count(dt: float, t_max: float, stride: int) -> int:
    if not dt > 0 or not t_max > 0:
        raise ValueError("dt and t_max must be positive")
    if stride < 1:
        raise ValueError("output stride must be >= 1")
    n = int(round(t_max / dt))
    if abs(n * dt - t_max) > 1e-9 * max(1.0, t_max):
        raise ValueError(f"t_max={t_max} is not a multiple of dt={dt}")
    if n % stride:
        raise ValueError(f"{n} steps are not a multiple of the output stride {stride}")
    return n


def sample_times(t_max: float, n_out: int) -> np.ndarray:
    # same grid for any (dt, stride) pair with equal t_max and sample count
    return np.linspace(0.0, t_max, n_out)


def drift(s: StateAmplitudes, p: ModelParams) -> tuple[complex, complex]:
    """Deterministic right-hand side ``(da_L/dt, da_R/dt)``, including the Gamma drift."""
    s.check_normalized()
    return _kernels.drift(complex(s.a_L), complex(s.a_R), p.Omega, p.v, p.Gamma)


def _propagate_amplitudes(s0: StateAmplitudes, p: ModelParams, dt: float, n_steps: int, stride: int):
    n_out = n_steps // stride + 1
    out_L = np.empty(n_out, dtype=complex)
    out_R = np.empty(n_out, dtype=complex)
    status, _, max_drift = _kernels.integrate(
        complex(s0.a_L), complex(s0.a_R), p.Omega, p.v, 0.0, dt, n_steps, stride,
        _EMPTY_NOISE, False, out_L, out_R,
    )
    if status != _kernels.OK:
        raise NumericalError(f"norm collapsed at step {status}")
    if max_drift > MAX_NORM_DRIFT:
        raise NumericalError(f"norm drift {max_drift:.3e} exceeds {MAX_NORM_DRIFT:g}; reduce dt")
    return out_L, out_R, max_drift


def propagate_pure(
    s0: StateAmplitudes,
    p: ModelParams,
    dt: float = 1e-3,
    t_max: float = 5.0,
    output_stride: int = 1,
) -> TimeSeries:
    """RK4 propagation of a pure state without decoherence.

    Any ``p.Gamma`` is ignored; decoherent runs go through
    :mod:`chiraldyn.ensemble`.
    """
    s0.check_normalized()
    check_dt(dt)
    n_steps = step_count(dt, t_max, output_stride)
    aL, aR, max_drift = _propagate_amplitudes(s0, p, dt, n_steps, output_stride)
    times = sample_times(t_max, aL.shape[0])
    return TimeSeries(
        times=times,
        rho_LL=np.abs(aL) ** 2,
        rho_RR=np.abs(aR) ** 2,
        rho_LR=aL * np.conj(aR),
        meta={"engine": "deterministic", "Omega": p.Omega, "v": p.v, "dt": dt, "max_norm_drift": max_drift},
    )


def propagate_mixed(
    p_L0: float,
    p_R0: float,
    p: ModelParams,
    dt: float = 1e-3,
    t_max: float = 5.0,
    output_stride: int = 1,
) -> TimeSeries:
    """Evolve ``p_L0 |L><L| + p_R0 |R><R|`` as the weighted pair of pure trajectories."""
    mix = InitialState.mixed(p_L0, p_R0)
    parts = []
    for w, s in ((mix.p_L0, StateAmplitudes(1.0, 0.0)), (mix.p_R0, StateAmplitudes(0.0, 1.0))):
        if w > 0:
            parts.append((w, propagate_pure(s, p, dt, t_max, output_stride)))
    times = parts[0][1].times
    series = TimeSeries(
        times=times,
        rho_LL=sum(w * ts.rho_LL for w, ts in parts),
        rho_RR=sum(w * ts.rho_RR for w, ts in parts),
        rho_LR=sum(w * ts.rho_LR for w, ts in parts),
        meta={"engine": "deterministic", "Omega": p.Omega, "v": p.v, "dt": dt},
    )
    return series


def propagate(initial: InitialState, p: ModelParams, dt: float, t_max: float, output_stride: int = 1) -> TimeSeries:
    if initial.is_mixed:
        ts = propagate_mixed(initial.p_L0, initial.p_R0, p, dt, t_max, output_stride)
    else:
        ts = propagate_pure(initial.amplitudes(), p, dt, t_max, output_stride)
    ts.meta["initial"] = initial.label
    return ts


def distinguishability(series_pure: TimeSeries, series_mixed: TimeSeries) -> np.ndarray:
    """Pointwise ``Z_pure - Z_mixed``."""
    if not series_pure.same_grid(series_mixed):
        raise StateError("time grids of the pure and mixed series differ")
    return series_pure.Z - series_mixed.Z


def is_self_trapped(series: TimeSeries, t_window: float = 20.0) -> bool:
    """True if rho_RR stays above 1/2 for every sample with ``t <= t_window``."""
    mask = series.times <= t_window + 1e-12
    return bool(np.min(series.rho_RR[mask]) > 0.5)


def oscillation_period(series: TimeSeries, tol: float = 1e-6) -> float:
    """First return time of rho_RR to its initial value with matching slope.

    Handles both a transversal return (rho_RR crosses its initial value in
    the initial direction) and a tangential one (the initial value is a
    turning point, as for every real-amplitude start); the latter is located
    by parabolic interpolation of the extremum.  Returns ``nan`` if no
    return is seen.
    """
    r, t = series.rho_RR, series.times
    d = r - r[0]
    away = np.nonzero(np.abs(d) > 100.0 * tol)[0]
    if away.size == 0:
        return math.nan
    sign0 = np.sign(d[away[0]])
    for i in range(away[0] + 1, len(r) - 1):
        if d[i] * d[i + 1] < 0 or d[i] == 0.0:
            if np.sign(d[i + 1] - d[i]) == sign0:
                return float(t[i] + d[i] / (d[i] - d[i + 1]) * (t[i + 1] - t[i]))
            continue
        if abs(d[i]) <= abs(d[i - 1]) and abs(d[i]) < abs(d[i + 1]):
            curv = d[i - 1] - 2.0 * d[i] + d[i + 1]
            if curv == 0.0:
                continue
            off = 0.5 * (d[i - 1] - d[i + 1]) / curv
            extremum = d[i] - 0.25 * (d[i - 1] - d[i + 1]) * off
            if abs(extremum) <= tol:
                return float(t[i] + off * (t[i + 1] - t[i]))
    return math.nan
