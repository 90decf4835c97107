"""Monte-Carlo ensembles of stochastic trajectories.

Trajectories are processed in fixed blocks of ``BLOCK_SIZE`` consecutive
indices.  Each block returns moment sums of the per-trajectory Bloch
coordinates, and blocks are reduced in index order, so the floating-point
result does not depend on the number of worker processes.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from . import _kernels
from .meanfield import check_dt, sample_times, step_count
from .series import EnsembleResult, TimeSeries
from .stochastic import WIENER_VARIANCE, NoiseStream, integrate_amplitudes
from .types import InitialState, ModelParams, NumericalError

log = logging.getLogger(__name__)

BLOCK_SIZE = 250


class EnsembleError(NumericalError):
    def __init__(self, message: str, aborted: Sequence[int] = ()):
        super().__init__(message)
        self.aborted = list(aborted)


@dataclass(frozen=True)
class EnsembleConfig:
    n_traj: int = 10_000
    dt: float = 1e-3
    t_max: float = 20.0
    seed: int = 0
    output_stride: int = 100
    workers: int = 1
    max_abort_fraction: float = 1e-3

    def __post_init__(self):
        if self.n_traj < 1:
            raise ValueError("n_traj must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


def allocate(weights: Sequence[float], n: int) -> list[int]:
    """Split ``n`` into integer counts proportional to ``weights`` (largest remainder)."""
    exact = [w * n for w in weights]
    counts = [math.floor(x) for x in exact]
    short = n - sum(counts)
    order = sorted(range(len(weights)), key=lambda i: (-(exact[i] - counts[i]), i))
    for i in order[:short]:
        counts[i] += 1
    return counts


def _start_groups(initial: InitialState, n: int) -> list[tuple[int, int, complex, complex]]:
    """``(first_index, count, a_L0, a_R0)`` for each distinct starting state."""
    if not initial.is_mixed:
        return [(0, n, complex(initial.a_L0), complex(initial.a_R0))]
    nL, nR = allocate([initial.p_L0, initial.p_R0], n)
    groups = []
    if nL:
        groups.append((0, nL, 1 + 0j, 0j))
    if nR:
        groups.append((nL, nR, 0j, 1 + 0j))
    return groups


def _run_block(task):
    p, dt, n_steps, stride, seed, variance, lo, hi, groups = task
    n_out = n_steps // stride + 1
    s1 = np.zeros((len(groups), n_out, 3))
    s2 = np.zeros((len(groups), n_out, 6))
    aborted = []
    for g, (first, count, aL0, aR0) in enumerate(groups):
        for j in range(max(lo, first), min(hi, first + count)):
            deta = NoiseStream(seed, j, variance).increments(dt, n_steps)
            status, out_L, out_R, _ = integrate_amplitudes(aL0, aR0, p, dt, n_steps, stride, deta)
            if status != _kernels.OK:
                aborted.append(j)
                continue
            _kernels.accumulate_bloch(out_L, out_R, 1.0, s1[g], s2[g])
    return s1, s2, aborted


def _noise_free_sums(p, dt, n_steps, stride, groups):
    # Gamma == 0: every trajectory of a group is identical, so integrate once and weight
    n_out = n_steps // stride + 1
    s1 = np.zeros((len(groups), n_out, 3))
    s2 = np.zeros((len(groups), n_out, 6))
    empty = np.zeros(0, dtype=complex)
    for g, (_, count, aL0, aR0) in enumerate(groups):
        status, out_L, out_R, _ = integrate_amplitudes(aL0, aR0, p, dt, n_steps, stride, empty)
        if status != _kernels.OK:
            raise NumericalError(f"norm collapsed at step {status}")
        _kernels.accumulate_bloch(out_L, out_R, float(count), s1[g], s2[g])
    return s1, s2


def _group_covariance(s1, s2, n):
    """Sample covariance entries (xx, yy, zz, xy, xz, yz) of one group's Bloch samples."""
    if n < 2:
        return np.zeros(s2.shape)
    m = s1 / n
    pairs = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))
    cov = np.empty(s2.shape)
    for k, (a, b) in enumerate(pairs):
        cov[:, k] = (s2[:, k] - n * m[:, a] * m[:, b]) / (n - 1)
    # rounding can leave tiny negative variances for (near-)deterministic groups
    cov[:, :3] = np.clip(cov[:, :3], 0.0, None)
    return cov


def _moments_to_result(times, s1, s2, counts, meta) -> EnsembleResult:
    """Combine per-start-group moment sums into a stratified estimate.

    The ensemble mean weights each group by its share of trajectories; the
    standard error only carries the sampling spread within groups, since the
    split between starting states is fixed rather than sampled.
    """
    n = int(sum(counts))
    m = s1.sum(axis=0) / n
    X, Y, Z = m[:, 0], m[:, 1], m[:, 2]
    c = np.zeros(s2.shape[1:])  # covariance of the mean
    for g, n_g in enumerate(counts):
        if n_g > 0:
            c += (n_g / n) ** 2 * _group_covariance(s1[g], s2[g], n_g) / n_g
    cxx, cyy, czz, cxy, cxz, cyz = (c[:, k] for k in range(6))
    var_purity = (X * X * cxx + Y * Y * cyy + Z * Z * czz
                  + 2.0 * (X * Y * cxy + X * Z * cxz + Y * Z * cyz))
    var_coh = 0.25 * (X * X * cxx + Y * Y * cyy + 2.0 * X * Y * cxy)
    se = {
        "X": np.sqrt(cxx),
        "Y": np.sqrt(cyy),
        "Z": np.sqrt(czz),
        "purity": np.sqrt(np.clip(var_purity, 0.0, None)),
        "coherence2": np.sqrt(np.clip(var_coh, 0.0, None)),
    }
    se["rho_RR"] = 0.5 * se["Z"]
    se["re_rho_LR"] = 0.5 * se["X"]
    se["im_rho_LR"] = 0.5 * se["Y"]
    return EnsembleResult(
        times=times,
        rho_LL=0.5 * (1.0 - Z),
        rho_RR=0.5 * (1.0 + Z),
        rho_LR=0.5 * (X + 1j * Y),
        meta=meta,
        stderr=se,
        n_traj=n,
    )


def run_ensemble(
    initial: InitialState,
    p: ModelParams,
    cfg: EnsembleConfig = EnsembleConfig(),
    variance: float = WIENER_VARIANCE,
) -> EnsembleResult:
    """Average ``n_traj`` trajectories into density-matrix series.

    ``rho_ab(t)`` is the mean of ``a_a(t) conj(a_b(t))`` and the purity is
    evaluated from the averaged matrix.  Mixed initial states are split into
    |L> and |R> sub-ensembles sized by largest-remainder allocation.
    """
    check_dt(cfg.dt)
    n_steps = step_count(cfg.dt, cfg.t_max, cfg.output_stride)
    groups = _start_groups(initial, cfg.n_traj)
    times = sample_times(cfg.t_max, n_steps // cfg.output_stride + 1)
    meta = {
        "engine": "stochastic", "Omega": p.Omega, "v": p.v, "Gamma": p.Gamma,
        "initial": initial.label, "n_traj": cfg.n_traj, "seed": cfg.seed, "dt": cfg.dt,
    }

    if p.Gamma == 0.0:
        s1, s2 = _noise_free_sums(p, cfg.dt, n_steps, cfg.output_stride, groups)
        return _moments_to_result(times, s1, s2, [g[1] for g in groups], meta)

    tasks = [
        (p, cfg.dt, n_steps, cfg.output_stride, cfg.seed, variance, lo, min(lo + BLOCK_SIZE, cfg.n_traj), groups)
        for lo in range(0, cfg.n_traj, BLOCK_SIZE)
    ]
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            partials = list(pool.map(_run_block, tasks))
    else:
        partials = [_run_block(t) for t in tasks]

    s1 = np.zeros_like(partials[0][0])
    s2 = np.zeros_like(partials[0][1])
    aborted: list[int] = []
    for b1, b2, ab in partials:
        s1 += b1
        s2 += b2
        aborted.extend(ab)
    if aborted:
        log.warning("%d trajectories aborted: %s", len(aborted), aborted[:20])
    if len(aborted) > cfg.max_abort_fraction * cfg.n_traj:
        raise EnsembleError(f"{len(aborted)} of {cfg.n_traj} trajectories aborted", aborted)
    counts = [count - sum(first <= j < first + count for j in aborted) for first, count, _, _ in groups]
    res = _moments_to_result(times, s1, s2, counts, meta)
    res.aborted = aborted
    return res


def decay_threshold_time(series: TimeSeries, threshold: float = 0.9) -> float:
    """First time the purity drops below ``threshold`` (linear interpolation), else ``inf``."""
    pur = series.purity
    below = np.nonzero(pur < threshold)[0]
    if below.size == 0:
        return math.inf
    i = below[0]
    if i == 0:
        return float(series.times[0])
    t0, t1 = series.times[i - 1], series.times[i]
    p0, p1 = pur[i - 1], pur[i]
    return float(t0 + (p0 - threshold) / (p0 - p1) * (t1 - t0))


def purity_decay_ordering(results: Mapping[str, TimeSeries], threshold: float = 0.9) -> list[str]:
    """Labels ordered from fastest to slowest purity decay.

    Runs are ranked by the time at which the purity first falls below
    ``threshold``; runs that never cross are placed after those that do and
    ranked among themselves by the final purity (lower purity = faster decay).
    """
    if not results:
        return []
    grids = [r.times for r in results.values()]
    if any(not np.array_equal(g, grids[0]) for g in grids[1:]):
        raise ValueError("results must share a common time grid")

    def key(label):
        r = results[label]
        t_cross = decay_threshold_time(r, threshold)
        return (t_cross, float(r.purity[-1]))

    return sorted(results, key=key)


def stationary(series: TimeSeries, window: float = 2.0, tol: float = 1e-3) -> bool:
    """True if purity and rho_RR change by less than ``tol`` between the last two windows."""
    t = series.times
    t_end = t[-1]
    if t_end - t[0] < 2 * window:
        return False
    last = t > t_end - window
    prev = (t > t_end - 2 * window) & ~last
    for obs in (series.purity, series.rho_RR):
        if abs(obs[last].mean() - obs[prev].mean()) >= tol:
            return False
    return True


def with_overrides(cfg: EnsembleConfig, **kw) -> EnsembleConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
