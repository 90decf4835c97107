"""Single-trajectory integration of the stochastic nonlinear amplitude equations.

Noise convention
----------------
``deta`` is a complex Wiener increment with ``E[deta] = E[deta^2] = 0`` and
``E[|deta|^2] = WIENER_VARIANCE * dt`` where ``WIENER_VARIANCE = 2`` (each
quadrature has variance ``dt``).  With this normalization the amplitude
equations preserve the norm in mean to first order and their ensemble
average obeys the dephasing master equation

    d rho / dt = -i [H, rho] - (Gamma / 4) [sz, [sz, rho]]

i.e. off-diagonal elements decay as ``exp(-Gamma t)`` for v = 0; see
:func:`lindblad_equivalent`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .meanfield import check_dt, sample_times, step_count
from .types import ModelParams, NumericalError, RawParams, StateAmplitudes

WIENER_VARIANCE = 2.0
_SEED_LIMIT = 2 ** 64


class TrajectoryAborted(NumericalError):
    def __init__(self, trajectory_index: int, step: int):
        super().__init__(f"trajectory {trajectory_index}: norm collapsed at step {step}")
        self.trajectory_index = trajectory_index
        self.step = step


@dataclass(frozen=True)
class NoiseStream:
    """Complex Wiener increments for one trajectory.

    The stream is a pure function of ``(seed, trajectory_index)`` and the step
    index: it is drawn from a Philox counter-based generator keyed by the
    pair, so it does not depend on how trajectories are distributed over
    workers.
    """

    seed: int
    trajectory_index: int
    variance: float = WIENER_VARIANCE

    def __post_init__(self):
        if not 0 <= self.seed < _SEED_LIMIT:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if not 0 <= self.trajectory_index < _SEED_LIMIT:
            raise ValueError("trajectory_index must be a 64-bit unsigned integer")

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed, self.trajectory_index], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def increments(self, dt: float, n_steps: int) -> np.ndarray:
        """The first ``n_steps`` increments ``deta`` as a complex array."""
        z = self.generator().standard_normal((n_steps, 2))
        return np.sqrt(0.5 * self.variance * dt) * (z[:, 0] + 1j * z[:, 1])


def lindblad_equivalent(p: ModelParams) -> RawParams:
    """Decoherence-only master-equation parameters reproduced by the ensemble.

    Time is rescaled (omega = 1).  The amplitude equations carry
    ``Gamma |a|^4`` and ``sqrt(Gamma) |a|^2 deta``, which is the unraveling
    of ``-(Gamma/4) [sz, [sz, rho]]`` under the variance-2 convention; the
    matching Bloch equations therefore use ``gamma = Gamma / 4``.
    """
    return RawParams(omega=1.0, gamma=p.Gamma / 4.0)


def step(s: StateAmplitudes, p: ModelParams, dt: float, dEta: complex) -> StateAmplitudes:
    """One hybrid step followed by renormalization."""
    s.check_normalized()
    aL, aR = _kernels.hybrid_step(complex(s.a_L), complex(s.a_R), p.Omega, p.v, p.Gamma, dt, complex(dEta))
    n2 = abs(aL) ** 2 + abs(aR) ** 2
    if n2 < 1e-12:
        raise NumericalError("norm collapsed during step")
    n = np.sqrt(n2)
    return StateAmplitudes(aL / n, aR / n)


@dataclass
class Trajectory:
    times: np.ndarray
    a_L: np.ndarray
    a_R: np.ndarray
    norm_correction: float  # sum over steps of |1 - norm| removed by renormalization

    @property
    def rho_RR(self) -> np.ndarray:
        return np.abs(self.a_R) ** 2


def integrate_amplitudes(aL0: complex, aR0: complex, p: ModelParams, dt: float, n_steps: int,
                         stride: int, deta: np.ndarray):
    """Low-level driver shared with :mod:`chiraldyn.ensemble`.

    Returns ``(status, out_L, out_R, norm_correction)``.
    """
    n_out = n_steps // stride + 1
    out_L = np.empty(n_out, dtype=complex)
    out_R = np.empty(n_out, dtype=complex)
    status, corr, _ = _kernels.integrate(
        complex(aL0), complex(aR0), p.Omega, p.v, p.Gamma, dt, n_steps, stride, deta, True, out_L, out_R,
    )
    return status, out_L, out_R, corr


def run_trajectory(
    s0: StateAmplitudes,
    p: ModelParams,
    dt: float,
    t_max: float,
    stream: NoiseStream,
    output_stride: int = 1,
) -> Trajectory:
    s0.check_normalized()
    check_dt(dt)
    n_steps = step_count(dt, t_max, output_stride)
    deta = stream.increments(dt, n_steps) if p.Gamma > 0 else np.zeros(0, dtype=complex)
    status, out_L, out_R, corr = integrate_amplitudes(s0.a_L, s0.a_R, p, dt, n_steps, output_stride, deta)
    if status != _kernels.OK:
        raise TrajectoryAborted(stream.trajectory_index, status)
    times = sample_times(t_max, out_L.shape[0])
    return Trajectory(times, out_L, out_R, corr)
