import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from chiraldyn.analytic import (
    Regime,
    bloch_evolve_analytic,
    bloch_evolve_arrays,
    delta_z,
    distinguishability_decay_rate,
    evolve_series,
    purity_rate,
    regime,
)
from chiraldyn.types import BlochVector, InitialState, RawParams, purity_from_bloch


def bloch_matrix(p):
    g, w = p.gamma, p.omega
    return np.array([[-4 * g, 0, 0], [0, -4 * g, 2 * w], [0, -2 * w, 0]])


def expm_oracle(b0, p, t):
    return expm(bloch_matrix(p) * t) @ np.array(b0.as_tuple())


@pytest.mark.parametrize("omega,gamma", [
    (1.0, 0.0), (0.1, 1.0), (0.8, 1.0), (2.0, 1.0), (1.0, 1.0), (1.0, 1.0 + 1e-9), (8.0, 4.0), (0.05, 4.0),
])
def test_matches_matrix_exponential(omega, gamma):
    p = RawParams(omega, gamma)
    b0 = BlochVector(0.3, -0.5, 0.6)
    for t in (0.0, 0.01, 0.37, 1.0, 3.3, 10.0):
        got = np.array(bloch_evolve_analytic(b0, p, t).as_tuple())
        want = expm_oracle(b0, p, t)
        assert np.allclose(got, want, rtol=1e-10, atol=1e-13), (t, got, want)


def test_coherent_rotation_without_dephasing():
    # gamma = 0, LS start: Z = cos(2 omega t), Y = sin(2 omega t)
    p = RawParams(0.7, 0.0)
    t = np.linspace(0, 10, 101)
    X, Y, Z = bloch_evolve_arrays(BlochVector(0, 0, 1), p, t)
    assert np.allclose(Z, np.cos(1.4 * t), atol=1e-13)
    assert np.allclose(Y, np.sin(1.4 * t), atol=1e-13)
    assert np.all(X == 0)


def test_x_decays_at_four_gamma():
    p = RawParams(1.3, 0.4)
    t = np.linspace(0, 5, 11)
    X, _, _ = bloch_evolve_arrays(BlochVector(0.8, 0, 0), p, t)
    assert np.allclose(X, 0.8 * np.exp(-1.6 * t), rtol=1e-14)


def test_critical_point_is_continuous():
    b0 = BlochVector(0, 0.4, 0.9)
    for t in (0.5, 2.0, 7.0):
        at = bloch_evolve_analytic(b0, RawParams(1.0, 1.0), t).as_tuple()
        for eps in (1e-7, -1e-7):
            near = bloch_evolve_analytic(b0, RawParams(1.0, 1.0 + eps), t).as_tuple()
            assert near == pytest.approx(at, abs=1e-6)


def test_strong_dephasing_does_not_overflow():
    X, Y, Z = bloch_evolve_arrays(BlochVector(0, 0.5, 0.5), RawParams(0.05, 4.0), np.array([0.0, 1e3, 1e5]))
    assert np.all(np.isfinite(Y)) and np.all(np.isfinite(Z))


def test_negative_time_rejected():
    with pytest.raises(ValueError):
        bloch_evolve_analytic(BlochVector(0, 0, 1), RawParams(1, 1), -0.1)
    with pytest.raises(ValueError):
        delta_z(1.0, RawParams(1, 1), np.array([0.0, -1.0]))


def test_regime_classification():
    assert regime(RawParams(2.0, 1.0)).regime is Regime.TUNNELING_DOMINANT
    assert regime(RawParams(2.0, 1.0)).rate == pytest.approx(2 * math.sqrt(3))
    assert regime(RawParams(0.5, 1.0)).regime is Regime.DEPHASING_DOMINANT
    assert regime(RawParams(1.0, 1.0)).regime is Regime.CRITICAL


def test_delta_z_is_pure_minus_mixed():
    p = RawParams(0.4, 1.0)
    pure = InitialState.custom(math.sqrt(0.3), 1j * math.sqrt(0.7))
    mixed = pure.incoherent_mixture()
    t = np.linspace(0, 8, 81)
    gap = evolve_series(pure, p, t).Z - evolve_series(mixed, p, t).Z
    Y0 = 2 * (pure.a_L0 * np.conj(pure.a_R0)).imag
    assert np.allclose(delta_z(Y0, p, t), gap, atol=1e-14)


def test_delta_z_vanishes_without_initial_y():
    t = np.linspace(0, 20, 201)
    assert np.all(delta_z(0.0, RawParams(0.3, 1.0), t) == 0.0)


@pytest.mark.parametrize("omega", [0.1, 0.4, 2.0, 6.0])
def test_distinguishability_envelope_rate(omega):
    p = RawParams(omega, 1.0)
    rate = distinguishability_decay_rate(p)
    t1, t2 = 10.0, 14.0
    if regime(p).regime is Regime.DEPHASING_DOMINANT:
        slope = math.log(abs(delta_z(1.0, p, t2)) / abs(delta_z(1.0, p, t1))) / (t2 - t1)
        assert -slope == pytest.approx(rate, rel=1e-3)
    else:
        # oscillating: compare the envelope |Delta Z| <= 2 omega e^{-2 gamma t} / s
        s = regime(p).rate
        t = np.linspace(t1, t2, 400)
        assert np.all(np.abs(delta_z(1.0, p, t)) <= 2 * omega * np.exp(-rate * t) / s + 1e-15)


@given(
    st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1),
    st.floats(0.05, 8.0), st.floats(0.0, 4.0), st.floats(0.0, 10.0),
)
@settings(max_examples=200, deadline=None)
def test_evolution_stays_in_the_ball(x, y, z, omega, gamma, t):
    r = math.sqrt(x * x + y * y + z * z)
    if r > 1:
        x, y, z = x / r, y / r, z / r
    b0 = BlochVector(x, y, z)
    b = bloch_evolve_analytic(b0, RawParams(omega, gamma), t)
    assert b.length2 <= b0.length2 + 1e-12


@given(
    st.floats(-0.57, 0.57), st.floats(-0.57, 0.57), st.floats(-0.57, 0.57),
    st.floats(0.05, 8.0), st.floats(0.0, 4.0), st.floats(0.0, 5.0),
)
@settings(max_examples=100, deadline=None)
def test_purity_rate_finite_difference(x, y, z, omega, gamma, t):
    p = RawParams(omega, gamma)
    b0 = BlochVector(x, y, z)
    h = 1e-5
    t = max(t, h)
    up = purity_from_bloch(bloch_evolve_analytic(b0, p, t + h))
    down = purity_from_bloch(bloch_evolve_analytic(b0, p, t - h))
    fd = (up - down) / (2 * h)
    exact = purity_rate(bloch_evolve_analytic(b0, p, t), gamma)
    assert fd == pytest.approx(exact, abs=1e-6 * (1 + abs(exact)))
