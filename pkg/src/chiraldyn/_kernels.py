"""Compiled inner loops for the amplitude equations.

Right-hand side (rescaled time, hbar = omega = 1):

    da_L = [-i (Omega + v |a_R|^2) a_L + i a_R - Gamma |a_R|^4 a_L] dt - sqrt(Gamma) |a_R|^2 a_L deta
    da_R = [-i (Omega + v |a_L|^2) a_R + i a_L - Gamma |a_L|^4 a_R] dt + sqrt(Gamma) |a_L|^2 a_R deta

The dt part is advanced with classic RK4, the deta part with a single
Euler-Maruyama increment whose coefficients are taken at the start of the
step (Ito).
"""

import numpy as np
from numba import njit

OK = -1


@njit(cache=True)
def drift(aL, aR, Omega, v, Gamma):
    pL = aL.real * aL.real + aL.imag * aL.imag
    pR = aR.real * aR.real + aR.imag * aR.imag
    daL = -1j * (Omega + v * pR) * aL + 1j * aR - Gamma * pR * pR * aL
    daR = -1j * (Omega + v * pL) * aR + 1j * aL - Gamma * pL * pL * aR
    return daL, daR


@njit(cache=True)
def rk4_step(aL, aR, Omega, v, Gamma, dt):
    k1L, k1R = drift(aL, aR, Omega, v, Gamma)
    h = 0.5 * dt
    k2L, k2R = drift(aL + h * k1L, aR + h * k1R, Omega, v, Gamma)
    k3L, k3R = drift(aL + h * k2L, aR + h * k2R, Omega, v, Gamma)
    k4L, k4R = drift(aL + dt * k3L, aR + dt * k3R, Omega, v, Gamma)
    c = dt / 6.0
    return (aL + c * (k1L + 2.0 * k2L + 2.0 * k3L + k4L),
            aR + c * (k1R + 2.0 * k2R + 2.0 * k3R + k4R))


@njit(cache=True)
def hybrid_step(aL, aR, Omega, v, Gamma, dt, deta):
    """One unnormalized step; returns the new amplitudes."""
    pL = aL.real * aL.real + aL.imag * aL.imag
    pR = aR.real * aR.real + aR.imag * aR.imag
    nL, nR = rk4_step(aL, aR, Omega, v, Gamma, dt)
    sg = np.sqrt(Gamma)
    nL = nL - sg * pR * deta * aL
    nR = nR + sg * pL * deta * aR
    return nL, nR


@njit(cache=True)
def integrate(aL, aR, Omega, v, Gamma, dt, n_steps, stride, deta, renormalize,
              out_L, out_R):
    """Integrate one trajectory, writing every ``stride``-th state to ``out_*``.

    ``deta`` holds the complex increments (length ``n_steps``) or is empty
    when Gamma == 0.  Returns ``(status, norm_correction, max_norm_drift)``
    where status is ``OK`` or the index of the step at which the norm
    collapsed below 1e-12.
    """
    use_noise = deta.shape[0] > 0
    correction = 0.0
    max_drift = 0.0
    out_L[0] = aL
    out_R[0] = aR
    j = 1
    for k in range(n_steps):
        if use_noise:
            aL, aR = hybrid_step(aL, aR, Omega, v, Gamma, dt, deta[k])
        else:
            aL, aR = rk4_step(aL, aR, Omega, v, Gamma, dt)
        n2 = aL.real * aL.real + aL.imag * aL.imag + aR.real * aR.real + aR.imag * aR.imag
        if n2 < 1e-12:
            return k, correction, max_drift
        if renormalize:
            n = np.sqrt(n2)
            correction += abs(n - 1.0)
            aL = aL / n
            aR = aR / n
        else:
            d = abs(n2 - 1.0)
            if d > max_drift:
                max_drift = d
        if (k + 1) % stride == 0:
            out_L[j] = aL
            out_R[j] = aR
            j += 1
    return OK, correction, max_drift


@njit(cache=True)
def accumulate_bloch(out_L, out_R, weight, s1, s2):
    """Add ``weight`` copies of a trajectory's Bloch samples to the moment sums.

    s1[:, 0:3] collects X, Y, Z; s2[:, 0:6] collects XX, YY, ZZ, XY, XZ, YZ.
    """
    for i in range(out_L.shape[0]):
        c = out_L[i] * np.conj(out_R[i])
        x = 2.0 * c.real
        y = 2.0 * c.imag
        pL = out_L[i].real ** 2 + out_L[i].imag ** 2
        pR = out_R[i].real ** 2 + out_R[i].imag ** 2
        z = pR - pL
        s1[i, 0] += weight * x
        s1[i, 1] += weight * y
        s1[i, 2] += weight * z
        s2[i, 0] += weight * x * x
        s2[i, 1] += weight * y * y
        s2[i, 2] += weight * z * z
        s2[i, 3] += weight * x * y
        s2[i, 4] += weight * x * z
        s2[i, 5] += weight * y * z
