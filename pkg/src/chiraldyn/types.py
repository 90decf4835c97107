"""State and parameter types for the two-level chiral system.

Conventions used throughout the package:

* basis ordering is (L, R); ``sigma_z = |R><R| - |L><L|``
* Bloch coordinates ``X = 2 Re(rho_LR)``, ``Y = 2 Im(rho_LR)``,
  ``Z = rho_RR - rho_LL``
* purity ``Tr(rho^2) = (1 + X^2 + Y^2 + Z^2) / 2``
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

# propagated data vs. user input
PROPAGATION_TOL = 1e-9
INPUT_TOL = 1e-6


class StateError(ValueError):
    """A state violates normalization, trace or positivity constraints."""


class ParameterError(ValueError):
    """A model parameter is outside its allowed range."""


@dataclass(frozen=True)
class StateAmplitudes:
    """Pure state ``a_L |L> + a_R |R>``."""

    a_L: complex
    a_R: complex

    @property
    def norm2(self) -> float:
        return abs(self.a_L) ** 2 + abs(self.a_R) ** 2

    def check_normalized(self, tol: float = INPUT_TOL) -> None:
        dev = abs(self.norm2 - 1.0)
        if dev > tol:
            raise StateError(f"state not normalized: |a_L|^2+|a_R|^2-1 = {dev:.3e}")

    def normalized(self) -> StateAmplitudes:
        n = math.sqrt(self.norm2)
        if n == 0.0:
            raise StateError("cannot normalize the zero vector")
        return StateAmplitudes(self.a_L / n, self.a_R / n)


@dataclass(frozen=True)
class BlochVector:
    X: float
    Y: float
    Z: float

    @property
    def length2(self) -> float:
        return self.X * self.X + self.Y * self.Y + self.Z * self.Z

    def check_contained(self, tol: float = PROPAGATION_TOL) -> None:
        if self.length2 > 1.0 + tol:
            raise StateError(f"Bloch vector outside unit ball: |r|^2 = {self.length2!r}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.X, self.Y, self.Z)


@dataclass(frozen=True)
class DensityMatrix2:
    """Two-level density matrix stored as (rho_LL, rho_RR, rho_LR)."""

    rho_LL: float
    rho_RR: float
    rho_LR: complex

    def check_valid(self, tol: float = PROPAGATION_TOL) -> None:
        if abs(self.rho_LL + self.rho_RR - 1.0) > tol:
            raise StateError(f"trace {self.rho_LL + self.rho_RR!r} != 1")
        if abs(self.rho_LR) ** 2 > self.rho_LL * self.rho_RR + tol:
            raise StateError("density matrix is not positive semidefinite")

    @property
    def coherence2(self) -> float:
        return abs(self.rho_LR) ** 2


@dataclass(frozen=True)
class RawParams:
    """Decoherence-only parameters in physical units.

    ``omega`` is the tunneling angular frequency and ``gamma`` the
    dephasing rate of the master equation ``-gamma [sz, [sz, rho]]``.
    ``E_m`` is the mean level energy expressed as an angular frequency
    (hbar = 1); it only contributes a global phase.
    """

    omega: float
    gamma: float
    E_m: float = 0.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ParameterError(f"omega must be > 0 (got {self.omega!r})")
        if not self.gamma >= 0:
            raise ParameterError(f"gamma must be ≥ 0 (got {self.gamma!r})")

    def to_model(self) -> ModelParams:
        """Rescaled parameters with time measured in units of ``1/omega``."""
        return ModelParams(Omega=self.E_m / self.omega, v=0.0, Gamma=self.gamma / self.omega)


@dataclass(frozen=True)
class ModelParams:
    """Rescaled parameters of the nonlinear stochastic amplitude equations.

    Attributes
    ----------
    Omega : float
        Mean energy plus homochiral mean field over the tunneling splitting.
        Enters as a global phase only.
    v : float
        Chiral discrimination ``(V_het - V_hom) / delta``.
    Gamma : float
        Rescaled dephasing strength ``gamma / omega``.
    """

    Omega: float = 1.0
    v: float = 0.0
    Gamma: float = 0.0

    def __post_init__(self):
        for name in ("Omega", "v", "Gamma"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")
        if not self.Gamma >= 0:
            raise ParameterError(f"Gamma must be ≥ 0 (got {self.Gamma!r})")


class InitialKind(str, Enum):
    LS = "LS"
    WDS = "WDS"
    SDS = "SDS"
    CUSTOM = "custom"
    MIXED = "mixed"


_NAMED_AMPLITUDES = {
    InitialKind.LS: (0.0, 1.0),
    InitialKind.WDS: (math.sqrt(0.05), math.sqrt(0.95)),
    InitialKind.SDS: (math.sqrt(0.49), math.sqrt(0.51)),
}


@dataclass(frozen=True)
class InitialState:
    """Initial condition: a named or custom pure state, or an L/R mixture.

    Use the constructors :meth:`named`, :meth:`custom` and :meth:`mixed`
    rather than filling the fields by hand.
    """

    kind: InitialKind
    a_L0: complex = 0.0
    a_R0: complex = 1.0
    p_L0: float = 0.0
    p_R0: float = 1.0

    @classmethod
    def named(cls, name: str) -> InitialState:
        kind = InitialKind(name)
        if kind not in _NAMED_AMPLITUDES:
            raise ValueError(f"{name!r} is not a named pure state")
        aL, aR = _NAMED_AMPLITUDES[kind]
        return cls(kind, complex(aL), complex(aR), aL * aL, aR * aR)

    @classmethod
    def custom(cls, a_L0: complex, a_R0: complex) -> InitialState:
        StateAmplitudes(a_L0, a_R0).check_normalized()
        return cls(InitialKind.CUSTOM, complex(a_L0), complex(a_R0), abs(a_L0) ** 2, abs(a_R0) ** 2)

    @classmethod
    def mixed(cls, p_L0: float, p_R0: float) -> InitialState:
        if p_L0 < 0 or p_R0 < 0 or abs(p_L0 + p_R0 - 1.0) > INPUT_TOL:
            raise StateError(f"mixture weights must be non-negative and sum to 1 (got {p_L0}, {p_R0})")
        return cls(InitialKind.MIXED, 0.0, 1.0, float(p_L0), float(p_R0))

    @property
    def is_mixed(self) -> bool:
        return self.kind is InitialKind.MIXED

    def amplitudes(self) -> StateAmplitudes:
        if self.is_mixed:
            raise StateError("a mixed initial state has no single amplitude vector")
        return StateAmplitudes(self.a_L0, self.a_R0)

    def incoherent_mixture(self) -> InitialState:
        """Mixture with the same populations and no L-R coherence."""
        return InitialState.mixed(self.p_L0, self.p_R0)

    def density_matrix(self) -> DensityMatrix2:
        if self.is_mixed:
            return DensityMatrix2(self.p_L0, self.p_R0, 0j)
        return rho_from_amplitudes(self.amplitudes())

    @property
    def label(self) -> str:
        if self.kind is InitialKind.MIXED:
            return f"mixed({self.p_L0:g},{self.p_R0:g})"
        if self.kind is InitialKind.CUSTOM:
            return f"custom({_fmt_complex(self.a_L0)},{_fmt_complex(self.a_R0)})"
        return self.kind.value


def _fmt_complex(z: complex) -> str:
    return f"{z.real:.12g}{z.imag:+.12g}j"


def bloch_from_amplitudes(s: StateAmplitudes) -> BlochVector:
    s.check_normalized()
    c = s.a_L * s.a_R.conjugate()
    return BlochVector(2.0 * c.real, 2.0 * c.imag, abs(s.a_R) ** 2 - abs(s.a_L) ** 2)


def rho_from_amplitudes(s: StateAmplitudes) -> DensityMatrix2:
    s.check_normalized()
    return DensityMatrix2(abs(s.a_L) ** 2, abs(s.a_R) ** 2, s.a_L * s.a_R.conjugate())


def rho_from_bloch(b: BlochVector) -> DensityMatrix2:
    b.check_contained(INPUT_TOL)
    return DensityMatrix2(0.5 * (1.0 - b.Z), 0.5 * (1.0 + b.Z), complex(0.5 * b.X, 0.5 * b.Y))


def bloch_from_rho(rho: DensityMatrix2) -> BlochVector:
    return BlochVector(2.0 * rho.rho_LR.real, 2.0 * rho.rho_LR.imag, rho.rho_RR - rho.rho_LL)


def purity(rho: DensityMatrix2) -> float:
    """``Tr(rho^2) = rho_LL^2 + rho_RR^2 + 2 |rho_LR|^2``."""
    return rho.rho_LL ** 2 + rho.rho_RR ** 2 + 2.0 * abs(rho.rho_LR) ** 2


def purity_from_bloch(b: BlochVector) -> float:
    return 0.5 * (1.0 + b.length2)


def parse_complex(text: str) -> complex:
    """Parse ``"0.5"``, ``"0.1+0.2j"`` or ``"-0.3i"``."""
    try:
        t = text.replace(" ", "")
        if t.endswith("i"):
            t = t[:-1] + "j"
        return complex(t)
    except ValueError:
        raise ValueError(f"not a complex number: {text!r}") from None


class NumericalError(RuntimeError):
    """Integration produced an invalid state (norm drift or collapse)."""
