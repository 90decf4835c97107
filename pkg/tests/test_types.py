import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chiraldyn.types import (
    BlochVector,
    DensityMatrix2,
    InitialState,
    ModelParams,
    ParameterError,
    RawParams,
    StateAmplitudes,
    StateError,
    bloch_from_amplitudes,
    bloch_from_rho,
    parse_complex,
    purity,
    purity_from_bloch,
    rho_from_amplitudes,
    rho_from_bloch,
)

finite = st.floats(-1.0, 1.0, allow_nan=False)


@st.composite
def amplitudes(draw):
    v = np.array([draw(finite) for _ in range(4)])
    n = np.linalg.norm(v)
    if n < 1e-3:
        v, n = np.array([0.0, 0.0, 1.0, 0.0]), 1.0
    v = v / n
    return StateAmplitudes(complex(v[0], v[1]), complex(v[2], v[3]))


@st.composite
def bloch_vectors(draw):
    x, y, z = draw(finite), draw(finite), draw(finite)
    r = math.sqrt(x * x + y * y + z * z)
    scale = draw(st.floats(0.0, 1.0))
    if r > 0:
        x, y, z = (c / r * scale for c in (x, y, z))
    return BlochVector(x, y, z)


def test_named_states():
    ls = InitialState.named("LS")
    assert ls.amplitudes() == StateAmplitudes(0, 1)
    assert rho_from_amplitudes(ls.amplitudes()) == DensityMatrix2(0.0, 1.0, 0j)
    wds = InitialState.named("WDS")
    assert wds.p_L0 == pytest.approx(0.05) and wds.p_R0 == pytest.approx(0.95)
    sds = InitialState.named("SDS")
    assert bloch_from_amplitudes(sds.amplitudes()).Z == pytest.approx(0.02)
    # real positive amplitudes: X = 2 sqrt(pL pR), Y = 0
    b = bloch_from_amplitudes(wds.amplitudes())
    assert b.X == pytest.approx(2 * math.sqrt(0.05 * 0.95)) and b.Y == 0.0


def test_unnormalized_state_rejected():
    with pytest.raises(StateError):
        StateAmplitudes(1.0, 1.0).check_normalized()
    with pytest.raises(StateError):
        InitialState.custom(0.5, 0.5)
    assert StateAmplitudes(3.0, 4.0).normalized().norm2 == pytest.approx(1.0)


def test_mixture_weights():
    with pytest.raises(StateError):
        InitialState.mixed(0.3, 0.3)
    with pytest.raises(StateError):
        InitialState.mixed(-0.1, 1.1)
    m = InitialState.named("WDS").incoherent_mixture()
    assert m.is_mixed and m.density_matrix() == DensityMatrix2(m.p_L0, m.p_R0, 0j)
    with pytest.raises(StateError):
        m.amplitudes()


def test_parameter_validation():
    with pytest.raises(ParameterError, match="Gamma must be ≥ 0"):
        ModelParams(Gamma=-1.0)
    with pytest.raises(ParameterError, match="omega must be > 0"):
        RawParams(omega=0.0, gamma=1.0)
    with pytest.raises(ParameterError, match="gamma must be ≥ 0"):
        RawParams(omega=1.0, gamma=-0.1)
    with pytest.raises(ParameterError):
        ModelParams(v=math.inf)


def test_raw_to_model():
    m = RawParams(omega=2.0, gamma=0.5, E_m=4.0).to_model()
    assert m == ModelParams(Omega=2.0, v=0.0, Gamma=0.25)


@pytest.mark.parametrize("text,value", [
    ("0.5", 0.5), ("0.1+0.2j", 0.1 + 0.2j), ("-0.3i", -0.3j), (" 1 - 2i ", 1 - 2j),
    ("(0.7-0.7j)", 0.7 - 0.7j), ("inf", complex(math.inf)),
])
def test_parse_complex(text, value):
    assert parse_complex(text) == value


def test_parse_complex_rejects_garbage():
    with pytest.raises(ValueError):
        parse_complex("abc")


def test_bloch_containment_violation():
    with pytest.raises(StateError):
        rho_from_bloch(BlochVector(1.0, 1.0, 0.0))


@given(amplitudes())
def test_pure_state_is_on_the_sphere(s):
    b = bloch_from_amplitudes(s)
    assert b.length2 == pytest.approx(1.0, abs=1e-12)
    rho = rho_from_amplitudes(s)
    assert rho.rho_LL + rho.rho_RR == pytest.approx(1.0, abs=1e-12)
    assert purity(rho) == pytest.approx(1.0, abs=1e-12)


@given(bloch_vectors())
def test_bloch_rho_round_trip(b):
    rho = rho_from_bloch(b)
    rho.check_valid()
    back = bloch_from_rho(rho)
    assert back.as_tuple() == pytest.approx(b.as_tuple(), abs=1e-14)
    p = purity(rho)
    assert p == pytest.approx(purity_from_bloch(b), abs=1e-14)
    assert 0.5 - 1e-14 <= p <= 1.0 + 1e-14
