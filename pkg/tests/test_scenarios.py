import re
from dataclasses import replace

import numpy as np
import pytest

from chiraldyn.meanfield import is_self_trapped
from chiraldyn.scenarios import (
    PRESETS,
    Scenario,
    ScenarioError,
    compare_pure_mixed,
    preset,
    run_scenario,
)
from chiraldyn.series import EnsembleResult
from chiraldyn.types import InitialState, ModelParams, RawParams

LS = InitialState.named("LS")
WDS = InitialState.named("WDS")


def test_presets_cover_every_figure():
    figures = {int(re.match(r"fig(\d+)", name).group(1)) for name in PRESETS}
    assert figures == set(range(1, 13))
    for name, sc in PRESETS.items():
        sc.validate()
        assert sc.name == name and sc.description


def test_preset_lookup():
    assert preset("fig2").preset == "fig2"
    with pytest.raises(ScenarioError, match="unknown preset"):
        preset("fig13")


def test_preset_parameters():
    assert set(PRESETS["fig2"].sweep["v"]) == {0, 3, -3, 3.9, -3.9, 4, -4, 5, -5, 10, -10}
    assert PRESETS["fig6"].sweep["Gamma"] == (1.6e-4, 1.6e-3)
    assert PRESETS["fig8"].sweep["Gamma"] == (0.0, 1.6e-4, 1.6e-3, 1.6e-2)
    assert PRESETS["fig8"].params.v == 5.0
    assert PRESETS["fig1c"].params == RawParams(0.2, 1.0)
    assert PRESETS["fig1c"].sweep["omega"] == (0.2, 0.4, 0.8, 2.0, 4.0, 8.0)
    assert PRESETS["fig9"].initial.kind.value == "SDS" and PRESETS["fig10"].initial.kind.value == "WDS"


@pytest.mark.parametrize("kw,field", [
    (dict(engine="analytic", params=ModelParams()), "params"),
    (dict(engine="deterministic", params=RawParams(1, 1)), "params"),
    (dict(engine="deterministic", params=ModelParams(Gamma=0.1)), "Gamma"),
    (dict(engine="stochastic", sweep={"v": ()}), "v"),
    (dict(engine="stochastic", sweep={"omega": (1.0,)}), "sweep"),
    (dict(engine="stochastic", sweep={"bogus": (1.0,)}), "bogus"),
    (dict(engine="stochastic", sweep={"Gamma": (-1.0,)}), "Gamma"),
    (dict(engine="stochastic", t_max=0.0), "t_max"),
    (dict(engine="stochastic", n_traj=0), "n_traj"),
    (dict(engine="bogus"), "engine"),
])
def test_validation_names_the_field(kw, field):
    base = dict(name="x", engine="stochastic", initial=LS, params=ModelParams())
    base.update(kw)
    with pytest.raises(ScenarioError) as info:
        Scenario(**base).validate()
    assert info.value.field == field


def test_analytic_sweep_over_model_keys_rejected():
    sc = Scenario("x", "analytic", LS, RawParams(1, 1), sweep={"v": (1.0,)})
    with pytest.raises(ScenarioError, match="v=0"):
        sc.validate()


def test_one_result_per_sweep_point():
    sc = replace(PRESETS["fig5"], compare_mixed=False)
    results = run_scenario(sc)
    assert len(results) == 9
    assert [r.label for r in results][:3] == ["initial=WDS,v=0", "initial=WDS,v=5", "initial=WDS,v=-5"]
    for r in results:
        assert r.scenario.sweep == {}
        assert r.scenario.dt == r.dt and r.scenario.output_stride == r.output_stride


def test_fig1c_purity_decay_accelerates_with_omega():
    results = run_scenario(PRESETS["fig1c"])
    at_half = [r.series.purity[50] for r in results]
    assert all(a > b for a, b in zip(at_half, at_half[1:]))


def test_fig2_self_trapping_above_four():
    sc = replace(PRESETS["fig2"], t_max=20.0)
    for r in run_scenario(sc):
        v = abs(r.point.params.v)
        if v == 4.0:
            # separatrix: rho_RR runs into the half-filling line, where rounding decides the side
            assert r.series.rho_RR.min() < 0.5 + 1e-6, r.label
        else:
            assert is_self_trapped(r.series) is (v > 4), r.label


def test_fig8_relaxation_grows_with_gamma():
    sc = replace(PRESETS["fig8"], n_traj=300, seed=3)
    results = run_scenario(sc)
    final = [r.series.purity[-1] for r in results]
    assert final[0] == pytest.approx(1.0)
    assert all(a > b for a, b in zip(final, final[1:]))
    assert all(isinstance(r.series, EnsembleResult) for r in results)


def test_wds_distinguishability():
    sc = Scenario("wds", "deterministic", WDS, ModelParams(), sweep={"v": (0.0, 5.0, -5.0)})
    reports = {r.label: r for r in compare_pure_mixed(sc)}
    v0 = reports["v=0"]
    assert not v0.by_population and v0.by_coherence
    assert reports["v=5"].by_population and reports["v=-5"].by_population
    # the mixture carries no coherence, so the sign of v cannot matter for it
    m5, m_5 = reports["v=5"].mixed, reports["v=-5"].mixed
    assert np.allclose(m5.rho_RR, m_5.rho_RR, atol=1e-12)


def test_ls_matches_its_own_mixture():
    sc = Scenario("ls", "deterministic", LS, ModelParams(1.0, 5.0))
    (rep,) = compare_pure_mixed(sc)
    assert not rep.distinguishable and np.all(rep.delta_Z == 0.0)


def test_analytic_compare_uses_the_same_grid():
    (rep,) = compare_pure_mixed(replace(PRESETS["fig1a"], sweep={}))
    assert rep.pure.same_grid(rep.mixed)
    assert rep.by_population
    assert rep.times[-1] == 8.0


def test_stochastic_threshold_tracks_stderr():
    sc = Scenario("s", "stochastic", WDS, ModelParams(1.0, 5.0, 1.6e-3), t_max=2.0, n_traj=200)
    (rep,) = compare_pure_mixed(sc)
    se = np.hypot(rep.pure.stderr["rho_RR"], rep.mixed.stderr["rho_RR"])
    assert np.allclose(rep.threshold_rho_RR, np.maximum(5 * se, 1e-6))
    assert rep.by_population
    assert [r.branch for r in rep.runs] == ["pure", "mixed"]
