"""Scenario definitions, built-in figure presets, and sweep execution."""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field, replace
from typing import Any, Union

import numpy as np

from . import analytic, meanfield
from .ensemble import EnsembleConfig, run_ensemble
from .series import EnsembleResult, TimeSeries
from .types import InitialState, ModelParams, ParameterError, RawParams

ENGINES = ("analytic", "deterministic", "stochastic")
RAW_KEYS = ("omega", "gamma", "E_m")
MODEL_KEYS = ("Omega", "v", "Gamma")
SWEEP_KEYS = RAW_KEYS + MODEL_KEYS + ("initial",)

# default output spacing in time units
SAMPLE_SPACING = {"analytic": 0.01, "deterministic": 0.01, "stochastic": 0.1}

Params = Union[RawParams, ModelParams]


class ScenarioError(ValueError):
    """Invalid scenario; ``field`` names the offending entry when known."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


@dataclass(frozen=True)
class Scenario:
    name: str
    engine: str
    initial: InitialState
    params: Params
    sweep: dict[str, tuple] = field(default_factory=dict)
    t_max: float = 5.0
    dt: float | None = None
    n_traj: int = 10_000
    seed: int = 0
    output_stride: int | None = None
    workers: int = 1
    compare_mixed: bool = False
    preset: str | None = field(default=None, compare=False)
    description: str = field(default="", compare=False)

    def validate(self) -> None:
        if self.engine not in ENGINES:
            raise ScenarioError(f"engine must be one of {', '.join(ENGINES)}", "engine")
        if self.engine == "analytic":
            if not isinstance(self.params, RawParams):
                raise ScenarioError("engine=analytic takes omega/gamma, not rescaled parameters", "params")
            bad = set(self.sweep) & set(MODEL_KEYS)
            if bad:
                raise ScenarioError("engine=analytic requires v=0 and raw parameters; "
                                    f"cannot sweep {sorted(bad)}", "sweep")
        else:
            if not isinstance(self.params, ModelParams):
                raise ScenarioError(f"engine={self.engine} takes Omega/v/Gamma, not omega/gamma", "params")
            bad = set(self.sweep) & set(RAW_KEYS)
            if bad:
                raise ScenarioError(f"cannot sweep raw parameters {sorted(bad)} with engine={self.engine}", "sweep")
        if self.engine == "deterministic":
            gammas = list(self.sweep.get("Gamma", ())) + [self.params.Gamma]
            if any(g != 0 for g in gammas):
                raise ScenarioError("engine=deterministic requires Gamma=0; use engine=stochastic", "Gamma")
        for key, values in self.sweep.items():
            if key not in SWEEP_KEYS:
                raise ScenarioError(f"unknown sweep key {key!r}", key)
            if len(values) == 0:
                raise ScenarioError(f"sweep over {key} is empty", key)
        if not self.t_max > 0:
            raise ScenarioError("t_max must be > 0", "t_max")
        if self.dt is not None and not self.dt > 0:
            raise ScenarioError("dt must be > 0", "dt")
        if self.n_traj < 1:
            raise ScenarioError("n_traj must be >= 1", "n_traj")
        if not 0 <= self.seed < 2 ** 64:
            raise ScenarioError("seed must be a 64-bit unsigned integer", "seed")
        if self.output_stride is not None and self.output_stride < 1:
            raise ScenarioError("output_stride must be >= 1", "output_stride")
        if self.compare_mixed and self.initial.is_mixed and "initial" not in self.sweep:
            raise ScenarioError("compare_mixed needs a pure initial state", "initial")
        for point in self.points():
            # parameter constructors carry the range checks
            if point.initial.is_mixed and self.compare_mixed:
                raise ScenarioError("compare_mixed needs pure initial states", "initial")

    def points(self) -> list[SweepPoint]:
        keys = list(self.sweep)
        out = []
        for combo in itertools.product(*(self.sweep[k] for k in keys)):
            values = dict(zip(keys, combo))
            initial = self.initial
            if "initial" in values:
                initial = InitialState.named(values["initial"])
            updates = {k: float(v) for k, v in values.items() if k != "initial"}
            try:
                params = replace(self.params, **updates)
            except ParameterError as exc:
                raise ScenarioError(str(exc), next(iter(updates), None)) from None
            label = ",".join(f"{k}={_fmt(v)}" for k, v in values.items()) or "base"
            out.append(SweepPoint(label, values, initial, params))
        return out

    def at_point(self, point: SweepPoint) -> Scenario:
        """The single-run scenario that reproduces one sweep point."""
        return replace(self, initial=point.initial, params=point.params, sweep={})


def _fmt(v: Any) -> str:
    return f"{v:g}" if isinstance(v, (int, float)) else str(v)


@dataclass(frozen=True)
class SweepPoint:
    label: str
    values: dict[str, Any]
    initial: InitialState
    params: Params


@dataclass
class LabeledResult:
    label: str
    branch: str  # "pure" or "mixed"
    point: SweepPoint
    series: TimeSeries
    dt: float
    output_stride: int
    scenario: Scenario  # single point, dt and stride resolved
    wall_time: float = 0.0


def resolve_dt(sc: Scenario, params: Params) -> float:
    if sc.dt is not None:
        return sc.dt
    if sc.engine == "analytic":
        return SAMPLE_SPACING["analytic"]
    if sc.engine == "deterministic":
        return meanfield.default_dt(params.v)
    return 1e-3


def resolve_stride(sc: Scenario, dt: float) -> int:
    if sc.output_stride is not None:
        return sc.output_stride
    if sc.engine == "analytic":
        return 1
    return max(1, int(round(SAMPLE_SPACING[sc.engine] / dt)))


def _run_single(sc: Scenario, initial: InitialState, params: Params):
    dt = resolve_dt(sc, params)
    stride = resolve_stride(sc, dt)
    if sc.engine == "analytic":
        n = meanfield.step_count(dt, sc.t_max, stride)
        times = meanfield.sample_times(sc.t_max, n // stride + 1)
        return analytic.evolve_series(initial, params, times), dt, stride
    if sc.engine == "deterministic":
        return meanfield.propagate(initial, params, dt, sc.t_max, stride), dt, stride
    cfg = EnsembleConfig(n_traj=sc.n_traj, dt=dt, t_max=sc.t_max, seed=sc.seed,
                         output_stride=stride, workers=sc.workers)
    return run_ensemble(initial, params, cfg), dt, stride


def run_scenario(sc: Scenario) -> list[LabeledResult]:
    """One result per sweep point (two when ``compare_mixed`` is set)."""
    sc.validate()
    results = []
    for point in sc.points():
        branches = [("pure", point.initial)]
        if sc.compare_mixed:
            branches.append(("mixed", point.initial.incoherent_mixture()))
        for branch, init in branches:
            t0 = time.perf_counter()
            series, dt, stride = _run_single(sc, init, point.params)
            wall = time.perf_counter() - t0
            series.meta.update(scenario=sc.name, label=point.label, branch=branch)
            single = replace(sc.at_point(point), initial=init, compare_mixed=False,
                             dt=dt, output_stride=stride)
            results.append(LabeledResult(point.label, branch, point, series, dt, stride, single, wall))
    return results


@dataclass
class DistinguishabilityReport:
    label: str
    pure: TimeSeries
    mixed: TimeSeries
    delta_Z: np.ndarray
    delta_rho_RR: np.ndarray
    delta_coherence2: np.ndarray
    threshold_rho_RR: np.ndarray
    threshold_coherence2: np.ndarray
    runs: tuple = ()  # the (pure, mixed) LabeledResult pair

    @property
    def times(self) -> np.ndarray:
        return self.pure.times

    @property
    def max_delta_rho_RR(self) -> float:
        return float(np.max(np.abs(self.delta_rho_RR)))

    @property
    def by_population(self) -> bool:
        return bool(np.any(np.abs(self.delta_rho_RR) > self.threshold_rho_RR))

    @property
    def by_coherence(self) -> bool:
        return bool(np.any(np.abs(self.delta_coherence2) > self.threshold_coherence2))

    @property
    def distinguishable(self) -> bool:
        return self.by_population


DETERMINISTIC_THRESHOLD = 1e-6
STOCHASTIC_SIGMAS = 5.0


def _threshold(a: TimeSeries, b: TimeSeries, key: str) -> np.ndarray:
    if isinstance(a, EnsembleResult) and isinstance(b, EnsembleResult) and a.n_traj > 1:
        se = np.hypot(a.stderr[key], b.stderr[key])
        return np.maximum(STOCHASTIC_SIGMAS * se, DETERMINISTIC_THRESHOLD)
    return np.full(len(a), DETERMINISTIC_THRESHOLD)


def compare_pure_mixed(sc: Scenario) -> list[DistinguishabilityReport]:
    """Run each pure initial state against its incoherent mixture on a shared grid."""
    sc = replace(sc, compare_mixed=True)
    results = run_scenario(sc)
    reports = []
    for pure, mixed in zip(results[0::2], results[1::2]):
        a, b = pure.series, mixed.series
        if not a.same_grid(b):
            raise ScenarioError("pure and mixed runs produced different time grids")
        reports.append(DistinguishabilityReport(
            label=pure.label,
            pure=a,
            mixed=b,
            delta_Z=a.Z - b.Z,
            delta_rho_RR=a.rho_RR - b.rho_RR,
            delta_coherence2=a.coherence2 - b.coherence2,
            threshold_rho_RR=_threshold(a, b, "rho_RR"),
            threshold_coherence2=_threshold(a, b, "coherence2"),
            runs=(pure, mixed),
        ))
    return reports


# ---------------------------------------------------------------------------
# built-in presets, one per figure regime

_LS_V = (0.0, 3.0, -3.0, 3.9, -3.9, 4.0, -4.0, 5.0, -5.0, 10.0, -10.0)
_DELOC_V = (0.0, 2.0, 3.0, 5.0, 10.0, -2.0, -3.0, -5.0, -10.0)
_GAMMAS = (0.0, 1.6e-4, 1.6e-3, 1.6e-2)
_Y0_STATE = InitialState.custom(1 / math.sqrt(2), -1j / math.sqrt(2))  # X0 = Z0 = 0, Y0 = 1


def _presets() -> dict[str, Scenario]:
    ls, wds, sds = (InitialState.named(n) for n in ("LS", "WDS", "SDS"))
    det = dict(engine="deterministic", t_max=5.0)
    sto = dict(engine="stochastic", t_max=20.0)
    return {
        "fig1a": Scenario(
            "fig1a", "analytic", _Y0_STATE, RawParams(omega=0.1, gamma=1.0),
            sweep={"omega": (0.1, 0.2, 0.4, 0.8)}, t_max=8.0, compare_mixed=True,
            description="Delta Z / Y0 vs t, dephasing-dominant (omega < gamma = 1)"),
        "fig1b": Scenario(
            "fig1b", "analytic", _Y0_STATE, RawParams(omega=2.0, gamma=1.0),
            sweep={"omega": (2.0, 4.0, 6.0)}, t_max=8.0, compare_mixed=True,
            description="Delta Z / Y0 vs t, tunneling-dominant (omega > gamma = 1)"),
        "fig1c": Scenario(
            "fig1c", "analytic", ls, RawParams(omega=0.2, gamma=1.0),
            sweep={"omega": (0.2, 0.4, 0.8, 2.0, 4.0, 8.0)}, t_max=5.0,
            description="purity vs t for LS, gamma = 1, several omega"),
        "fig2": Scenario(
            "fig2", initial=ls, params=ModelParams(1.0, 0.0, 0.0), sweep={"v": _LS_V}, **det,
            description="LS, Gamma = 0: rho_RR and |rho_LR|^2, self-trapping for |v| > 4"),
        "fig3": Scenario(
            "fig3", initial=wds, params=ModelParams(1.0, 0.0, 0.0), sweep={"v": _DELOC_V}, **det,
            description="WDS, Gamma = 0, positive and negative v"),
        # the negative-v panel uses the same full v list as fig3, even though its
        # legend only names v = 0 and -10
        "fig4": Scenario(
            "fig4", initial=sds, params=ModelParams(1.0, 0.0, 0.0), sweep={"v": _DELOC_V}, **det,
            description="SDS, Gamma = 0, positive and negative v"),
        "fig5": Scenario(
            "fig5", initial=wds, params=ModelParams(1.0, 0.0, 0.0),
            sweep={"initial": ("WDS", "SDS", "LS"), "v": (0.0, 5.0, -5.0)}, compare_mixed=True, **det,
            description="pure vs incoherent mixture for WDS/SDS (LS reference), v = 0, +-5"),
        "fig6": Scenario(
            "fig6", initial=ls, params=ModelParams(1.0, 0.0, 1.6e-4),
            sweep={"Gamma": (1.6e-4, 1.6e-3), "v": _LS_V}, **sto,
            description="LS with weak decoherence: rho_RR and purity"),
        # one legend entry between v = 0 and +-3.9 is unlabeled; it is taken to be
        # v = +-3, the value whose stationary state this regime is known for
        "fig7": Scenario(
            "fig7", initial=ls, params=ModelParams(1.0, 0.0, 1.6e-2),
            sweep={"v": _LS_V}, **sto,
            description="LS, Gamma = 1.6e-2: purity and rho_RR relax to v-dependent values"),
        "fig8": Scenario(
            "fig8", initial=ls, params=ModelParams(1.0, 5.0, 0.0),
            sweep={"Gamma": _GAMMAS}, **sto,
            description="LS, v = +5, increasing Gamma"),
        "fig9": Scenario(
            "fig9", initial=sds, params=ModelParams(1.0, 0.0, 1.6e-3),
            sweep={"v": _DELOC_V}, **sto,
            description="SDS, Gamma = 1.6e-3, positive and negative v"),
        "fig10": Scenario(
            "fig10", initial=wds, params=ModelParams(1.0, 0.0, 1.6e-3),
            sweep={"v": _DELOC_V}, **sto,
            description="WDS, Gamma = 1.6e-3, positive and negative v"),
        "fig11": Scenario(
            "fig11", initial=wds, params=ModelParams(1.0, 5.0, 0.0),
            sweep={"v": (5.0, -5.0), "Gamma": _GAMMAS}, **sto,
            description="WDS, v = +-5, increasing Gamma"),
        "fig12": Scenario(
            "fig12", initial=sds, params=ModelParams(1.0, 5.0, 0.0),
            sweep={"v": (5.0, -5.0), "Gamma": _GAMMAS}, **sto,
            description="SDS, v = +-5, increasing Gamma"),
    }


PRESETS = _presets()


def preset(name: str) -> Scenario:
    try:
        sc = PRESETS[name]
    except KeyError:
        raise ScenarioError(f"unknown preset {name!r}; see list-presets", "preset") from None
    return replace(sc, preset=name)
