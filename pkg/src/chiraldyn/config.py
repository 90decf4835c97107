"""Scenario config files and run manifests.

Config files are INI-style with the sections ``[model]``, ``[initial]``,
``[ensemble]``, ``[sweep]`` and ``[output]``.  Keys are case-sensitive:
``Omega``/``Gamma`` are the rescaled model parameters, ``omega``/``gamma``
the physical ones used by the analytic engine.

Example::

    [model]
    engine = stochastic
    v = 5
    Gamma = 1.6e-3

    [initial]
    state = LS

    [ensemble]
    n_traj = 2000
    t_max = 20

    [sweep]
    v = 5, -5
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field, replace

from .scenarios import (
    ENGINES,
    MODEL_KEYS,
    RAW_KEYS,
    Scenario,
    ScenarioError,
    preset as get_preset,
)
from .types import InitialKind, InitialState, ModelParams, ParameterError, RawParams, StateError, parse_complex

SECTIONS = {
    "model": ("engine", "preset") + MODEL_KEYS + RAW_KEYS,
    "initial": ("state", "a_L", "a_R", "p_L", "p_R", "compare_mixed"),
    "ensemble": ("n_traj", "dt", "t_max", "seed", "output_stride", "workers"),
    "sweep": ("v", "Gamma", "Omega", "omega", "gamma", "E_m", "initial"),
    "output": ("name", "dir"),
}
# present in emitted manifests; skipped when a manifest is parsed as a config
INFO_SECTION = "manifest"


class ConfigError(ValueError):
    """Config problem located at ``line`` (1-based) in ``[section] key``."""

    def __init__(self, message: str, section: str | None = None, key: str | None = None,
                 line: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if section is not None:
            where.append(f"[{section}]" + (f" {key}" if key else ""))
        super().__init__(f"{': '.join([', '.join(where), message]) if where else message}")
        self.section = section
        self.key = key
        self.line = line


@dataclass
class ConfigDocument:
    scenario: Scenario
    out_dir: str | None = None


def _key_lines(text: str) -> dict[tuple[str, str], int]:
    lines = {}
    section = None
    for n, raw in enumerate(text.splitlines(), 1):
        s = raw.strip()
        if not s or s[0] in "#;":
            continue
        m = re.fullmatch(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip()
            lines[(section, "")] = n
            continue
        m = re.match(r"([^=:\s]+)\s*[=:]", s)
        if m and section is not None:
            lines.setdefault((section, m.group(1)), n)
    return lines


class _Reader:
    def __init__(self, cp: configparser.ConfigParser, lines: dict):
        self.cp = cp
        self.lines = lines

    def error(self, msg, section, key=None):
        return ConfigError(msg, section, key, self.lines.get((section, key or "")))

    def has(self, section, key):
        return self.cp.has_option(section, key)

    def raw(self, section, key):
        return self.cp.get(section, key).strip()

    def _convert(self, section, key, text, kind):
        try:
            if kind is float:
                x = float(text)
                if not math.isfinite(x):
                    raise ValueError
                return x
            if kind is int:
                return int(text)
            if kind is bool:
                low = text.lower()
                if low in ("1", "true", "yes", "on"):
                    return True
                if low in ("0", "false", "no", "off"):
                    return False
                raise ValueError
            if kind is complex:
                return parse_complex(text)
        except ValueError:
            raise self.error(f"expected {kind.__name__}, got {text!r}", section, key) from None
        return text

    def get(self, section, key, kind=str, default=None):
        if not self.has(section, key):
            return default
        return self._convert(section, key, self.raw(section, key), kind)

    def get_list(self, section, key, kind):
        items = [x.strip() for x in self.raw(section, key).split(",") if x.strip()]
        if not items:
            raise self.error("empty list", section, key)
        return tuple(self._convert(section, key, x, kind) for x in items)


def _read(text: str) -> _Reader:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r}", exc.section, exc.option, exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError("duplicate section", exc.section, None, exc.lineno) from None
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside of any section", None, None, exc.lineno) from None
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line", None, None, line) from None
    r = _Reader(cp, _key_lines(text))
    for section in cp.sections():
        if section == INFO_SECTION:
            continue
        if section not in SECTIONS:
            raise r.error(f"unknown section (expected one of {', '.join(SECTIONS)})", section)
        for key in cp.options(section):
            if key not in SECTIONS[section]:
                raise r.error("unknown key", section, key)
    return r


def _initial(r: _Reader, base: InitialState | None) -> InitialState:
    s = "initial"
    if not r.has(s, "state"):
        for k in ("a_L", "a_R", "p_L", "p_R"):
            if r.has(s, k):
                raise r.error("requires state = custom or mixed", s, k)
        return base if base is not None else InitialState.named("LS")
    state = r.raw(s, "state")
    try:
        kind = InitialKind(state)
    except ValueError:
        names = ", ".join(k.value for k in InitialKind)
        raise r.error(f"unknown state {state!r} (expected one of {names})", s, "state") from None
    allowed = {InitialKind.CUSTOM: ("a_L", "a_R"), InitialKind.MIXED: ("p_L", "p_R")}.get(kind, ())
    for k in ("a_L", "a_R", "p_L", "p_R"):
        if r.has(s, k) and k not in allowed:
            raise r.error(f"not used with state = {state}", s, k)
    for k in allowed:
        if not r.has(s, k):
            raise r.error(f"required with state = {state}", s, k)
    try:
        if kind is InitialKind.CUSTOM:
            return InitialState.custom(r.get(s, "a_L", complex), r.get(s, "a_R", complex))
        if kind is InitialKind.MIXED:
            return InitialState.mixed(r.get(s, "p_L", float), r.get(s, "p_R", float))
    except (StateError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise r.error(str(exc), s, allowed[0]) from None
    return InitialState.named(state)


def _params(r: _Reader, engine: str, base):
    s = "model"
    raw = [k for k in RAW_KEYS if r.has(s, k)]
    model = [k for k in MODEL_KEYS if r.has(s, k)]
    if engine == "analytic":
        for k in model:
            if k == "v" and r.get(s, k, float) == 0.0:
                continue
            raise r.error("engine=analytic requires v=0 and takes omega/gamma", s, k)
        cls, keys = RawParams, raw
    else:
        if raw:
            raise r.error(f"engine={engine} takes Omega/v/Gamma (rescaled units)", s, raw[0])
        cls, keys = ModelParams, model
    values = {k: r.get(s, k, float) for k in keys}
    if not isinstance(base, cls):
        base = None
    if base is None and cls is RawParams:
        for k in ("omega", "gamma"):
            if k not in values:
                raise r.error("missing key", s, k)
    try:
        return replace(base, **values) if base is not None else cls(**values)
    except ParameterError as exc:
        bad = next((k for k in keys if str(exc).startswith(k + " ")), keys[0] if keys else None)
        raise r.error(str(exc), s, bad) from None


def _sweep(r: _Reader, base: dict) -> dict:
    s = "sweep"
    if not r.cp.has_section(s):
        return dict(base)
    out = {}
    for key in r.cp.options(s):
        kind = str if key == "initial" else float
        out[key] = r.get_list(s, key, kind)
    return out


def parse_document(text: str) -> ConfigDocument:
    r = _read(text)
    m = "model"
    base = None
    if r.has(m, "preset"):
        try:
            base = get_preset(r.raw(m, "preset"))
        except ScenarioError as exc:
            raise r.error(str(exc), m, "preset") from None

    engine = r.get(m, "engine", str, base.engine if base else None)
    if engine is None:
        raise r.error("missing key (or give a preset)", m, "engine")
    if engine not in ENGINES:
        raise r.error(f"engine must be one of {', '.join(ENGINES)}", m, "engine")

    params = _params(r, engine, base.params if base else None)
    initial = _initial(r, base.initial if base else None)
    compare = r.get("initial", "compare_mixed", bool, base.compare_mixed if base else False)

    e = "ensemble"
    kw = {}
    for key, kind in (("n_traj", int), ("dt", float), ("t_max", float), ("seed", int),
                      ("output_stride", int), ("workers", int)):
        if r.has(e, key):
            kw[key] = r.get(e, key, kind)
    if "workers" in kw and kw["workers"] < 1:
        raise r.error("must be >= 1", e, "workers")

    name = r.get("output", "name", str, base.name if base else None) or "run"
    sweep = _sweep(r, base.sweep if base else {})
    if base is not None:
        sc = replace(base, name=name, engine=engine, initial=initial, params=params,
                     sweep=sweep, compare_mixed=compare, **kw)
    else:
        sc = Scenario(name=name, engine=engine, initial=initial, params=params,
                      sweep=sweep, compare_mixed=compare, **kw)
    try:
        sc.validate()
    except (ScenarioError, ParameterError, StateError) as exc:
        key = getattr(exc, "field", None)
        section = _section_of(key, r)
        raise r.error(str(exc), section, key if section else None) from None
    return ConfigDocument(sc, r.get("output", "dir", str))


def _section_of(key, r: _Reader) -> str | None:
    if key is None:
        return None
    for section in ("sweep", "ensemble", "initial", "model"):
        if r.has(section, key):
            return section
    for section, keys in SECTIONS.items():
        if key in keys:
            return section
    return None


def parse_config(text: str) -> Scenario:
    """Validated :class:`Scenario` from config text."""
    return parse_document(text).scenario


def load_config(path) -> ConfigDocument:
    with open(path, encoding="utf-8") as fh:
        return parse_document(fh.read())


# ---------------------------------------------------------------------------
# emission

def _num(x) -> str:
    return repr(float(x)) if isinstance(x, float) else repr(x)


def scenario_to_text(sc: Scenario, out_dir: str | None = None) -> str:
    """Config text that parses back to ``sc``."""
    lines = ["[model]", f"engine = {sc.engine}"]
    keys = RAW_KEYS if isinstance(sc.params, RawParams) else MODEL_KEYS
    lines += [f"{k} = {_num(getattr(sc.params, k))}" for k in keys]

    init = sc.initial
    lines += ["", "[initial]", f"state = {init.kind.value}"]
    if init.kind is InitialKind.CUSTOM:
        lines += [f"a_L = {init.a_L0!r}", f"a_R = {init.a_R0!r}"]
    elif init.kind is InitialKind.MIXED:
        lines += [f"p_L = {init.p_L0!r}", f"p_R = {init.p_R0!r}"]
    lines.append(f"compare_mixed = {'true' if sc.compare_mixed else 'false'}")

    lines += ["", "[ensemble]", f"n_traj = {sc.n_traj}"]
    if sc.dt is not None:
        lines.append(f"dt = {sc.dt!r}")
    lines += [f"t_max = {sc.t_max!r}", f"seed = {sc.seed}"]
    if sc.output_stride is not None:
        lines.append(f"output_stride = {sc.output_stride}")
    lines.append(f"workers = {sc.workers}")

    if sc.sweep:
        lines += ["", "[sweep]"]
        for k, values in sc.sweep.items():
            lines.append(f"{k} = " + ", ".join(v if isinstance(v, str) else _num(v) for v in values))

    lines += ["", "[output]", f"name = {sc.name}"]
    if out_dir is not None:
        lines.append(f"dir = {out_dir}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to repeat one emitted run.

    ``scenario`` is the single-point scenario (sweep collapsed, dt and
    output stride resolved), so re-running it reproduces the CSV exactly.
    """

    scenario: Scenario
    label: str = "base"
    branch: str = "pure"
    code_version: str = ""
    wall_time: float = field(default=0.0, compare=False)


def emit_manifest(m: RunManifest) -> str:
    info = [
        "",
        f"[{INFO_SECTION}]",
        f"label = {m.label}",
        f"branch = {m.branch}",
        f"code_version = {m.code_version}",
        f"wall_time_s = {m.wall_time!r}",
    ]
    return scenario_to_text(m.scenario) + "\n".join(info) + "\n"


def parse_manifest(text: str) -> RunManifest:
    sc = parse_config(text)
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp.read_string(text)
    if not cp.has_section(INFO_SECTION):
        raise ConfigError("not a run manifest", INFO_SECTION)
    info = cp[INFO_SECTION]
    return RunManifest(
        scenario=sc,
        label=info.get("label", "base"),
        branch=info.get("branch", "pure"),
        code_version=info.get("code_version", ""),
        wall_time=float(info.get("wall_time_s", "0")),
    )
