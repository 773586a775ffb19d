"""Run configuration: JSON schema, scenario presets and dotted overrides.

A configuration is a single JSON object.  Unknown keys are rejected with the
dotted path of the offending field, so a typo never silently falls back to a
default.  Resolution order is preset (``scenario``), then the file, then
``--set key=value`` overrides.
"""
from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .descent import DescentConfig
from .phase_field import ModelParams
from .profile import delta, epsilon_for_width
from .scenarios import EXPERIMENTS, TRUTHS, ExperimentConfig, TruthField, experiment

SCHEMA_VERSION = 1
STUDY_KINDS = ("width", "gamma", "sigma", "noise")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TruthSpec:
    name: str = "circular_disk"
    smin: float | None = None
    smax: float | None = None
    mollify: float = 0.0

    def field(self) -> TruthField:
        preset = TruthField.preset(self.name)
        smin = preset.smin if self.smin is None else self.smin
        smax = preset.smax if self.smax is None else self.smax
        return TruthField(self.name, smin, smax)


@dataclass(frozen=True)
class ExperimentSpec:
    name: str = "full_boundary_center"
    n_sources: int = 10

    def build(self, lx: float, lz: float) -> ExperimentConfig:
        return experiment(self.name, lx, lz, self.n_sources)


@dataclass(frozen=True)
class GridSpec:
    lx: float = 1.0
    lz: float = 1.0
    hbar: float = 1 / 80
    h: float | None = None  # FD spacing; defaults to hbar

    @property
    def h_fd(self) -> float:
        return self.hbar if self.h is None else self.h


@dataclass(frozen=True)
class ModelSpec:
    eps: float | None = None
    width: float | None = 8.0  # interface width in units of hbar
    gamma: float = 1e-2
    sigma: float = 1e-4
    contrast_rescale: bool = False
    weight_by_noise: bool = True
    dirichlet_value: object = "truth"  # "truth" or a number in [-1, 1]
    lumped: bool = False


@dataclass(frozen=True)
class DataSpec:
    nu: float = 0.0
    seed: int = 0
    refine: int = 8


@dataclass(frozen=True)
class ForwardSpec:
    source: tuple | None = None
    contrast_ratios: tuple | None = None


@dataclass(frozen=True)
class StudySpec:
    vary: str | None = None
    values: tuple = ()
    seeds: tuple = (0,)


@dataclass(frozen=True)
class RunConfig:
    version: int = SCHEMA_VERSION
    scenario: str | None = None
    truth: TruthSpec = field(default_factory=TruthSpec)
    experiment: ExperimentSpec = field(default_factory=ExperimentSpec)
    grid: GridSpec = field(default_factory=GridSpec)
    model: ModelSpec = field(default_factory=ModelSpec)
    data: DataSpec = field(default_factory=DataSpec)
    descent: DescentConfig = field(default_factory=DescentConfig)
    forward: ForwardSpec = field(default_factory=ForwardSpec)
    study: StudySpec = field(default_factory=StudySpec)
    init: float = -1.0

    # derived quantities

    @property
    def eps(self) -> float:
        m = self.model
        if m.eps is not None:
            return float(m.eps)
        return epsilon_for_width(m.width, self.grid.hbar, m.gamma)

    @property
    def delta(self) -> float:
        return delta(self.model.gamma)

    def truth_field(self) -> TruthField:
        return self.truth.field()

    def model_params(self, smin: float | None = None, smax: float | None = None) -> ModelParams:
        tf = self.truth_field()
        m = self.model
        nu = self.data.nu if (self.data.nu > 0 and m.weight_by_noise) else None
        return ModelParams(self.eps, m.gamma, m.sigma, tf.smin if smin is None else smin,
                           tf.smax if smax is None else smax, nu, m.contrast_rescale)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["derived"] = {"eps": self.eps, "delta": self.delta, "h": self.grid.h_fd}
        return d


_SECTIONS = {
    "truth": TruthSpec, "experiment": ExperimentSpec, "grid": GridSpec, "model": ModelSpec,
    "data": DataSpec, "descent": DescentConfig, "forward": ForwardSpec, "study": StudySpec,
}


def _geometry_preset(truth: str, exp: str) -> dict:
    return {
        "truth": {"name": truth},
        "experiment": {"name": exp},
        "model": {"gamma": 1e-2, "sigma": 1e-4, "width": 8.0, "contrast_rescale": True},
        "data": {"nu": 1e-2, "refine": 8},
        "descent": {"max_iter": 100000},
    }


PRESETS = {
    # circular disk, one central source, boundary receivers
    "disk_study": {
        "truth": {"name": "circular_disk", "smin": 2.0, "smax": 4.0},
        "experiment": {"name": "full_boundary_center"},
        "grid": {"hbar": 1 / 80},
        "model": {"gamma": 1e-2, "sigma": 1e-4, "width": 8.0, "contrast_rescale": True},
        "data": {"nu": 0.0, "refine": 8},
        "descent": {"max_iter": 100000},
    },
    "contrast_study": {
        "truth": {"name": "shielded_disk", "smin": 1.0},
        "forward": {"source": [0.0, 0.5], "contrast_ratios": [0.4, 0.8, 1.6]},
    },
}
for _t in TRUTHS:
    for _e in ("random", "wells"):
        PRESETS[f"{_t}/{_e}"] = _geometry_preset(_t, _e)


def _deep_merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def parse_override(text: str) -> tuple[list[str], object]:
    """``a.b=value``; the value is read as JSON, falling back to a string."""
    if "=" not in text:
        raise ConfigError(f"override {text!r}: expected key=value")
    key, raw = text.split("=", 1)
    path = key.strip().split(".")
    if not all(path):
        raise ConfigError(f"override {text!r}: empty key component")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return path, value


def _set_path(d: dict, path: list[str], value) -> None:
    for k in path[:-1]:
        nxt = d.setdefault(k, {})
        if not isinstance(nxt, dict):
            raise ConfigError(f"{'.'.join(path)}: {k!r} is not a section")
        d = nxt
    d[path[-1]] = value


def _build_section(cls, data, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    known = {f.name for f in fields(cls)}
    for k in data:
        if k not in known:
            raise ConfigError(f"{where}.{k}: unknown key")
    kwargs = {}
    for k, v in data.items():
        kwargs[k] = tuple(v) if isinstance(v, list) else v
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _check_number(value, where: str, positive: bool = True, allow_none: bool = False):
    if value is None and allow_none:
        return
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(f"{where}: must be positive")


def validate(cfg: RunConfig) -> None:
    if cfg.version != SCHEMA_VERSION:
        raise ConfigError(f"version: unsupported schema version {cfg.version!r}")
    if cfg.truth.name not in TRUTHS:
        raise ConfigError(f"truth.name: unknown truth {cfg.truth.name!r}")
    if cfg.experiment.name not in EXPERIMENTS:
        raise ConfigError(f"experiment.name: unknown experiment {cfg.experiment.name!r}")
    g = cfg.grid
    for name in ("lx", "lz", "hbar"):
        _check_number(getattr(g, name), f"grid.{name}")
    _check_number(g.h, "grid.h", allow_none=True)
    ratio = g.hbar / g.h_fd
    if abs(ratio - round(ratio)) > 1e-9 * ratio:
        raise ConfigError("grid.h: must divide grid.hbar")
    m = cfg.model
    if (m.eps is None) == (m.width is None):
        raise ConfigError("model: give exactly one of eps and width")
    _check_number(m.eps, "model.eps", allow_none=True)
    _check_number(m.width, "model.width", allow_none=True)
    _check_number(m.gamma, "model.gamma")
    _check_number(m.sigma, "model.sigma", positive=False)
    if m.sigma < 0:
        raise ConfigError("model.sigma: must be non-negative")
    dv = m.dirichlet_value
    if dv != "truth":
        if isinstance(dv, bool) or not isinstance(dv, (int, float)) or not -1 <= dv <= 1:
            raise ConfigError("model.dirichlet_value: expected 'truth' or a number in [-1, 1]")
    if not -1 <= cfg.init <= 1:
        raise ConfigError("init: must lie in [-1, 1]")
    d = cfg.data
    _check_number(d.nu, "data.nu", positive=False)
    if d.nu < 0:
        raise ConfigError("data.nu: must be non-negative")
    if isinstance(d.refine, bool) or not isinstance(d.refine, int) or d.refine < 1:
        raise ConfigError("data.refine: must be a positive integer")
    if not isinstance(d.seed, int) or isinstance(d.seed, bool):
        raise ConfigError("data.seed: must be an integer")
    t = cfg.truth
    tf_smin = t.smin if t.smin is not None else TruthField.preset(t.name).smin
    tf_smax = t.smax if t.smax is not None else TruthField.preset(t.name).smax
    if not 0 < tf_smin < tf_smax:
        raise ConfigError("truth: need 0 < smin < smax")
    f = cfg.forward
    if f.source is not None and len(f.source) != 2:
        raise ConfigError("forward.source: expected [x, z]")
    if f.contrast_ratios is not None:
        for r in f.contrast_ratios:
            _check_number(r, "forward.contrast_ratios")
    s = cfg.study
    if s.vary is not None and s.vary not in STUDY_KINDS:
        raise ConfigError(f"study.vary: expected one of {STUDY_KINDS}")


def resolve(raw: dict | None = None, overrides: list[str] = ()) -> RunConfig:
    """Build a validated :class:`RunConfig` from a raw dict and overrides."""
    raw = copy.deepcopy(raw or {})
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    user = copy.deepcopy(raw)
    for text in overrides:
        path, value = parse_override(text)
        _set_path(user, path, value)
    scenario = user.get("scenario")
    if scenario is not None and scenario not in PRESETS:
        raise ConfigError(f"scenario: unknown preset {scenario!r}")
    merged = _deep_merge(PRESETS.get(scenario, {}), user)
    # an explicit eps replaces the preset width, and vice versa
    um = user.get("model", {}) if isinstance(user.get("model"), dict) else {}
    mm = merged.get("model")
    if isinstance(mm, dict):
        if "eps" in um and "width" not in um:
            mm["width"] = None
        elif "eps" not in um and "width" in um:
            mm["eps"] = None
    known = {f.name for f in fields(RunConfig)}
    for k in merged:
        if k not in known:
            raise ConfigError(f"{k}: unknown key")
    kwargs = {}
    for k, v in merged.items():
        if k in _SECTIONS:
            kwargs[k] = _build_section(_SECTIONS[k], v, k)
        else:
            kwargs[k] = v
    cfg = RunConfig(**kwargs)
    validate(cfg)
    return cfg


def load(path: str | Path | None, overrides: list[str] = ()) -> RunConfig:
    raw = {}
    if path is not None:
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        except OSError as exc:
            raise ConfigError(f"{path}: {exc.strerror}") from None
    return resolve(raw, overrides)
