"""Experiment configuration: a key = value text file, every key overridable by a flag of the same name.

File format::

    # comments start with '#'
    booster = qsmoothboost
    gamma = 0.1875
    seeds = 0..29          # inclusive integer range, or a comma list
    sweep_m = 64, 128, 256

Lists are comma separated. Booleans are ``true``/``false``. ``m`` is an
integer or ``from-planner``.
"""
from __future__ import annotations

import math
import os
from dataclasses import MISSING, asdict, dataclass, field, fields, replace

from ..dataset import FAMILIES, SyntheticTask, sample_size
from ..errors import ConfigurationError

BOOSTERS = ("adaboost", "smoothboost", "qsmoothboost")
BACKENDS = ("exact", "cost-model")
AXES = ("m", "gamma", "epsilon")


@dataclass(frozen=True)
class ExperimentConfig:
    gamma: float
    booster: str = "smoothboost"
    backend: str = "exact"
    task: str = "majority"
    n: int = 20
    k: int = 5
    lower: float = 0.5
    upper: float = 1.0
    p_one: float = 0.5
    noise_rate: float = 0.0
    epsilon: float = 1 / 3
    delta: float = 1 / 3
    kappa: float = 0.0  # 0 means epsilon / 2.2
    W: int = 32
    m: int | str = 128
    m_cap: int = 0  # 0 means no cap
    vc_dim: int = 0  # 0 means the stump bound for the task
    c_D: float = 1.0
    rounds: int = 200  # adaboost only
    cap: int = 0  # 0 means the default iteration cap
    feed: str = "default"  # default | weighted
    shortcut: bool = False
    memoize: bool = False
    seeds: tuple = (0,)
    heldout_factor: int = 10
    sweep_m: tuple = ()
    sweep_gamma: tuple = ()
    sweep_epsilon: tuple = ()
    fit: tuple = ("m",)
    workers: int = 1
    output: str = "results"

    def __post_init__(self):
        if self.booster not in BOOSTERS:
            raise ConfigurationError(f"booster: expected one of {BOOSTERS}, got {self.booster!r}")
        if self.backend not in BACKENDS:
            raise ConfigurationError(f"backend: expected one of {BACKENDS}, got {self.backend!r}")
        if self.task not in FAMILIES:
            raise ConfigurationError(f"task: unsupported family {self.task!r}")
        if self.feed not in ("default", "weighted"):
            raise ConfigurationError("feed: expected 'default' or 'weighted'")
        if not 0 < self.gamma <= 0.5:
            raise ConfigurationError("gamma: must lie in (0, 1/2]")
        for key in ("epsilon", "delta"):
            if not 0 < getattr(self, key) < 1:
                raise ConfigurationError(f"{key}: must lie in (0, 1)")
        if not 0 <= self.kappa < 1:
            raise ConfigurationError("kappa: must lie in [0, 1)")
        if self.m != "from-planner" and (not isinstance(self.m, int) or self.m < 1):
            raise ConfigurationError("m: expected a positive integer or 'from-planner'")
        for key in ("W", "heldout_factor", "workers", "rounds"):
            if getattr(self, key) < 1:
                raise ConfigurationError(f"{key}: must be >= 1")
        for key in ("m_cap", "vc_dim", "cap"):
            if getattr(self, key) < 0:
                raise ConfigurationError(f"{key}: must be >= 0")
        if not self.seeds:
            raise ConfigurationError("seeds: need at least one seed")
        for ax in self.fit:
            if ax not in AXES:
                raise ConfigurationError(f"fit: unknown axis {ax!r}")

    # -- derived values ----------------------------------------------------

    def make_task(self) -> SyntheticTask:
        n = 1 if self.task == "threshold" else self.n
        return SyntheticTask(self.task, n, self.k, self.lower, self.upper, self.p_one, self.noise_rate)

    @property
    def kappa_value(self) -> float:
        return self.kappa if self.kappa > 0 else self.epsilon / 2.2

    @property
    def vc_dimension(self) -> int:
        if self.vc_dim:
            return self.vc_dim
        if self.task == "threshold":
            return 2
        # at most 2n + 2 distinct stumps on the Boolean cube
        return max(1, int(math.floor(math.log2(2 * self.n + 2))))

    def plan(self):
        return sample_size(self.vc_dimension, self.epsilon, self.delta, self.gamma, self.c_D)

    def resolved_m(self) -> tuple[int, int | None]:
        """(m actually used, planner value or None)."""
        planned = None
        if self.m == "from-planner":
            planned = self.plan().m_required
            m = planned
        else:
            m = self.m
        if self.m_cap:
            m = min(m, self.m_cap)
        return m, planned

    def axes(self) -> dict:
        return {ax: getattr(self, f"sweep_{ax}") for ax in AXES if getattr(self, f"sweep_{ax}")}

    def with_values(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ", ".join(str(x) for x in v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


_FIELDS = {f.name: f for f in fields(ExperimentConfig)}
_INT_LISTS = {"seeds", "sweep_m"}
_FLOAT_LISTS = {"sweep_gamma", "sweep_epsilon"}
_STR_LISTS = {"fit"}


def config_keys() -> list[str]:
    return list(_FIELDS)


def _int(key, text):
    try:
        return int(text)
    except ValueError:
        raise ConfigurationError(f"{key}: expected an integer, got {text!r}") from None


def _float(key, text):
    try:
        if "/" in text:
            a, b = text.split("/", 1)
            return float(a) / float(b)
        return float(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigurationError(f"{key}: expected a number, got {text!r}") from None


def parse_value(key: str, text: str):
    if key not in _FIELDS:
        raise ConfigurationError(f"unknown configuration key {key!r}")
    text = text.strip()
    if key in _INT_LISTS:
        if ".." in text:
            a, b = text.split("..", 1)
            return tuple(range(_int(key, a.strip()), _int(key, b.strip()) + 1))
        return tuple(_int(key, t.strip()) for t in text.split(",") if t.strip())
    if key in _FLOAT_LISTS:
        return tuple(_float(key, t.strip()) for t in text.split(",") if t.strip())
    if key in _STR_LISTS:
        return tuple(t.strip() for t in text.split(",") if t.strip())
    default = _FIELDS[key].default
    if key == "m":
        return text if text == "from-planner" else _int(key, text)
    if key == "gamma":
        return _float(key, text)
    if isinstance(default, bool):
        if text.lower() not in ("true", "false", "1", "0", "yes", "no"):
            raise ConfigurationError(f"{key}: expected true or false, got {text!r}")
        return text.lower() in ("true", "1", "yes")
    if isinstance(default, int):
        return _int(key, text)
    if isinstance(default, float):
        return _float(key, text)
    return text


def parse_config_text(text: str) -> dict:
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        raw[key] = parse_value(key, value)
    return raw


def build_config(values: dict) -> ExperimentConfig:
    for f in fields(ExperimentConfig):
        if f.default is MISSING and f.name not in values:
            raise ConfigurationError(f"missing required key {f.name!r}")
    unknown = set(values) - set(_FIELDS)
    if unknown:
        raise ConfigurationError(f"unknown configuration key {sorted(unknown)[0]!r}")
    return ExperimentConfig(**values)


def load_config(path: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """File values first, then ``overrides`` (already-parsed or raw strings)."""
    values = {}
    if path is not None:
        if not os.path.isfile(path):
            raise ConfigurationError(f"config: no such file {path!r}")
        with open(path) as fh:
            values.update(parse_config_text(fh.read()))
    for key, v in (overrides or {}).items():
        values[key] = parse_value(key, v) if isinstance(v, str) else v
    return build_config(values)
