"""Experiment configuration: TOML files, flag overrides and validation."""
import json
import sys
from dataclasses import asdict, dataclass, field, fields
from typing import List, Optional

from .errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

EXPERIMENTS = (
    "w1-global",
    "w1-local",
    "w1-entropy",
    "page-curve",
    "diffusion",
    "ghe-cdf",
    "design-distance",
    "concentration",
)


@dataclass
class ExperimentConfig:
    """Serializable description of one experiment run.

    List-valued keys accept either a TOML array or a comma-separated string.
    ``L`` is derived as ``LA + LB`` for every entry of ``LB_list`` unless an
    experiment (``diffusion``) uses it directly.
    """

    experiment: str = "w1-global"
    L: Optional[int] = None
    LA: int = 2
    LA1: int = 1
    LB_list: List[int] = field(default_factory=lambda: [8])
    t_list: List[int] = field(default_factory=list)
    t_max: Optional[int] = None
    t_fit: List[float] = field(default_factory=list)
    R: int = 1000
    R_list: List[int] = field(default_factory=list)
    N: int = 10
    alpha: List[float] = field(default_factory=lambda: [1.0])
    observable: str = "corr:1,2"
    ghe_reference: str = "auto"
    ghe_budget: int = 10 ** 6
    dynamics: str = "global"
    mode: str = "sampled"
    baseline: bool = False
    grid: int = 1001
    k: int = 1
    indices: str = ""
    sets: str = "1,2"
    eps_list: List[float] = field(default_factory=lambda: [0.05, 0.1, 0.2, 0.4])
    seed: int = 0
    out_dir: str = "runs"

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        positive = {"LA": self.LA, "LA1": self.LA1, "R": self.R, "N": self.N,
                    "grid": self.grid, "k": self.k}
        for key, val in positive.items():
            if not isinstance(val, int) or val < 1:
                raise ConfigError(f"{key} must be a positive integer, got {val!r}")
        for key in ("LB_list", "R_list"):
            if any(not isinstance(v, int) or v < 1 for v in getattr(self, key)):
                raise ConfigError(f"all {key} entries must be positive integers")
        if any(not isinstance(v, int) or v < 0 for v in self.t_list):
            raise ConfigError("t_list entries must be non-negative integers")
        if self.t_max is not None and self.t_max < 0:
            raise ConfigError("t_max must be non-negative")
        if self.L is not None and self.L < 1:
            raise ConfigError("L must be positive")
        if (self.L is not None and len(self.LB_list) == 1 and self.experiment != "diffusion"
                and self.L != self.LA + self.LB_list[0]):
            raise ConfigError(f"L={self.L} differs from LA + LB = {self.LA + self.LB_list[0]}")
        if not self.LB_list and self.experiment not in ("diffusion", "ghe-cdf"):
            raise ConfigError("LB_list is empty")
        if self.LA1 > self.LA:
            raise ConfigError("LA1 cannot exceed LA")
        if any(a <= 0 for a in self.alpha):
            raise ConfigError("alpha entries must be positive")
        if self.dynamics not in ("global", "brickwork"):
            raise ConfigError(f"dynamics must be global or brickwork, got {self.dynamics!r}")
        if self.mode not in ("sampled", "exhaustive"):
            raise ConfigError(f"mode must be sampled or exhaustive, got {self.mode!r}")
        if self.ghe_reference not in ("auto", "analytic", "empirical"):
            raise ConfigError(f"bad ghe_reference {self.ghe_reference!r}")
        if self.ghe_budget < 0:
            raise ConfigError("ghe_budget must be non-negative")
        if self.t_fit and len(self.t_fit) != 2:
            raise ConfigError("t_fit needs exactly two entries [t_min, t_max]")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")

    def to_dict(self):
        return asdict(self)

    def dumps(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data):
        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        values = {}
        for key, val in data.items():
            values[key] = _coerce(key, val, known[key].type)
        try:
            return cls(**values)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


def _coerce(key, val, kind):
    text = str(kind)
    try:
        if text.startswith("List") or text.startswith("typing.List"):
            item = float if "float" in text else int
            if isinstance(val, str):
                val = [v for v in val.replace(";", ",").split(",") if v.strip()]
            elif not isinstance(val, (list, tuple)):
                val = [val]
            return [_scalar(item, v) for v in val]
        if "int" in text:
            return None if val is None else _scalar(int, val)
        if kind is bool or text == "bool":
            if isinstance(val, str):
                return val.lower() in ("1", "true", "yes", "on")
            return bool(val)
        return val if val is None else str(val)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {val!r}") from exc


def _scalar(kind, v):
    if kind is int:
        f = float(v)
        if f != int(f):
            raise ValueError(f"{v!r} is not an integer")
        return int(f)
    return float(v)


def load_config(path=None, overrides=None, experiment=None):
    """Merge a TOML (or manifest JSON) file with flag overrides; flags win."""
    data = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                raw = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if str(path).endswith(".json"):
            try:
                doc = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
            data = dict(doc.get("config", doc))
        else:
            try:
                data = tomllib.loads(raw.decode())
            except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
                raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    if experiment is not None:
        if data.get("experiment", experiment) != experiment:
            raise ConfigError(f"config is for {data['experiment']!r}, not {experiment!r}")
        data["experiment"] = experiment
    return ExperimentConfig.from_dict(data)
