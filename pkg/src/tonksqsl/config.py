"""INI experiment configuration with strict key checking.

Example::

    [experiment]
    kind = tf-scan
    n_particles = 10
    lam_i = 1
    lam_f = 8
    t_f_list = 0.5:3:0.05

    [grid]
    half_width = 6
    n_points = 256

Lists are comma separated; ``start:stop:step`` expands to an inclusive range.
A relative ``ramp_file`` is taken relative to the config file.
"""
import configparser
import dataclasses
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .metrics import SPEED_METHODS

KINDS = (
    "eigens", "quench", "sta-design", "sta-run", "tf-scan",
    "coherence-scan", "infidelity-scan", "qsl-report",
)
RAMP_KINDS = ("n0", "nmax", "design", "linear")


@dataclass
class ExperimentConfig:
    """Parameters of one batch run.

    Fields left as ``None`` take the per-experiment value from
    ``KIND_DEFAULTS`` (or, for the grid, an automatic choice) when
    ``resolved()`` is called.
    """

    kind: str = "quench"
    n_particles: int = 10
    q: int = None
    lam_i: float = 1.0
    lam_f: float = 8.0
    t_f: float = None
    t_f_list: tuple = None
    speed_t_f_list: tuple = None
    design_n: int = -1  # -1 means the Fermi edge, N - 1
    ramps: tuple = ("n0", "nmax", "linear")
    n_list: tuple = None
    statistics: tuple = ("tg", "fermi")
    ramp_file: str = ""
    half_width: float = None
    n_points: int = None
    dt: float = 1e-4
    record_dt: float = 0.01
    speed_method: str = "exact"
    ramp_samples: int = 4001
    count: int = 0  # eigens: number of levels, 0 means n_particles
    seed: int = 0  # reserved; every computation is deterministic
    out_dir: str = "out"
    svg: bool = True
    threads: int = 1

    @property
    def edge_index(self) -> int:
        return self.n_particles - 1 if self.design_n < 0 else self.design_n

    def resolved(self) -> "ExperimentConfig":
        """Copy with per-experiment defaults filled in (grid stays automatic)."""
        changes = {k: v for k, v in KIND_DEFAULTS.get(self.kind, {}).items()
                   if getattr(self, k) is None}
        for k, v in COMMON_DEFAULTS.items():
            if getattr(self, k) is None and k not in changes:
                changes[k] = v
        return dataclasses.replace(self, **changes).validate()

    def validate(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}", field="kind")
        for name in ("lam_i", "lam_f", "t_f", "half_width", "dt", "record_dt"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ConfigError(f"{name} must be positive", field=name)
        for name in ("n_particles", "q", "ramp_samples", "threads"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ConfigError(f"{name} must be >= 1", field=name)
        if self.n_points is not None and self.n_points < 16:
            raise ConfigError("n_points must be >= 16", field="n_points")
        if self.count < 0:
            raise ConfigError("count must be >= 0", field="count")
        scans = (self.t_f_list or ()) + (self.speed_t_f_list or ())
        if any(t <= 0 for t in scans):
            raise ConfigError("scan durations must be positive")
        if any(n < 1 for n in self.n_list or ()):
            raise ConfigError("particle numbers must be >= 1", field="n_list")
        bad = [r for r in self.ramps if r not in RAMP_KINDS]
        if bad:
            raise ConfigError(f"unknown ramp kinds {bad}; choose from {RAMP_KINDS}", field="ramps")
        bad = [s for s in self.statistics if s not in ("tg", "fermi")]
        if bad:
            raise ConfigError(f"unknown statistics {bad}", field="statistics")
        if self.speed_method not in SPEED_METHODS:
            raise ConfigError(f"speed_method must be one of {SPEED_METHODS}", field="speed_method")
        if self.t_f_list is not None and not self.t_f_list:
            raise ConfigError("t_f_list must not be empty", field="t_f_list")
        if self.n_list is not None and not self.n_list:
            raise ConfigError("n_list must not be empty", field="n_list")
        if self.ramp_file and not Path(self.ramp_file).is_file():
            raise ConfigError(f"ramp_file {self.ramp_file} does not exist", field="ramp_file")
        return self

    def echo(self) -> str:
        """One-line rendering of every field (written into CSV comments)."""
        parts = []
        for f in dataclasses.fields(self):
            if f.name in ("out_dir", "svg", "threads"):
                continue
            parts.append(f"{f.name}={_render(getattr(self, f.name))}")
        return "; ".join(parts)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def _inclusive(start, stop, step):
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + i * step, 12) for i in range(count))


COMMON_DEFAULTS = {
    "q": 2,
    "t_f": 2.0,
    "t_f_list": _inclusive(0.5, 3.0, 0.05),
    "speed_t_f_list": (),
    "n_list": (2, 4, 8, 16),
}
KIND_DEFAULTS = {
    "quench": {"t_f": 10.0},
    "tf-scan": {"speed_t_f_list": _inclusive(2.0, 6.0, 0.5)},
    "coherence-scan": {"q": 1},
    "infidelity-scan": {"n_list": tuple(range(1, 51))},
}
#: Overrides applied before the config file by ``--paper-scale``.
PAPER_SCALE = {"n_particles": 50, "n_points": 512}

_TYPES = {
    "kind": str, "n_particles": int, "q": int, "lam_i": float, "lam_f": float,
    "t_f": float, "t_f_list": "floats", "speed_t_f_list": "floats", "design_n": int,
    "ramps": "words", "n_list": "ints", "statistics": "words", "ramp_file": str,
    "half_width": float, "n_points": int, "dt": float, "record_dt": float, "speed_method": str,
    "ramp_samples": int, "count": int, "seed": int, "out_dir": str, "svg": bool,
}


def _render(value):
    if value is None:
        return "auto"
    if isinstance(value, tuple):
        return ",".join(_render(v) for v in value)
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


# section -> {ini key: field name}
SCHEMA = {
    "experiment": {
        "kind": "kind", "n_particles": "n_particles", "q": "q", "lam_i": "lam_i",
        "lam_f": "lam_f", "t_f": "t_f", "t_f_list": "t_f_list",
        "speed_t_f_list": "speed_t_f_list", "design_n": "design_n", "ramps": "ramps",
        "n_list": "n_list", "statistics": "statistics", "ramp_file": "ramp_file",
        "count": "count", "seed": "seed",
    },
    "grid": {"half_width": "half_width", "n_points": "n_points"},
    "propagation": {"dt": "dt", "record_dt": "record_dt", "ramp_samples": "ramp_samples",
                    "speed_method": "speed_method"},
    "output": {"dir": "out_dir", "svg": "svg"},
}

_RANGE = re.compile(r"^\s*([^:]+):([^:]+):([^:]+)\s*$")


def _float_list(text):
    m = _RANGE.match(text)
    if m:
        start, stop, step = (float(v) for v in m.groups())
        if step <= 0 or stop < start:
            raise ValueError(f"bad range {text!r}")
        return _inclusive(start, stop, step)
    return tuple(float(v) for v in text.split(",") if v.strip())


def _convert(name, text):
    kind = _TYPES[name]
    if kind is bool:
        low = text.strip().lower()
        if low not in ("true", "false", "yes", "no", "1", "0"):
            raise ValueError(f"expected a boolean, got {text!r}")
        return low in ("true", "yes", "1")
    if kind is int:
        return int(text)
    if kind is float:
        return float(text)
    if kind == "ints":
        values = _float_list(text)
        if any(v != round(v) for v in values):
            raise ValueError(f"expected integers, got {text!r}")
        return tuple(int(round(v)) for v in values)
    if kind == "floats":
        return _float_list(text)
    if kind == "words":
        return tuple(v.strip() for v in text.split(",") if v.strip())
    return text.strip()


def _line_of(lines, section, key):
    current = None
    for i, line in enumerate(lines, start=1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip()
        elif current == section and re.match(rf"^{re.escape(key)}\s*[=:]", s, re.IGNORECASE):
            return i
    return None


def parse_config(text: str, base: ExperimentConfig = None, root=None) -> ExperimentConfig:
    """Parse INI text on top of ``base`` (defaults when omitted).

    ``root`` is the directory that a relative ``ramp_file`` refers to.
    """
    parser = configparser.ConfigParser(interpolation=None, strict=True)
    try:
        parser.read_string(text)
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line", lineno) from exc
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], getattr(exc, "lineno", None)) from exc
    lines = text.splitlines()
    values = {}
    for section in parser.sections():
        if section not in SCHEMA:
            lineno = next((i for i, l in enumerate(lines, 1) if l.strip() == f"[{section}]"), None)
            raise ConfigError(f"unknown section [{section}]", lineno)
        for key, raw in parser.items(section):
            lineno = _line_of(lines, section, key)
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]", lineno)
            name = SCHEMA[section][key]
            try:
                values[name] = _convert(name, raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {exc}", lineno) from exc
    if root is not None and values.get("ramp_file"):
        values["ramp_file"] = str(Path(root) / values["ramp_file"])
    cfg = dataclasses.replace(base or ExperimentConfig(), **values)
    try:
        return cfg.validate()
    except ConfigError as exc:
        for section, keys in SCHEMA.items():
            for key, name in keys.items():
                if name == exc.field and name in values:
                    raise ConfigError(str(exc), _line_of(lines, section, key), exc.field) from None
        raise


def load_config(path, base: ExperimentConfig = None) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist")
    return parse_config(path.read_text(encoding="utf-8"), base, root=path.parent)
