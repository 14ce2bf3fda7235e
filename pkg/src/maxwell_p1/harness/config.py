"""Study configuration from command-line flags and ``key = value`` files."""

from __future__ import annotations

import argparse
from dataclasses import dataclass, fields, replace
from pathlib import Path

FORMATS = ("table", "csv", "json", "svg")


class ConfigError(ValueError):
    """Malformed or inconsistent study configuration (CLI exit code 2)."""


def parse_int_range(text: str) -> list[int]:
    """Parse ``"A..B"``, ``"A,B,C"`` or a mix such as ``"2..4,7"``."""
    out: list[int] = []
    for part in str(text).replace(" ", "").split(","):
        if not part:
            continue
        try:
            if ".." in part:
                lo, hi = part.split("..", 1)
                lo_i, hi_i = int(lo), int(hi)
                if hi_i < lo_i:
                    raise ConfigError(f"empty range {part!r}")
                out.extend(range(lo_i, hi_i + 1))
            else:
                out.append(int(part))
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"cannot parse integer list {text!r}") from None
    if not out:
        raise ConfigError(f"empty integer list {text!r}")
    return out


def _parse_float(name: str, text) -> float:
    try:
        return float(text)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected a number, got {text!r}") from None


def _parse_int(name: str, text) -> int:
    try:
        return int(text)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected an integer, got {text!r}") from None


def _parse_bool(name: str, text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{name}: expected a boolean, got {text!r}")


def _parse_formats(text) -> tuple[str, ...]:
    items = [s for s in str(text).replace(" ", "").split(",") if s]
    bad = [s for s in items if s not in FORMATS]
    if bad or not items:
        raise ConfigError(f"formats must be drawn from {','.join(FORMATS)}, got {text!r}")
    return tuple(dict.fromkeys(items))


@dataclass(frozen=True)
class StudyConfig:
    levels: tuple[int, ...] = (1, 2, 3, 4, 5, 6)
    m_values: tuple[int, ...] = (2, 3, 4, 5, 6, 7, 8, 9)
    T: float = 0.5
    tau_base: float = 0.025
    cfl_C: float = 1.0
    out: Path = Path("results")
    formats: tuple[str, ...] = FORMATS
    serial: bool = False
    snapshot_every: int = 0
    jobs: int = 0  # 0: one worker per CPU
    timings: bool = False
    fit_levels: int = 4

    def __post_init__(self):
        if not self.levels:
            raise ConfigError("levels must be nonempty")
        if any(not 1 <= lv <= 12 for lv in self.levels):
            raise ConfigError(f"levels must lie in 1..12, got {list(self.levels)}")
        if any(m < 2 for m in self.m_values) or not self.m_values:
            raise ConfigError(f"m values must be integers >= 2, got {list(self.m_values)}")
        if not self.T > 0:
            raise ConfigError(f"T must be positive, got {self.T}")
        if not self.tau_base > 0:
            raise ConfigError(f"tau base must be positive, got {self.tau_base}")
        if not self.cfl_C > 0:
            raise ConfigError(f"CFL constant must be positive, got {self.cfl_C}")
        if self.snapshot_every < 0:
            raise ConfigError("snapshot period must be >= 0")
        if self.jobs < 0:
            raise ConfigError("jobs must be >= 0")
        if self.fit_levels < 2:
            raise ConfigError("fit_levels must be >= 2")

    def tau(self, level: int) -> float:
        return self.tau_base * 2.0**-level

    @property
    def runs(self) -> list[tuple[int, int]]:
        return [(m, lv) for m in self.m_values for lv in self.levels]

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["levels"] = list(self.levels)
        d["m_values"] = list(self.m_values)
        d["formats"] = list(self.formats)
        d["out"] = str(self.out)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "StudyConfig":
        d = dict(d)
        d["levels"] = tuple(d["levels"])
        d["m_values"] = tuple(d["m_values"])
        d["formats"] = tuple(d["formats"])
        d["out"] = Path(d["out"])
        return cls(**d)


# File key -> (field name, parser).
_KEYS = {
    "levels": ("levels", lambda v: tuple(parse_int_range(v))),
    "m": ("m_values", lambda v: tuple(parse_int_range(v))),
    "m_values": ("m_values", lambda v: tuple(parse_int_range(v))),
    "T": ("T", lambda v: _parse_float("T", v)),
    "tau_base": ("tau_base", lambda v: _parse_float("tau_base", v)),
    "cfl_C": ("cfl_C", lambda v: _parse_float("cfl_C", v)),
    "out": ("out", Path),
    "formats": ("formats", _parse_formats),
    "serial": ("serial", lambda v: _parse_bool("serial", v)),
    "snapshot_every": ("snapshot_every", lambda v: _parse_int("snapshot_every", v)),
    "jobs": ("jobs", lambda v: _parse_int("jobs", v)),
    "timings": ("timings", lambda v: _parse_bool("timings", v)),
}


def read_config_file(path) -> dict:
    """Parse a line-based ``key = value`` file; ``#`` starts a comment."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _KEYS:
            raise ConfigError(f"{path}:{n}: unknown key {key!r}")
        name, parse = _KEYS[key]
        values[name] = parse(value)
    return values


def add_study_arguments(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="line-based 'key = value' file")
    p.add_argument("--levels", metavar="A..B", help="mesh levels (default 1..6)")
    p.add_argument("--m", metavar="LIST", help="permittivity exponents (default 2..9)")
    p.add_argument("--T", metavar="REAL", help="final time (default 0.5)")
    p.add_argument("--tau-base", metavar="REAL", help="tau_l = base * 2^-l (default 0.025)")
    p.add_argument("--cfl-C", metavar="REAL", help="constant in the CFL advisory (default 1)")
    p.add_argument("--out", metavar="DIR", help="output directory (default ./results)")
    p.add_argument("--formats", metavar="LIST", help="subset of table,csv,json,svg")
    p.add_argument("--serial", action="store_true", default=None, help="run in-process")
    p.add_argument("--jobs", metavar="N", help="worker processes (default: CPU count)")
    p.add_argument("--snapshot-every", metavar="K", help="dump e_h every K steps (0 = off)")
    p.add_argument(
        "--timings", action="store_true", default=None, help="record wall-clock in JSON"
    )


def config_from_args(args: argparse.Namespace) -> StudyConfig:
    """Merge defaults, the optional config file, and flags (flags win)."""
    values = read_config_file(args.config) if args.config else {}
    flag_map = {
        "levels": "levels",
        "m": "m",
        "T": "T",
        "tau_base": "tau_base",
        "cfl_C": "cfl_C",
        "out": "out",
        "formats": "formats",
        "jobs": "jobs",
        "snapshot_every": "snapshot_every",
    }
    for attr, key in flag_map.items():
        v = getattr(args, attr, None)
        if v is not None:
            name, parse = _KEYS[key]
            values[name] = parse(v)
    if args.serial:
        values["serial"] = True
    if args.timings:
        values["timings"] = True
    return replace(StudyConfig(), **values) if values else StudyConfig()


def parse_config(argv: list[str] | None = None) -> StudyConfig:
    """Build a :class:`StudyConfig` from ``study`` sub-command arguments."""
    p = argparse.ArgumentParser(prog="maxwell-p1 study")
    add_study_arguments(p)
    return config_from_args(p.parse_args(argv))


__all__ = [
    "ConfigError",
    "FORMATS",
    "StudyConfig",
    "add_study_arguments",
    "config_from_args",
    "parse_config",
    "parse_int_range",
    "read_config_file",
]
