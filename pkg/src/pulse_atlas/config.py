"""Experiment configuration: flat key = value text with sections.

The format is INI-style for diff-friendliness; every field has a default so
a config file only states what it changes.  The canonical hash covers the
effective configuration after defaults, making runs reproducible from the
manifest alone.
"""
from __future__ import annotations

import configparser
import hashlib
import io
import typing
from dataclasses import asdict, dataclass, field, fields

__all__ = [
    "ConfigError",
    "ModelConfig",
    "DomainConfig",
    "PulseConfig",
    "ContinuationConfig",
    "StabilityConfig",
    "MapAnalysisConfig",
    "OutputConfig",
    "RunConfig",
    "ExperimentConfig",
    "parse_config",
    "config_hash",
]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    d: float = 0.1
    mu_start: float = 0.5
    mu_min: float = 0.05
    mu_max: float = 0.95

    def __post_init__(self):
        if self.d <= 0.0:
            raise ConfigError(f"model.d must be positive, got {self.d}")
        if not (0.0 < self.mu_min < self.mu_max < 1.0):
            raise ConfigError(
                f"mu window [{self.mu_min}, {self.mu_max}] must sit inside (0, 1)")
        if not (self.mu_min <= self.mu_start <= self.mu_max):
            raise ConfigError(
                f"mu_start {self.mu_start} outside [{self.mu_min}, {self.mu_max}]")


@dataclass(frozen=True)
class DomainConfig:
    half_width: int = 40

    def __post_init__(self):
        if self.half_width < 1:
            raise ConfigError(f"domain.half_width must be >= 1, got {self.half_width}")


@dataclass(frozen=True)
class PulseConfig:
    lengths: tuple[int, ...] = (1,)
    pattern: str = "plateau"

    def __post_init__(self):
        if len(self.lengths) % 2 == 0 or not self.lengths:
            raise ConfigError(
                f"pulse.lengths needs an odd number of entries, got {self.lengths}")
        if any(v < 1 for v in self.lengths):
            raise ConfigError(f"pulse.lengths must be positive, got {self.lengths}")
        if self.pattern not in ("plateau", "interface"):
            raise ConfigError(
                f"pulse.pattern must be 'plateau' or 'interface', got {self.pattern!r}")


@dataclass(frozen=True)
class ContinuationConfig:
    ds: float = 0.01
    ds_min: float = 1e-9
    ds_max: float = 0.05
    max_steps: int = 20000
    max_periods: int = 6

    def __post_init__(self):
        if not (0.0 < self.ds_min <= self.ds <= self.ds_max):
            raise ConfigError(
                f"need 0 < ds_min <= ds <= ds_max, got "
                f"{self.ds_min}, {self.ds}, {self.ds_max}")
        if self.max_steps < 1:
            raise ConfigError(f"max_steps must be >= 1, got {self.max_steps}")
        if self.max_periods < 1:
            raise ConfigError(f"max_periods must be >= 1, got {self.max_periods}")


@dataclass(frozen=True)
class StabilityConfig:
    enabled: bool = True
    margin: float = 1e-8

    def __post_init__(self):
        if self.margin <= 0.0:
            raise ConfigError(f"stability.margin must be positive, got {self.margin}")


@dataclass(frozen=True)
class MapAnalysisConfig:
    enabled: bool = False
    mu_grid_points: int = 400
    section_offset: float = 0.05
    bracket_pad: float = 0.02

    def __post_init__(self):
        if self.mu_grid_points < 2:
            raise ConfigError(
                f"map_analysis.mu_grid_points must be >= 2, got {self.mu_grid_points}")
        if not (0.0 < self.section_offset < 0.5):
            raise ConfigError(
                f"map_analysis.section_offset must be in (0, 0.5), got "
                f"{self.section_offset}")
        if self.bracket_pad < 0.0:
            raise ConfigError(
                f"map_analysis.bracket_pad must be nonnegative, got {self.bracket_pad}")


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    formats: tuple[str, ...] = ("csv", "json", "gp")

    def __post_init__(self):
        known = {"csv", "json", "gp", "npz"}
        bad = [f for f in self.formats if f not in known]
        if bad:
            raise ConfigError(f"unknown output formats {bad}; known: {sorted(known)}")


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"run.seed must fit in 64 bits, got {self.seed}")
        if self.threads < 1:
            raise ConfigError(f"run.threads must be >= 1, got {self.threads}")


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    domain: DomainConfig = field(default_factory=DomainConfig)
    pulse: PulseConfig = field(default_factory=PulseConfig)
    continuation: ContinuationConfig = field(default_factory=ContinuationConfig)
    stability: StabilityConfig = field(default_factory=StabilityConfig)
    map_analysis: MapAnalysisConfig = field(default_factory=MapAnalysisConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    run: RunConfig = field(default_factory=RunConfig)

    @property
    def seed(self) -> int:
        return self.run.seed

    def to_dict(self) -> dict:
        return asdict(self)


_SECTIONS = {
    "model": ModelConfig,
    "domain": DomainConfig,
    "pulse": PulseConfig,
    "continuation": ContinuationConfig,
    "stability": StabilityConfig,
    "map_analysis": MapAnalysisConfig,
    "output": OutputConfig,
    "run": RunConfig,
}

_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _convert(name: str, raw: str, target_type):
    raw = raw.strip()
    try:
        if target_type is float:
            return float(raw)
        if target_type is int:
            return int(raw)
        if target_type is bool:
            low = raw.lower()
            if low in _BOOL_TRUE:
                return True
            if low in _BOOL_FALSE:
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if target_type is str:
            return raw
        if target_type == tuple[int, ...]:
            parts = raw.replace(",", " ").split()
            return tuple(int(p) for p in parts)
        if target_type == tuple[str, ...]:
            parts = raw.replace(",", " ").split()
            return tuple(parts)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {exc}") from exc
    raise ConfigError(f"unsupported config field type for {name}")


def parse_config(text_or_path, overrides: dict | None = None) -> ExperimentConfig:
    """Parse a config file path or literal text into an ExperimentConfig.

    overrides maps dotted keys ('output.directory', 'run.seed'; bare 'seed'
    and 'threads' address the run section) to raw replacement values applied
    after the file.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    if isinstance(text_or_path, str) and "\n" not in text_or_path and "=" not in text_or_path:
        try:
            with open(text_or_path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {text_or_path}: {exc}") from exc
    else:
        text = str(text_or_path)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc

    raw: dict[str, dict[str, str]] = {s: dict(parser.items(s))
                                      for s in parser.sections()}
    for key, value in (overrides or {}).items():
        if key in ("seed", "threads"):
            key = f"run.{key}"
        if "." not in key:
            raise ConfigError(f"override key {key!r} must be section.name")
        section, name = key.split(".", 1)
        raw.setdefault(section, {})[name] = str(value)

    unknown = set(raw) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config sections {sorted(unknown)}")

    built = {}
    for section, cls in _SECTIONS.items():
        entries = raw.get(section, {})
        hints = typing.get_type_hints(cls)
        bad = set(entries) - set(hints)
        if bad:
            raise ConfigError(f"unknown keys {sorted(bad)} in section [{section}]")
        kwargs = {name: _convert(f"{section}.{name}", value, hints[name])
                  for name, value in entries.items()}
        built[section] = cls(**kwargs)
    return ExperimentConfig(**built)


def config_hash(config: ExperimentConfig) -> str:
    """sha256 over the canonical serialization of the effective config."""
    buf = io.StringIO()
    data = config.to_dict()
    for section in sorted(data):
        value = data[section]
        if isinstance(value, dict):
            for key in sorted(value):
                buf.write(f"{section}.{key} = {value[key]!r}\n")
        else:
            buf.write(f"{section} = {value!r}\n")
    return hashlib.sha256(buf.getvalue().encode("utf-8")).hexdigest()
