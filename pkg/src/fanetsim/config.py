"""INI experiment files.

One section per parameter group::

    [experiment]   ExperimentConfig scalars and lists
    [channel]      ChannelParams (noise given as ``n0_dbm_hz``)
    [mobility]     MobilityParams
    [tracker]      TrackerParams

Lists and tuples are comma separated. Unknown keys are errors, so a typo
never silently falls back to a default.
"""

from __future__ import annotations

import configparser
import dataclasses
import math
from importlib import resources
from io import StringIO
from pathlib import Path
from typing import Any, Mapping

from .channel import ChannelParams, dbm_per_hz_to_w
from .harness import ExperimentConfig
from .tracking import MobilityParams, TrackerParams

DEFAULT_CONFIG = "table1.ini"
SECTIONS = {"experiment": ExperimentConfig, "channel": ChannelParams, "mobility": MobilityParams,
            "tracker": TrackerParams}
NESTED = {"channel", "mobility", "tracker"}


class ConfigError(ValueError):
    """Bad configuration; the message names the offending key."""


def default_config_path() -> Path:
    return Path(str(resources.files("fanetsim") / "data" / DEFAULT_CONFIG))


def _defaults(cls) -> dict[str, Any]:
    out = {}
    for f in dataclasses.fields(cls):
        if f.default is not dataclasses.MISSING:
            out[f.name] = f.default
        elif f.default_factory is not dataclasses.MISSING:
            out[f.name] = f.default_factory()
    return out


def _scalar(text: str, like: Any, where: str):
    text = text.strip()
    try:
        if isinstance(like, bool):
            low = text.lower()
            if low in configparser.ConfigParser.BOOLEAN_STATES:
                return configparser.ConfigParser.BOOLEAN_STATES[low]
            raise ValueError
        if isinstance(like, int):
            value = float(text)
            if value != int(value):
                raise ValueError
            return int(value)
        if isinstance(like, float):
            return float(text)
    except ValueError:
        kind = "true/false" if isinstance(like, bool) else type(like).__name__
        raise ConfigError(f"{where}: expected {kind}, got {text!r}") from None
    return text


def coerce(text: str, like: Any, where: str):
    """Parse ``text`` into the type of the default value ``like``."""
    if isinstance(like, (list, tuple)):
        items = [t for t in text.split(",") if t.strip()]
        elem = like[0] if like else ""
        values = [_scalar(t, elem, where) for t in items]
        if isinstance(like, tuple):
            if len(values) != len(like):
                raise ConfigError(f"{where}: expected {len(like)} comma-separated values, got {len(values)}")
            return tuple(values)
        return values
    return _scalar(text, like, where)


def _section_values(name: str, section: Mapping[str, str]) -> dict[str, Any]:
    cls = SECTIONS[name]
    defaults = _defaults(cls)
    if name == "channel":
        defaults = {k: v for k, v in defaults.items() if k != "n0"}
        defaults["n0_dbm_hz"] = -174.0
    out = {}
    for key, text in section.items():
        if key not in defaults or key in NESTED:
            known = ", ".join(sorted(k for k in defaults if k not in NESTED))
            raise ConfigError(f"[{name}] {key}: unknown key (known: {known})")
        out[key] = coerce(text, defaults[key], f"[{name}] {key}")
    if "n0_dbm_hz" in out:
        out["n0"] = dbm_per_hz_to_w(out.pop("n0_dbm_hz"))
    return out


def _build(cls, values: dict, where: str):
    try:
        return cls(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{where}] {exc}") from None


def config_from_mapping(data: Mapping[str, Mapping[str, str]]) -> ExperimentConfig:
    unknown = set(data) - set(SECTIONS) - {"DEFAULT"}
    if unknown:
        raise ConfigError(f"unknown section(s) {sorted(unknown)}; expected {sorted(SECTIONS)}")
    parts = {name: _section_values(name, data.get(name, {})) for name in SECTIONS}
    exp = parts["experiment"]
    for name in NESTED:
        exp[name] = _build(SECTIONS[name], parts[name], name)
    return _build(ExperimentConfig, exp, "experiment")


def load_config(path=None) -> ExperimentConfig:
    """Read an INI file (the shipped defaults when ``path`` is None)."""
    path = Path(path) if path is not None else default_config_path()
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_mapping({s: dict(parser[s]) for s in parser.sections()})


def apply_overrides(config: ExperimentConfig, **overrides) -> ExperimentConfig:
    """Replace experiment fields; ``None`` values are ignored."""
    values = {k: v for k, v in overrides.items() if v is not None}
    try:
        return dataclasses.replace(config, **values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def dump_config(config: ExperimentConfig) -> str:
    """INI text that loads back to ``config``."""
    parser = configparser.ConfigParser(interpolation=None)

    def fmt(v):
        if isinstance(v, (list, tuple)):
            return ", ".join(fmt(x) for x in v)
        if isinstance(v, bool):
            return "true" if v else "false"
        return repr(v) if isinstance(v, float) else str(v)

    parser["experiment"] = {k: fmt(v) for k, v in dataclasses.asdict(config).items() if k not in NESTED}
    for name in ("channel", "mobility", "tracker"):
        values = dataclasses.asdict(getattr(config, name))
        if name == "channel":
            values["n0_dbm_hz"] = 10.0 * math.log10(values.pop("n0")) + 30.0
        parser[name] = {k: fmt(v) for k, v in values.items()}
    buf = StringIO()
    parser.write(buf)
    return buf.getvalue()
