"""Tunable parameters and the shared section/key-value file format.

Scenario files and override config files use the same line-based format:
``[section]`` headers, ``key = value`` pairs, and bare records (section
specific). ``#`` starts a comment. Parsers report line numbers on error.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field


class ConfigError(ValueError):
    """Raised for malformed scenario/config input, with line context."""

    def __init__(self, message: str, lineno: int | None = None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


def split_sections(text: str) -> dict[str, list[tuple[int, str]]]:
    """Split file text into sections -> [(lineno, stripped line), ...]."""
    sections: dict[str, list[tuple[int, str]]] = {}
    current: list[tuple[int, str]] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError("unterminated section header", lineno)
            name = line[1:-1].strip().lower()
            if not name:
                raise ConfigError("empty section name", lineno)
            current = sections.setdefault(name, [])
            continue
        if current is None:
            raise ConfigError(f"content before any [section]: {line!r}", lineno)
        current.append((lineno, line))
    return sections


def parse_kv(lines: list[tuple[int, str]]) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, line in lines:
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {line!r}", lineno)
        key, value = line.split("=", 1)
        out[key.strip().lower()] = value.strip()
    return out


def parse_float(kv: dict[str, str], key: str, default: float, lineno: int | None = None) -> float:
    if key not in kv:
        return default
    try:
        return float(kv[key])
    except ValueError as exc:
        raise ConfigError(f"field {key!r}: {exc}", lineno) from None


# ---------------------------------------------------------------------------


@dataclass
class PidGains:
    kp: float
    ki: float
    kd: float
    out_min: float
    out_max: float
    integral_limit: float
    slew_rate: float  # max |d command| per second

    def __post_init__(self):
        for name in ("out_min", "out_max", "integral_limit", "slew_rate"):
            v = getattr(self, name)
            if v != v or v in (float("inf"), float("-inf")):
                raise ValueError(f"{name} must be finite")
        if self.slew_rate <= 0:
            raise ValueError("slew_rate must be > 0")


@dataclass
class ControllerConfig:
    speed: PidGains = field(default_factory=lambda: PidGains(
        kp=1.0, ki=0.08, kd=0.05, out_min=-8.5, out_max=3.0,
        integral_limit=0.6, slew_rate=8.0))
    steer: PidGains = field(default_factory=lambda: PidGains(
        kp=1.1, ki=0.0, kd=0.08, out_min=-0.55, out_max=0.55,
        integral_limit=0.5, slew_rate=2.5))
    wheelbase_m: float = 2.8
    lookahead_gain: float = 1.1      # lookahead = clamp(gain*v, min, max)
    lookahead_min_m: float = 7.0
    lookahead_max_m: float = 20.0
    route_lost_m: float = 8.0
    platform_max_deg: float = 12.0
    gravity: float = 9.81


@dataclass
class HazardConfig:
    reaction_time_s: float = 1.5
    assumed_decel: float = 6.0
    horizon_s: float = 4.0
    predict_dt_s: float = 0.1
    safety_margin_m: float = 3.0
    comfort_decel: float = 3.0
    emergency_decel: float = 8.0
    min_plan_speed: float = 2.0
    lateral_offset_m: float = 1.8
    color_exponent: float = 3.0
    flash_high_hz: float = 4.0
    flash_low_hz: float = 1.0
    light_stop_range_m: float = 35.0
    light_stop_gap_m: float = 4.0


@dataclass
class HudConfig:
    detection_diameter_m: float = 150.0
    nav_line_length_m: float = 30.0
    center_line_length_m: float = 40.0


@dataclass
class PhysioConfig:
    sample_rate_hz: float = 256.0
    band_low_hz: float = 0.16
    band_high_hz: float = 2.1
    filter_order: int = 3
    window_s: float = 10.0
    bateman_tau_fast: float = 0.75
    bateman_tau_slow: float = 2.0
    baseline_s: float = 60.0
    adc_full_scale: int = 1023
    adc_target_au: float = 356.0  # midpoint of the 200-512 a.u. calibration band
    adc_band: tuple[float, float] = (200.0, 512.0)


@dataclass
class Config:
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    hazard: HazardConfig = field(default_factory=HazardConfig)
    hud: HudConfig = field(default_factory=HudConfig)
    physio: PhysioConfig = field(default_factory=PhysioConfig)


_GAIN_FIELDS = ("kp", "ki", "kd", "out_min", "out_max", "integral_limit", "slew_rate")


def _apply_controller(cfg: ControllerConfig, kv: dict[str, str]) -> None:
    for channel in ("speed", "steer"):
        gains = getattr(cfg, channel)
        for f in _GAIN_FIELDS:
            key = f"{f}_{channel}"
            if key in kv:
                setattr(gains, f, float(kv[key]))
    for f in ("wheelbase_m", "lookahead_gain", "lookahead_min_m", "lookahead_max_m",
              "route_lost_m", "platform_max_deg"):
        if f in kv:
            setattr(cfg, f, float(kv[f]))


def _apply_simple(obj, kv: dict[str, str]) -> None:
    for f in dataclasses.fields(obj):
        if f.name in kv:
            value = kv[f.name]
            if f.type in ("int", int):
                setattr(obj, f.name, int(value))
            else:
                setattr(obj, f.name, float(value))


def apply_overrides(config: Config, sections: dict[str, list[tuple[int, str]]]) -> Config:
    """Apply [controller]/[hazard]/[hud]/[physio] sections onto config in place."""
    if "controller" in sections:
        _apply_controller(config.controller, parse_kv(sections["controller"]))
    if "hazard" in sections:
        _apply_simple(config.hazard, parse_kv(sections["hazard"]))
    if "hud" in sections:
        _apply_simple(config.hud, parse_kv(sections["hud"]))
    if "physio" in sections:
        _apply_simple(config.physio, parse_kv(sections["physio"]))
    return config


def load_config(path: str, base: Config | None = None) -> Config:
    with open(path, "r", encoding="utf-8") as fh:
        sections = split_sections(fh.read())
    return apply_overrides(base or Config(), sections)
