"""Plain-text configuration: `key = value` lines under `[section]` headers.

One file can carry the plant parameters, controller settings, and weights;
scenario files use the same format.  Unknown sections or keys are rejected
so typos fail loudly.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import ConfigError
from .hinf import OutputWeights
from .observer import DEFAULT_POLES
from .outer import OuterGains
from .params import HelicopterParams, PARAM_SECTIONS
from .sim import PidGains, ReferenceSegment, ScenarioConfig
from .wind import Gust, WindModel

_OUTER_KEYS = ("kp_z", "kd_z", "kp_x", "kd_x", "kp_y", "kd_y",
               "tilt_limit", "col_limit")
_PID_KEYS = ("roll_kp", "roll_ki", "roll_kd", "pitch_kp", "pitch_ki",
             "pitch_kd", "yaw_kp", "yaw_ki", "int_limit")
_WEIGHT_KEYS = ("c11_diag", "c22_r", "c22_psi", "d11_diag")
_OBSERVER_KEYS = ("poles",)
_HINF_KEYS = ("gamma_tol", "gamma_margin")

_SCENARIO_KEYS = ("duration", "dt", "controller", "use_outer", "seed",
                  "initial_offset", "att_ref")
_WIND_KEYS = ("mean", "sigma", "tau_c", "gusts")


@dataclass
class ToolkitConfig:
    params: HelicopterParams = field(default_factory=HelicopterParams)
    outer: OuterGains = field(default_factory=OuterGains)
    pid: PidGains = field(default_factory=PidGains)
    weights: OutputWeights = field(default_factory=OutputWeights.default)
    observer_poles: tuple = DEFAULT_POLES
    gamma_tol: float = 1e-4
    gamma_margin: float = 0.05


def _read_sections(path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.optionxform = str  # keep key case as written
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file: {exc}") from exc
    return parser


def _floats(text: str) -> np.ndarray:
    try:
        return np.array([float(tok) for tok in text.split(",") if tok.strip()])
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated numbers, got '{text}'") from exc


def _float(section: str, key: str, text: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: expected a number, got '{text}'") from exc


def load_toolkit_config(path) -> ToolkitConfig:
    parser = _read_sections(path)
    cfg = ToolkitConfig()

    param_values = {}
    known = {**PARAM_SECTIONS, "outer": _OUTER_KEYS, "pid": _PID_KEYS,
             "weights": _WEIGHT_KEYS, "observer": _OBSERVER_KEYS,
             "hinf": _HINF_KEYS}
    for section in parser.sections():
        if section not in known:
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in known[section]:
                raise ConfigError(f"unknown key '{key}' in section [{section}]")
            if section in PARAM_SECTIONS:
                param_values[key] = _float(section, key, raw)
            elif section == "outer":
                cfg.outer = _replace_dataclass(cfg.outer, key,
                                               _float(section, key, raw))
            elif section == "pid":
                cfg.pid = _replace_dataclass(cfg.pid, key,
                                             _float(section, key, raw))
            elif section == "weights":
                cfg.weights = _apply_weight(cfg.weights, key, raw)
            elif section == "observer":
                cfg.observer_poles = _parse_poles(raw)
            elif section == "hinf":
                setattr(cfg, key, _float(section, key, raw))
    if param_values:
        cfg.params = cfg.params.replace(**param_values)
    cfg.params.validate()
    cfg.outer.validate()
    return cfg


def _replace_dataclass(obj, key, value):
    values = {f.name: getattr(obj, f.name) for f in fields(obj)}
    values[key] = value
    return type(obj)(**values)


def _apply_weight(weights: OutputWeights, key: str, raw: str) -> OutputWeights:
    c11, c22, d11 = weights.c11.copy(), weights.c22.copy(), weights.d11.copy()
    if key == "c11_diag":
        vals = _floats(raw)
        if vals.size != 4:
            raise ConfigError("c11_diag needs 4 values")
        c11 = np.diag(vals)
    elif key == "d11_diag":
        vals = _floats(raw)
        if vals.size != 3:
            raise ConfigError("d11_diag needs 3 values")
        d11 = np.diag(vals)
    elif key == "c22_r":
        c22[0, 2] = float(raw)
    elif key == "c22_psi":
        c22[1, 4] = float(raw)
    return OutputWeights(c11=c11, c22=c22, d11=d11)


def _parse_poles(raw: str) -> tuple:
    poles = []
    for tok in raw.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            poles.append(complex(tok))
        except ValueError as exc:
            raise ConfigError(f"bad observer pole '{tok}'") from exc
    if len(poles) != 3:
        raise ConfigError("observer poles need exactly 3 values")
    return tuple(p.real if p.imag == 0.0 else p for p in poles)


def load_scenario_file(path) -> ScenarioConfig:
    from pathlib import Path

    parser = _read_sections(path)
    known = {"scenario": _SCENARIO_KEYS, "wind": _WIND_KEYS}
    cfg = ScenarioConfig(name=Path(path).stem)
    segments = []
    for section in parser.sections():
        if section == "references":
            for key, raw in parser.items(section):
                if not key.startswith("seg"):
                    raise ConfigError(f"unknown key '{key}' in [references]")
                segments.append(_parse_segment(raw))
            continue
        if section not in known:
            raise ConfigError(f"unknown scenario section [{section}]")
        for key, raw in parser.items(section):
            if key not in known[section]:
                raise ConfigError(f"unknown key '{key}' in section [{section}]")
            if section == "scenario":
                _apply_scenario_key(cfg, key, raw)
            else:
                _apply_wind_key(cfg, key, raw)
    segments.sort(key=lambda s: s.t_start)
    cfg.references = tuple(segments)
    return cfg.validate()


def _apply_scenario_key(cfg: ScenarioConfig, key: str, raw: str):
    if key == "duration":
        cfg.duration = _float("scenario", key, raw)
    elif key == "dt":
        cfg.dt = _float("scenario", key, raw)
    elif key == "controller":
        cfg.controller = raw.strip()
    elif key == "use_outer":
        val = raw.strip().lower()
        if val not in ("true", "false", "on", "off", "1", "0"):
            raise ConfigError(f"use_outer must be boolean, got '{raw}'")
        cfg.use_outer = val in ("true", "on", "1")
    elif key == "seed":
        try:
            cfg.seed = int(raw)
        except ValueError as exc:
            raise ConfigError(f"seed must be an integer, got '{raw}'") from exc
    elif key == "initial_offset":
        vals = _floats(raw)
        if vals.size != 3:
            raise ConfigError("initial_offset needs 3 values")
        cfg.initial_offset = vals
    elif key == "att_ref":
        vals = _floats(raw)
        if vals.size != 3:
            raise ConfigError("att_ref needs 3 values")
        cfg.att_ref = vals


def _apply_wind_key(cfg: ScenarioConfig, key: str, raw: str):
    wind = cfg.wind
    if key == "mean":
        vals = _floats(raw)
        if vals.size != 3:
            raise ConfigError("wind mean needs 3 values")
        cfg.wind = WindModel(mean=vals, gusts=wind.gusts, sigma=wind.sigma,
                             tau_c=wind.tau_c)
    elif key == "sigma":
        cfg.wind = WindModel(mean=wind.mean, gusts=wind.gusts,
                             sigma=_float("wind", key, raw), tau_c=wind.tau_c)
    elif key == "tau_c":
        cfg.wind = WindModel(mean=wind.mean, gusts=wind.gusts,
                             sigma=wind.sigma, tau_c=_float("wind", key, raw))
    elif key == "gusts":
        gusts = []
        for chunk in raw.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            parts = chunk.split(":")
            if len(parts) != 3:
                raise ConfigError(
                    f"gust '{chunk}' must look like start:end:du,dv,dw")
            delta = _floats(parts[2])
            if delta.size != 3:
                raise ConfigError(f"gust delta needs 3 values in '{chunk}'")
            gusts.append(Gust(float(parts[0]), float(parts[1]), delta))
        cfg.wind = WindModel(mean=wind.mean, gusts=tuple(gusts),
                             sigma=wind.sigma, tau_c=wind.tau_c)


def _parse_segment(raw: str) -> ReferenceSegment:
    vals = _floats(raw)
    if vals.size != 8:
        raise ConfigError(
            "reference segment needs 8 values: t, pn, pe, pd, vn, ve, vd, psi")
    return ReferenceSegment(t_start=float(vals[0]), p0=vals[1:4].copy(),
                            v=vals[4:7].copy(), psi=float(vals[7]))


def write_default_config(path):
    """Write the full default configuration in the on-disk format."""
    cfg = ToolkitConfig()
    lines = []
    for section, keys in PARAM_SECTIONS.items():
        lines.append(f"[{section}]")
        for key in keys:
            lines.append(f"{key} = {getattr(cfg.params, key)!r}")
        lines.append("")
    lines.append("[outer]")
    for key in _OUTER_KEYS:
        lines.append(f"{key} = {getattr(cfg.outer, key)!r}")
    lines.append("")
    lines.append("[pid]")
    for key in _PID_KEYS:
        lines.append(f"{key} = {getattr(cfg.pid, key)!r}")
    lines.append("")
    lines.append("[weights]")
    lines.append("c11_diag = " + ", ".join(repr(float(v))
                                           for v in np.diag(cfg.weights.c11)))
    lines.append(f"c22_r = {float(cfg.weights.c22[0, 2])!r}")
    lines.append(f"c22_psi = {float(cfg.weights.c22[1, 4])!r}")
    lines.append("d11_diag = " + ", ".join(repr(float(v))
                                           for v in np.diag(cfg.weights.d11)))
    lines.append("")
    lines.append("[observer]")
    lines.append("poles = " + ", ".join(repr(float(p)) for p in cfg.observer_poles))
    lines.append("")
    lines.append("[hinf]")
    lines.append(f"gamma_tol = {cfg.gamma_tol!r}")
    lines.append(f"gamma_margin = {cfg.gamma_margin!r}")
    lines.append("")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))
