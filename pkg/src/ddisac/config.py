"""Flat key-value configuration files for campaign runs.

Format: one `key = value` pair per line, `#` starts a comment, blank lines
ignored. Dotted keys address nested settings (`grid.M = 4`, `ga.population =
40`). List values are comma separated (`alpha_list = 0,0.1,1.0`). Overrides
given as `key=value` strings replace file values.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path

from .harness import CampaignConfig
from .sensing import default_target

__all__ = [
    "ConfigError",
    "parse_config_text",
    "load_config",
    "apply_overrides",
    "build_campaign",
]


class ConfigError(ValueError):
    """Malformed configuration input; message carries the offending line."""


def parse_config_text(text: str, source: str = "<config>") -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        values[key] = value
    return values


def load_config(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return parse_config_text(p.read_text(), source=str(p))


def apply_overrides(values: dict, overrides) -> dict:
    out = dict(values)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must be key=value, got {item!r}")
        key, _, value = item.partition("=")
        out[key.strip()] = value.strip()
    return out


def _parse_float(key, value):
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {value!r}") from None


def _parse_int(key, value):
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {value!r}") from None


def _parse_bool(key, value):
    lowered = value.lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ConfigError(f"{key}: expected true/false, got {value!r}")


def _parse_float_list(key, value):
    return tuple(_parse_float(key, item) for item in value.split(",") if item.strip())


def _parse_int_list(key, value):
    return tuple(_parse_int(key, item) for item in value.split(",") if item.strip())


def _parse_complex(key, value):
    try:
        return complex(value)
    except ValueError:
        raise ConfigError(f"{key}: expected a complex number, got {value!r}") from None


_TOP_FLOAT = ("p_max", "comm_snr_db", "icsi_db", "theta", "echo_snr_db")
_GA_FIELDS = {
    "population": _parse_int, "generations": _parse_int,
    "crossover_rate": _parse_float, "mutation_rate": _parse_float,
    "mutation_sigma": _parse_float, "tournament_size": _parse_int,
    "elitism": _parse_int, "lambda_c": _parse_float,
    "lambda_tau": _parse_float, "lambda_nu": _parse_float,
    "seed": _parse_int,
}
_TARGET_FIELDS = {
    "tau": _parse_float, "nu": _parse_float, "beta": _parse_complex,
    "gain_const": _parse_float, "sigma2": _parse_float,
}


def build_campaign(values: dict) -> CampaignConfig:
    """Typed CampaignConfig from parsed key-value pairs; unknown keys fail."""
    grid_kw, path_kw, qos_kw, ga_kw, target_kw, top_kw = {}, {}, {}, {}, {}, {}

    for key, value in values.items():
        head, _, tail = key.partition(".")
        if head == "grid":
            if tail == "M" or tail == "N":
                grid_kw[tail] = _parse_int(key, value)
            elif tail in ("delta_f", "T"):
                grid_kw[tail] = _parse_float(key, value)
            else:
                raise ConfigError(f"unknown key: {key}")
        elif head == "paths":
            if tail in ("delays", "dopplers"):
                path_kw[tail] = _parse_int_list(key, value)
            else:
                raise ConfigError(f"unknown key: {key}")
        elif head == "qos":
            if tail in ("r_c_req", "eps_tau", "eps_nu"):
                qos_kw[tail] = _parse_float(key, value)
            else:
                raise ConfigError(f"unknown key: {key}")
        elif head == "ga":
            if tail in _GA_FIELDS:
                ga_kw[tail] = _GA_FIELDS[tail](key, value)
            else:
                raise ConfigError(f"unknown key: {key}")
        elif head == "target":
            if tail in _TARGET_FIELDS:
                target_kw[tail] = _TARGET_FIELDS[tail](key, value)
            else:
                raise ConfigError(f"unknown key: {key}")
        elif key in _TOP_FLOAT:
            top_kw[key] = _parse_float(key, value)
        elif key in ("num_users", "n_mc", "master_seed"):
            top_kw[key] = _parse_int(key, value)
        elif key == "theta_in_filter":
            top_kw[key] = _parse_bool(key, value)
        elif key == "alpha_list":
            top_kw[key] = _parse_float_list(key, value)
        else:
            raise ConfigError(f"unknown key: {key}")

    defaults = CampaignConfig()
    try:
        kwargs = dict(top_kw)
        if grid_kw:
            kwargs["grid"] = dataclasses.replace(defaults.grid, **grid_kw)
        if path_kw:
            kwargs["paths"] = dataclasses.replace(defaults.paths, **path_kw)
        if qos_kw:
            kwargs["qos"] = dataclasses.replace(defaults.qos, **qos_kw)
        if ga_kw:
            kwargs["ga"] = dataclasses.replace(defaults.ga, **ga_kw)
        cfg = CampaignConfig(**kwargs)
        if target_kw:
            base = default_target(p_max=cfg.p_max, echo_snr_db=cfg.echo_snr_db)
            cfg = dataclasses.replace(cfg, target=dataclasses.replace(base, **target_kw))
        return cfg
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
