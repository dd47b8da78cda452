"""Flat ``section.key=value`` configuration files for the pipeline.

Sections are ``arima``, ``train``, ``gbt``, ``net`` and ``pipeline``. Blank
lines and lines starting with ``#`` are ignored. Later settings (including
command-line overrides) replace earlier ones.
"""
from __future__ import annotations

from dataclasses import fields, replace

from .arima import ArimaSpec
from .errors import BadParams
from .gbt import GbtParams
from .nn import TrainConfig
from .pipeline import NetConfig, PipelineConfig

_SECTIONS = {"arima": ArimaSpec, "train": TrainConfig, "gbt": GbtParams, "net": NetConfig}
_PIPELINE_KEYS = ("split", "target", "variant", "seed", "finetune_input", "residual_target")


def _coerce(kind, text: str, key: str):
    try:
        if kind is bool:
            low = text.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return low in ("true", "1", "yes")
        if kind is tuple:
            return tuple(int(v) for v in text.split(",") if v.strip())
        return kind(text)
    except ValueError:
        raise BadParams(f"{key}: cannot read {text!r} as {kind.__name__}") from None


def _split_value(text: str):
    """Row index, train fraction, or date string."""
    if text.isdigit() and len(text) != 8:
        return int(text)
    try:
        value = float(text)
    except ValueError:
        return text
    return text if len(text) == 8 and text.isdigit() else value


def parse_lines(lines) -> dict:
    out = {}
    for n, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise BadParams(f"line {n}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = value
    return out


def read_config_file(path) -> dict:
    with open(path) as fh:
        return parse_lines(fh)


def build_config(settings: dict, base: PipelineConfig = PipelineConfig()) -> PipelineConfig:
    """Apply string ``settings`` (dotted keys) on top of ``base``."""
    parts = {name: getattr(base, name) for name in _SECTIONS}
    top = {}
    for key, text in settings.items():
        section, _, name = key.partition(".")
        if section == "pipeline" and name in _PIPELINE_KEYS:
            if name == "split":
                top[name] = _split_value(text)
            elif name == "seed":
                top[name] = _coerce(int, text, key)
            elif name == "residual_target":
                top[name] = _coerce(bool, text, key)
            else:
                top[name] = text
            continue
        if section not in _SECTIONS:
            raise BadParams(f"unknown setting {key!r}")
        types = {f.name: f.type for f in fields(_SECTIONS[section])}
        if name not in types:
            raise BadParams(f"unknown setting {key!r}")
        kind = {"int": int, "float": float, "bool": bool, "tuple": tuple, "str": str}[types[name]]
        try:
            parts[section] = replace(parts[section], **{name: _coerce(kind, text, key)})
        except ValueError as exc:
            raise BadParams(f"{key}: {exc}") from None
    try:
        return replace(base, **parts, **top)
    except ValueError as exc:
        raise BadParams(str(exc)) from None


def config_to_settings(config: PipelineConfig) -> dict:
    """Inverse of ``build_config``: every field as a dotted key with a string value."""
    out = {}
    for section in _SECTIONS:
        obj = getattr(config, section)
        for f in fields(obj):
            value = getattr(obj, f.name)
            if isinstance(value, tuple):
                value = ",".join(str(v) for v in value)
            out[f"{section}.{f.name}"] = str(value)
    for name in _PIPELINE_KEYS:
        out[f"pipeline.{name}"] = str(getattr(config, name))
    return out


def format_settings(settings: dict) -> str:
    return "".join(f"{k}={v}\n" for k, v in sorted(settings.items()))
