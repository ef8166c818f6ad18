"""Flat ``key = value`` run configuration.

A config file assigns any subset of the known keys; ``--set key=value``
overrides take precedence; unset keys fall back to defaults. The
resolved configuration is what the run manifest records, so a manifest
is itself a valid config file that reproduces the run.
"""

from __future__ import annotations

from pathlib import Path


class ConfigError(Exception):
    """Unknown key, unparsable value, or malformed config line."""


def _to_str(s: str):
    return s


def _to_optional_str(s: str):
    return None if s == "none" else s


def _to_int(s: str):
    try:
        return int(s)
    except ValueError:
        raise ConfigError(f"expected an integer, got {s!r}") from None


def _to_optional_int(s: str):
    return None if s == "none" else _to_int(s)


def _to_float(s: str):
    try:
        return float(s)
    except ValueError:
        raise ConfigError(f"expected a number, got {s!r}") from None


# key -> (parser, default); insertion order fixes the manifest layout
SCHEMA = {
    "dataset.attr": (_to_optional_str, None),
    "dataset.edges": (_to_optional_str, None),
    "dataset.labels": (_to_optional_str, None),
    "k": (_to_optional_int, None),
    "alpha": (_to_float, 0.5),
    "tau": (_to_float, 0.95),
    "temp": (_to_float, 0.5),
    "lr": (_to_float, 1e-4),
    "epochs": (_to_int, 400),
    "stage2_start": (_to_int, 200),
    "seed": (_to_int, 0),
    "structure_augmentor": (_to_str, "attention"),
    "attribute_augmentor": (_to_str, "mlp"),
    "baseline_view": (_to_str, "none"),
    "baseline_rate": (_to_float, 0.2),
    "hidden_dim": (_to_int, 256),
    "embedding_dim": (_to_int, 128),
    "filter_depth": (_to_int, 2),
    "grad_clip": (_to_float, 5.0),
    "confidence_rule": (_to_str, "fraction"),
    "ntxent_variant": (_to_str, "paper"),
    "nmi_norm": (_to_str, "geometric"),
    "attr_norm": (_to_str, "none"),
    "output_dir": (_to_str, "augclust_run"),
}

# keys that feed TrainConfig directly (everything but paths/output)
_NON_TRAIN_KEYS = {"dataset.attr", "dataset.edges", "dataset.labels",
                   "output_dir"}


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Raw key -> value strings from config text."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        raw[key.strip()] = value.strip()
    return raw


def parse_overrides(pairs) -> dict[str, str]:
    raw: dict[str, str] = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ConfigError(f"override must be key=value, got {pair!r}")
        key, _, value = pair.partition("=")
        raw[key.strip()] = value.strip()
    return raw


def resolve(config_path=None, overrides=()) -> dict:
    """Typed configuration with all defaults materialized."""
    raw: dict[str, str] = {}
    if config_path is not None:
        p = Path(config_path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        raw.update(parse_config_text(p.read_text(), source=str(p)))
    raw.update(parse_overrides(overrides))

    resolved = {}
    for key, value in raw.items():
        if key not in SCHEMA:
            raise ConfigError(f"unknown config key: {key}")
        parser, _ = SCHEMA[key]
        try:
            resolved[key] = parser(value)
        except ConfigError as exc:
            raise ConfigError(f"key {key}: {exc}") from None
    for key, (_, default) in SCHEMA.items():
        resolved.setdefault(key, default)
    return resolved


def train_kwargs(resolved: dict) -> dict:
    """The subset of a resolved config that parameterizes training."""
    return {key.replace(".", "_"): value
            for key, value in resolved.items() if key not in _NON_TRAIN_KEYS}


def manifest_text(resolved: dict) -> str:
    """Config serialization; reparsing reproduces the run exactly."""
    lines = []
    for key in SCHEMA:
        value = resolved[key]
        text = "none" if value is None else repr(value) if isinstance(
            value, float) else str(value)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"
