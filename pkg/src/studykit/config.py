"""Deployment configuration with CLI > environment > file > default precedence."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError

ENV_PREFIX = "ENGINE_"


@dataclass
class EngineConfig:
    corpus_dir: str = "corpus"
    data_dir: str = "data"
    roster_path: str = "providers.json"
    pass_threshold: float = 2 / 3
    badge_interval: int = 5
    cache_threshold: int = 30
    token_budget: int = 5000
    reserved_tokens: int = 600
    required_sections: int = 4
    time_zone: str = "UTC"
    secret_env: str = "ENGINE_SECRET"
    match_window: int = 16
    match_k: int = 3
    k_init: int = 5
    max_completion_tokens: int = 1024
    rng_seed: int | None = None

    def __post_init__(self):
        if not 0 < self.pass_threshold <= 1:
            raise ConfigError("pass_threshold must be in (0, 1]")
        if self.badge_interval < 1:
            raise ConfigError("badge_interval must be >= 1")
        if self.cache_threshold <= 10:
            raise ConfigError("cache_threshold must be > 10")
        if self.token_budget < 200:
            raise ConfigError("token_budget must be >= 200")
        if self.token_budget < self.reserved_tokens:
            raise ConfigError("token_budget must be >= reserved_tokens")
        if self.required_sections < 1:
            raise ConfigError("required_sections must be >= 1")

    @property
    def secret(self) -> str:
        return os.environ.get(self.secret_env, "")


_INT_FIELDS = {
    "badge_interval",
    "cache_threshold",
    "token_budget",
    "reserved_tokens",
    "required_sections",
    "match_window",
    "match_k",
    "k_init",
    "max_completion_tokens",
    "rng_seed",
}
_FLOAT_FIELDS = {"pass_threshold"}


def _coerce(name: str, value):
    if value is None or not isinstance(value, str):
        return value
    if name in _INT_FIELDS:
        return int(value)
    if name in _FLOAT_FIELDS:
        return float(value)
    return value


def load_config(
    path: str | Path | None = None,
    env: dict | None = None,
    overrides: dict | None = None,
) -> EngineConfig:
    """Merge config sources; later sources win: file < env < overrides."""
    env = os.environ if env is None else env
    merged: dict = {}
    if path is not None:
        try:
            merged.update(json.loads(Path(path).read_text(encoding="utf-8")))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    valid = {f.name for f in fields(EngineConfig)}
    unknown = set(merged) - valid
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for field_ in valid:
        env_key = ENV_PREFIX + field_.upper()
        if env_key in env:
            merged[field_] = env[env_key]
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
    try:
        merged = {k: _coerce(k, v) for k, v in merged.items()}
    except ValueError as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    return EngineConfig(**merged)
