"""Application configuration: one flat key set covering every module,
loadable from a TOML or JSON file, with CLI flags layered on top.

Every key has a default, so an empty config file is valid.  Unknown keys
are rejected instead of silently ignored.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

try:
    import tomllib as _toml
except ImportError:  # Python < 3.11
    import tomli as _toml

from jobrec.errors import ConfigError


@dataclass
class AppConfig:
    seed: int = 0

    # feature space
    embed_dim: int = 64
    competency_k: int = 32
    expand_m: int = 2
    hash_width: int = 16
    experience_cap: float = 40.0
    append_competency_feature: bool = True
    expand_for_vectors: bool = False

    # retrieval and slate composition
    ml_cutoff: float = 0.5
    similar_jobs_threshold: float = 0.70
    similar_candidates_threshold: float = 0.80
    experience_relaxation_years: float = 1.0
    blend_window: int = 10
    blend_per_source: int = 2
    starvation_threshold: int = 50
    edge_keep_threshold: float = 0.3

    # training
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    epochs: int = 30
    batch_size: int = 64
    dropout_rate: float = 0.2
    patience: int = 5
    val_fraction: float = 0.15
    hidden1: int = 128
    hidden2: int = 64

    # click simulation
    view_decay: float = 0.8
    click_scale: float = 1.0
    serendipity_bonus: float = 0.0

    # artifact paths
    data_dir: str = "data"
    featurizer_path: str = "featurizer.npz"
    model_path: str = "model.ckpt"
    counters_path: str = "counters.jsonl"

    def replace(self, **changes) -> "AppConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def echo(self) -> str:
        """Effective configuration, one sorted key per line."""
        items = sorted(self.to_dict().items())
        return "\n".join(f"{key} = {value!r}" for key, value in items)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(AppConfig)}


def _coerce(key: str, value):
    """Validate a raw config value against the field's declared type."""
    expected = _FIELD_TYPES[key]
    if expected == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected a boolean, got {value!r}")
        return value
    if expected == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return value
    if expected == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{key}: expected a string, got {value!r}")
    return value


def from_mapping(raw: dict) -> AppConfig:
    unknown = sorted(set(raw) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return AppConfig(**{k: _coerce(k, v) for k, v in raw.items()})


def load_config(path: str | None) -> AppConfig:
    """Load a TOML or JSON config file; None means all defaults."""
    if path is None:
        return AppConfig()
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        if path.endswith(".json"):
            raw = json.loads(data.decode("utf-8"))
        else:
            raw = _toml.loads(data.decode("utf-8"))
    except (ValueError, _toml.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse config file {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a table/object")
    return from_mapping(raw)


def apply_overrides(config: AppConfig, overrides: dict) -> AppConfig:
    """Layer non-None override values (CLI flags) over a loaded config."""
    changes = {}
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key: {key}")
        changes[key] = _coerce(key, value)
    return config.replace(**changes) if changes else config
