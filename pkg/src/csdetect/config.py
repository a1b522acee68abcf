"""Pipeline configuration: nested sections with defaults and strict keys.

Configs load from TOML, JSON, or YAML files; unknown keys are rejected so
typos fail loudly. Every field has a documented default and the object
round-trips exactly through ``to_dict``/``from_dict``.
"""

from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path

import yaml

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - version-dependent import
    import tomli as tomllib

from .errors import UsageError

DEFAULTS: dict = {
    "preprocess": {
        "none_max": 0,
        "low_max": 3,
        "medium_max": 6,
        "clip_sigma": 4.0,
        "smooth_window": 5,
        "impute": True,
        "window_frames": 60,
        "frame_rate": 20.0,
    },
    "features": {
        "subset": "all40",
    },
    "cv": {
        "k": 10,
        "seed": 0,
    },
    "model": {
        "kind": "gbt",
        "rf": {
            "n_trees": 600,
            "max_depth": 10,
            "min_samples_split": 10,
            "min_samples_leaf": 4,
            "bootstrap": True,
        },
        "et": {
            "n_trees": 300,
            "max_depth": 12,
            "min_samples_split": 10,
            "min_samples_leaf": 4,
        },
        "gbt": {
            "n_rounds": 400,
            "max_depth": 6,
            "learning_rate": 0.05,
            "subsample": 0.8,
            "colsample_bytree": 0.8,
            "gamma": 0.1,
            "alpha": 0.1,
            "lam": 1.0,
            "base_score": 0.0,
        },
        "stack": {
            "oof_folds": 5,
            "max_iterations": 2000,
            "tol": 1e-6,
        },
    },
    "experiment": {
        "kind": "compare-models",
        "combo": "L1+L2+L3",
        "target_user": "",
        "personal_k": 10,
    },
    "io": {
        "out_dir": "out",
        "tracking": "",
        "reports": "",
        "mapping": "",
    },
}


def _check_keys(data: dict, schema: dict, path: str = "") -> None:
    for key, value in data.items():
        here = f"{path}.{key}" if path else key
        if key not in schema:
            raise UsageError(f"unknown config key: {here}")
        if isinstance(schema[key], dict):
            if not isinstance(value, dict):
                raise UsageError(f"config key {here} must be a section")
            _check_keys(value, schema[key], here)


def _merge(defaults: dict, overrides: dict) -> dict:
    out = {}
    for key, default in defaults.items():
        if isinstance(default, dict):
            out[key] = _merge(default, overrides.get(key, {}))
        elif key in overrides:
            out[key] = overrides[key]
        else:
            out[key] = copy.deepcopy(default)
    return out


class PipelineConfig:
    def __init__(self, data: dict | None = None):
        data = data or {}
        _check_keys(data, DEFAULTS)
        self.data = _merge(DEFAULTS, data)

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        return cls(data)

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        suffix = path.suffix.lower()
        if suffix == ".toml":
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
        elif suffix == ".json":
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        elif suffix in (".yaml", ".yml"):
            with open(path, "r", encoding="utf-8") as fh:
                raw = yaml.safe_load(fh) or {}
        else:
            raise UsageError(
                f"unsupported config format {suffix!r} (use .toml/.json/.yaml)"
            )
        if not isinstance(raw, dict):
            raise UsageError(f"config file {path} must hold a table/mapping")
        return cls(raw)

    def to_dict(self) -> dict:
        return copy.deepcopy(self.data)

    def get(self, dotted: str):
        node = self.data
        for part in dotted.split("."):
            node = node[part]
        return node

    def set(self, dotted: str, value) -> None:
        parts = dotted.split(".")
        schema = DEFAULTS
        node = self.data
        for part in parts[:-1]:
            if part not in schema:
                raise UsageError(f"unknown config key: {dotted}")
            schema = schema[part]
            node = node[part]
        if parts[-1] not in schema:
            raise UsageError(f"unknown config key: {dotted}")
        node[parts[-1]] = value

    def model_params(self, kind: str) -> dict:
        return dict(self.data["model"].get(kind, {}))

    def config_hash(self) -> str:
        canon = json.dumps(self.data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:8]

    def __eq__(self, other) -> bool:
        return isinstance(other, PipelineConfig) and self.data == other.data
