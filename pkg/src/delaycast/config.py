"""Run configuration: a single JSON document with CLI overrides.

Every command reads the same file; unknown keys are rejected so typos
fail fast. `--set a.b=value` overrides nested keys, with values parsed
as JSON when possible and kept as strings otherwise.
"""
import copy
import hashlib
import json

from .errors import ConfigError

DEFAULTS = {
    "input_csv": None,
    "column_map": {},
    "delay_threshold_minutes": 15,
    "total_delay_rule": "or",
    "sample_per_month": None,
    "train_fraction": 0.75,
    "seeds": {"sample": 0, "split": 1, "model": 2},
    "task": "total",
    "classifier": "hybrid",
    "hybrid_head": "rdf",
    "matrix_format": "npy",
    "output_dir": "runs/default",
    "fcnn": {},
    "forest": {},
    "gbm": {},
    "sweep": {"axis": "hidden_units", "values": []},
}

TASKS = ("departure", "arrival", "total")
CLASSIFIERS = ("fcnn", "rdf", "xgb", "hybrid")
SWEEP_AXES = ("hidden_units", "hidden_layers", "epochs")


# model-parameter and column-map dicts accept arbitrary keys; they are
# validated where they are consumed
FREE_DICTS = ("column_map", "fcnn", "forest", "gbm")


def _merge(base, override, path=""):
    out = copy.deepcopy(base)
    for key, val in override.items():
        if key not in base:
            raise ConfigError(f"unknown config key: {path}{key}")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"config key {path}{key} must be an object")
            if key in FREE_DICTS:
                merged = copy.deepcopy(base[key])
                merged.update(copy.deepcopy(val))
                out[key] = merged
            else:
                out[key] = _merge(base[key], val, path=f"{path}{key}.")
        else:
            out[key] = copy.deepcopy(val)
    return out


class RunConfig:
    def __init__(self, data):
        self.data = data
        self._validate()

    @classmethod
    def load(cls, path, overrides=()):
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        data = _merge(DEFAULTS, raw)
        for item in overrides:
            data = _apply_override(data, item)
        return cls(data)

    def _validate(self):
        d = self.data
        if d["task"] not in TASKS:
            raise ConfigError(f"task must be one of {TASKS}, got {d['task']!r}")
        if d["classifier"] not in CLASSIFIERS:
            raise ConfigError(
                f"classifier must be one of {CLASSIFIERS}, got {d['classifier']!r}"
            )
        if not 0 < d["train_fraction"] < 1:
            raise ConfigError("train_fraction must lie in (0, 1)")
        if d["total_delay_rule"] not in ("or", "arrival"):
            raise ConfigError("total_delay_rule must be 'or' or 'arrival'")
        if d["matrix_format"] not in ("npy", "csv"):
            raise ConfigError("matrix_format must be 'npy' or 'csv'")
        if d["sweep"]["axis"] not in SWEEP_AXES:
            raise ConfigError(f"sweep.axis must be one of {SWEEP_AXES}")

    def __getitem__(self, key):
        return self.data[key]

    @property
    def seeds(self):
        return self.data["seeds"]

    def hash(self):
        canon = json.dumps(self.data, sort_keys=True).encode()
        return hashlib.sha256(canon).hexdigest()


def _apply_override(data, item):
    if "=" not in item:
        raise ConfigError(f"--set expects key=value, got {item!r}")
    key, _, raw = item.partition("=")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    nested = value
    for part in reversed(key.split(".")):
        nested = {part: nested}
    return _merge(data, nested)
