"""Run configuration: a JSON document validated against a fixed schema.

Every section is optional and falls back to the defaults below (the
interval of length 4 at ``c = 0.6`` on ``[-40, 40]``).  Unknown keys are
rejected at every level.
"""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema

from .exceptions import ACWaveError


class ConfigError(ACWaveError, ValueError):
    """Malformed or inconsistent run configuration (exit code 2)."""


_POS = {"type": "number", "exclusiveMinimum": 0}
_POS_INT = {"type": "integer", "minimum": 1}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "cross_section": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "shape": {"enum": ["interval", "rectangle"]},
                "lengths": {"type": "array", "items": _POS, "minItems": 1, "maxItems": 2},
                "nodes": {"type": "array", "items": {"type": "integer", "minimum": 3}, "minItems": 1, "maxItems": 2},
            },
        },
        "channel": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "x_min": {"type": "number", "exclusiveMaximum": 0},
                "x_max": {"type": "number", "exclusiveMinimum": 0},
                "spacing": _POS,
            },
        },
        "speed": _POS,
        "speeds": {"type": "array", "items": _POS},
        "seeds": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "k_max": _POS_INT,
                "L": {"oneOf": [_POS, {"type": "null"}]},
                "eps": {"oneOf": [_POS, {"type": "null"}]},
                "per_mode": _POS_INT,
            },
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "critical": _POS,
                "newton": _POS,
                "asymptotic": _POS,
                "gap": _POS,
                "flux": _POS,
            },
        },
        "evolution": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"T": _POS, "dt": _POS, "lab_spacing": _POS, "lab_half_width": _POS},
        },
        "verification": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"poincare_samples": _POS_INT, "flux_pairs": _POS_INT},
        },
        "eig_count": _POS_INT,
        "output_dir": {"type": "string", "minLength": 1},
        "seed": {"type": "integer", "minimum": 0},
    },
}

DEFAULTS = {
    "cross_section": {"shape": "interval", "lengths": [4.0], "nodes": [41]},
    "channel": {"x_min": -40.0, "x_max": 40.0, "spacing": 0.025},
    "speed": 0.6,
    "speeds": [],
    "seeds": {"k_max": 1, "L": None, "eps": None, "per_mode": 4},
    "tolerances": {"critical": 1e-10, "newton": 1e-8, "asymptotic": 1e-3, "gap": 1e-3, "flux": 1e-6},
    "evolution": {"T": 20.0, "dt": 0.01, "lab_spacing": 0.05, "lab_half_width": 40.0},
    "verification": {"poincare_samples": 1000, "flux_pairs": 10},
    "eig_count": 5,
    "output_dir": "acwave-out",
    "seed": 0,
}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in over.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


@dataclass(frozen=True)
class RunConfig:
    """A validated, fully populated configuration (plain nested dict inside)."""

    data: dict

    @classmethod
    def from_dict(cls, raw: dict | None = None) -> "RunConfig":
        raw = {} if raw is None else raw
        try:
            jsonschema.validate(raw, SCHEMA)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"config error at {where}: {exc.message}") from None
        data = _merge(DEFAULTS, raw)
        cls._check(data)
        return cls(data)

    @classmethod
    def load(cls, path: str | Path | None) -> "RunConfig":
        if path is None:
            return cls.from_dict({})
        try:
            raw = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        return cls.from_dict(raw)

    @staticmethod
    def _check(data: dict) -> None:
        cs = data["cross_section"]
        ndim = 1 if cs["shape"] == "interval" else 2
        if len(cs["lengths"]) != ndim or len(cs["nodes"]) != ndim:
            raise ConfigError(f"a {cs['shape']} needs {ndim} length(s) and node count(s)")
        ch = data["channel"]
        for name in ("x_min", "x_max"):
            ratio = abs(ch[name]) / ch["spacing"]
            if abs(ratio - round(ratio)) > 1e-9:
                raise ConfigError(f"channel {name} must be a multiple of the spacing")
        if ch["spacing"] > 1.0:
            raise ConfigError("channel spacing must not exceed 1")

    def override(self, **changes) -> "RunConfig":
        """Copy with top-level keys replaced (``None`` values are ignored)."""
        raw = {k: v for k, v in changes.items() if v is not None}
        return RunConfig.from_dict(_merge(self.data, raw))

    def __getitem__(self, key):
        return self.data[key]

    def canonical(self) -> str:
        return json.dumps(self.data, sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()
