"""Experiment configuration: JSON schema, defaults, loading and hashing."""
import copy
import hashlib
import json
import re

import jsonschema

from .errors import ConfigError

_NUM = {"type": "number"}
_TORUS = {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "hitchin-forge experiment configuration",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "d": {"type": "integer", "minimum": 3, "maximum": 8},
        "p1": _TORUS,
        "p2": _TORUS,
        "twist": _NUM,
        "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
        "census": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "max_word_len": {"type": "integer", "minimum": 1, "maximum": 64},
                "radius": {"type": "number", "exclusiveMinimum": 0},
                "subsurface_radius": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "slack": {"type": "number", "minimum": 0},
                "cap": {"type": "integer", "minimum": 1},
            },
        },
        "graft": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kernel": {"type": "boolean"},
                "sign": {"enum": [1, -1]},
                "direction": {"type": ["array", "null"], "items": _NUM},
            },
        },
        "ray": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "grid": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
                "h": {"type": "number", "exclusiveMinimum": 0},
                "t_max": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "pants": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "a": {"type": "number", "exclusiveMinimum": 0},
                "b": {"type": "number", "exclusiveMinimum": 0},
                "c": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0},
                      "minItems": 1},
                "radius": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "out": {"type": ["string", "null"]},
    },
}

DEFAULTS = {
    "d": 3,
    "p1": [4.0, 4.0, 4.0],
    "p2": [4.0, 4.0, 4.0],
    "twist": 0.0,
    "seed": 0,
    "census": {"max_word_len": 40, "radius": 16.0, "subsurface_radius": 26.0,
               "slack": 2.0, "cap": 10 ** 8},
    "graft": {"kernel": True, "sign": 1, "direction": None},
    "ray": {"grid": [0, 1, 2, 4, 6, 8], "h": 0.25, "t_max": 8.0},
    "pants": {"a": 4.0, "b": 4.0, "c": [4.0, 8.0, 12.0], "radius": 32.0},
    "out": None,
}


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _locate(text, path):
    """Line and column of the last key of ``path`` in the JSON text, if found."""
    keys = [p for p in path if isinstance(p, str)]
    if not text or not keys:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(keys[-1]), text)
    if not m:
        return None
    line = text.count("\n", 0, m.start()) + 1
    col = m.start() - (text.rfind("\n", 0, m.start()) + 1) + 1
    return line, col


def validate(cfg, text=None):
    """Raise ConfigError describing the first schema violation."""
    v = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(v.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        pos = _locate(text, list(e.absolute_path))
        if pos is None and e.validator == "additionalProperties":
            extra = re.findall(r"'([^']+)'", e.message)
            pos = _locate(text, extra[-1:]) if extra else None
        at = f" (line {pos[0]}, column {pos[1]})" if pos else ""
        raise ConfigError(f"config error at {where}{at}: {e.message}")


def parse(text):
    """Parse and validate JSON text; return the effective configuration."""
    try:
        raw = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON (line {exc.lineno}, column {exc.colno}): {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    validate(raw, text)
    return _merge(DEFAULTS, raw)


def load(path=None):
    if path is None:
        return copy.deepcopy(DEFAULTS)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse(text)


def override(cfg, seed=None, max_word_len=None):
    """Apply command-line flags, revalidating the result."""
    cfg = copy.deepcopy(cfg)
    if seed is not None:
        cfg["seed"] = seed
    if max_word_len is not None:
        cfg["census"]["max_word_len"] = max_word_len
    validate(cfg)
    return cfg


def config_hash(cfg):
    """Stable short hash of the effective configuration (output path excluded)."""
    body = {k: v for k, v in cfg.items() if k != "out"}
    blob = json.dumps(body, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]
