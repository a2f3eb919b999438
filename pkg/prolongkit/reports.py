"""
JSON reports of the command line.

Every report is a plain dict ``{schema_version, command, config, results}``
validated against the schema of its command and serialized with sorted
keys, so that the same configuration and seed give the same bytes.
"""

import math
from collections.abc import Mapping
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
import orjson
import sympy as sp
from jsonschema import validate
from loguru import logger

from prolongkit.config import RunConfig
from prolongkit.constants import REPORT_SCHEMA_VERSION
from prolongkit.expr import to_text

_NUMBER_OR_NULL = {"type": ["number", "null"]}
_POINT = {"type": "object", "additionalProperties": _NUMBER_OR_NULL}
_INTEGERS = {"type": "array", "items": {"type": "integer"}}


def _results(required: list[str], properties: Mapping[str, Any] | None = None) -> dict[str, Any]:
    return {
        "type": "array",
        "items": {"type": "object", "required": required, "properties": dict(properties or {})},
    }


RESULT_SCHEMAS: dict[str, dict[str, Any]] = {
    "classify": _results(
        ["point", "class", "delta", "band"],
        {
            "point": _POINT,
            "class": {"enum": ["Hyperbolic", "Parabolic", "Elliptic", "NonRegular"]},
            "delta": _NUMBER_OR_NULL,
            "delta_exact": {"type": ["string", "null"]},
            "band": {"type": "boolean"},
        },
    ),
    "fiber": _results(
        ["point", "class", "delta", "signature", "topology", "singular_points", "charts"],
        {
            "signature": {**_INTEGERS, "minItems": 3, "maxItems": 3},
            "topology": {"enum": ["Torus", "PinchedTorus", "Sphere", "Other"]},
            "singular_points": {"type": "array"},
            "charts": {
                "type": "array",
                "items": {"type": "object", "required": ["id", "f1", "f2", "empty"]},
            },
        },
    ),
    "rank4-type": _results(["point", "type", "alpha", "beta", "gamma", "discriminant"]),
    "derived": _results(["point", "ranks", "weak_ranks", "dimension"], {"ranks": _INTEGERS, "weak_ranks": _INTEGERS}),
    "symbol": _results(
        ["point", "stratum", "graded_dims", "bracket_image_dims", "generating_condition", "reference_match"],
        {"graded_dims": _INTEGERS, "stratum": {"type": "integer", "minimum": 0, "maximum": 2}},
    ),
    "prolong": _results(["point", "steps"], {"steps": {"type": "array", "minItems": 1}}),
    "charts": {
        "type": "object",
        "required": ["grassmann", "atlas"],
        "properties": {"grassmann": {"type": "array"}, "atlas": {"type": "array", "minItems": 6, "maxItems": 6}},
    },
    "solve": {"type": "object", "required": ["model", "chart", "parameters", "components", "designated"]},
    "verify-solution": {
        "type": "object",
        "required": ["model", "chart", "residuals", "legendrian", "passed", "corank", "immersed", "singular_points"],
        "properties": {"passed": {"type": "boolean"}, "corank": {"type": "integer", "minimum": 0, "maximum": 2}},
    },
}


def report_schema(command: str) -> dict[str, Any]:
    return {
        "type": "object",
        "required": ["schema_version", "command", "config", "results"],
        "properties": {
            "schema_version": {"const": REPORT_SCHEMA_VERSION},
            "command": {"const": command},
            "config": {"type": "object"},
            "results": RESULT_SCHEMAS[command],
        },
    }


def to_json_value(value: Any) -> Any:
    """Plain JSON data: non finite floats become null, sympy values expression strings."""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, bool | None | str):
        return value
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, int | np.integer):
        return int(value)
    if isinstance(value, float | np.floating):
        return float(value) if math.isfinite(value) else None
    if isinstance(value, sp.Rational):
        return str(value)
    if isinstance(value, sp.Basic):
        return to_text(value)
    if isinstance(value, np.ndarray):
        return to_json_value(value.tolist())
    if isinstance(value, Mapping):
        return {str(key): to_json_value(item) for key, item in value.items()}
    if isinstance(value, list | tuple):
        return [to_json_value(item) for item in value]
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def build_report(command: str, config: RunConfig, results: Any) -> dict[str, Any]:
    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "command": command,
        "config": config.dict(),
        "results": results,
    }
    report = to_json_value(report)
    validate(instance=report, schema=report_schema(command))
    return report


def dumps(report: Mapping[str, Any]) -> bytes:
    return orjson.dumps(report, option=orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2) + b"\n"


def write_report(report: Mapping[str, Any], path: Path | None = None) -> bytes:
    """Serialize the report to ``path``, or return it for stdout."""
    data = dumps(report)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        logger.info("Wrote {command} report to {path}", command=report["command"], path=path)
    return data
