"""
Run configuration and input loaders.

Equations come from TOML files (``F = "..."``, optional ``name``) or
inline expressions; points from JSON files or inline JSON; surface
requests from TOML files.
"""

import tomllib
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import orjson
from loguru import logger
from pydantic.v1 import BaseModel, ValidationError, validator

from prolongkit.constants import (
    DEFAULT_SEED,
    NORMAL_FORM_PROBES,
    ORACLE_MIN_SAMPLES,
    ORACLE_SAMPLES,
    PARABOLIC_BAND,
    RANK_TOL,
    RESIDUAL_TOL,
    VERIFICATION_GRID,
)
from prolongkit.contact import J2, PdeSurface
from prolongkit.exceptions import InputFileError
from prolongkit.expr import parse_expr
from prolongkit.prolong.atlas import resolve_atlas_chart
from prolongkit.solutions.inputs import InputFunction
from prolongkit.solutions.surfaces import SolutionSurface, build_surface, construction


class RunConfig(BaseModel):
    """Tolerances, sample counts and the seed shared by every command."""

    tol_rank: float = RANK_TOL
    tol_residual: float = RESIDUAL_TOL
    parabolic_band: float = PARABOLIC_BAND
    seed: int = DEFAULT_SEED
    oracle_samples: int = ORACLE_SAMPLES
    grid: int = VERIFICATION_GRID
    normal_form_probes: int = NORMAL_FORM_PROBES

    class Config:
        allow_mutation = False

    @validator("tol_rank", "tol_residual", "parabolic_band")
    def check_tolerance(cls, value: float) -> float:
        if not 0 < value < 1:
            raise ValueError("tolerances must lie in (0, 1)")
        return value

    @validator("oracle_samples")
    def check_oracle_samples(cls, value: int) -> int:
        if value < ORACLE_MIN_SAMPLES:
            raise ValueError(f"the fiber oracle needs at least {ORACLE_MIN_SAMPLES} samples")
        return value

    @validator("grid")
    def check_grid(cls, value: int) -> int:
        if value < 3 or value % 2 == 0:
            raise ValueError("the verification grid must be odd and at least 3")
        return value

    @classmethod
    def create(cls, **overrides: Any) -> "RunConfig":
        """Configuration from command line values; ``None`` keeps the default."""
        try:
            return cls(**{key: value for key, value in overrides.items() if value is not None})
        except ValidationError as error:
            raise InputFileError(f"invalid configuration: {error}") from error

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def _read_toml(path: Path) -> dict[str, Any]:
    try:
        with path.open("rb") as fd:
            return tomllib.load(fd)
    except OSError as error:
        raise InputFileError(f"cannot read {path}: {error}") from error
    except tomllib.TOMLDecodeError as error:
        raise InputFileError(f"{path} is not valid TOML: {error}") from error


def load_pde(source: str | Path) -> PdeSurface:
    """Equation from a TOML file, or the expression of F itself."""
    path = Path(source)
    if not path.is_file():
        if str(source).endswith(".toml"):
            raise InputFileError(f"{path} does not exist")
        return PdeSurface.from_text(str(source))
    content = _read_toml(path)
    if not isinstance(content.get("F"), str):
        raise InputFileError(f"{path} must define the equation as a string F")
    return PdeSurface.from_text(content["F"], name=str(content.get("name", "")))


def _numbers(entry: Mapping[str, Any], origin: str) -> dict[str, float]:
    point = {}
    for name, value in entry.items():
        if isinstance(value, bool) or not isinstance(value, int | float):
            raise InputFileError(f"coordinate {name} of {origin} is not a number")
        point[str(name)] = float(value)
    return point


def load_points(source: str | Path) -> list[dict[str, float]]:
    """
    Points from a JSON file or inline JSON.

    Accepts an object of equal length arrays keyed by coordinate, a list
    of objects, or a single object. Missing J^2 coordinates default to 0.
    """
    path = Path(source)
    try:
        raw = path.read_bytes() if path.is_file() else str(source).encode()
        data = orjson.loads(raw)
    except orjson.JSONDecodeError as error:
        raise InputFileError(f"points are not valid JSON: {error}") from error

    if isinstance(data, dict) and data and all(isinstance(value, list) for value in data.values()):
        lengths = {len(value) for value in data.values()}
        if len(lengths) != 1:
            raise InputFileError("coordinate arrays of the points have different lengths")
        entries = [{name: values[i] for name, values in data.items()} for i in range(lengths.pop())]
    elif isinstance(data, dict):
        entries = [data]
    elif isinstance(data, list) and all(isinstance(entry, dict) for entry in data):
        entries = data
    else:
        raise InputFileError("points must be an object of arrays, a list of objects or an object")

    points = []
    for index, entry in enumerate(entries):
        point = _numbers(entry, f"point {index}")
        missing = [name for name in J2.names if name not in point]
        if missing:
            logger.warning("Point {index} misses {missing}; using 0", index=index, missing=", ".join(missing))
            point.update(dict.fromkeys(missing, 0.0))
        points.append(point)
    return points


def load_coordinates(text: str | None) -> dict[str, float] | None:
    """Fiber coordinates given inline as a JSON object."""
    if text is None:
        return None
    try:
        data = orjson.loads(text)
    except orjson.JSONDecodeError as error:
        raise InputFileError(f"fiber coordinates are not valid JSON: {error}") from error
    if not isinstance(data, dict):
        raise InputFileError("fiber coordinates must be a JSON object")
    return _numbers(data, "the fiber point")


@dataclass(frozen=True)
class SurfaceRequest:
    """A singular solution to build: model, chart, input functions and overrides."""

    model: str
    chart: str
    functions: dict[str, InputFunction | str] = field(default_factory=dict)
    designated: dict[str, float] = field(default_factory=dict)
    components: dict[str, str] = field(default_factory=dict)

    def build(self) -> SolutionSurface:
        if not self.functions:
            return SolutionSurface.from_components(self.model, self.chart, self.components, self.designated)
        surface = build_surface(self.model, self.chart, self.functions, self.designated)
        for name, text in self.components.items():
            surface = surface.with_component(name, parse_expr(text, surface.domain))
        return surface


def _function(name: str, variable: str, value: Any, origin: Path) -> InputFunction | str:
    if isinstance(value, str):
        return value
    if isinstance(value, dict) and {"samples", "values"} <= set(value):
        return InputFunction.from_samples(variable, value["samples"], value["values"], name=name)
    raise InputFileError(f"function {name} in {origin} must be an expression or a table of samples and values")


def load_surface_request(path: str | Path) -> SurfaceRequest:
    path = Path(path)
    if not path.is_file():
        raise InputFileError(f"{path} does not exist")
    content = _read_toml(path)
    for key in ("model", "chart"):
        if not isinstance(content.get(key), str):
            raise InputFileError(f"{path} must define {key} as a string")
    model, chart = content["model"], resolve_atlas_chart(content["chart"])
    functions = content.get("functions", {})
    components = content.get("components", {})
    if not functions and not components:
        raise InputFileError(f"{path} defines neither functions nor components")
    variables = dict(construction(model, chart).functions) if functions else {}
    unknown = sorted(set(functions) - set(variables))
    if unknown:
        raise InputFileError(f"unknown input functions {unknown}; expected {sorted(variables)}")
    return SurfaceRequest(
        model=model,
        chart=chart,
        functions={name: _function(name, variables[name], value, path) for name, value in functions.items()},
        designated=_numbers(content.get("designated", {}), f"{path} designated point"),
        components={str(name): str(text) for name, text in components.items()},
    )
