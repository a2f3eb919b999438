"""
Integral surfaces of the model equations inside Sigma(J^2) charts.

Each construction takes the arbitrary functions of the general integral
surface through the chart and returns its components as expressions in
the two chart parameters. Constants of integration vanish at parameter 0.
"""

from collections.abc import Callable, Mapping
from dataclasses import dataclass, field, replace
from functools import cached_property

import sympy as sp
from loguru import logger

from prolongkit.exceptions import ChartError, InputFileError
from prolongkit.expr import Chart, coordinate, evaluate, parse_expr
from prolongkit.prolong.atlas import PLANES, EmbeddedModel, Model, embed_model, resolve_atlas_chart
from prolongkit.solutions.inputs import HolomorphicPair, InputFunction, antiderivative, path_integral


@dataclass(frozen=True, eq=False)
class SolutionSurface:
    """
    A parametrized surface in a model equation's chart of Sigma(J^2).

    ``components`` maps every chart coordinate to an expression in the
    two ``parameters``; ``designated`` is the parameter point checked for
    non immersion.
    """

    model: Model
    chart: str
    parameters: tuple[str, str]
    components: dict[str, sp.Expr]
    designated: dict[str, float] = field(default_factory=dict)
    diagnostics: dict[str, float] = field(default_factory=dict)

    @classmethod
    def from_components(
        cls,
        model: Model | str,
        chart: str,
        components: Mapping[str, str],
        designated: Mapping[str, float] | None = None,
    ) -> "SolutionSurface":
        """Surface given by component expressions; parameters map to themselves when omitted."""
        embedding = embed_model(model, chart)
        parameters = _parameters(embedding.ambient.letter)
        domain = Chart(parameters)
        parsed = {name: parse_expr(text, domain) for name, text in components.items()}
        for name in parameters:
            parsed.setdefault(name, coordinate(name))
        unknown = sorted(set(parsed) - set(embedding.chart.names))
        missing = [name for name in embedding.chart.names if name not in parsed]
        if unknown or missing:
            raise InputFileError(
                f"components of {embedding.system().name} must be exactly {', '.join(embedding.chart.names)}"
                + (f"; unknown {unknown}" if unknown else "")
                + (f"; missing {missing}" if missing else "")
            )
        return cls(
            embedding.model,
            embedding.ambient.plane,
            parameters,
            {name: parsed[name] for name in embedding.chart.names},
            _designated(parameters, designated),
        )

    @cached_property
    def embedding(self) -> EmbeddedModel:
        return embed_model(self.model, self.chart)

    @property
    def domain(self) -> Chart:
        return Chart(self.parameters)

    def at(self, values: Mapping[str, float]) -> dict[str, float]:
        return {name: evaluate(expression, values) for name, expression in self.components.items()}

    def with_component(self, name: str, expression: sp.Expr) -> "SolutionSurface":
        if name not in self.components:
            raise ChartError(f"the surface has no component {name!r}")
        return replace(self, components={**self.components, name: sp.sympify(expression)})


def _parameters(letter: str) -> tuple[str, str]:
    plane = PLANES[letter]
    return plane[0], plane[1]


def _designated(parameters: tuple[str, str], values: Mapping[str, float] | None) -> dict[str, float]:
    values = values or {}
    unknown = sorted(set(values) - set(parameters))
    if unknown:
        raise InputFileError(f"designated point uses unknown parameters {unknown}; expected {list(parameters)}")
    return {name: float(values.get(name, 0.0)) for name in parameters}


def _surface(
    model: Model,
    letter: str,
    components: dict[str, sp.Expr],
    designated: Mapping[str, float] | None,
    diagnostics: dict[str, float] | None = None,
) -> SolutionSurface:
    parameters = _parameters(letter)
    embedding = embed_model(model, letter)
    surface = SolutionSurface(
        model,
        PLANES[letter],
        parameters,
        {name: sp.sympify(components[name]) for name in embedding.chart.names},
        _designated(parameters, designated),
        diagnostics or {},
    )
    logger.debug("Built {model} surface on V_{plane}", model=model.value, plane=surface.chart)
    return surface


def wave_solution_xt(
    y: InputFunction, z0: InputFunction, designated: Mapping[str, float] | None = None
) -> SolutionSurface:
    """Integral surfaces of s = 0 through V_xt, with y = y(t) and the arbitrary z0(x)."""
    y.require(1, "y(t)")
    z0.require(3, "z0(x)")
    x, t = coordinate("x"), coordinate("t")
    Y = y.at("t")
    dY = sp.diff(Y, t)
    Z0 = z0.at("x")
    first = antiderivative(Y, "t")
    components = {
        "x": x,
        "y": Y,
        "z": t * Y**2 / 2 + antiderivative(Y**2, "t") / 2 - Y * first + Z0,
        "p": sp.diff(Z0, x),
        "q": t * Y - first,
        "r": sp.diff(Z0, x, 2),
        "t": t,
        "B": dY,
        "c": sp.diff(Z0, x, 3),
    }
    return _surface(Model.WAVE, "B", components, designated)


def wave_solution_rt(
    x: InputFunction, y: InputFunction, designated: Mapping[str, float] | None = None
) -> SolutionSurface:
    """Integral surfaces of s = 0 through V_rt, with x = x(r) and y = y(t)."""
    x.require(1, "x(r)")
    y.require(1, "y(t)")
    r, t = coordinate("r"), coordinate("t")
    X, Y = x.at("r"), y.at("t")
    X1, Y1 = antiderivative(X, "r"), antiderivative(Y, "t")
    components = {
        "x": X,
        "y": Y,
        "z": (r * X**2 + t * Y**2 + antiderivative(X**2, "r") + antiderivative(Y**2, "t")) / 2 - (X * X1 + Y * Y1),
        "p": r * X - X1,
        "q": t * Y - Y1,
        "r": r,
        "t": t,
        "A": sp.diff(X, r),
        "D": sp.diff(Y, t),
    }
    return _surface(Model.WAVE, "E", components, designated)


def parabolic_solution_st(
    y: InputFunction, x0: InputFunction, designated: Mapping[str, float] | None = None
) -> SolutionSurface:
    """Integral surfaces of r = 0 through V_st, with y = y(s) and x = t y'(s) + x0(s)."""
    y.require(2, "y(s)")
    x0.require(1, "x0(s)")
    s, t = coordinate("s"), coordinate("t")
    Y, X0 = y.at("s"), x0.at("s")
    dY = sp.diff(Y, s)
    Y1, X01 = antiderivative(Y, "s"), antiderivative(X0, "s")
    components = {
        "x": t * dY + X0,
        "y": Y,
        "z": t * (s * Y - Y1) * dY + s * Y * X0 + antiderivative(Y * X0, "s") - X0 * Y1 - Y * X01,
        "p": s * Y - Y1,
        "q": t * s * dY + s * X0 - X01,
        "s": s,
        "t": t,
        "A": t * sp.diff(Y, s, 2) + sp.diff(X0, s),
        "B": dY,
    }
    return _surface(Model.PARABOLIC, "F", components, designated)


def laplace_solution_rs(f: HolomorphicPair, designated: Mapping[str, float] | None = None) -> SolutionSurface:
    """
    Integral surfaces of r + t = 0 through V_rs from f = y + i x holomorphic.

    (p, q) and z are potentials of the closed forms
    ``(r x_r + s y_r) dr + (r x_s + s y_s) ds``,
    ``(s x_r - r y_r) dr + (s x_s - r y_s) ds`` and ``p dx + q dy``.
    """
    if f.variables != ("r", "s"):
        raise InputFileError(f"the holomorphic data must be given in (r, s), not {f.variables}")
    input_residual = f.require_holomorphic()
    r, s = f.symbols
    Y, X = f.real, f.imaginary
    x_r, x_s, y_r, y_s = sp.diff(X, r), sp.diff(X, s), sp.diff(Y, r), sp.diff(Y, s)
    p = path_integral((r * x_r + s * y_r, r * x_s + s * y_s), name="p")
    q = path_integral((s * x_r - r * y_r, s * x_s - r * y_s), name="q")
    z = path_integral((p * x_r + q * y_r, p * x_s + q * y_s), name="z")
    output_residual = HolomorphicPair(p, q).cauchy_riemann_residual()
    components = {"x": X, "y": Y, "z": z, "p": p, "q": q, "r": r, "s": s, "B": y_r, "D": y_s}
    return _surface(
        Model.LAPLACE,
        "D",
        components,
        designated,
        {"cauchy_riemann_input": input_residual, "cauchy_riemann_output": output_residual},
    )


@dataclass(frozen=True)
class Construction:
    build: Callable[..., SolutionSurface]
    functions: tuple[tuple[str, str], ...]
    holomorphic: bool = False


CONSTRUCTIONS: dict[tuple[Model, str], Construction] = {
    (Model.WAVE, "B"): Construction(wave_solution_xt, (("y", "t"), ("z0", "x"))),
    (Model.WAVE, "E"): Construction(wave_solution_rt, (("x", "r"), ("y", "t"))),
    (Model.PARABOLIC, "F"): Construction(parabolic_solution_st, (("y", "s"), ("x0", "s"))),
    (Model.LAPLACE, "D"): Construction(laplace_solution_rs, (("y", "r,s"), ("x", "r,s")), holomorphic=True),
}


def construction(model: Model | str, chart: str) -> Construction:
    embedding = embed_model(model, chart)
    key = (embedding.model, embedding.ambient.letter)
    if key not in CONSTRUCTIONS:
        available = sorted(f"{found.value}/{PLANES[letter]}" for found, letter in CONSTRUCTIONS)
        raise ChartError(f"no singular solution construction for {key[0].value} on V_{PLANES[key[1]]}; use {available}")
    return CONSTRUCTIONS[key]


def build_surface(
    model: Model | str,
    chart: str,
    functions: Mapping[str, InputFunction | str],
    designated: Mapping[str, float] | None = None,
) -> SolutionSurface:
    """Dispatch to the construction of ``(model, chart)`` with named input functions."""
    recipe = construction(model, resolve_atlas_chart(chart))
    names = [name for name, _ in recipe.functions]
    missing = [name for name in names if name not in functions]
    if missing:
        raise InputFileError(f"missing input functions {missing}; expected {names}")
    if recipe.holomorphic:
        texts = [functions[name] for name in names]
        if not all(isinstance(text, str) for text in texts):
            raise InputFileError("holomorphic data must be given as expressions in r and s")
        return recipe.build(HolomorphicPair.parse(*texts), designated=designated)  # type: ignore[arg-type]
    inputs = []
    for name, variable in recipe.functions:
        value = functions[name]
        function = value if isinstance(value, InputFunction) else InputFunction.parse(value, variable)
        if function.variable != variable:
            raise InputFileError(f"input {name} must be a function of {variable}, not {function.variable}")
        inputs.append(function)
    return recipe.build(*inputs, designated=designated)
