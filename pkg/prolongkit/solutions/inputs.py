"""
Input functions of the singular solution constructions.

Polynomial inputs are integrated exactly. Tabulated inputs become quintic
interpolating splines, and antiderivatives of anything else are computed
by adaptive quadrature; both are wrapped as sympy functions whose
derivatives are known exactly, so pullbacks stay symbolic.
"""

from collections.abc import Callable, Sequence
from dataclasses import dataclass
from enum import StrEnum
from functools import lru_cache
from itertools import count

import numpy as np
import sympy as sp
from loguru import logger
from scipy.integrate import fixed_quad, quad
from scipy.interpolate import BSpline, make_interp_spline
from sympy.core.function import UndefinedFunction

from prolongkit.constants import (
    CAUCHY_RIEMANN_TOL,
    GAUSS_LEGENDRE_NODES,
    PATH_INDEPENDENCE_TOL,
    QUADRATURE_EPSABS,
    QUADRATURE_EPSREL,
    SPLINE_DEGREE,
    ZERO_TEST_BOX,
    ZERO_TEST_SAMPLES,
    ZERO_TEST_SEED,
)
from prolongkit.exceptions import (
    CauchyRiemannError,
    DomainError,
    InputFileError,
    InsufficientSmoothnessError,
    PathDependenceError,
)
from prolongkit.expr import Chart, coordinate, evaluate, parse_expr

_SERIAL = count(1)

Derivative = Callable[[tuple[sp.Expr, ...], int], sp.Expr]


def _vectorized(scalar: Callable[..., float]) -> Callable[..., float | np.ndarray]:
    vector = np.vectorize(scalar, otypes=[float])

    def implementation(*values: float | np.ndarray) -> float | np.ndarray:
        result = vector(*values)
        return float(result) if np.ndim(result) == 0 else result

    return implementation


def implemented(
    prefix: str, implementation: Callable[..., float | np.ndarray], derivative: Derivative
) -> UndefinedFunction:
    """A sympy function evaluated numerically by ``implementation`` with exact ``fdiff``."""

    def fdiff(self: sp.Function, argindex: int = 1) -> sp.Expr:
        return derivative(self.args, argindex)

    return UndefinedFunction(f"{prefix}_{next(_SERIAL)}", _imp_=staticmethod(implementation), fdiff=fdiff)


class SplineFamily:
    """An interpolating spline and its continuous derivatives as sympy functions."""

    def __init__(self, name: str, spline: BSpline):
        self.name = name
        self.spline = spline
        self._functions: dict[int, UndefinedFunction] = {}

    @property
    def smoothness(self) -> int:
        return int(self.spline.k) - 1

    def function(self, order: int = 0) -> UndefinedFunction:
        if order > self.smoothness:
            raise InsufficientSmoothnessError(
                f"the degree {self.spline.k} spline of {self.name} has {self.smoothness} continuous derivatives, "
                f"derivative {order} requested"
            )
        if order not in self._functions:
            spline = self.spline.derivative(order) if order else self.spline

            def implementation(value: float | np.ndarray) -> float | np.ndarray:
                result = spline(value)
                return float(result) if np.ndim(result) == 0 else result

            self._functions[order] = implemented(
                f"{self.name}_d{order}", implementation, lambda args, _: self.function(order + 1)(*args)
            )
        return self._functions[order]


class InputSource(StrEnum):
    EXPRESSION = "expression"
    SAMPLES = "samples"


@dataclass(frozen=True, eq=False)
class InputFunction:
    """
    A function of one parameter.

    ``smoothness`` is the highest order of continuous derivative, ``None``
    for expressions.
    """

    variable: str
    expression: sp.Expr
    smoothness: int | None = None
    source: InputSource = InputSource.EXPRESSION

    @classmethod
    def parse(cls, text: str, variable: str) -> "InputFunction":
        return cls(variable, parse_expr(text, Chart((variable,))))

    @classmethod
    def from_samples(
        cls,
        variable: str,
        abscissae: Sequence[float],
        values: Sequence[float],
        degree: int = SPLINE_DEGREE,
        name: str | None = None,
    ) -> "InputFunction":
        points = np.asarray(abscissae, dtype=float)
        data = np.asarray(values, dtype=float)
        if points.ndim != 1 or points.shape != data.shape:
            raise InputFileError(f"samples of {variable} need matching 1-dimensional abscissae and values")
        if len(points) < degree + 1:
            raise InsufficientSmoothnessError(f"a degree {degree} spline needs at least {degree + 1} samples")
        order = np.argsort(points)
        if np.any(np.diff(points[order]) <= 0):
            raise InputFileError(f"samples of {variable} repeat an abscissa")
        spline = make_interp_spline(points[order], data[order], k=degree)
        family = SplineFamily(name or variable, spline)
        logger.debug("Interpolated {count} samples in {variable}", count=len(points), variable=variable)
        return cls(variable, family.function(0)(coordinate(variable)), family.smoothness, InputSource.SAMPLES)

    @property
    def symbol(self) -> sp.Symbol:
        return coordinate(self.variable)

    @property
    def is_polynomial(self) -> bool:
        return bool(self.expression.is_polynomial(self.symbol))

    def require(self, order: int, role: str = "input") -> None:
        if self.smoothness is not None and order > self.smoothness:
            raise InsufficientSmoothnessError(
                f"{role} needs {order} continuous derivatives, the {self.source.value} input has {self.smoothness}"
            )

    def derivative(self, order: int = 1) -> sp.Expr:
        self.require(order)
        return sp.diff(self.expression, self.symbol, order)

    def at(self, variable: str) -> sp.Expr:
        """The expression in another parameter."""
        return self.expression.xreplace({self.symbol: coordinate(variable)})


def antiderivative(expression: sp.Expr, variable: str) -> sp.Expr:
    """Antiderivative vanishing at 0; exact for polynomials, adaptive quadrature otherwise."""
    symbol = coordinate(variable)
    expression = sp.sympify(expression)
    if expression.is_polynomial(symbol):
        return sp.Poly(expression, symbol).integrate().as_expr()

    @lru_cache(maxsize=4096)
    def scalar(upper: float) -> float:
        value, _ = quad(
            lambda value: evaluate(expression, {variable: value}),
            0.0,
            float(upper),
            epsabs=QUADRATURE_EPSABS,
            epsrel=QUADRATURE_EPSREL,
            limit=200,
        )
        return value

    function = implemented(
        f"int_{variable}", _vectorized(scalar), lambda args, _: expression.xreplace({symbol: args[0]})
    )
    return function(symbol)


def _random_points(names: Sequence[str], samples: int = ZERO_TEST_SAMPLES) -> list[dict[str, float]]:
    rng = np.random.default_rng(ZERO_TEST_SEED)
    return [
        dict(zip(names, rng.uniform(-ZERO_TEST_BOX, ZERO_TEST_BOX, size=len(names)), strict=True))
        for _ in range(samples)
    ]


def max_residual(expressions: Sequence[sp.Expr], names: Sequence[str], samples: int = ZERO_TEST_SAMPLES) -> float:
    """Largest absolute value of the expressions over seeded random points."""
    worst = 0.0
    for point in _random_points(names, samples):
        try:
            worst = max(worst, *(abs(evaluate(expression, point)) for expression in expressions))
        except DomainError:
            continue
    return worst


@dataclass(frozen=True, eq=False)
class HolomorphicPair:
    """Real and imaginary parts (u, v) of f(r + i s) = u + i v."""

    real: sp.Expr
    imaginary: sp.Expr
    variables: tuple[str, str] = ("r", "s")

    @classmethod
    def parse(cls, real: str, imaginary: str, variables: tuple[str, str] = ("r", "s")) -> "HolomorphicPair":
        chart = Chart(variables)
        return cls(parse_expr(real, chart), parse_expr(imaginary, chart), variables)

    @property
    def symbols(self) -> tuple[sp.Symbol, sp.Symbol]:
        return coordinate(self.variables[0]), coordinate(self.variables[1])

    @property
    def is_polynomial(self) -> bool:
        return all(part.is_polynomial(*self.symbols) for part in (self.real, self.imaginary))

    def cauchy_riemann_residual(self) -> float:
        r, s = self.symbols
        return max_residual(
            (
                sp.diff(self.real, r) - sp.diff(self.imaginary, s),
                sp.diff(self.real, s) + sp.diff(self.imaginary, r),
            ),
            self.variables,
        )

    def require_holomorphic(self, tol: float = CAUCHY_RIEMANN_TOL) -> float:
        residual = self.cauchy_riemann_residual()
        if residual > tol:
            raise CauchyRiemannError(residual)
        return residual


def _line(function: Callable, fixed: float, moving_first: bool) -> Callable[[np.ndarray], np.ndarray]:
    def integrand(values: np.ndarray) -> np.ndarray:
        other = np.full_like(values, fixed)
        result = function(values, other) if moving_first else function(other, values)
        return np.broadcast_to(np.asarray(result, dtype=float), np.shape(values))

    return integrand


def path_integral(
    gradient: tuple[sp.Expr, sp.Expr],
    variables: tuple[str, str] = ("r", "s"),
    base: tuple[float, float] = (0.0, 0.0),
    name: str = "potential",
) -> sp.Expr:
    """
    Potential of a closed 1-form ``a dr + b ds`` vanishing at ``base``.

    Integrates along the path (r0, s0) -> (r, s0) -> (r, s): exactly for
    polynomial data, by Gauss-Legendre quadrature otherwise. The second L
    shaped path must agree within the path independence tolerance.
    """
    r, s = coordinate(variables[0]), coordinate(variables[1])
    first, second = (sp.sympify(component) for component in gradient)
    r0, s0 = base

    if first.is_polynomial(r, s) and second.is_polynomial(r, s):
        rho, sigma = sp.Dummy("rho", real=True), sp.Dummy("sigma", real=True)
        result = sp.expand(
            sp.integrate(first.xreplace({r: rho, s: sp.nsimplify(s0)}), (rho, sp.nsimplify(r0), r))
            + sp.integrate(second.xreplace({s: sigma}), (sigma, sp.nsimplify(s0), s))
        )
        difference = max_residual((sp.diff(result, r) - first, sp.diff(result, s) - second), variables)
        if difference > PATH_INDEPENDENCE_TOL:
            raise PathDependenceError(difference)
        return result

    along_r = sp.lambdify((r, s), first, "numpy")
    along_s = sp.lambdify((r, s), second, "numpy")

    def integral(upper_r: float, upper_s: float, r_first: bool = True) -> float:
        if r_first:
            legs = (
                fixed_quad(_line(along_r, s0, True), r0, upper_r, n=GAUSS_LEGENDRE_NODES)[0],
                fixed_quad(_line(along_s, upper_r, False), s0, upper_s, n=GAUSS_LEGENDRE_NODES)[0],
            )
        else:
            legs = (
                fixed_quad(_line(along_s, r0, False), s0, upper_s, n=GAUSS_LEGENDRE_NODES)[0],
                fixed_quad(_line(along_r, upper_s, True), r0, upper_r, n=GAUSS_LEGENDRE_NODES)[0],
            )
        return float(sum(legs))

    difference = 0.0
    for point in _random_points(variables, 5):
        upper_r, upper_s = point[variables[0]], point[variables[1]]
        difference = max(difference, abs(integral(upper_r, upper_s) - integral(upper_r, upper_s, r_first=False)))
    if difference > PATH_INDEPENDENCE_TOL:
        raise PathDependenceError(difference)

    function = implemented(
        name,
        _vectorized(lru_cache(maxsize=65536)(integral)),
        lambda args, index: (first if index == 1 else second).xreplace({r: args[0], s: args[1]}),
    )
    return function(r, s)
