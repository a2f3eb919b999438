"""
Exact scalar expressions over named chart coordinates.

Expressions are sympy trees over real symbols. This module owns the
coordinate charts, the text grammar of input files, the canonical text
rendering and the numeric evaluators used by every pointwise computation.

Grammar::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("+" | "-") unary | power
    power   := base (("^" | "**") exponent)?
    exponent:= ["+" | "-"] integer | "(" expr ")"
    base    := number | identifier | function "(" expr ")" | "(" expr ")"
"""

import math
import re
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import NamedTuple

import numpy as np
import sympy as sp
from sympy.printing.str import StrPrinter

from prolongkit.constants import (
    ZERO_TEST_BOX,
    ZERO_TEST_SAMPLES,
    ZERO_TEST_SEED,
    ZERO_TEST_TOL,
)
from prolongkit.exceptions import (
    ChartError,
    DomainError,
    ExpressionSyntaxError,
    MissingCoordinateError,
    UnknownIdentifierError,
)

FUNCTIONS: dict[str, Callable[[sp.Expr], sp.Expr]] = {
    "sin": sp.sin,
    "cos": sp.cos,
    "exp": sp.exp,
    "log": sp.log,
    "sqrt": sp.sqrt,
}

_IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_TOKEN_REGEXP = re.compile(
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>\*\*|[-+*/^(),])"
)


def coordinate(name: str) -> sp.Symbol:
    return sp.Symbol(name, real=True)


def as_rational(value: float | int | str) -> sp.Rational:
    """Exact rational with the shortest decimal expansion of ``value``."""
    if isinstance(value, float | np.floating):
        value = repr(float(value))
    elif isinstance(value, np.integer):
        value = int(value)
    fraction = Fraction(value)
    return sp.Rational(fraction.numerator, fraction.denominator)


@dataclass(frozen=True)
class Chart:
    """Ordered, duplicate free coordinate names."""

    names: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "names", tuple(self.names))
        duplicates = sorted({name for name in self.names if self.names.count(name) > 1})
        if duplicates:
            raise ChartError(f"duplicated coordinates: {', '.join(duplicates)}")
        for name in self.names:
            if not _IDENTIFIER.fullmatch(name) or name in FUNCTIONS:
                raise ChartError(f"invalid coordinate name {name!r}")

    @property
    def dim(self) -> int:
        return len(self.names)

    @cached_property
    def symbols(self) -> tuple[sp.Symbol, ...]:
        return tuple(coordinate(name) for name in self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownIdentifierError(name) from None

    def __contains__(self, name: object) -> bool:
        return name in self.names

    def extend(self, *names: str) -> "Chart":
        return Chart(self.names + tuple(names))

    def without(self, *names: str) -> "Chart":
        return Chart(tuple(name for name in self.names if name not in names))


class Token(NamedTuple):
    kind: str
    text: str
    position: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    position = 0
    while position < len(text):
        if text[position].isspace():
            position += 1
            continue
        match = _TOKEN_REGEXP.match(text, position)
        if match is None:
            raise ExpressionSyntaxError(f"unexpected character {text[position]!r}", position)
        kind = match.lastgroup or "op"
        tokens.append(Token(kind, match.group(), position))
        position = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class ExpressionParser:
    """Recursive descent parser producing exact sympy expressions."""

    def __init__(self, text: str, chart: Chart):
        self.text = text
        self.chart = chart
        self._tokens = tokenize(text)
        self._index = 0

    @property
    def _current(self) -> Token:
        return self._tokens[self._index]

    def _advance(self) -> Token:
        token = self._current
        self._index += 1
        return token

    def _expect(self, text: str) -> Token:
        if self._current.text != text:
            found = self._current.text or "end of expression"
            raise ExpressionSyntaxError(f"expected {text!r}, found {found!r}", self._current.position)
        return self._advance()

    def parse(self) -> sp.Expr:
        if self._current.kind == "end":
            raise ExpressionSyntaxError("empty expression", 0)
        result = self._expression()
        if self._current.kind != "end":
            raise ExpressionSyntaxError(
                f"unexpected token {self._current.text!r}", self._current.position
            )
        if result.has(sp.zoo, sp.nan, sp.oo, -sp.oo):
            raise ExpressionSyntaxError("expression has an undefined constant part", 0)
        return result

    def _expression(self) -> sp.Expr:
        result = self._term()
        while self._current.text in ("+", "-"):
            operator = self._advance().text
            right = self._term()
            result = result + right if operator == "+" else result - right
        return result

    def _term(self) -> sp.Expr:
        result = self._unary()
        while self._current.text in ("*", "/"):
            operator = self._advance()
            right = self._unary()
            if operator.text == "*":
                result = result * right
            elif right.is_zero:
                raise ExpressionSyntaxError("division by zero", operator.position)
            else:
                result = result / right
        return result

    def _unary(self) -> sp.Expr:
        if self._current.text == "-":
            self._advance()
            return -self._unary()
        if self._current.text == "+":
            self._advance()
            return self._unary()
        return self._power()

    def _power(self) -> sp.Expr:
        base = self._base()
        if self._current.text in ("^", "**"):
            self._advance()
            return base ** self._exponent()
        return base

    def _exponent(self) -> sp.Expr:
        token = self._current
        if token.text in ("-", "+"):
            self._advance()
            value = self._exponent_value()
            return -value if token.text == "-" else value
        return self._exponent_value()

    def _exponent_value(self) -> sp.Expr:
        token = self._current
        if token.kind == "number":
            self._advance()
            value = as_rational(token.text)
            if not value.is_Integer:
                raise ExpressionSyntaxError("exponent must be an integer", token.position)
            return value
        if token.text == "(":
            self._advance()
            value = self._expression()
            self._expect(")")
            if not value.is_Rational:
                raise ExpressionSyntaxError("exponent must be a rational constant", token.position)
            return value
        raise ExpressionSyntaxError("expected an exponent", token.position)

    def _base(self) -> sp.Expr:
        token = self._current
        if token.kind == "number":
            self._advance()
            return as_rational(token.text)
        if token.kind == "name":
            self._advance()
            if token.text in FUNCTIONS:
                self._expect("(")
                argument = self._expression()
                self._expect(")")
                return FUNCTIONS[token.text](argument)
            if token.text not in self.chart:
                raise UnknownIdentifierError(token.text)
            return coordinate(token.text)
        if token.text == "(":
            self._advance()
            value = self._expression()
            self._expect(")")
            return value
        if token.kind == "end":
            raise ExpressionSyntaxError("unexpected end of expression", token.position)
        raise ExpressionSyntaxError(f"unexpected token {token.text!r}", token.position)


def parse_expr(text: str, chart: Chart) -> sp.Expr:
    return ExpressionParser(text, chart).parse()


class _TextPrinter(StrPrinter):
    def _print_Exp1(self, expr: sp.Expr) -> str:  # noqa: N802
        return "exp(1)"


def to_text(expression: sp.Expr | float | int) -> str:
    """Canonical text form, re-readable by ``parse_expr``."""
    return _TextPrinter().doprint(sp.sympify(expression)).replace("**", "^")


def diff(expression: sp.Expr, name: str, chart: Chart | None = None) -> sp.Expr:
    if chart is not None:
        chart.index(name)
    return sp.diff(expression, coordinate(name))


@lru_cache(maxsize=8192)
def _compiled(expression: sp.Expr, module: str) -> tuple[tuple[str, ...], Callable]:
    symbols = sorted(expression.free_symbols, key=lambda symbol: symbol.name)
    names = tuple(symbol.name for symbol in symbols)
    return names, sp.lambdify(symbols, expression, modules=module)


def _arguments(names: Iterable[str], point: Mapping[str, object]) -> list:
    missing = [name for name in names if name not in point]
    if missing:
        raise MissingCoordinateError(missing)
    return [point[name] for name in names]


def evaluate(expression: sp.Expr | float, point: Mapping[str, float]) -> float:
    expression = sp.sympify(expression)
    names, function = _compiled(expression, "math")
    arguments = [float(value) for value in _arguments(names, point)]  # type: ignore[arg-type]
    try:
        value = float(function(*arguments))
    except (ZeroDivisionError, ValueError, OverflowError, TypeError) as error:
        raise DomainError(f"{to_text(expression)} is undefined at the given point ({error})") from error
    if not math.isfinite(value):
        raise DomainError(f"{to_text(expression)} is not finite at the given point")
    return value


def evaluate_grid(expression: sp.Expr | float, arrays: Mapping[str, np.ndarray]) -> np.ndarray:
    """Vectorized evaluation over broadcastable coordinate arrays."""
    expression = sp.sympify(expression)
    names, function = _compiled(expression, "numpy")
    arguments = [np.asarray(value, dtype=float) for value in _arguments(names, arrays)]
    shape = np.broadcast_shapes(*(np.shape(value) for value in arrays.values())) if arrays else ()
    try:
        with np.errstate(all="ignore"):
            values = np.broadcast_to(np.asarray(function(*arguments), dtype=float), shape).copy()
    except (ZeroDivisionError, ValueError, OverflowError, TypeError) as error:
        raise DomainError(f"{to_text(expression)} is undefined on the grid ({error})") from error
    if not np.all(np.isfinite(values)):
        raise DomainError(f"{to_text(expression)} is not finite on the grid")
    return values


def exact_value(expression: sp.Expr, point: Mapping[str, float]) -> sp.Rational | None:
    """Exact value at a rational point, when the result is rational."""
    substitution = {coordinate(name): as_rational(value) for name, value in point.items()}
    value = sp.sympify(expression).xreplace(substitution)
    return value if value.is_Rational else None


def is_zero(
    expression: sp.Expr | float,
    tol: float = ZERO_TEST_TOL,
    samples: int = ZERO_TEST_SAMPLES,
) -> bool:
    """
    Probabilistic zero test on points drawn in a box around the origin.

    Points where the expression is undefined are skipped and redrawn; an
    expression defined at fewer than ``samples`` points is not zero.
    """
    expression = sp.sympify(expression)
    if expression == 0:
        return True
    names = sorted(symbol.name for symbol in expression.free_symbols)
    if not names:
        try:
            return abs(evaluate(expression, {})) < tol
        except DomainError:
            return False

    rng = np.random.default_rng(ZERO_TEST_SEED)
    accepted = 0
    for _ in range(5 * samples):
        point = dict(zip(names, rng.uniform(-ZERO_TEST_BOX, ZERO_TEST_BOX, size=len(names)), strict=True))
        try:
            value = evaluate(expression, point)
        except DomainError:
            continue
        if abs(value) >= tol:
            return False
        accepted += 1
        if accepted == samples:
            return True
    return False


def equal(first: sp.Expr, second: sp.Expr, tol: float = ZERO_TEST_TOL) -> bool:
    return is_zero(sp.sympify(first) - sp.sympify(second), tol)
