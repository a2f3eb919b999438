"""Differential forms with exact coefficients on a coordinate chart."""

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np
import sympy as sp

from prolongkit.constants import RANK_TOL
from prolongkit.exceptions import (
    ChartMismatchError,
    DegenerateBasisError,
    UnknownIdentifierError,
)
from prolongkit.expr import Chart, coordinate, evaluate, is_zero, to_text
from prolongkit.linalg import singular_values

Index = tuple[int, ...]
Scalar = sp.Expr | float | int


def permutation_sign(order: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(order)
    for start in range(len(order)):
        if seen[start]:
            continue
        length, position = 0, start
        while not seen[position]:
            seen[position] = True
            position = order[position]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def sort_index(index: Sequence[int]) -> tuple[int, Index]:
    """Sign of the sorting permutation and the sorted index; 0 on repeats."""
    if len(set(index)) != len(index):
        return 0, ()
    order = sorted(range(len(index)), key=lambda position: index[position])
    return permutation_sign(order), tuple(index[position] for position in order)


@dataclass(frozen=True, eq=False)
class DifferentialForm:
    """
    A k-form ``sum coeffs[I] dx_I`` over strictly increasing index tuples.

    Coefficients given on unsorted or repeated indices are normalized on
    construction; zero coefficients are dropped.
    """

    chart: Chart
    degree: int
    coeffs: Mapping[Index, sp.Expr] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.degree < 0:
            raise ValueError("degree must be non negative")
        normalized: dict[Index, sp.Expr] = {}
        for raw_index, coefficient in self.coeffs.items():
            index = tuple(raw_index)
            if len(index) != self.degree:
                raise ValueError(f"index {index} does not match degree {self.degree}")
            if any(position < 0 or position >= self.chart.dim for position in index):
                raise ChartMismatchError(f"index {index} outside a chart of dimension {self.chart.dim}")
            sign, key = sort_index(index)
            if sign == 0:
                continue
            normalized[key] = normalized.get(key, sp.S.Zero) + sign * sp.sympify(coefficient)
        object.__setattr__(
            self,
            "coeffs",
            {key: value for key, value in sorted(normalized.items()) if value != 0},
        )

    @classmethod
    def from_terms(cls, chart: Chart, degree: int, terms: Iterable[tuple[Index, Scalar]]) -> "DifferentialForm":
        accumulated: dict[Index, sp.Expr] = {}
        for index, coefficient in terms:
            accumulated[index] = accumulated.get(index, sp.S.Zero) + sp.sympify(coefficient)
        return cls(chart, degree, accumulated)

    @classmethod
    def zero(cls, chart: Chart, degree: int = 1) -> "DifferentialForm":
        return cls(chart, degree, {})

    @classmethod
    def function(cls, chart: Chart, expression: Scalar) -> "DifferentialForm":
        return cls(chart, 0, {(): sp.sympify(expression)})

    @classmethod
    def differential(cls, chart: Chart, name: str) -> "DifferentialForm":
        return cls(chart, 1, {(chart.index(name),): sp.S.One})

    @classmethod
    def one_form(cls, chart: Chart, components: Mapping[str, Scalar]) -> "DifferentialForm":
        return cls.from_terms(
            chart, 1, (((chart.index(name),), value) for name, value in components.items())
        )

    def _check_compatible(self, other: "DifferentialForm") -> None:
        if self.chart != other.chart:
            raise ChartMismatchError("forms live on different charts")
        if self.degree != other.degree:
            raise ValueError(f"cannot add forms of degree {self.degree} and {other.degree}")

    def __add__(self, other: "DifferentialForm") -> "DifferentialForm":
        self._check_compatible(other)
        return DifferentialForm.from_terms(
            self.chart, self.degree, [*self.coeffs.items(), *other.coeffs.items()]
        )

    def __neg__(self) -> "DifferentialForm":
        return self.scale(-1)

    def __sub__(self, other: "DifferentialForm") -> "DifferentialForm":
        return self + (-other)

    def scale(self, factor: Scalar) -> "DifferentialForm":
        factor = sp.sympify(factor)
        return DifferentialForm(
            self.chart, self.degree, {index: factor * value for index, value in self.coeffs.items()}
        )

    def __rmul__(self, factor: Scalar) -> "DifferentialForm":
        return self.scale(factor)

    def __mul__(self, other: "DifferentialForm | Scalar") -> "DifferentialForm":
        if isinstance(other, DifferentialForm):
            return wedge(self, other)
        return self.scale(other)

    def component(self, *names: str) -> sp.Expr:
        """Coefficient of ``d names[0] ^ ... ^ d names[-1]``, sign included."""
        sign, key = sort_index([self.chart.index(name) for name in names])
        if sign == 0:
            return sp.S.Zero
        return sign * self.coeffs.get(key, sp.S.Zero)

    @property
    def is_trivial(self) -> bool:
        return not self.coeffs

    def vanishes(self) -> bool:
        return all(is_zero(value) for value in self.coeffs.values())

    def on_chart(self, chart: Chart) -> "DifferentialForm":
        """Same form, re-indexed on a chart containing all coordinates it uses."""
        try:
            mapping = [chart.index(name) for name in self.chart.names]
        except UnknownIdentifierError as error:
            raise ChartMismatchError(f"coordinate {error.name} missing from target chart") from error
        return DifferentialForm(
            chart,
            self.degree,
            {tuple(mapping[i] for i in index): value for index, value in self.coeffs.items()},
        )

    def to_text(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for index, value in self.coeffs.items():
            differentials = "^".join(f"d{self.chart.names[i]}" for i in index)
            coefficient = to_text(value)
            if not differentials:
                terms.append(coefficient)
            elif value == 1:
                terms.append(differentials)
            else:
                terms.append(f"({coefficient})*{differentials}")
        return " + ".join(terms)

    def __repr__(self) -> str:
        return f"DifferentialForm(degree={self.degree}, {self.to_text()})"


def wedge(first: DifferentialForm, second: DifferentialForm) -> DifferentialForm:
    if first.chart != second.chart:
        raise ChartMismatchError("forms live on different charts")
    terms = [
        (left + right, a * b)
        for left, a in first.coeffs.items()
        for right, b in second.coeffs.items()
    ]
    return DifferentialForm.from_terms(first.chart, first.degree + second.degree, terms)


def ext_d(form: DifferentialForm) -> DifferentialForm:
    chart = form.chart
    terms = []
    for index, coefficient in form.coeffs.items():
        for position, symbol in enumerate(chart.symbols):
            if position in index:
                continue
            derivative = sp.diff(coefficient, symbol)
            if derivative != 0:
                terms.append(((position, *index), derivative))
    return DifferentialForm.from_terms(chart, form.degree + 1, terms)


def pullback(
    mapping: Mapping[str, Scalar],
    form: DifferentialForm,
    source: Chart,
) -> DifferentialForm:
    """
    Pull ``form`` back along the map ``source -> form.chart``.

    Target coordinates absent from ``mapping`` must be source coordinates
    and map identically.
    """
    target = form.chart
    images: list[sp.Expr] = []
    for name in target.names:
        if name in mapping:
            images.append(sp.sympify(mapping[name]))
        elif name in source:
            images.append(coordinate(name))
        else:
            raise ChartMismatchError(f"no image for coordinate {name}")
    allowed = set(source.symbols)
    for image in images:
        stray = {symbol.name for symbol in image.free_symbols if symbol not in allowed}
        if stray:
            raise ChartMismatchError(f"image uses coordinates outside the source chart: {sorted(stray)}")

    substitution = dict(zip(target.symbols, images, strict=True))
    differentials: dict[int, DifferentialForm] = {}

    def differential(position: int) -> DifferentialForm:
        if position not in differentials:
            differentials[position] = ext_d(DifferentialForm.function(source, images[position]))
        return differentials[position]

    result = DifferentialForm.zero(source, form.degree)
    for index, coefficient in form.coeffs.items():
        term = DifferentialForm.function(source, coefficient.xreplace(substitution))
        for position in index:
            term = wedge(term, differential(position))
        result = result + term
    return result


@dataclass(frozen=True, eq=False)
class FormValue:
    """A k-form at a point, as a fully antisymmetric array."""

    degree: int
    array: np.ndarray

    def __call__(self, *vectors: np.ndarray) -> float:
        if len(vectors) != self.degree:
            raise ValueError(f"expected {self.degree} vectors")
        result = self.array
        for vector in vectors:
            result = np.tensordot(np.asarray(vector, dtype=float), result, axes=1)
        return float(result)


def eval_form(form: DifferentialForm, point: Mapping[str, float]) -> FormValue:
    size, degree = form.chart.dim, form.degree
    array = np.zeros((size,) * degree)
    for index, coefficient in form.coeffs.items():
        value = evaluate(coefficient, point)
        for order in permutations(range(degree)):
            array[tuple(index[i] for i in order)] = permutation_sign(order) * value
    return FormValue(degree, array)


def covector_rows(forms: Sequence[DifferentialForm], point: Mapping[str, float], size: int) -> np.ndarray:
    """Values of 1-forms at a point, one row per form."""
    if not forms:
        return np.zeros((0, size))
    return np.array([eval_form(form, point).array for form in forms], dtype=float)


def wedge_covectors(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    return np.outer(first, second) - np.outer(second, first)


def restrict2(value: FormValue, basis: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Matrix of a 2-form on the span of the columns of ``basis``."""
    if value.degree != 2:
        raise ValueError("restrict2 expects a 2-form")
    basis = np.asarray(basis, dtype=float)
    columns = basis.shape[1] if basis.ndim == 2 else 0
    singular = singular_values(basis)
    if columns == 0 or singular.size < columns or singular.min() <= tol * max(float(singular.max()), 0.0):
        raise DegenerateBasisError(f"basis of {columns} vectors is not linearly independent")
    matrix = basis.T @ value.array @ basis
    return (matrix - matrix.T) / 2
