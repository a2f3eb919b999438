"""
Grassmann charts of the fiber of Sigma(R).

A chart is named by two adapted coframe labels (a, b); in it an integral
plane is written ``c = p11 a + p12 b``, ``d = p21 a + p22 b`` where (c, d)
are the remaining labels, and the integrability conditions become two
equations ``f1 = f2 = 0`` in (p11, p12, p21, p22).
"""

from collections.abc import Mapping
from dataclasses import dataclass
from functools import cache
from itertools import combinations

import numpy as np
import sympy as sp

from prolongkit.contact import COFRAME_LABELS, NORMAL_FORMS, AdaptedCoframe, EquationClass
from prolongkit.exceptions import ChartError, EmptyChartError, OverlapError
from prolongkit.expr import Chart, evaluate, parse_expr
from prolongkit.linalg import null_space, singular_values

FIBER_CHART = Chart(("p11", "p12", "p21", "p22"))
NUMERALS = ("I", "II", "III", "IV", "V", "VI")
OVERLAP_TOL = 1e-12

# Published defining functions; None marks a chart that misses the fiber.
_DEFINING_FUNCTIONS: dict[EquationClass, dict[str, tuple[str, str] | None]] = {
    EquationClass.HYPERBOLIC: {
        "I": ("p12", "p21"),
        "II": None,
        "III": ("p22", "p11"),
        "IV": ("p11", "p22"),
        "V": None,
        "VI": ("p12", "p21"),
    },
    EquationClass.PARABOLIC: {
        "I": ("p11", "p12 - p21"),
        "II": ("p11", "1 + p11*p22 - p12*p21"),
        "III": ("p11*p22 - p12*p21", "p11 + p22"),
        "IV": None,
        "V": ("p22", "1 + p11*p22 - p12*p21"),
        "VI": ("p22", "p21 - p12"),
    },
    EquationClass.ELLIPTIC: {
        "I": ("p12 - p21", "p11 + p22"),
        "II": ("1 + p11*p22 - p12*p21", "-p11 + p22"),
        "III": ("p11 + p22", "1 - p11*p22 + p12*p21"),
        "IV": ("p11 + p22", "p11*p22 - p12*p21 - 1"),
        "V": ("1 + p11*p22 - p12*p21", "p11 - p22"),
        "VI": ("-p12 + p21", "p11 + p22"),
    },
}

# Charts whose fiber is a graph over two coordinates: (free, relations)
_GRAPHS: dict[EquationClass, dict[str, tuple[tuple[str, str], dict[str, str]]]] = {
    EquationClass.HYPERBOLIC: {
        "I": (("p11", "p22"), {"p12": "0", "p21": "0"}),
        "III": (("p12", "p21"), {"p11": "0", "p22": "0"}),
        "IV": (("p12", "p21"), {"p11": "0", "p22": "0"}),
        "VI": (("p11", "p22"), {"p12": "0", "p21": "0"}),
    },
    EquationClass.PARABOLIC: {
        "I": (("p12", "p22"), {"p11": "0", "p21": "p12"}),
        "VI": (("p11", "p12"), {"p21": "p12", "p22": "0"}),
    },
    EquationClass.ELLIPTIC: {
        "I": (("p11", "p12"), {"p21": "p12", "p22": "-p11"}),
        "VI": (("p11", "p12"), {"p21": "p12", "p22": "-p11"}),
    },
}

COVERING_CHARTS: dict[EquationClass, tuple[str, ...]] = {
    EquationClass.HYPERBOLIC: ("I", "III", "IV", "VI"),
    EquationClass.PARABOLIC: ("I", "III", "VI"),
    EquationClass.ELLIPTIC: ("I", "VI"),
}


@dataclass(frozen=True, eq=False)
class GraphParametrization:
    free: tuple[str, str]
    relations: dict[str, sp.Expr]

    def coordinates(self, values: Mapping[str, float]) -> dict[str, float]:
        point = {name: float(values[name]) for name in self.free}
        return {
            name: point[name] if name in point else evaluate(self.relations[name], point)
            for name in FIBER_CHART.names
        }


@dataclass(frozen=True, eq=False)
class GrassmannChartModel:
    kind: EquationClass
    numeral: str
    pair: tuple[str, str]
    others: tuple[str, str]
    f1: sp.Expr | None
    f2: sp.Expr | None
    graph: GraphParametrization | None = None

    @property
    def chart_id(self) -> str:
        return "_".join(self.pair)

    @property
    def empty(self) -> bool:
        return self.f1 is None

    def residual(self, coordinates: Mapping[str, float]) -> float:
        if self.f1 is None or self.f2 is None:
            raise EmptyChartError(f"chart {self.numeral} ({self.chart_id}) misses the fiber")
        return max(abs(evaluate(self.f1, coordinates)), abs(evaluate(self.f2, coordinates)))

    def full_coordinates(self, values: Mapping[str, float]) -> dict[str, float]:
        """All four fiber coordinates, from either the free ones or all four."""
        if all(name in values for name in FIBER_CHART.names):
            return {name: float(values[name]) for name in FIBER_CHART.names}
        if self.graph is not None and all(name in values for name in self.graph.free):
            return self.graph.coordinates(values)
        expected = self.graph.free if self.graph is not None else FIBER_CHART.names
        raise ChartError(f"chart {self.numeral} expects coordinates {', '.join(expected)}")


def chart_ids(kind: EquationClass) -> tuple[str, ...]:
    return tuple("_".join(pair) for pair in combinations(COFRAME_LABELS[kind], 2))


def resolve_chart(kind: EquationClass, chart: str) -> str:
    """Roman numeral of a chart given by numeral or by its label pair."""
    if chart in NUMERALS:
        return chart
    pairs = list(combinations(COFRAME_LABELS[kind], 2))
    wanted = set(chart.replace("-", "_").split("_"))
    for numeral, pair in zip(NUMERALS, pairs, strict=True):
        if set(pair) == wanted:
            return numeral
    raise ChartError(f"unknown chart {chart!r} for class {kind.value}; use I-VI or one of {chart_ids(kind)}")


def _pair(kind: EquationClass, numeral: str) -> tuple[tuple[str, str], tuple[str, str]]:
    labels = COFRAME_LABELS[kind]
    pair = list(combinations(labels, 2))[NUMERALS.index(numeral)]
    others = tuple(label for label in labels if label not in pair)
    return pair, others  # type: ignore[return-value]


@cache
def chart_defining_functions(kind: EquationClass, chart: str) -> GrassmannChartModel:
    numeral = resolve_chart(kind, chart)
    pair, others = _pair(kind, numeral)
    table = _DEFINING_FUNCTIONS[kind][numeral]
    f1, f2 = (None, None) if table is None else (parse_expr(text, FIBER_CHART) for text in table)
    graph = None
    if numeral in _GRAPHS[kind]:
        free, relations = _GRAPHS[kind][numeral]
        graph = GraphParametrization(
            free, {name: parse_expr(text, FIBER_CHART) for name, text in relations.items()}
        )
    return GrassmannChartModel(kind, numeral, pair, others, f1, f2, graph)


def derive_defining_functions(kind: EquationClass, chart: str) -> tuple[sp.Expr, sp.Expr]:
    """
    Defining functions recomputed from the class normal form.

    The chart labels restrict to the standard coframe of the plane, the
    other two to rows of (p_ij); each normal form term becomes a 2x2 minor.
    """
    numeral = resolve_chart(kind, chart)
    (a, b), (c, d) = _pair(kind, numeral)
    p11, p12, p21, p22 = FIBER_CHART.symbols
    rows = {
        a: (sp.S.One, sp.S.Zero),
        b: (sp.S.Zero, sp.S.One),
        c: (p11, p12),
        d: (p21, p22),
    }
    functions = []
    for terms in NORMAL_FORMS[kind]:
        functions.append(
            sp.expand(
                sum(
                    (sign * (rows[left][0] * rows[right][1] - rows[left][1] * rows[right][0]))
                    for sign, left, right in terms
                )
            )
        )
    return functions[0], functions[1]


def restriction_rows(model: GrassmannChartModel, coordinates: Mapping[str, float]) -> dict[str, np.ndarray]:
    p = model.full_coordinates(coordinates)
    (a, b), (c, d) = model.pair, model.others
    return {
        a: np.array([1.0, 0.0]),
        b: np.array([0.0, 1.0]),
        c: np.array([p["p11"], p["p12"]]),
        d: np.array([p["p21"], p["p22"]]),
    }


def _coordinates_from_rows(model: GrassmannChartModel, rows: Mapping[str, np.ndarray]) -> dict[str, float]:
    square = np.vstack([rows[model.pair[0]], rows[model.pair[1]]])
    singular = singular_values(square)
    if singular.min() <= OVERLAP_TOL * max(1.0, float(singular.max())):
        raise OverlapError(f"the plane is outside chart {model.numeral} ({model.chart_id})")
    inverse = np.linalg.inv(square)
    c, d = (rows[label] @ inverse for label in model.others)
    return {"p11": float(c[0]), "p12": float(c[1]), "p21": float(d[0]), "p22": float(d[1])}


def chart_transition(
    kind: EquationClass,
    source: str,
    target: str,
    coordinates: Mapping[str, float],
) -> dict[str, float]:
    """Coordinates of a fiber point in another chart; free coordinates for graph charts."""
    source_model = chart_defining_functions(kind, source)
    target_model = chart_defining_functions(kind, target)
    if target_model.empty:
        raise EmptyChartError(f"chart {target_model.numeral} misses the fiber")
    values = _coordinates_from_rows(target_model, restriction_rows(source_model, coordinates))
    if target_model.graph is not None:
        return {name: values[name] for name in target_model.graph.free}
    return values


def plane_coordinates(adapted: AdaptedCoframe, model: GrassmannChartModel, plane: np.ndarray) -> dict[str, float]:
    """Chart coordinates of a plane of D(w) given in sample basis coordinates."""
    return _coordinates_from_rows(model, adapted.on_plane(np.asarray(plane, dtype=float)))


def plane_in_chart(
    adapted: AdaptedCoframe, model: GrassmannChartModel, coordinates: Mapping[str, float]
) -> np.ndarray:
    """Plane ``c = p11 a + p12 b, d = p21 a + p22 b`` in sample basis coordinates."""
    p = model.full_coordinates(coordinates)
    (a, b), (c, d) = model.pair, model.others
    rows = np.vstack(
        [
            adapted.covector(c) - p["p11"] * adapted.covector(a) - p["p12"] * adapted.covector(b),
            adapted.covector(d) - p["p21"] * adapted.covector(a) - p["p22"] * adapted.covector(b),
        ]
    )
    return null_space(rows)


def covering_charts(kind: EquationClass) -> tuple[GrassmannChartModel, ...]:
    return tuple(chart_defining_functions(kind, numeral) for numeral in COVERING_CHARTS[kind])


def graph_charts(kind: EquationClass) -> tuple[GrassmannChartModel, ...]:
    return tuple(chart_defining_functions(kind, numeral) for numeral in _GRAPHS[kind])
