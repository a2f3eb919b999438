import numpy as np
import pytest
import sympy as sp

from prolongkit.contact import EquationClass, adapted_coframe
from prolongkit.exceptions import ChartError, EmptyChartError, OverlapError
from prolongkit.prolong.charts import (
    FIBER_CHART,
    NUMERALS,
    chart_defining_functions,
    chart_ids,
    chart_transition,
    covering_charts,
    derive_defining_functions,
    graph_charts,
    plane_coordinates,
    plane_in_chart,
    resolve_chart,
)
from prolongkit.prolong.plucker import plucker_fiber

EMPTY = {
    EquationClass.HYPERBOLIC: {"II", "V"},
    EquationClass.PARABOLIC: {"IV"},
    EquationClass.ELLIPTIC: set(),
}


def _span_rank(functions) -> int:
    polys = [sp.Poly(f, *FIBER_CHART.symbols) for f in functions]
    monomials = sorted({m for poly in polys for m in poly.monoms()})
    matrix = sp.Matrix([[poly.coeff_monomial(m) for m in monomials] for poly in polys])
    return matrix.rank()


@pytest.mark.parametrize("kind", list(EquationClass))
def test_chart_ids_follow_the_coframe_labels(kind):
    ids = chart_ids(kind)
    assert len(ids) == len(NUMERALS) == 6
    assert ids[0] == "omega1_omega2"
    assert resolve_chart(kind, ids[3]) == "IV"
    assert resolve_chart(kind, "omega2-omega1") == "I"
    assert resolve_chart(kind, "VI") == "VI"


def test_resolve_chart_rejects_unknown_labels():
    with pytest.raises(ChartError):
        resolve_chart(EquationClass.HYPERBOLIC, "omega1_pi12")


@pytest.mark.parametrize("kind", list(EquationClass))
@pytest.mark.parametrize("numeral", NUMERALS)
def test_published_functions_match_the_normal_form(kind, numeral):
    model = chart_defining_functions(kind, numeral)
    derived = derive_defining_functions(kind, numeral)
    assert model.empty == (numeral in EMPTY[kind])
    if model.empty:
        assert any(f.is_number and f != 0 for f in derived)
        with pytest.raises(EmptyChartError):
            model.residual(dict.fromkeys(FIBER_CHART.names, 0.0))
    else:
        assert _span_rank(derived) == 2
        assert _span_rank([*derived, model.f1, model.f2]) == 2


@pytest.mark.parametrize("kind", list(EquationClass))
def test_graph_parametrizations_lie_on_the_fiber(kind, rng):
    for model in graph_charts(kind):
        for _ in range(5):
            free = {name: float(rng.uniform(-2, 2)) for name in model.graph.free}
            assert model.residual(model.full_coordinates(free)) == pytest.approx(0.0, abs=1e-12)


def test_full_coordinates_requires_the_free_names():
    model = chart_defining_functions(EquationClass.PARABOLIC, "I")
    assert model.full_coordinates({"p12": 2.0, "p22": 3.0}) == {"p11": 0.0, "p12": 2.0, "p21": 2.0, "p22": 3.0}
    with pytest.raises(ChartError):
        model.full_coordinates({"p11": 1.0})


def test_covering_charts_are_not_empty():
    for kind in EquationClass:
        assert all(not model.empty for model in covering_charts(kind))
    assert [model.numeral for model in covering_charts(EquationClass.ELLIPTIC)] == ["I", "VI"]


def test_hyperbolic_transition_inverts_p22():
    result = chart_transition(EquationClass.HYPERBOLIC, "I", "III", {"p11": 0.5, "p22": 4.0})
    assert result["p12"] == pytest.approx(0.25)
    assert result["p21"] == pytest.approx(0.5)

    back = chart_transition(EquationClass.HYPERBOLIC, "III", "I", result)
    assert back["p11"] == pytest.approx(0.5, abs=1e-12)
    assert back["p22"] == pytest.approx(4.0, abs=1e-12)


def test_transition_outside_the_overlap():
    with pytest.raises(OverlapError):
        chart_transition(EquationClass.HYPERBOLIC, "I", "III", {"p11": 0.5, "p22": 0.0})


def test_transition_into_an_empty_chart():
    with pytest.raises(EmptyChartError):
        chart_transition(EquationClass.HYPERBOLIC, "I", "II", {"p11": 0.5, "p22": 1.0})


def test_elliptic_transition_stays_on_the_fiber():
    model = chart_defining_functions(EquationClass.ELLIPTIC, "IV")
    values = chart_transition(EquationClass.ELLIPTIC, "I", "IV", {"p11": 0.3, "p12": -0.8})
    assert model.residual(values) == pytest.approx(0.0, abs=1e-10)


def test_chart_planes_are_integral(wave_sample):
    adapted = adapted_coframe(wave_sample)
    fiber = plucker_fiber(wave_sample)
    model = chart_defining_functions(EquationClass.HYPERBOLIC, "I")

    plane = plane_in_chart(adapted, model, {"p11": 0.3, "p22": -0.7})
    assert plane.shape == (4, 2)
    assert fiber.residual(plane) < 1e-9

    coordinates = plane_coordinates(adapted, model, plane)
    assert coordinates["p11"] == pytest.approx(0.3, abs=1e-9)
    assert coordinates["p22"] == pytest.approx(-0.7, abs=1e-9)
    assert coordinates["p12"] == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("sample_name", ["wave_sample", "laplace_sample"])
def test_sampled_planes_satisfy_the_chart_equations(sample_name, request, rng):
    sample = request.getfixturevalue(sample_name)
    adapted = adapted_coframe(sample)
    fiber = plucker_fiber(sample)
    model = chart_defining_functions(adapted.kind, "I")
    for point in fiber.sample_points(10, rng):
        try:
            coordinates = plane_coordinates(adapted, model, fiber.plane(point))
        except OverlapError:
            continue
        if max(abs(value) for value in coordinates.values()) > 1e3:
            continue
        assert model.residual(coordinates) < 1e-6
