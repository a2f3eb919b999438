import numpy as np
import pytest
import sympy as sp

from prolongkit.contact import J2, contact_system_j2
from prolongkit.exceptions import ChartMismatchError, DegenerateBasisError
from prolongkit.expr import Chart, coordinate, evaluate, is_zero, parse_expr
from prolongkit.forms import (
    DifferentialForm,
    covector_rows,
    eval_form,
    ext_d,
    pullback,
    restrict2,
    sort_index,
    wedge,
    wedge_covectors,
)

PLANE = Chart(("u", "v"))
u, v = coordinate("u"), coordinate("v")


@pytest.fixture
def random_one_form():
    chart = Chart(("a", "b", "c"))
    return DifferentialForm.one_form(
        chart, {"a": parse_expr("b*c^2", chart), "b": parse_expr("sin(a) + c", chart), "c": parse_expr("a*b", chart)}
    )


def test_sort_index():
    assert sort_index((2, 0, 1)) == (1, (0, 1, 2))
    assert sort_index((1, 0)) == (-1, (0, 1))
    assert sort_index((1, 1)) == (0, ())


def test_antisymmetry():
    du = DifferentialForm.differential(PLANE, "u")
    dv = DifferentialForm.differential(PLANE, "v")
    assert (du * dv).component("u", "v") == 1
    assert (dv * du).component("u", "v") == -1
    assert (du * du).is_trivial


def test_d_squared_vanishes(random_one_form):
    assert ext_d(ext_d(random_one_form)).vanishes()
    function = DifferentialForm.function(random_one_form.chart, parse_expr("a*b*c + exp(a)", random_one_form.chart))
    assert ext_d(ext_d(function)).vanishes()


def test_leibniz(random_one_form):
    chart = random_one_form.chart
    other = DifferentialForm.one_form(chart, {"a": parse_expr("c", chart), "c": parse_expr("a^2", chart)})
    left = ext_d(wedge(random_one_form, other))
    right = wedge(ext_d(random_one_form), other) - wedge(random_one_form, ext_d(other))
    assert (left - right).vanishes()


def test_pullback_commutes_with_d(random_one_form):
    mapping = {"a": u * v, "b": u + v**2, "c": sp.sin(u)}
    left = pullback(mapping, ext_d(random_one_form), PLANE)
    right = ext_d(pullback(mapping, random_one_form, PLANE))
    assert is_zero(left.component("u", "v") - right.component("u", "v"))


def test_pullback_of_contact_form_on_a_graph():
    z = u**2 * v
    mapping = {"x": u, "y": v, "z": z, "p": sp.diff(z, u), "q": sp.diff(z, v)}
    mapping.update({"r": sp.diff(z, u, 2), "s": sp.diff(z, u, v), "t": sp.diff(z, v, 2)})
    for form in contact_system_j2():
        assert pullback(mapping, form, PLANE).vanishes()


def test_pullback_rejects_foreign_coordinates():
    form = DifferentialForm.differential(J2, "z")
    with pytest.raises(ChartMismatchError):
        pullback({"z": coordinate("w")}, form, PLANE)
    with pytest.raises(ChartMismatchError):
        pullback({"z": u}, form, PLANE)


def test_mixing_charts_fails():
    with pytest.raises(ChartMismatchError):
        DifferentialForm.differential(PLANE, "u") + DifferentialForm.differential(J2, "x")


def test_eval_form_and_covectors():
    form = DifferentialForm.one_form(PLANE, {"u": v, "v": 2})
    value = eval_form(ext_d(form), {"u": 0.0, "v": 1.0})
    assert value(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx(-1.0)
    rows = covector_rows([form], {"u": 3.0, "v": 5.0}, 2)
    np.testing.assert_allclose(rows, [[5.0, 2.0]])
    assert covector_rows([], {}, 2).shape == (0, 2)


def test_derivative_matches_finite_differences(random_one_form):
    chart = random_one_form.chart
    rng = np.random.default_rng(7)
    point = dict(zip(chart.names, rng.uniform(-1, 1, 3), strict=True))
    step = 1e-6
    value = eval_form(ext_d(random_one_form), point).array
    for i, first in enumerate(chart.names):
        for j, second in enumerate(chart.names):
            coefficient = random_one_form.component(second)
            shifted = dict(point, **{first: point[first] + step})
            backward = dict(point, **{first: point[first] - step})
            derivative = (evaluate(coefficient, shifted) - evaluate(coefficient, backward)) / (2 * step)
            coefficient_back = random_one_form.component(first)
            shifted = dict(point, **{second: point[second] + step})
            backward = dict(point, **{second: point[second] - step})
            transposed = (evaluate(coefficient_back, shifted) - evaluate(coefficient_back, backward)) / (2 * step)
            assert value[i, j] == pytest.approx(derivative - transposed, abs=1e-6)


def test_restrict2():
    value = eval_form(ext_d(DifferentialForm.one_form(PLANE, {"v": u})), {"u": 0.0, "v": 0.0})
    np.testing.assert_allclose(restrict2(value, np.eye(2)), [[0.0, 1.0], [-1.0, 0.0]])
    np.testing.assert_allclose(wedge_covectors(np.array([1.0, 0.0]), np.array([0.0, 1.0])), [[0, 1], [-1, 0]])
    with pytest.raises(DegenerateBasisError):
        restrict2(value, np.array([[1.0, 2.0], [1.0, 2.0]]))
