import pytest
import sympy as sp

from prolongkit.exceptions import CauchyRiemannError, ChartError, InputFileError, InsufficientSmoothnessError
from prolongkit.expr import coordinate
from prolongkit.prolong import Model
from prolongkit.solutions import (
    InputFunction,
    SolutionSurface,
    build_surface,
    laplace_solution_rs,
    wave_solution_xt,
)
from prolongkit.solutions.inputs import HolomorphicPair

r, s, t, x = (coordinate(name) for name in "rstx")


def _same(first, second) -> bool:
    return sp.simplify(sp.sympify(first) - second) == 0


def test_wave_surface_through_xt():
    surface = wave_solution_xt(InputFunction.parse("t^2", "t"), InputFunction.parse("0", "x"))
    assert surface.model is Model.WAVE
    assert surface.chart == "xt"
    assert surface.parameters == ("x", "t")
    assert set(surface.components) == set(surface.embedding.chart.names)
    assert _same(surface.components["q"], sp.Rational(2, 3) * t**3)
    assert _same(surface.components["z"], sp.Rational(4, 15) * t**5)
    assert _same(surface.components["B"], 2 * t)
    assert surface.designated == {"x": 0.0, "t": 0.0}


def test_wave_surface_through_rt():
    surface = build_surface("wave", "rt", {"x": "r^2", "y": "t^2"})
    assert surface.parameters == ("r", "t")
    assert _same(surface.components["p"], sp.Rational(2, 3) * r**3)
    assert _same(surface.components["A"], 2 * r)


def test_parabolic_surface_through_st():
    surface = build_surface(Model.PARABOLIC, "V_st", {"y": "s^2", "x0": "0"})
    assert _same(surface.components["x"], 2 * t * s)
    assert _same(surface.components["A"], 2 * t)
    assert _same(surface.components["B"], 2 * s)


def test_laplace_surface_through_rs():
    surface = build_surface("laplace", "rs", {"y": "r", "x": "s"})
    assert _same(surface.components["p"], r * s)
    assert _same(surface.components["q"], (s**2 - r**2) / 2)
    assert surface.diagnostics["cauchy_riemann_input"] == pytest.approx(0.0, abs=1e-12)
    assert surface.diagnostics["cauchy_riemann_output"] == pytest.approx(0.0, abs=1e-12)


def test_laplace_surface_needs_holomorphic_data():
    with pytest.raises(CauchyRiemannError):
        laplace_solution_rs(HolomorphicPair.parse("r^2", "s"))


def test_laplace_surface_needs_r_and_s():
    with pytest.raises(InputFileError):
        laplace_solution_rs(HolomorphicPair.parse("u", "v", ("u", "v")))


def test_designated_point():
    surface = build_surface("wave", "xt", {"y": "t^2", "z0": "x^3"}, designated={"t": 0.5})
    assert surface.designated == {"x": 0.0, "t": 0.5}
    with pytest.raises(InputFileError):
        build_surface("wave", "xt", {"y": "t^2", "z0": "x^3"}, designated={"r": 0.5})


def test_missing_input_function():
    with pytest.raises(InputFileError, match="z0"):
        build_surface("wave", "xt", {"y": "t^2"})


def test_input_function_of_the_wrong_variable():
    with pytest.raises(InputFileError):
        build_surface("wave", "xt", {"y": InputFunction.parse("s^2", "s"), "z0": "x^3"})


def test_no_construction_for_the_chart():
    with pytest.raises(ChartError):
        build_surface("wave", "xy", {"y": "t"})


def test_rough_input_is_rejected():
    samples = [0.0, 0.25, 0.5, 0.75, 1.0]
    z0 = InputFunction.from_samples("x", samples, samples, degree=2)
    with pytest.raises(InsufficientSmoothnessError):
        wave_solution_xt(InputFunction.parse("t", "t"), z0)


def test_surface_from_components():
    surface = SolutionSurface.from_components(
        "wave", "xt", {"y": "t", "z": "t^3/6", "p": "0", "q": "t^2/2", "r": "0", "B": "1", "c": "0"}
    )
    assert surface.components["x"] == x
    assert surface.components["t"] == t


def test_surface_from_incomplete_components():
    with pytest.raises(InputFileError, match="missing"):
        SolutionSurface.from_components("wave", "xt", {"y": "t"})


def test_with_component():
    surface = build_surface("wave", "xt", {"y": "t", "z0": "0"})
    changed = surface.with_component("q", surface.components["q"] + sp.Rational(1, 100))
    assert _same(changed.components["q"] - surface.components["q"], sp.Rational(1, 100))
    with pytest.raises(ChartError):
        surface.with_component("w", t)
