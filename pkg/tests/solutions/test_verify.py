import numpy as np
import pytest
import sympy as sp

from prolongkit.expr import evaluate
from prolongkit.solutions import InputFunction, build_surface, detect_corank, verify_integral_surface


@pytest.mark.parametrize(
    "model, chart, functions, corank",
    [
        ("wave", "xt", {"y": "t^2", "z0": "x^3"}, 1),
        ("wave", "rt", {"x": "r^2", "y": "t^2"}, 2),
        ("parabolic", "st", {"y": "s^2", "x0": "0"}, 2),
        ("laplace", "rs", {"y": "r", "x": "s"}, 0),
        ("laplace", "rs", {"y": "r^2 - s^2", "x": "2*r*s"}, 2),
    ],
)
def test_singular_solutions_are_integral(model, chart, functions, corank):
    surface = build_surface(model, chart, functions)
    report = verify_integral_surface(surface, grid=11)
    assert report.passed, report.residuals
    assert report.legendrian < 1e-9
    assert report.corank == corank
    assert report.immersed


def test_singular_points_are_found_on_the_grid():
    surface = build_surface("wave", "rt", {"x": "r^2", "y": "t^2"})
    report = verify_integral_surface(surface, grid=5)
    coranks = {point.parameters: point.corank for point in report.singular_points}
    assert coranks[(("r", 0.0), ("t", 0.0))] == 2
    assert coranks[(("r", 0.0), ("t", 1.0))] == 1
    assert len(report.singular_points) == 9


def test_corank_at_another_point():
    surface = build_surface("wave", "xt", {"y": "t^2", "z0": "x^3"})
    assert detect_corank(surface, {"x": 0.0, "t": 0.5}) == 0


def test_corrupted_surface_fails():
    surface = build_surface("wave", "xt", {"y": "t", "z0": "0"})
    corrupted = surface.with_component("q", surface.components["q"] + sp.Rational(1, 100))
    report = verify_integral_surface(corrupted, grid=11)
    assert not report.passed
    assert report.residuals["varpi0"] == pytest.approx(0.01)
    assert report.max_residual == pytest.approx(0.01)


def test_sampled_input_is_integral():
    abscissae = np.linspace(-1.5, 1.5, 31)
    z0 = InputFunction.from_samples("x", abscissae, np.sin(abscissae), name="z0")
    surface = build_surface("wave", "xt", {"y": "t^2", "z0": z0})
    report = verify_integral_surface(surface, grid=7)
    assert report.passed, report.residuals


def _polynomial(rng: np.random.Generator, variable: str, linear: int | None = None) -> tuple[str, int]:
    """Random cubic with small integer coefficients; returns its text and linear coefficient."""
    coefficients = [int(value) for value in rng.integers(-2, 3, size=4)]
    if linear is not None:
        coefficients[1] = linear
    text = " + ".join(f"({value})*{variable}^{power}" for power, value in enumerate(coefficients))
    return text, coefficients[1]


@pytest.mark.parametrize("seed", range(5))
def test_wave_solutions_through_xt_from_random_polynomials(seed):
    rng = np.random.default_rng(seed)
    y, slope = _polynomial(rng, "t", linear=0 if seed % 2 else None)
    z0, _ = _polynomial(rng, "x")
    report = verify_integral_surface(build_surface("wave", "xt", {"y": y, "z0": z0}), grid=30)
    assert report.passed, report.residuals
    assert report.corank == (1 if slope == 0 else 0)


@pytest.mark.parametrize("seed", range(5))
def test_wave_solutions_through_rt_from_random_polynomials(seed):
    rng = np.random.default_rng(100 + seed)
    x, x_slope = _polynomial(rng, "r", linear=0 if seed < 3 else None)
    y, y_slope = _polynomial(rng, "t", linear=0 if seed % 2 else None)
    report = verify_integral_surface(build_surface("wave", "rt", {"x": x, "y": y}), grid=30)
    assert report.passed, report.residuals
    assert report.corank == (x_slope == 0) + (y_slope == 0)


@pytest.mark.parametrize("seed", range(5))
def test_parabolic_solutions_from_random_polynomials(seed):
    rng = np.random.default_rng(200 + seed)
    y, y_slope = _polynomial(rng, "s", linear=0 if seed < 4 else None)
    x0, x0_slope = _polynomial(rng, "s", linear=seed % 2 if seed < 4 else None)
    report = verify_integral_surface(build_surface("parabolic", "st", {"y": y, "x0": x0}), grid=30)
    assert report.passed, report.residuals
    if y_slope != 0:
        assert report.corank == 0
    else:
        assert report.corank == (2 if x0_slope == 0 else 1)


def test_parabolic_corank_drops_to_one_when_a_does_not_vanish():
    surface = build_surface("parabolic", "st", {"y": "s^2", "x0": "s"})
    report = verify_integral_surface(surface, grid=11)
    assert evaluate(surface.components["A"], {"s": 0.0, "t": 0.0}) == 1.0
    assert report.passed, report.residuals
    assert report.corank == 1
    assert detect_corank(surface, {"s": 0.0, "t": 0.0}) == 1


@pytest.mark.parametrize("seed", range(5))
def test_laplace_solutions_from_random_polynomials(seed):
    rng = np.random.default_rng(300 + seed)
    r, s = sp.symbols("r s", real=True)
    coefficients = [complex(*map(int, rng.integers(-2, 3, size=2))) for _ in range(4)]
    if seed % 2:
        coefficients[1] = 0j
    f = sp.expand(sum(sp.nsimplify(c) * (r + sp.I * s) ** k for k, c in enumerate(coefficients)))
    functions = {"y": str(sp.re(f)), "x": str(sp.im(f))}
    surface = build_surface("laplace", "rs", functions)
    report = verify_integral_surface(surface, grid=30)
    assert report.passed, report.residuals
    assert surface.diagnostics["cauchy_riemann_output"] < 1e-10
    assert report.corank == (2 if coefficients[1] == 0 else 0)
