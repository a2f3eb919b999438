import pytest
import sympy as sp

from prolongkit.config import (
    RunConfig,
    SurfaceRequest,
    load_coordinates,
    load_pde,
    load_points,
    load_surface_request,
)
from prolongkit.constants import RANK_TOL, VERIFICATION_GRID
from prolongkit.exceptions import InputFileError
from prolongkit.expr import coordinate
from prolongkit.solutions import InputFunction


def test_run_config_defaults():
    config = RunConfig()
    assert config.tol_rank == RANK_TOL
    assert config.grid == VERIFICATION_GRID
    assert config.seed == 42


def test_run_config_keeps_defaults_for_missing_options():
    config = RunConfig.create(tol_rank=None, seed=7)
    assert config.tol_rank == RANK_TOL
    assert config.seed == 7
    assert config.rng().integers(1000) == RunConfig(seed=7).rng().integers(1000)


@pytest.mark.parametrize(
    "overrides",
    [{"tol_rank": 0.0}, {"tol_residual": 2.0}, {"oracle_samples": 500}, {"grid": 10}, {"grid": 1}],
)
def test_run_config_rejects_invalid_values(overrides):
    with pytest.raises(InputFileError, match="invalid configuration"):
        RunConfig.create(**overrides)


def test_run_config_is_immutable():
    with pytest.raises(TypeError):
        RunConfig().seed = 3


def test_load_pde_from_file(tmp_path):
    path = tmp_path.joinpath("wave.toml")
    path.write_text('name = "wave"\nF = "s"\n')
    surface = load_pde(path)
    assert surface.name == "wave"
    assert surface.text == "s"


def test_load_pde_inline():
    assert load_pde("r + t").text == "r + t"


@pytest.mark.parametrize("content", ['F = 3\n', 'name = "nothing"\n', "F = \n"])
def test_load_pde_invalid_file(tmp_path, content):
    path = tmp_path.joinpath("broken.toml")
    path.write_text(content)
    with pytest.raises(InputFileError):
        load_pde(path)


def test_load_pde_missing_file(tmp_path):
    with pytest.raises(InputFileError, match="does not exist"):
        load_pde(str(tmp_path.joinpath("missing.toml")))


def test_load_points_object_of_arrays(session_faker):
    values = [session_faker.pyfloat(min_value=-1, max_value=1) for _ in range(3)]
    points = load_points(f'{{"r": {values}, "t": [0, 1, 2]}}')
    assert [point["r"] for point in points] == values
    assert [point["t"] for point in points] == [0.0, 1.0, 2.0]
    assert all(point["x"] == 0.0 for point in points)


def test_load_points_file(tmp_path):
    path = tmp_path.joinpath("points.json")
    path.write_text('[{"s": 0, "r": 1}, {"s": 0, "r": -1}]')
    points = load_points(path)
    assert len(points) == 2
    assert sorted(points[0]) == sorted(["x", "y", "z", "p", "q", "r", "s", "t"])


def test_load_points_single_object():
    assert load_points('{"r": 0.5}')[0]["r"] == 0.5


@pytest.mark.parametrize(
    "text",
    ['{"r": [1, 2], "t": [1]}', '{"r": "one"}', '{"r": true}', "[1, 2]", "{r: 1}"],
)
def test_load_points_invalid(text):
    with pytest.raises(InputFileError):
        load_points(text)


def test_load_coordinates():
    assert load_coordinates(None) is None
    assert load_coordinates('{"p11": 1, "p22": 0.5}') == {"p11": 1.0, "p22": 0.5}
    with pytest.raises(InputFileError):
        load_coordinates("[1]")
    with pytest.raises(InputFileError):
        load_coordinates("{")


def test_load_surface_request(tmp_path):
    path = tmp_path.joinpath("request.toml")
    path.write_text(
        'model = "wave"\nchart = "xt"\n\n[functions]\ny = "t^2"\nz0 = "x^3"\n\n[designated]\nt = 0.5\n'
    )
    request = load_surface_request(path)
    assert request.model == "wave"
    assert request.chart == "B"
    assert request.functions == {"y": "t^2", "z0": "x^3"}
    assert request.designated == {"t": 0.5}
    assert request.build().designated == {"x": 0.0, "t": 0.5}


def test_load_surface_request_with_samples(tmp_path):
    path = tmp_path.joinpath("request.toml")
    path.write_text(
        'model = "wave"\nchart = "xt"\n\n[functions]\ny = "t"\n'
        "z0 = { samples = [0, 0.2, 0.4, 0.6, 0.8, 1.0], values = [0, 0.04, 0.16, 0.36, 0.64, 1.0] }\n"
    )
    request = load_surface_request(path)
    assert isinstance(request.functions["z0"], InputFunction)
    assert request.functions["z0"].variable == "x"


@pytest.mark.parametrize(
    "content, message",
    [
        ('chart = "xt"\n[functions]\ny = "t"\n', "model"),
        ('model = "wave"\nchart = "xt"\n', "neither"),
        ('model = "wave"\nchart = "xt"\n[functions]\nw = "t"\n', "unknown input functions"),
        ('model = "wave"\nchart = "xt"\n[functions]\ny = 3\n', "expression or a table"),
    ],
)
def test_load_surface_request_invalid(tmp_path, content, message):
    path = tmp_path.joinpath("request.toml")
    path.write_text(content)
    with pytest.raises(InputFileError, match=message):
        load_surface_request(path)


def test_surface_request_with_overrides():
    request = SurfaceRequest(
        model="wave", chart="B", functions={"y": "t", "z0": "0"}, components={"q": "t^2/2 + 1/100"}
    )
    surface = request.build()
    t = coordinate("t")
    assert sp.expand(surface.components["q"] - t**2 / 2 - sp.Rational(1, 100)) == 0


def test_surface_request_from_components():
    request = SurfaceRequest(
        model="wave",
        chart="B",
        components={"y": "t", "z": "t^3/6", "p": "0", "q": "t^2/2", "r": "0", "B": "1", "c": "0"},
    )
    assert request.build().parameters == ("x", "t")
