from pathlib import Path

import orjson
import pytest
from click.testing import Result
from typer.testing import CliRunner

from prolongkit.cli import app

runner = CliRunner()

ORIGIN = '{"x": 0, "y": 0, "z": 0, "p": 0, "q": 0, "r": 0, "s": 0, "t": 0}'


def invoke(tmp_path: Path, *args: str) -> tuple[Result, dict | None]:
    out = tmp_path.joinpath("report.json")
    res: Result = runner.invoke(app, [*args, "--json-out", str(out)])
    report = orjson.loads(out.read_bytes()) if out.is_file() else None
    return res, report


@pytest.fixture
def wave_toml(tmp_path) -> Path:
    path = tmp_path.joinpath("wave.toml")
    path.write_text('name = "wave"\nF = "s"\n')
    return path


@pytest.fixture
def request_toml(tmp_path):
    def write(content: str) -> Path:
        path = tmp_path.joinpath("request.toml")
        path.write_text(content)
        return path

    return write


def test_classify(tmp_path, wave_toml):
    res, report = invoke(tmp_path, "classify", str(wave_toml), '{"r": [0, 1, 2]}')
    assert res.exit_code == 0
    assert report["command"] == "classify"
    assert [result["class"] for result in report["results"]] == ["Hyperbolic"] * 3
    assert report["results"][0]["delta"] == pytest.approx(-0.25)


def test_classify_to_stdout():
    res: Result = runner.invoke(app, ["classify", "r + t", ORIGIN])
    assert res.exit_code == 0
    report = orjson.loads(res.stdout)
    assert report["results"][0]["class"] == "Elliptic"


def test_classify_non_regular_point(tmp_path):
    res, report = invoke(tmp_path, "classify", "r*t - s^2", ORIGIN)
    assert res.exit_code == 2
    assert report["results"][0]["class"] == "NonRegular"


def test_classify_point_off_the_equation(tmp_path):
    res, report = invoke(tmp_path, "classify", "s", '{"s": 1}')
    assert res.exit_code == 1
    assert report is None


def test_missing_equation_file(tmp_path):
    res, _ = invoke(tmp_path, "classify", str(tmp_path.joinpath("missing.toml")), ORIGIN)
    assert res.exit_code == 1


def test_invalid_global_option(tmp_path):
    res: Result = runner.invoke(app, ["--tol-rank", "2", "charts"])
    assert res.exit_code == 1


def test_fiber(tmp_path):
    res, report = invoke(tmp_path, "fiber", "s", ORIGIN)
    assert res.exit_code == 0
    result = report["results"][0]
    assert result["topology"] == "Torus"
    assert result["signature"] == [2, 2, 0]
    assert [chart["empty"] for chart in result["charts"]] == [False, True, False, False, True, False]
    assert "oracle" not in result


def test_fiber_with_oracle(tmp_path):
    res, report = invoke(tmp_path, "--oracle-samples", "20000", "fiber", "r + t", ORIGIN, "--oracle")
    assert res.exit_code == 0
    result = report["results"][0]
    assert result["topology"] == "Sphere"
    assert {"euler_characteristic", "components", "rank_drop_candidates"} <= set(result["oracle"])
    assert report["config"]["oracle_samples"] == 20000


def test_rank4_type(tmp_path):
    res, report = invoke(tmp_path, "rank4-type", "r", ORIGIN)
    assert res.exit_code == 0
    result = report["results"][0]
    assert result["type"] == "ParabolicType"
    assert result["coframe"]["labels"] == ["omega1", "omega2", "pi12", "pi22"]


def test_derived_on_the_prolongation(tmp_path, wave_toml):
    res, report = invoke(tmp_path, "derived", str(wave_toml), ORIGIN, "--chart", "I")
    assert res.exit_code == 0
    result = report["results"][0]
    assert result["ranks"] == [4, 6, 8, 9]
    assert result["weak_ranks"] == [8, 9]
    assert result["stratum"] == 0


def test_derived_at_a_vertical_plane(tmp_path):
    res, report = invoke(tmp_path, "derived", "s", ORIGIN, "--chart", "VI", "--coordinates", '{"p11": 0, "p22": 0}')
    assert res.exit_code == 0
    assert report["results"][0]["weak_ranks"] == [8, 8]
    assert report["results"][0]["stratum"] == 2


def test_symbol(tmp_path):
    res, report = invoke(tmp_path, "symbol", "s", ORIGIN)
    assert res.exit_code == 0
    result = report["results"][0]
    assert result["graded_dims"] == [4, 2, 2, 1]
    assert result["reference_match"]["reference"] == "hyp:m0"
    assert result["reference_match"]["passed"] is True


def test_symbol_in_an_empty_chart(tmp_path):
    res, report = invoke(tmp_path, "symbol", "s", ORIGIN, "--chart", "II")
    assert res.exit_code == 2
    assert report is None


def test_prolong(tmp_path):
    res, report = invoke(tmp_path, "prolong", "s", ORIGIN, "-k", "2")
    assert res.exit_code == 0
    steps = report["results"][0]["steps"]
    assert [step["dimension"] for step in steps] == [7, 9, 11]
    assert {step["label"] for step in steps} == {"HyperbolicType"}


def test_charts(tmp_path):
    res, report = invoke(tmp_path, "charts")
    assert res.exit_code == 0
    grassmann = report["results"]["grassmann"]
    assert len(grassmann) == 18
    assert [entry["numeral"] for entry in grassmann if entry["empty"]] == ["II", "V", "IV"]
    atlas = report["results"]["atlas"]
    assert [entry["plane"] for entry in atlas] == ["xy", "xt", "yr", "rs", "rt", "st"]
    assert atlas[0]["derived_ranks"] == [6, 9, 11, 12]


def test_solve(tmp_path, request_toml):
    path = request_toml('model = "laplace"\nchart = "rs"\n\n[functions]\ny = "r"\nx = "s"\n')
    res, report = invoke(tmp_path, "solve", str(path))
    assert res.exit_code == 0
    results = report["results"]
    assert results["chart"] == "rs"
    assert results["parameters"] == ["r", "s"]
    assert results["components"]["p"] == "r*s"


def test_verify_solution(tmp_path, request_toml):
    path = request_toml('model = "wave"\nchart = "xt"\n\n[functions]\ny = "t^2"\nz0 = "x^3"\n')
    res, report = invoke(tmp_path, "verify-solution", str(path))
    assert res.exit_code == 0
    results = report["results"]
    assert results["passed"] is True
    assert results["corank"] == 1
    assert results["singular_point_count"] == 31


def test_verify_corrupted_solution(tmp_path, request_toml):
    path = request_toml(
        'model = "wave"\nchart = "xt"\n\n[functions]\ny = "t"\nz0 = "0"\n\n[components]\nq = "t^2/2 + 1/100"\n'
    )
    res, report = invoke(tmp_path, "verify-solution", str(path))
    assert res.exit_code == 2
    assert report["results"]["passed"] is False
    assert report["results"]["max_residual"] == pytest.approx(0.01)


def test_verify_unknown_model(tmp_path, request_toml):
    path = request_toml('model = "poisson"\nchart = "xt"\n\n[functions]\ny = "t"\n')
    res, _ = invoke(tmp_path, "verify-solution", str(path))
    assert res.exit_code == 1
