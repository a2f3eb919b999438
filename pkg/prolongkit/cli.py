import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any, Optional

import typer
from pydantic.v1 import ValidationError
from rich import print

from prolongkit.config import RunConfig, load_coordinates, load_pde, load_points, load_surface_request
from prolongkit.exceptions import InputFileError, ProlongKitError
from prolongkit.loguru.config import LoggingConfig, init_logging
from prolongkit.reports import write_report
from prolongkit.scripts.analysis import AnalysisRunner
from prolongkit.scripts.surfaces import SurfaceRunner

app = typer.Typer(
    help="Rank 2 prolongations of second order PDEs in two independent variables",
    rich_markup_mode="markdown",
)
OptionalStr = Optional[str]  # noqa: UP007
OptionalPath = Optional[Path]  # noqa: UP007
OptionalFloat = Optional[float]  # noqa: UP007
OptionalInt = Optional[int]  # noqa: UP007

PDE_HELP = "TOML file defining `F`, or the expression of F itself"
POINTS_HELP = "JSON file or inline JSON with the points of J^2"
JSON_OUT = typer.Option(None, "--json-out", help="Write the report to this file instead of stdout")
CHART = typer.Option("I", help="Grassmann chart of the fiber point, by numeral or label pair")
COORDINATES = typer.Option(None, help="Fiber coordinates as a JSON object; the chart origin by default")


def _execute(job: Callable[[], tuple[dict[str, Any], int]], json_out: Path | None) -> None:
    try:
        report, code = job()
        data = write_report(report, json_out)
    except ProlongKitError as error:
        print(f"[red]{error}[/red]", file=sys.stderr)
        raise typer.Exit(code=error.exit_code) from error
    if json_out is None:
        typer.echo(data.decode(), nl=False)
    if code:
        raise typer.Exit(code=code)


def _config(ctx: typer.Context) -> RunConfig:
    return ctx.obj if isinstance(ctx.obj, RunConfig) else RunConfig()


@app.callback()
def main(
    ctx: typer.Context,
    tol_rank: OptionalFloat = typer.Option(None, "--tol-rank", help="Relative rank tolerance"),
    tol_residual: OptionalFloat = typer.Option(None, "--tol-residual", help="Pullback residual tolerance"),
    seed: OptionalInt = typer.Option(None, "--seed", envvar="PROLONGKIT_SEED", help="Seed of every random draw"),
    oracle_samples: OptionalInt = typer.Option(None, "--oracle-samples", help="Samples of the fiber mesh oracle"),
    log_level: str = typer.Option("INFO", "--log-level", envvar="PROLONGKIT_LOG_LEVEL", help="Log level on stderr"),
):
    """
    Analyse second order PDEs F(x, y, z, p, q, r, s, t) = 0 through their rank 2 prolongation.

    Reports are JSON documents on stdout; logs go to stderr.
    """
    try:
        init_logging(LoggingConfig(log_lvl=log_level))
        ctx.obj = RunConfig.create(
            tol_rank=tol_rank, tol_residual=tol_residual, seed=seed, oracle_samples=oracle_samples
        )
    except (ValidationError, InputFileError) as error:
        print(f"[red]{error}[/red]", file=sys.stderr)
        raise typer.Exit(code=1) from error


@app.command(name="classify")
def classify(
    ctx: typer.Context,
    pde: str = typer.Argument(..., help=PDE_HELP),
    points: str = typer.Argument(..., help=POINTS_HELP),
    json_out: OptionalPath = JSON_OUT,
):
    """
    Classify points of the equation as hyperbolic, parabolic, elliptic or non regular.

    Exits with code 2 when a point is non regular.
    """
    _execute(lambda: AnalysisRunner(_config(ctx), load_pde(pde)).classify(load_points(points)), json_out)


@app.command(name="fiber")
def fiber(
    ctx: typer.Context,
    pde: str = typer.Argument(..., help=PDE_HELP),
    points: str = typer.Argument(..., help=POINTS_HELP),
    oracle: bool = typer.Option(False, help="Also mesh the fiber and report its Euler characteristic"),
    json_out: OptionalPath = JSON_OUT,
):
    """
    Topology of the fiber of integral planes: torus, pinched torus or sphere.
    """
    _execute(lambda: AnalysisRunner(_config(ctx), load_pde(pde)).fiber(load_points(points), oracle), json_out)


@app.command(name="rank4-type")
def rank4_type(
    ctx: typer.Context,
    pde: str = typer.Argument(..., help=PDE_HELP),
    points: str = typer.Argument(..., help=POINTS_HELP),
    json_out: OptionalPath = JSON_OUT,
):
    """
    Type of the rank 4 distribution induced on the equation, from its Pfaffian pencil.
    """
    _execute(lambda: AnalysisRunner(_config(ctx), load_pde(pde)).rank4_type(load_points(points)), json_out)


@app.command(name="derived")
def derived(
    ctx: typer.Context,
    pde: str = typer.Argument(..., help=PDE_HELP),
    points: str = typer.Argument(..., help=POINTS_HELP),
    chart: OptionalStr = typer.Option(
        None, help="Compute on the prolongation at a fiber point of this chart instead of the equation"
    ),
    coordinates: OptionalStr = COORDINATES,
    json_out: OptionalPath = JSON_OUT,
):
    """
    Ranks of the derived and weak derived systems.
    """
    _execute(
        lambda: AnalysisRunner(_config(ctx), load_pde(pde)).derived(
            load_points(points), chart, load_coordinates(coordinates)
        ),
        json_out,
    )


@app.command(name="symbol")
def symbol(
    ctx: typer.Context,
    pde: str = typer.Argument(..., help=PDE_HELP),
    points: str = typer.Argument(..., help=POINTS_HELP),
    chart: str = CHART,
    coordinates: OptionalStr = COORDINATES,
    json_out: OptionalPath = JSON_OUT,
):
    """
    Graded symbol algebra at a point of the prolongation, compared with the reference of its stratum.
    """
    _execute(
        lambda: AnalysisRunner(_config(ctx), load_pde(pde)).symbol(
            load_points(points), chart, load_coordinates(coordinates)
        ),
        json_out,
    )


@app.command(name="prolong")
def prolong(
    ctx: typer.Context,
    pde: str = typer.Argument(..., help=PDE_HELP),
    points: str = typer.Argument(..., help=POINTS_HELP),
    depth: int = typer.Option(1, "-k", "--depth", min=1, help="Number of prolongations"),
    chart: str = CHART,
    coordinates: OptionalStr = COORDINATES,
    json_out: OptionalPath = JSON_OUT,
):
    """
    Prolong the rank 4 distribution k times and report its type at every stage.
    """
    _execute(
        lambda: AnalysisRunner(_config(ctx), load_pde(pde)).prolong(
            load_points(points), depth, chart, load_coordinates(coordinates)
        ),
        json_out,
    )


@app.command(name="charts")
def charts(ctx: typer.Context, json_out: OptionalPath = JSON_OUT):
    """
    Dump the Grassmann chart tables of every class and the Sigma(J^2) atlas.
    """
    _execute(lambda: AnalysisRunner(_config(ctx)).charts(), json_out)


@app.command(name="solve")
def solve(
    ctx: typer.Context,
    request: Path = typer.Argument(..., help="TOML file with model, chart and input functions"),
    json_out: OptionalPath = JSON_OUT,
):
    """
    Build the singular solution of a model equation from its input functions.

    The request file looks like:

        model = "wave"

        chart = "xt"

        [functions]

        y = "t^2"

        z0 = "x^3"
    """
    _execute(lambda: SurfaceRunner(_config(ctx), load_surface_request(request)).solve(), json_out)


@app.command(name="verify-solution")
def verify_solution(
    ctx: typer.Context,
    request: Path = typer.Argument(..., help="TOML file with model, chart and input functions or components"),
    json_out: OptionalPath = JSON_OUT,
):
    """
    Check that a surface is integral and find where its projection to J^1 is not an immersion.

    Exits with code 2 when a residual exceeds the tolerance.
    """
    _execute(lambda: SurfaceRunner(_config(ctx), load_surface_request(request)).verify(), json_out)


if __name__ == "__main__":
    app()
