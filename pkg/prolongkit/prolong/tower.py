"""
Rank 4 prolongation and its iteration.

At a point of Sigma(R) in a graph chart the prolonged system adds the two
forms ``c - p11 a - p12 b`` and ``d - p21 a - p22 b`` built from the
adapted coframe; the free fiber coordinates become new chart coordinates.
The adapted coframe is lifted as constant combinations of the independent
coframe, which requires the normal form to be the same at every point.
"""

from collections.abc import Mapping
from dataclasses import dataclass, replace

import numpy as np
import sympy as sp
from loguru import logger

from prolongkit.constants import DEFAULT_SEED, NORMAL_FORM_PROBES, NORMAL_FORM_TOL, RANK_TOL
from prolongkit.contact import (
    AdaptedCoframe,
    DistributionSample,
    DistributionType,
    EquationClass,
    PfaffianSystem,
    adapted_coframe,
    rank4_type,
)
from prolongkit.exceptions import (
    DegeneratePencilError,
    EmptyChartError,
    NonIntegralPlaneError,
    NormalFormError,
    OverlapError,
    SingularPointError,
)
from prolongkit.expr import Chart, coordinate
from prolongkit.forms import DifferentialForm
from prolongkit.prolong.charts import (
    FIBER_CHART,
    GrassmannChartModel,
    chart_defining_functions,
    chart_transition,
    graph_charts,
    plane_in_chart,
)
from prolongkit.prolong.plucker import Stratum, stratify

FIBER_TOL = 1e-8
LIFT_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class FiberPoint:
    """A point of Sigma(R): base point, chart, coordinates and integral plane."""

    kind: EquationClass
    chart: GrassmannChartModel
    coordinates: dict[str, float]
    fiber_coordinates: dict[str, float]
    plane: np.ndarray
    stratum: Stratum
    adapted: AdaptedCoframe


def check_constant_normal_form(
    sample: DistributionSample,
    rng: np.random.Generator,
    probes: int = NORMAL_FORM_PROBES,
    tol: float = NORMAL_FORM_TOL,
) -> None:
    """Derivatives in the independent coframe must agree at random points."""
    system = sample.system
    if not system.independent:
        raise NormalFormError("the system has no independent coframe to lift the adapted coframe")
    reference = np.array(sample.derivatives)
    scale = max(1.0, float(np.abs(reference).max()))
    for _ in range(probes):
        other = np.array(system.sample(system.random_point(rng)).derivatives)
        deviation = float(np.abs(other - reference).max())
        if deviation > tol * scale:
            raise NormalFormError(
                f"the structure equations vary from point to point (deviation {deviation:.3e}); "
                "only constant normal forms can be prolonged"
            )


def _lift(covector: np.ndarray, independent: tuple[DifferentialForm, ...], chart: Chart) -> DifferentialForm:
    scale = max(1.0, float(np.abs(covector).max()))
    result = DifferentialForm.zero(chart)
    for value, form in zip(covector, independent, strict=True):
        if abs(value) > LIFT_TOL * scale:
            result = result + form.on_chart(chart).scale(sp.Float(float(value)))
    return result


def coordinate_names(system: PfaffianSystem, model: GrassmannChartModel) -> tuple[str, str]:
    assert model.graph is not None
    suffix = "" if system.level == 0 else f"_{system.level + 1}"
    return tuple(f"{name}{suffix}" for name in model.graph.free)  # type: ignore[return-value]


def prolonged_system(
    system: PfaffianSystem, adapted: AdaptedCoframe, model: GrassmannChartModel
) -> PfaffianSystem:
    if model.graph is None:
        raise OverlapError(f"chart {model.numeral} is not a graph chart")
    names = coordinate_names(system, model)
    chart = system.chart.extend(*names)
    renaming = {
        coordinate(free): coordinate(name) for free, name in zip(model.graph.free, names, strict=True)
    }
    p = {
        name: (coordinate(name) if name in model.graph.free else model.graph.relations[name]).xreplace(renaming)
        for name in FIBER_CHART.names
    }
    lifts = {label: _lift(adapted.covector(label), system.independent, chart) for label in adapted.labels}
    (a, b), (c, d) = model.pair, model.others
    suffix = "" if system.level == 0 else f"_{system.level + 1}"
    varpi_c = lifts[c] - p["p11"] * lifts[a] - p["p12"] * lifts[b]
    varpi_d = lifts[d] - p["p21"] * lifts[a] - p["p22"] * lifts[b]
    return PfaffianSystem(
        chart=chart,
        forms=(*(form.on_chart(chart) for form in system.forms), varpi_c, varpi_d),
        labels=(*system.labels, f"varpi_{c}{suffix}", f"varpi_{d}{suffix}"),
        constraints=system.constraints,
        independent=(
            lifts[a],
            lifts[b],
            DifferentialForm.differential(chart, names[0]),
            DifferentialForm.differential(chart, names[1]),
        ),
        independent_labels=(f"{a}{suffix}", f"{b}{suffix}", *names),
        solve_for=system.solve_for,
        base_coordinates=system.chart.names,
        name=system.name,
        level=system.level + 1,
    )


def _to_graph_chart(
    kind: EquationClass, model: GrassmannChartModel, coordinates: Mapping[str, float]
) -> tuple[GrassmannChartModel, dict[str, float]]:
    if model.graph is not None:
        return model, {name: float(coordinates[name]) for name in model.graph.free}
    for target in graph_charts(kind):
        try:
            return target, chart_transition(kind, model.numeral, target.numeral, coordinates)
        except OverlapError:
            continue
    raise OverlapError(f"the fiber point of chart {model.numeral} lies in no graph chart")


def locate_fiber_point(
    sample: DistributionSample,
    chart: str,
    coordinates: Mapping[str, float],
    tol: float = RANK_TOL,
) -> FiberPoint:
    """Fiber point of Sigma(R) over ``sample`` given in a Grassmann chart."""
    pencil = rank4_type(sample, tol)
    kind = pencil.label.kind
    if kind is None:
        raise DegeneratePencilError("the derivative pencil is degenerate")
    adapted = adapted_coframe(sample, tol, pencil)
    model = chart_defining_functions(kind, chart)
    if model.empty:
        raise EmptyChartError(f"chart {model.numeral} ({model.chart_id}) misses the fiber")
    full = model.full_coordinates(coordinates)
    if model.residual(full) > FIBER_TOL:
        raise NonIntegralPlaneError(f"coordinates {full} do not satisfy the chart equations")

    plane = plane_in_chart(adapted, model, full)
    values = adapted.on_plane(plane)
    if kind is EquationClass.PARABOLIC and max(
        float(np.abs(values["omega2"]).max()), float(np.abs(values["pi12"]).max())
    ) <= FIBER_TOL:
        raise SingularPointError("the plane omega2 = pi12 = 0 is the singular point of the fiber")

    graph_model, free = _to_graph_chart(kind, model, full)
    return FiberPoint(
        kind=kind,
        chart=graph_model,
        coordinates=free,
        fiber_coordinates=graph_model.full_coordinates(free),
        plane=plane,
        stratum=stratify(sample, plane, tol),
        adapted=adapted,
    )


def prolong_rank4(
    sample: DistributionSample,
    chart: str,
    coordinates: Mapping[str, float],
    tol: float = RANK_TOL,
    rng: np.random.Generator | None = None,
    probes: int = NORMAL_FORM_PROBES,
) -> DistributionSample:
    """Sample of the prolonged distribution at a point of Sigma(R)."""
    fiber_point = locate_fiber_point(sample, chart, coordinates, tol)
    check_constant_normal_form(sample, rng or np.random.default_rng(DEFAULT_SEED), probes)
    system = prolonged_system(sample.system, fiber_point.adapted, fiber_point.chart)
    names = coordinate_names(sample.system, fiber_point.chart)
    point = dict(sample.point)
    for name, free in zip(names, fiber_point.chart.graph.free, strict=True):  # type: ignore[union-attr]
        point[name] = fiber_point.coordinates[free]
    logger.debug(
        "Prolonged to level {level} in chart {chart} at stratum {stratum}",
        level=system.level,
        chart=fiber_point.chart.numeral,
        stratum=int(fiber_point.stratum),
    )
    return replace(system.sample(point, tol), lift=fiber_point)


@dataclass(frozen=True)
class TowerStep:
    level: int
    dimension: int
    rank: int
    label: DistributionType
    chart: str | None = None
    coordinates: tuple[tuple[str, float], ...] = ()
    stratum: int | None = None


def prolong_tower(
    sample: DistributionSample,
    depth: int,
    chart: str = "I",
    coordinates: Mapping[str, float] | None = None,
    tol: float = RANK_TOL,
    rng: np.random.Generator | None = None,
) -> list[TowerStep]:
    """Prolong ``depth`` times, at the given chart point of every stage."""
    rng = rng or np.random.default_rng(DEFAULT_SEED)
    steps = [
        TowerStep(
            level=sample.system.level,
            dimension=sample.system.dimension,
            rank=sample.rank,
            label=rank4_type(sample, tol).label,
        )
    ]
    current = sample
    for _ in range(depth):
        kind = rank4_type(current, tol).label.kind
        if kind is None:
            raise DegeneratePencilError("the derivative pencil is degenerate")
        model = chart_defining_functions(kind, chart)
        values = dict(coordinates) if coordinates is not None else {name: 0.0 for name in _free_names(model)}
        current = prolong_rank4(current, chart, values, tol, rng)
        lift: FiberPoint = current.lift
        steps.append(
            TowerStep(
                level=current.system.level,
                dimension=current.system.dimension,
                rank=current.rank,
                label=rank4_type(current, tol).label,
                chart=lift.chart.numeral,
                coordinates=tuple(sorted(lift.coordinates.items())),
                stratum=int(lift.stratum),
            )
        )
    return steps


def _free_names(model: GrassmannChartModel) -> tuple[str, ...]:
    return model.graph.free if model.graph is not None else FIBER_CHART.names
