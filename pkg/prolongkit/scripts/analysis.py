from collections.abc import Callable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import Any

from loguru import logger

from prolongkit.config import RunConfig
from prolongkit.contact import (
    DistributionSample,
    EquationClass,
    PdeSurface,
    PointClass,
    adapted_coframe,
    cauchy_characteristic,
    classify_point,
    induced_distribution,
    rank4_type,
)
from prolongkit.exceptions import ChartError, DegeneratePencilError
from prolongkit.prolong import (
    FiberPoint,
    chart_defining_functions,
    derive_defining_functions,
    fiber_sampler_oracle,
    fiber_topology,
    plucker_fiber,
    prolong_rank4,
    prolong_tower,
    sigma_j2_atlas,
)
from prolongkit.prolong.atlas import FIBER_COORDINATES
from prolongkit.prolong.charts import FIBER_CHART, NUMERALS, chart_ids
from prolongkit.reports import build_report
from prolongkit.tanaka import compare_symbol, derived_flag, symbol_algebra, weak_filtration

Results = list[dict[str, Any]]


class AnalysisRunner:
    """
    Pointwise analyses of one equation.

    Each method returns the report of its command and the exit code: 0,
    or 2 when some point is rejected.
    """

    def __init__(self, config: RunConfig, pde: PdeSurface | None = None, workers: int = 4):
        self.config = config
        self.pde = pde
        self.workers = workers

    @property
    def surface(self) -> PdeSurface:
        if self.pde is None:
            raise ChartError("this analysis needs an equation")
        return self.pde

    def _map(
        self, function: Callable[[dict[str, float]], dict[str, Any]], points: Sequence[dict[str, float]]
    ) -> Results:
        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            return list(executor.map(function, points))

    def _sample(self, point: Mapping[str, float]) -> DistributionSample:
        return induced_distribution(self.surface, point)

    def classify(self, points: Sequence[dict[str, float]]) -> tuple[dict[str, Any], int]:
        def entry(point: dict[str, float]) -> dict[str, Any]:
            found = classify_point(self.surface, point, band=self.config.parabolic_band)
            return {
                "point": point,
                "class": found.point_class,
                "delta": found.delta,
                "delta_exact": found.delta_exact,
                "band": found.band,
                "gradient": found.gradient,
            }

        results = self._map(entry, points)
        rejected = sum(result["class"] is PointClass.NON_REGULAR for result in results)
        logger.info("Classified {count} points of {pde}", count=len(results), pde=self.surface.text)
        if rejected:
            logger.warning("{rejected} non regular points", rejected=rejected)
        return build_report("classify", self.config, results), 2 if rejected else 0

    def fiber(self, points: Sequence[dict[str, float]], oracle: bool = False) -> tuple[dict[str, Any], int]:
        def entry(point: dict[str, float]) -> dict[str, Any]:
            found = classify_point(self.surface, point, band=self.config.parabolic_band)
            fiber = plucker_fiber(self._sample(point), self.config.tol_rank)
            topology = fiber_topology(fiber, self.config.tol_rank)
            kind = found.point_class.kind
            result: dict[str, Any] = {
                "point": point,
                "class": found.point_class,
                "delta": found.delta,
                "signature": topology.signature,
                "topology": topology.label,
                "eigenvalues": topology.eigenvalues,
                "singular_points": [plane.T for plane in topology.singular_planes],
                "charts": [] if kind is None else [self._chart_entry(kind, numeral) for numeral in chart_ids(kind)],
            }
            if topology.diagnostics:
                result["diagnostics"] = topology.diagnostics
            if oracle:
                result["oracle"] = fiber_sampler_oracle(fiber, self.config.oracle_samples).__dict__
            return result

        return build_report("fiber", self.config, self._map(entry, points)), 0

    @staticmethod
    def _chart_entry(kind: EquationClass, chart: str) -> dict[str, Any]:
        model = chart_defining_functions(kind, chart)
        return {"id": model.chart_id, "numeral": model.numeral, "f1": model.f1, "f2": model.f2, "empty": model.empty}

    def rank4_type(self, points: Sequence[dict[str, float]]) -> tuple[dict[str, Any], int]:
        def entry(point: dict[str, float]) -> dict[str, Any]:
            sample = self._sample(point)
            pencil = rank4_type(sample, self.config.tol_rank)
            result: dict[str, Any] = {
                "point": point,
                "type": pencil.label,
                "alpha": pencil.alpha,
                "beta": pencil.beta,
                "gamma": pencil.gamma,
                "discriminant": pencil.discriminant,
                "cauchy_characteristic": cauchy_characteristic(sample, self.config.tol_rank).shape[1],
            }
            if pencil.label.kind is not None:
                adapted = adapted_coframe(sample, self.config.tol_rank, pencil)
                result["coframe"] = {"labels": adapted.labels, "residual": adapted.residual}
            return result

        return build_report("rank4-type", self.config, self._map(entry, points)), 0

    def _lift(
        self, point: Mapping[str, float], chart: str, coordinates: Mapping[str, float] | None
    ) -> DistributionSample:
        """Prolonged sample at the fiber point over ``point``; the chart origin by default."""
        sample = self._sample(point)
        kind = rank4_type(sample, self.config.tol_rank).label.kind
        if kind is None:
            raise DegeneratePencilError("the derivative pencil is degenerate")
        model = chart_defining_functions(kind, chart)
        if coordinates is None:
            coordinates = dict.fromkeys(model.graph.free if model.graph else FIBER_CHART.names, 0.0)
        return prolong_rank4(
            sample, chart, coordinates, self.config.tol_rank, self.config.rng(), self.config.normal_form_probes
        )

    def derived(
        self,
        points: Sequence[dict[str, float]],
        chart: str | None = None,
        coordinates: Mapping[str, float] | None = None,
    ) -> tuple[dict[str, Any], int]:
        def entry(point: dict[str, float]) -> dict[str, Any]:
            sample = self._sample(point) if chart is None else self._lift(point, chart, coordinates)
            flag = derived_flag(sample, self.config.tol_rank)
            result = {"point": point, "system": sample.system.name, **flag.__dict__}
            lift: FiberPoint | None = sample.lift
            if lift is not None:
                result.update(chart=lift.chart.numeral, coordinates=lift.coordinates, stratum=int(lift.stratum))
            return result

        return build_report("derived", self.config, self._map(entry, points)), 0

    def symbol(
        self, points: Sequence[dict[str, float]], chart: str = "I", coordinates: Mapping[str, float] | None = None
    ) -> tuple[dict[str, Any], int]:
        def entry(point: dict[str, float]) -> dict[str, Any]:
            sample = self._lift(point, chart, coordinates)
            lift: FiberPoint = sample.lift
            symbol = symbol_algebra(sample, weak_filtration(sample, self.config.tol_rank), tol=self.config.tol_rank)
            fingerprint = symbol.fingerprint()
            try:
                comparison = compare_symbol(symbol, lift.kind, int(lift.stratum))
                match: dict[str, Any] | None = {
                    "reference": comparison.reference,
                    "passed": comparison.passed,
                    "checks": [check.__dict__ | {"passed": check.passed} for check in comparison.checks],
                }
            except ChartError as error:
                logger.warning("{error}", error=error)
                match = None
            return {
                "point": point,
                "chart": lift.chart.numeral,
                "coordinates": lift.coordinates,
                "stratum": int(lift.stratum),
                "labels": symbol.labels,
                "graded_dims": fingerprint.graded_dims,
                "bracket_image_dims": {f"{p},{q}": value for (p, q), value in fingerprint.bracket_image_dims},
                "generating_condition": {str(level): value for level, value in fingerprint.generating},
                "ad_ranks": {str(level): value for level, value in fingerprint.ad_ranks},
                "jacobi_residual": symbol.jacobi_residual(),
                "filtration_residual": symbol.filtration_residual,
                "reference_match": match,
            }

        return build_report("symbol", self.config, self._map(entry, points)), 0

    def prolong(
        self,
        points: Sequence[dict[str, float]],
        depth: int,
        chart: str = "I",
        coordinates: Mapping[str, float] | None = None,
    ) -> tuple[dict[str, Any], int]:
        def entry(point: dict[str, float]) -> dict[str, Any]:
            steps = prolong_tower(
                self._sample(point), depth, chart, coordinates, self.config.tol_rank, self.config.rng()
            )
            return {"point": point, "steps": [step.__dict__ for step in steps]}

        return build_report("prolong", self.config, self._map(entry, points)), 0

    def charts(self) -> tuple[dict[str, Any], int]:
        """Grassmann chart tables per class and the Sigma(J^2) atlas with its derived flags."""
        grassmann = []
        for kind in EquationClass:
            for numeral in NUMERALS:
                model = chart_defining_functions(kind, numeral)
                grassmann.append(
                    {
                        "class": model.kind,
                        **self._chart_entry(model.kind, numeral),
                        "derived": derive_defining_functions(model.kind, numeral),
                        "graph": None if model.graph is None else model.graph.free,
                    }
                )
        rng = self.config.rng()
        atlas = []
        for chart in sigma_j2_atlas():
            system = chart.system()
            flag = derived_flag(system.sample(system.random_point(rng)), self.config.tol_rank)
            atlas.append(
                {
                    "letter": chart.letter,
                    "plane": chart.plane,
                    "fiber_coordinates": FIBER_COORDINATES[chart.letter],
                    "generators": {
                        label: form.to_text() for label, form in zip(chart.labels, chart.generators, strict=True)
                    },
                    "derived_ranks": flag.ranks,
                }
            )
        return build_report("charts", self.config, {"grassmann": grassmann, "atlas": atlas}), 0
