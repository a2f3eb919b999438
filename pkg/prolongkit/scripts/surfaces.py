from typing import Any

from prolongkit.config import RunConfig, SurfaceRequest
from prolongkit.constants import VERIFICATION_BOX
from prolongkit.reports import build_report
from prolongkit.solutions import SolutionSurface, verify_integral_surface

# Grid hits beyond this are only counted
MAX_REPORTED_POINTS = 50


class SurfaceRunner:
    """Builds singular solutions from a request and verifies them."""

    def __init__(self, config: RunConfig, request: SurfaceRequest):
        self.config = config
        self.request = request

    def _describe(self, surface: SolutionSurface) -> dict[str, Any]:
        return {
            "model": surface.model,
            "chart": surface.chart,
            "parameters": surface.parameters,
            "components": surface.components,
            "designated": surface.designated,
            "diagnostics": surface.diagnostics,
        }

    def solve(self) -> tuple[dict[str, Any], int]:
        surface = self.request.build()
        return build_report("solve", self.config, self._describe(surface)), 0

    def verify(self) -> tuple[dict[str, Any], int]:
        surface = self.request.build()
        report = verify_integral_surface(
            surface,
            tol=self.config.tol_residual,
            grid=self.config.grid,
            box=VERIFICATION_BOX,
            rank_tol=self.config.tol_rank,
            rng=self.config.rng(),
        )
        points = report.singular_points
        results = {
            **self._describe(surface),
            "residuals": report.residuals,
            "legendrian": report.legendrian,
            "max_residual": report.max_residual,
            "tolerance": report.tol,
            "grid": report.grid,
            "box": report.box,
            "passed": report.passed,
            "corank": report.corank,
            "immersed": report.immersed,
            "singular_points": [
                {"parameters": dict(point.parameters), "corank": point.corank} for point in points[:MAX_REPORTED_POINTS]
            ],
            "singular_point_count": len(points),
        }
        return build_report("verify-solution", self.config, results), 0 if report.passed else 2
