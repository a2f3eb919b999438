"""Pullback residuals, Legendrian image and non immersion points of integral surfaces."""

from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np
import sympy as sp
from loguru import logger

from prolongkit.constants import DEFAULT_SEED, RANK_TOL, RESIDUAL_TOL, VERIFICATION_BOX, VERIFICATION_GRID
from prolongkit.contact import J1_COORDINATES
from prolongkit.expr import Chart, coordinate, evaluate, evaluate_grid
from prolongkit.forms import DifferentialForm, ext_d, pullback
from prolongkit.linalg import rank
from prolongkit.solutions.surfaces import SolutionSurface

J1 = Chart(J1_COORDINATES)
IMMERSION_SAMPLES = 50


@dataclass(frozen=True)
class SingularPoint:
    parameters: tuple[tuple[str, float], ...]
    corank: int


@dataclass(frozen=True, eq=False)
class VerificationReport:
    """Largest pullback residual per generator over the parameter grid, and the coranks found."""

    surface: SolutionSurface
    residuals: dict[str, float]
    legendrian: float
    tol: float
    grid: int
    box: float
    corank: int
    immersed: bool
    singular_points: tuple[SingularPoint, ...] = ()

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_residual < self.tol and self.legendrian < self.tol


def _grid(surface: SolutionSurface, grid: int, box: float) -> dict[str, np.ndarray]:
    axis = np.linspace(-box, box, grid)
    mesh = np.meshgrid(axis, axis, indexing="ij")
    return dict(zip(surface.parameters, mesh, strict=True))


def _max_abs(form: DifferentialForm, arrays: Mapping[str, np.ndarray]) -> float:
    return max(
        (float(np.abs(evaluate_grid(coefficient, arrays)).max()) for coefficient in form.coeffs.values()),
        default=0.0,
    )


def pullback_residuals(surface: SolutionSurface, arrays: Mapping[str, np.ndarray]) -> dict[str, float]:
    embedding = surface.embedding
    return {
        label: _max_abs(pullback(surface.components, form, surface.domain), arrays)
        for form, label in zip(embedding.forms, embedding.labels, strict=True)
    }


def legendrian_residual(surface: SolutionSurface, arrays: Mapping[str, np.ndarray]) -> float:
    """Residual of varpi0 and d varpi0 on the image of the surface in J^1."""
    p, q = coordinate("p"), coordinate("q")
    contact = DifferentialForm.one_form(J1, {"z": 1, "x": -p, "y": -q})
    image = {name: surface.components[name] for name in J1_COORDINATES}
    pulled = pullback(image, contact, surface.domain)
    return max(_max_abs(pulled, arrays), _max_abs(ext_d(pulled), arrays))


def _jacobian_expressions(surface: SolutionSurface, names: tuple[str, ...]) -> list[list[sp.Expr]]:
    return [
        [sp.diff(surface.components[name], coordinate(parameter)) for parameter in surface.parameters]
        for name in names
    ]


def detect_corank(
    surface: SolutionSurface, point: Mapping[str, float] | None = None, tol: float = RANK_TOL
) -> int:
    """Corank of the projection to J^1 at a parameter point, the designated one by default."""
    values = dict(surface.designated if point is None else point)
    jacobian = np.array(
        [[evaluate(entry, values) for entry in row] for row in _jacobian_expressions(surface, J1_COORDINATES)]
    )
    return 2 - rank(jacobian, tol)


def scan_coranks(
    surface: SolutionSurface, arrays: Mapping[str, np.ndarray], tol: float = RANK_TOL
) -> tuple[SingularPoint, ...]:
    """Grid nodes where the projection to J^1 drops rank."""
    expressions = _jacobian_expressions(surface, J1_COORDINATES)
    stacked = np.stack(
        [np.stack([evaluate_grid(entry, arrays) for entry in row], axis=-1) for row in expressions], axis=-2
    )
    singular = np.linalg.svd(stacked, compute_uv=False)
    limit = tol * np.maximum(1.0, singular.max(axis=-1))
    coranks = 2 - (singular > limit[..., None]).sum(axis=-1)
    hits = []
    for index in zip(*np.nonzero(coranks), strict=True):
        parameters = tuple((name, float(arrays[name][index])) for name in surface.parameters)
        hits.append(SingularPoint(parameters, int(coranks[index])))
    return tuple(hits)


def is_immersed(
    surface: SolutionSurface,
    rng: np.random.Generator | None = None,
    samples: int = IMMERSION_SAMPLES,
    box: float = VERIFICATION_BOX,
    tol: float = RANK_TOL,
) -> bool:
    """Whether the full parameter Jacobian has rank 2 at random parameters."""
    rng = rng or np.random.default_rng(DEFAULT_SEED)
    expressions = _jacobian_expressions(surface, tuple(surface.components))
    for _ in range(samples):
        point = {name: float(rng.uniform(-box, box)) for name in surface.parameters}
        jacobian = np.array([[evaluate(entry, point) for entry in row] for row in expressions])
        if rank(jacobian, tol) < 2:
            logger.warning("Parameter Jacobian drops rank at {point}", point=point)
            return False
    return True


def verify_integral_surface(
    surface: SolutionSurface,
    tol: float = RESIDUAL_TOL,
    grid: int = VERIFICATION_GRID,
    box: float = VERIFICATION_BOX,
    rank_tol: float = RANK_TOL,
    rng: np.random.Generator | None = None,
) -> VerificationReport:
    arrays = _grid(surface, grid, box)
    residuals = pullback_residuals(surface, arrays)
    report = VerificationReport(
        surface=surface,
        residuals=residuals,
        legendrian=legendrian_residual(surface, arrays),
        tol=tol,
        grid=grid,
        box=box,
        corank=detect_corank(surface, tol=rank_tol),
        immersed=is_immersed(surface, rng, box=box, tol=rank_tol),
        singular_points=scan_coranks(surface, arrays, rank_tol),
    )
    logger.bind(payload=residuals).info(
        "Verified {model} surface on V_{plane}: {verdict}",
        model=surface.model.value,
        plane=surface.chart,
        verdict="PASS" if report.passed else "FAIL",
    )
    return report
