"""
Jet charts, contact forms and second order equations.

A point of an equation ``F = 0`` in J^2 is classified twice: from the
discriminant of the symbol, and from the Pfaffian pencil of the rank 4
distribution the contact system induces on the equation.
"""

from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from enum import StrEnum
from functools import cached_property
from typing import Any

import numpy as np
import sympy as sp
from loguru import logger

from prolongkit.constants import (
    ADAPTED_COFRAME_TOL,
    ON_SURFACE_TOL,
    PARABOLIC_BAND,
    PROJECTION_MAX_ITERATIONS,
    PROJECTION_TOL,
    RANK_TOL,
    REGULARITY_TOL,
)
from prolongkit.exceptions import (
    DegenerateBasisError,
    DegeneratePencilError,
    DomainError,
    MissingCoordinateError,
    NonRegularPointError,
    OffSurfaceError,
    ProjectionError,
    SplittingError,
)
from prolongkit.expr import Chart, coordinate, evaluate, exact_value, parse_expr, to_text
from prolongkit.forms import (
    DifferentialForm,
    covector_rows,
    eval_form,
    ext_d,
    restrict2,
    wedge_covectors,
)
from prolongkit.linalg import null_space, rank

J2 = Chart(("x", "y", "z", "p", "q", "r", "s", "t"))
J1_COORDINATES = ("x", "y", "z", "p", "q")
SECOND_DERIVATIVES = ("r", "s", "t")
CONTACT_LABELS = ("varpi0", "varpi1", "varpi2")


class EquationClass(StrEnum):
    HYPERBOLIC = "hyp"
    PARABOLIC = "par"
    ELLIPTIC = "ell"


class PointClass(StrEnum):
    HYPERBOLIC = "Hyperbolic"
    PARABOLIC = "Parabolic"
    ELLIPTIC = "Elliptic"
    NON_REGULAR = "NonRegular"

    @property
    def kind(self) -> EquationClass | None:
        return _KINDS.get(self.value)


class DistributionType(StrEnum):
    HYPERBOLIC = "HyperbolicType"
    PARABOLIC = "ParabolicType"
    ELLIPTIC = "EllipticType"
    DEGENERATE = "Degenerate"

    @property
    def kind(self) -> EquationClass | None:
        return _KINDS.get(self.value)


_KINDS = {
    "Hyperbolic": EquationClass.HYPERBOLIC,
    "Parabolic": EquationClass.PARABOLIC,
    "Elliptic": EquationClass.ELLIPTIC,
    "HyperbolicType": EquationClass.HYPERBOLIC,
    "ParabolicType": EquationClass.PARABOLIC,
    "EllipticType": EquationClass.ELLIPTIC,
}

COFRAME_LABELS: dict[EquationClass, tuple[str, str, str, str]] = {
    EquationClass.HYPERBOLIC: ("omega1", "omega2", "pi11", "pi22"),
    EquationClass.PARABOLIC: ("omega1", "omega2", "pi12", "pi22"),
    EquationClass.ELLIPTIC: ("omega1", "omega2", "pi11", "pi12"),
}

# d theta_k restricted to D, as (sign, left label, right label) wedge terms
NORMAL_FORMS: dict[EquationClass, tuple[tuple[tuple[int, str, str], ...], ...]] = {
    EquationClass.HYPERBOLIC: (
        ((1, "omega1", "pi11"),),
        ((1, "omega2", "pi22"),),
    ),
    EquationClass.PARABOLIC: (
        ((1, "omega2", "pi12"),),
        ((1, "omega1", "pi12"), (1, "omega2", "pi22")),
    ),
    EquationClass.ELLIPTIC: (
        ((1, "omega1", "pi11"), (1, "omega2", "pi12")),
        ((1, "omega1", "pi12"), (-1, "omega2", "pi11")),
    ),
}


def contact_system_j2(chart: Chart = J2) -> tuple[DifferentialForm, ...]:
    p, q, r, s, t = (coordinate(name) for name in ("p", "q", "r", "s", "t"))
    return (
        DifferentialForm.one_form(chart, {"z": 1, "x": -p, "y": -q}),
        DifferentialForm.one_form(chart, {"p": 1, "x": -r, "y": -s}),
        DifferentialForm.one_form(chart, {"q": 1, "x": -s, "y": -t}),
    )


@dataclass(frozen=True)
class PdeSurface:
    F: sp.Expr
    name: str = ""

    @classmethod
    def from_text(cls, text: str, name: str = "") -> "PdeSurface":
        return cls(parse_expr(text, J2), name=name)

    @property
    def text(self) -> str:
        return to_text(self.F)

    @cached_property
    def gradient(self) -> tuple[sp.Expr, sp.Expr, sp.Expr]:
        """Partial derivatives of F along r, s, t."""
        return tuple(sp.diff(self.F, coordinate(name)) for name in SECOND_DERIVATIVES)  # type: ignore[return-value]

    @cached_property
    def discriminant(self) -> sp.Expr:
        F_r, F_s, F_t = self.gradient
        return sp.expand(F_r * F_t - sp.Rational(1, 4) * F_s**2)


@dataclass(frozen=True)
class Classification:
    point_class: PointClass
    delta: float
    delta_exact: sp.Rational | None
    band: bool
    gradient: tuple[float, float, float]


def classify_point(
    surface: PdeSurface,
    point: Mapping[str, float],
    band: float = PARABOLIC_BAND,
    tol: float = ON_SURFACE_TOL,
) -> Classification:
    """
    Sign of the symbol discriminant at a point of the equation.

    The discriminant is evaluated exactly when the point and F allow it;
    a non zero value inside the relative band still reads as parabolic,
    flagged with ``band=True``.
    """
    residual = abs(evaluate(surface.F, point))
    if residual > tol:
        raise OffSurfaceError(f"point is off the equation, |F| = {residual:.3e}", residual)

    gradient = tuple(evaluate(component, point) for component in surface.gradient)
    exact = exact_value(surface.discriminant, point)
    delta = float(exact) if exact is not None else evaluate(surface.discriminant, point)

    if float(np.linalg.norm(gradient)) <= REGULARITY_TOL:
        return Classification(PointClass.NON_REGULAR, delta, exact, False, gradient)  # type: ignore[arg-type]

    F_r, F_s, F_t = gradient
    scale = abs(F_r * F_t) + F_s**2
    is_exact_zero = exact == 0 if exact is not None else delta == 0.0
    if is_exact_zero:
        point_class, in_band = PointClass.PARABOLIC, False
    elif abs(delta) <= band * scale:
        point_class, in_band = PointClass.PARABOLIC, True
    elif delta < 0:
        point_class, in_band = PointClass.HYPERBOLIC, False
    else:
        point_class, in_band = PointClass.ELLIPTIC, False

    logger.bind(payload={"gradient": gradient, "delta": delta}).debug(
        "Classified point as {point_class}", point_class=point_class.value
    )
    return Classification(point_class, delta, exact, in_band, gradient)  # type: ignore[arg-type]


@dataclass(frozen=True, eq=False)
class PfaffianSystem:
    """
    A Pfaffian system on a submanifold cut out by ``constraints``.

    ``independent`` optionally lists closed 1-forms restricting to a
    coframe of the distribution; ``base_coordinates`` are the coordinates
    of the base projection, used to find vertical directions.
    """

    chart: Chart
    forms: tuple[DifferentialForm, ...]
    labels: tuple[str, ...]
    constraints: tuple[sp.Expr, ...] = ()
    independent: tuple[DifferentialForm, ...] = ()
    independent_labels: tuple[str, ...] = ()
    solve_for: tuple[str, ...] = ()
    base_coordinates: tuple[str, ...] = ()
    name: str = ""
    level: int = 0

    def __post_init__(self) -> None:
        if len(self.labels) != len(self.forms):
            raise ValueError("one label per form is required")
        if len(self.independent_labels) != len(self.independent):
            raise ValueError("one label per independent form is required")
        for form in (*self.forms, *self.independent):
            if form.degree != 1 or form.chart != self.chart:
                raise ValueError("system forms must be 1-forms on the system chart")

    @property
    def dimension(self) -> int:
        return self.chart.dim - len(self.constraints)

    @property
    def rank(self) -> int:
        return self.dimension - len(self.forms)

    @cached_property
    def derivatives(self) -> tuple[DifferentialForm, ...]:
        return tuple(ext_d(form) for form in self.forms)

    @cached_property
    def constraint_differentials(self) -> tuple[DifferentialForm, ...]:
        return tuple(ext_d(DifferentialForm.function(self.chart, G)) for G in self.constraints)

    @cached_property
    def _jacobian(self) -> tuple[tuple[sp.Expr, ...], ...]:
        return tuple(
            tuple(sp.diff(G, coordinate(name)) for name in self.solve_for) for G in self.constraints
        )

    def residual(self, point: Mapping[str, float]) -> float:
        if not self.constraints:
            return 0.0
        return max(abs(evaluate(G, point)) for G in self.constraints)

    def project(
        self,
        point: Mapping[str, float],
        tol: float = PROJECTION_TOL,
        max_iterations: int = PROJECTION_MAX_ITERATIONS,
    ) -> dict[str, float]:
        """Newton projection onto the constraints, moving only ``solve_for``."""
        current = {name: float(value) for name, value in point.items()}
        if not self.constraints:
            return current
        if len(self.solve_for) != len(self.constraints):
            raise ProjectionError("need one solved coordinate per constraint")
        for _ in range(max_iterations):
            values = np.array([evaluate(G, current) for G in self.constraints])
            if np.max(np.abs(values)) <= tol:
                return current
            jacobian = np.array([[evaluate(entry, current) for entry in row] for row in self._jacobian])
            step = np.linalg.lstsq(jacobian, values, rcond=None)[0]
            for name, delta in zip(self.solve_for, step, strict=True):
                current[name] -= float(delta)
        raise ProjectionError(f"no convergence after {max_iterations} Newton steps")

    def random_point(self, rng: np.random.Generator, box: float = 1.0, attempts: int = 20) -> dict[str, float]:
        for _ in range(attempts):
            point = {name: float(rng.uniform(-box, box)) for name in self.chart.names}
            try:
                return self.project(point)
            except (ProjectionError, DomainError):
                continue
        raise ProjectionError(f"no point of the system found in {attempts} attempts")

    def sample(self, point: Mapping[str, float], tol: float = RANK_TOL) -> "DistributionSample":
        """Distribution and restricted derivatives at a point of the submanifold."""
        values = {name: float(point[name]) for name in self.chart.names if name in point}
        missing = [name for name in self.chart.names if name not in values]
        if missing:
            raise MissingCoordinateError(missing)
        residual = self.residual(values)
        if residual > ON_SURFACE_TOL:
            raise OffSurfaceError(f"point is off the submanifold, residual {residual:.3e}", residual)

        size = self.chart.dim
        constraint_rows = covector_rows(self.constraint_differentials, values, size)
        coframe = covector_rows(self.forms, values, size)
        kernel = null_space(np.vstack([constraint_rows, coframe]), tol)
        basis = kernel
        if self.independent:
            pairing = covector_rows(self.independent, values, size) @ kernel
            if pairing.shape[0] != pairing.shape[1] or rank(pairing, tol) < pairing.shape[0]:
                raise DegenerateBasisError(
                    f"independent forms do not restrict to a coframe of D (rank {kernel.shape[1]})"
                )
            basis = kernel @ np.linalg.inv(pairing)
        derivatives = tuple(restrict2(eval_form(form, values), basis, tol) for form in self.derivatives)
        return DistributionSample(
            system=self,
            point=values,
            coframe=coframe,
            constraint_rows=constraint_rows,
            basis=basis,
            derivatives=derivatives,
        )


@dataclass(frozen=True, eq=False)
class DistributionSample:
    """
    The distribution of a Pfaffian system at one point.

    Columns of ``basis`` span D(w) in chart coordinates; when the system
    has an independent coframe they are its dual frame. ``derivatives``
    are the 2-forms d(varpi_i) restricted to that basis.
    """

    system: PfaffianSystem
    point: Mapping[str, float]
    coframe: np.ndarray
    constraint_rows: np.ndarray
    basis: np.ndarray
    derivatives: tuple[np.ndarray, ...]
    lift: Any = None

    @property
    def chart(self) -> Chart:
        return self.system.chart

    @property
    def labels(self) -> tuple[str, ...]:
        return self.system.labels

    @property
    def rank(self) -> int:
        return int(self.basis.shape[1])

    def tangent(self) -> np.ndarray:
        """Orthonormal basis of the tangent space of the submanifold."""
        return null_space(self.constraint_rows)

    def restricted(self, forms: Sequence[DifferentialForm]) -> np.ndarray:
        """Covectors of ``forms`` on D(w), in basis coordinates."""
        return covector_rows(forms, self.point, self.chart.dim) @ self.basis

    def projection(self) -> np.ndarray | None:
        """Differential of the base projection on D(w)."""
        names = self.system.base_coordinates
        if not names:
            return None
        selector = np.zeros((len(names), self.chart.dim))
        for row, name in enumerate(names):
            selector[row, self.chart.index(name)] = 1.0
        return selector @ self.basis

    def vertical(self, tol: float = RANK_TOL) -> np.ndarray | None:
        """Directions of D(w) killed by the base projection, in basis coordinates."""
        projection = self.projection()
        if projection is None:
            return None
        return null_space(projection, tol)


def equation_system(surface: PdeSurface, point: Mapping[str, float]) -> PfaffianSystem:
    """
    Contact system restricted to the equation.

    ``dx, dy`` and the differentials of the two second order coordinates
    other than the one F depends on most restrict to a coframe of D.
    """
    gradient = np.array([abs(evaluate(component, point)) for component in surface.gradient])
    if float(np.linalg.norm(gradient)) <= REGULARITY_TOL:
        raise NonRegularPointError("dF vanishes along the fiber of J^2 -> J^1")
    pivot = SECOND_DERIVATIVES[int(np.argmax(gradient))]
    free = tuple(name for name in SECOND_DERIVATIVES if name != pivot)
    independent = tuple(DifferentialForm.differential(J2, name) for name in ("x", "y", *free))
    return PfaffianSystem(
        chart=J2,
        forms=contact_system_j2(),
        labels=CONTACT_LABELS,
        constraints=(surface.F,),
        independent=independent,
        independent_labels=("x", "y", *free),
        solve_for=(pivot,),
        base_coordinates=J1_COORDINATES,
        name=surface.name or surface.text,
    )


def induced_distribution(surface: PdeSurface, point: Mapping[str, float]) -> DistributionSample:
    classification = classify_point(surface, point)
    if classification.point_class is PointClass.NON_REGULAR:
        raise NonRegularPointError("dF vanishes along the fiber of J^2 -> J^1")
    return equation_system(surface, point).sample(point)


def pfaffian(matrix: np.ndarray) -> float:
    return float(matrix[0, 1] * matrix[2, 3] - matrix[0, 2] * matrix[1, 3] + matrix[0, 3] * matrix[1, 2])


@dataclass(frozen=True, eq=False)
class Rank4Type:
    """
    Type of the pencil ``lambda A + mu B`` spanned by the derivatives.

    ``mixing`` expresses theta_A, theta_B as combinations of the system
    forms; ``matrices`` holds the orthonormalized A, B.
    """

    label: DistributionType
    alpha: float
    beta: float
    gamma: float
    mixing: np.ndarray
    matrices: tuple[np.ndarray, np.ndarray]

    @property
    def discriminant(self) -> float:
        return self.beta**2 - 4 * self.alpha * self.gamma


def rank4_type(sample: DistributionSample, tol: float = RANK_TOL) -> Rank4Type:
    if sample.rank != 4:
        raise DegeneratePencilError(f"the distribution has rank {sample.rank}, not 4")
    matrices = sample.derivatives
    count = len(matrices)
    mixing = np.zeros((2, count))
    empty = (np.zeros((4, 4)), np.zeros((4, 4)))
    if count < 2:
        return Rank4Type(DistributionType.DEGENERATE, 0.0, 0.0, 0.0, mixing, empty)

    norms = np.array([np.linalg.norm(matrix) for matrix in matrices])
    order = np.argsort(-norms, kind="stable")
    first, second = int(order[0]), int(order[1])
    if norms[first] <= tol:
        return Rank4Type(DistributionType.DEGENERATE, 0.0, 0.0, 0.0, mixing, empty)

    a = matrices[first] / norms[first]
    mixing[0, first] = 1.0 / norms[first]
    overlap = float(np.sum(matrices[second] * a))
    remainder = matrices[second] - overlap * a
    remainder_norm = float(np.linalg.norm(remainder))
    if remainder_norm <= tol * max(1.0, float(norms[first])):
        return Rank4Type(DistributionType.DEGENERATE, 0.0, 0.0, 0.0, mixing, (a, np.zeros((4, 4))))
    b = remainder / remainder_norm
    mixing[1] = -overlap * mixing[0]
    mixing[1, second] += 1.0
    mixing[1] /= remainder_norm

    alpha, gamma = pfaffian(a), pfaffian(b)
    beta = pfaffian(a + b) - alpha - gamma
    scale = max(abs(alpha), abs(beta), abs(gamma))
    discriminant = beta**2 - 4 * alpha * gamma
    if scale <= tol:
        label = DistributionType.DEGENERATE
    elif abs(discriminant) <= tol * scale**2:
        label = DistributionType.PARABOLIC
    elif discriminant > 0:
        label = DistributionType.HYPERBOLIC
    else:
        label = DistributionType.ELLIPTIC

    logger.bind(payload={"alpha": alpha, "beta": beta, "gamma": gamma}).debug(
        "Pencil discriminant {discriminant:.3e}", discriminant=discriminant
    )
    return Rank4Type(label, alpha, beta, gamma, mixing, (a, b))


def cauchy_characteristic(sample: DistributionSample, tol: float = RANK_TOL) -> np.ndarray:
    """Directions v of D(w) with d(varpi_i)(v, .) = 0 on D(w) for every i."""
    if not sample.derivatives:
        return np.eye(sample.rank)
    return null_space(np.vstack(sample.derivatives), tol)


@dataclass(frozen=True, eq=False)
class AdaptedCoframe:
    """
    Coframe of D(w) in which the derivatives take the class normal form.

    ``coframe`` rows are covectors in sample basis coordinates, ordered as
    ``labels``; ``theta`` expresses the two adapted forms as combinations
    of the system forms.
    """

    kind: EquationClass
    labels: tuple[str, str, str, str]
    coframe: np.ndarray
    theta: np.ndarray
    residual: float

    def covector(self, label: str) -> np.ndarray:
        return self.coframe[self.labels.index(label)]

    def on_plane(self, plane: np.ndarray) -> dict[str, np.ndarray]:
        """Values of each coframe covector on the columns of ``plane``."""
        values = self.coframe @ plane
        return dict(zip(self.labels, values, strict=True))


def normal_form_matrices(kind: EquationClass, coframe: np.ndarray) -> np.ndarray:
    rows = dict(zip(COFRAME_LABELS[kind], coframe, strict=True))
    return np.array(
        [
            sum(sign * wedge_covectors(rows[left], rows[right]) for sign, left, right in terms)
            for terms in NORMAL_FORMS[kind]
        ]
    )


def _real_roots(alpha: float, beta: float, gamma: float) -> list[tuple[float, float]]:
    """The two roots (lambda, mu) of alpha l^2 + beta l m + gamma m^2, cancellation free."""
    root = float(np.sqrt(max(beta**2 - 4 * alpha * gamma, 0.0)))
    q = -(beta + np.copysign(root, beta)) / 2
    if q == 0.0 or max(abs(alpha), abs(gamma)) == 0.0:
        return [(1.0, 0.0), (0.0, 1.0)]
    if abs(alpha) >= abs(gamma):
        roots = [(q / alpha, 1.0), (gamma / q, 1.0)]
    else:
        roots = [(1.0, q / gamma), (1.0, alpha / q)]
    return [(lam / np.hypot(lam, mu), mu / np.hypot(lam, mu)) for lam, mu in roots]


def _annihilating_combination(first: np.ndarray, second: np.ndarray, vertical: np.ndarray) -> np.ndarray:
    """Unit (y0, y1) with y0 first + y1 second vanishing on ``vertical``."""
    values = np.vstack([first @ vertical, second @ vertical])
    _, _, wh = np.linalg.svd(values.T)
    return wh[-1].conj()


def _decompose_real(matrix: np.ndarray, vertical: np.ndarray | None) -> tuple[np.ndarray, np.ndarray]:
    """omega, pi with matrix = omega ^ pi, omega vanishing on ``vertical``."""
    _, _, vh = np.linalg.svd(matrix)
    e, f = vh[0], vh[1]
    if vertical is not None:
        y = _annihilating_combination(e, f, vertical).real
        e, f = y[0] * e + y[1] * f, -y[1] * e + y[0] * f
    return e, float(e @ matrix @ f) * f


def _decompose_complex(matrix: np.ndarray, vertical: np.ndarray | None) -> tuple[np.ndarray, np.ndarray]:
    _, _, vh = np.linalg.svd(matrix)
    zeta, other = vh[0], vh[1]
    if vertical is not None:
        y = _annihilating_combination(vh[0], vh[1], vertical)
        zeta = y[0] * vh[0] + y[1] * vh[1]
        other = vh[1] if abs(y[0]) >= abs(y[1]) else vh[0]
    product = np.outer(zeta, other) - np.outer(other, zeta)
    i, j = np.unravel_index(int(np.argmax(np.abs(product))), product.shape)
    return zeta, (matrix[i, j] / product[i, j]) * other


def _split_hyperbolic(pencil: Rank4Type, vertical: np.ndarray | None) -> tuple[np.ndarray, np.ndarray]:
    a, b = pencil.matrices
    roots = _real_roots(pencil.alpha, pencil.beta, pencil.gamma)
    (omega1, pi11), (omega2, pi22) = (_decompose_real(lam * a + mu * b, vertical) for lam, mu in roots)
    return np.array([omega1, omega2, pi11, pi22]), np.array(roots)


def _split_elliptic(pencil: Rank4Type, vertical: np.ndarray | None) -> tuple[np.ndarray, np.ndarray]:
    a, b = pencil.matrices
    root = (-pencil.beta + 1j * np.sqrt(-pencil.discriminant)) / (2 * pencil.alpha)
    zeta, eta = _decompose_complex(root * a + b, vertical)
    coframe = np.array([zeta.real, zeta.imag, eta.real, -eta.imag])
    return coframe, np.array([[root.real, 1.0], [-root.imag, 0.0]])


def _split_parabolic(
    pencil: Rank4Type, vertical: np.ndarray | None, tol: float
) -> tuple[np.ndarray, np.ndarray]:
    a, b = pencil.matrices
    alpha, beta, gamma = pencil.alpha, pencil.beta, pencil.gamma
    if abs(alpha) >= abs(gamma):
        lam, mu = -beta / (2 * alpha), 1.0
    else:
        lam, mu = 1.0, -beta / (2 * gamma)
    double = lam * a + mu * b
    other = -mu * a + lam * b
    _, _, vh = np.linalg.svd(double)
    u, v = vh[0], vh[1]

    if vertical is not None:
        y = _annihilating_combination(u, v, vertical).real
        e2, e3 = y[0] * u + y[1] * v, -y[1] * u + y[0] * v
        kappa = float(e2 @ double @ e3)
        horizontal = null_space(vertical.T).T
        horizontal = horizontal - np.outer(horizontal @ e2, e2)
        e1 = horizontal[int(np.argmax(np.linalg.norm(horizontal, axis=1)))]
        e1 = e1 / np.linalg.norm(e1)
        e4 = null_space(np.vstack([e1, e2, e3]))[:, 0]
        frame = np.vstack([e1, e2, e3, e4])
        inverse = np.linalg.inv(frame)
        hat = inverse.T @ other @ inverse
        coframe = np.array(
            [hat[0, 2] * e1, e2, e3, -hat[0, 1] * e1 + hat[1, 2] * e3 + hat[1, 3] * e4]
        )
        coefficients = np.array([[lam / kappa, mu / kappa], [-mu, lam]])
        return coframe, coefficients

    w1, w2 = vh[2], vh[3]
    kappa = float(u @ double @ v)
    frame = np.vstack([w1, w2, u, v])
    hat = frame @ other @ frame.T
    a1, b1, a2, b2, c = hat[0, 2], hat[0, 3], hat[1, 2], hat[1, 3], hat[2, 3]
    determinant = a1 * b2 - b1 * a2
    if abs(determinant) <= tol * max(1.0, float(np.abs(hat).max()) ** 2):
        raise SplittingError("second pencil generator is degenerate on the double root plane")
    coframe = np.array([w1, a2 * u + b2 * v, a1 * u + b1 * v, -w2])
    first = (-determinant / kappa) * np.array([lam, mu])
    coefficients = np.array([first, np.array([-mu, lam]) + (c / determinant) * first])
    return coframe, coefficients


def adapted_coframe(
    sample: DistributionSample,
    tol: float = RANK_TOL,
    pencil: Rank4Type | None = None,
) -> AdaptedCoframe:
    """
    Coframe of D(w) putting the derivatives in the class normal form.

    When the base projection leaves a 2-dimensional vertical subspace,
    omega1 and omega2 are chosen to vanish on it.
    """
    pencil = pencil or rank4_type(sample, tol)
    kind = pencil.label.kind
    if kind is None:
        raise DegeneratePencilError("the derivative pencil is degenerate")
    vertical = sample.vertical(tol)
    if vertical is not None and vertical.shape[1] != 2:
        vertical = None

    if kind is EquationClass.HYPERBOLIC:
        coframe, coefficients = _split_hyperbolic(pencil, vertical)
    elif kind is EquationClass.ELLIPTIC:
        coframe, coefficients = _split_elliptic(pencil, vertical)
    else:
        coframe, coefficients = _split_parabolic(pencil, vertical, tol)

    condition = float(np.linalg.cond(coframe))
    if not np.isfinite(condition) or condition * tol > 1.0:
        raise SplittingError("adapted coframe is singular", condition)

    theta = coefficients @ pencil.mixing
    actual = np.einsum("kf,fij->kij", theta, np.array(sample.derivatives))
    target = normal_form_matrices(kind, coframe)
    residual = float(np.abs(actual - target).max())
    scale = max(1.0, float(np.abs(actual).max()))
    if residual > ADAPTED_COFRAME_TOL * scale:
        raise SplittingError(f"normal form residual {residual:.3e}", condition)
    return AdaptedCoframe(kind, COFRAME_LABELS[kind], coframe, theta, residual)

