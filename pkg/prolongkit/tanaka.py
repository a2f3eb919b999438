"""
Derived flags, weak derived filtrations and graded symbol algebras.

Everything is computed pointwise on the tangent space of the system's
submanifold. Derived systems are found as kernels of the restricted
derivatives, ``varpi([X, Y]) = -d varpi(X, Y)``, which takes the
annihilators of the derived systems to be constant combinations of the
system forms.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from loguru import logger

from prolongkit.constants import RANK_TOL
from prolongkit.contact import DistributionSample, EquationClass
from prolongkit.exceptions import ChartError, NonAdaptedFrameError
from prolongkit.forms import eval_form, ext_d
from prolongkit.linalg import near_threshold, null_space, rank, row_space

GRADES = (-1, -2, -3, -4)
IMAGE_PAIRS = ((-1, -1), (-2, -1), (-3, -1), (-2, -2))
GENERATING_LEVELS = (-2, -3, -4)
AD_LEVELS = (-1, -2, -3)
FRAME_TOL = 1e-9


class _PointData(NamedTuple):
    tangent: np.ndarray
    forms: np.ndarray
    derivatives: np.ndarray


def _point_data(sample: DistributionSample) -> _PointData:
    tangent = sample.tangent()
    size = tangent.shape[1]
    forms = sample.coframe @ tangent
    derivatives = np.array(
        [tangent.T @ eval_form(form, sample.point).array @ tangent for form in sample.system.derivatives]
    ).reshape(-1, size, size)
    return _PointData(tangent, forms, derivatives)


def _subspace(combinations: np.ndarray, data: _PointData, tol: float) -> np.ndarray:
    return null_space(combinations @ data.forms, tol)


def _kernel_step(
    combinations: np.ndarray,
    data: _PointData,
    left: np.ndarray,
    right: np.ndarray,
    tol: float,
) -> tuple[np.ndarray, bool]:
    """Combinations whose derivative vanishes on ``left x right``."""
    if combinations.shape[0] == 0:
        return combinations, False
    blocks = np.einsum("kf,fij->kij", combinations, data.derivatives)
    matrix = np.einsum("ia,kij,jb->abk", left, blocks, right).reshape(-1, combinations.shape[0])
    kernel = null_space(matrix, tol)
    return kernel.T @ combinations, near_threshold(matrix, tol)


@dataclass(frozen=True)
class DerivedFlag:
    """Ranks of D, dD, d^2 D, d^3 D and of the weak d^(2) D, d^(3) D."""

    ranks: tuple[int, int, int, int]
    weak_ranks: tuple[int, int]
    dimension: int
    unstable: bool


def derived_flag(sample: DistributionSample, tol: float = RANK_TOL) -> DerivedFlag:
    data = _point_data(sample)
    count = data.forms.shape[0]
    flags = []

    strong = [np.eye(count)]
    subspaces = [_subspace(strong[0], data, tol)]
    for _ in range(3):
        combinations, unstable = _kernel_step(strong[-1], data, subspaces[-1], subspaces[-1], tol)
        flags.append(unstable)
        strong.append(combinations)
        subspaces.append(_subspace(combinations, data, tol))

    weak_subspaces = []
    weak, current = strong[1], subspaces[1]
    for _ in range(2):
        weak, unstable = _kernel_step(weak, data, subspaces[0], current, tol)
        flags.append(unstable)
        current = _subspace(weak, data, tol)
        weak_subspaces.append(current)

    flag = DerivedFlag(
        ranks=tuple(space.shape[1] for space in subspaces),  # type: ignore[arg-type]
        weak_ranks=tuple(space.shape[1] for space in weak_subspaces),  # type: ignore[arg-type]
        dimension=data.tangent.shape[1],
        unstable=any(flags),
    )
    if flag.unstable:
        logger.warning("Derived flag ranks are numerically unstable at this point")
    logger.bind(payload=flag.__dict__).debug("Derived flag of {name}", name=sample.system.name)
    return flag


@dataclass(frozen=True, eq=False)
class Filtration:
    """
    Weak derived filtration F^-1 = D, F^-2 = dD, F^-3 = d^(2) D, F^-4 = T.

    ``annihilators`` holds the combinations of system forms vanishing on
    F^-1, F^-2 and F^-3; ``subspaces`` are bases in tangent coordinates.
    """

    annihilators: tuple[np.ndarray, np.ndarray, np.ndarray]
    subspaces: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(space.shape[1] for space in self.subspaces)


def weak_filtration(sample: DistributionSample, tol: float = RANK_TOL) -> Filtration:
    data = _point_data(sample)
    first = np.eye(data.forms.shape[0])
    level1 = _subspace(first, data, tol)
    second, _ = _kernel_step(first, data, level1, level1, tol)
    level2 = _subspace(second, data, tol)
    third, _ = _kernel_step(second, data, level1, level2, tol)
    level3 = _subspace(third, data, tol)
    return Filtration((first, second, third), (level1, level2, level3, np.eye(data.tangent.shape[1])))


def _complete(
    target: np.ndarray,
    chosen: list[np.ndarray],
    labels: Sequence[str],
    grade: int,
    tol: float,
) -> list[tuple[np.ndarray, str]]:
    """Extend ``chosen`` to span ``target`` too, preferring single system forms."""
    size = target.shape[1]
    span = row_space(np.vstack([*chosen, target]) if chosen else target, tol)
    needed = span.shape[0] - len(chosen)
    picks: list[tuple[np.ndarray, str]] = []
    current = list(chosen)
    for index in range(size):
        if len(picks) == needed:
            break
        unit = np.zeros(size)
        unit[index] = 1.0
        if np.linalg.norm(unit - span.T @ (span @ unit)) > FRAME_TOL:
            continue
        if rank(np.vstack([*current, unit]), tol) == len(current) + 1:
            picks.append((unit, labels[index]))
            current.append(unit)
    while len(picks) < needed:
        used = row_space(np.vstack(current), tol) if current else np.zeros((0, size))
        remainder = span - (span @ used.T) @ used
        vector = remainder[int(np.argmax(np.linalg.norm(remainder, axis=1)))]
        vector = vector / np.linalg.norm(vector)
        picks.append((vector, f"theta{grade}_{len(picks) + 1}"))
        current.append(vector)
    return picks


@dataclass(frozen=True, eq=False)
class GradedSymbol:
    """
    Graded nilpotent Lie algebra g_-1 + ... + g_-4.

    ``constants[g, a, b]`` is the component of [X_a, X_b] along X_g, kept
    only when grade(g) = grade(a) + grade(b). ``frame`` holds the columns
    X_a in tangent coordinates when the symbol was read off a sample.
    """

    labels: tuple[str, ...]
    grades: tuple[int, ...]
    constants: np.ndarray
    filtration_residual: float = 0.0
    frame: np.ndarray | None = None

    def indices(self, grade: int) -> list[int]:
        return [i for i, value in enumerate(self.grades) if value == grade]

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(len(self.indices(grade)) for grade in GRADES)

    def bracket(self, left: str, right: str) -> dict[str, float]:
        vector = self.constants[:, self.labels.index(left), self.labels.index(right)]
        return {label: float(value) for label, value in zip(self.labels, vector, strict=True) if abs(value) > FRAME_TOL}

    def image_dim(self, p: int, q: int, tol: float = RANK_TOL) -> int:
        rows = self.indices(p + q)
        left, right = self.indices(p), self.indices(q)
        if not rows or not left or not right:
            return 0
        return rank(self.constants[np.ix_(rows, left, right)].reshape(len(rows), -1), tol)

    def generating(self, level: int) -> bool:
        return self.image_dim(level + 1, -1) == len(self.indices(level))

    def ad_rank(self, q: int, tol: float = RANK_TOL) -> int:
        """Rank of g_-1 -> Hom(g_q, g_{q-1}), x -> ad x."""
        targets, sources = self.indices(q - 1), self.indices(q)
        if not targets or not sources:
            return 0
        rows = [self.constants[np.ix_(targets, [x], sources)].ravel() for x in self.indices(-1)]
        return rank(np.array(rows), tol) if rows else 0

    def jacobi_residual(self) -> float:
        product = np.einsum("dab,edc->eabc", self.constants, self.constants)
        cyclic = product + product.transpose(0, 3, 1, 2) + product.transpose(0, 2, 3, 1)
        return float(np.abs(cyclic).max()) if cyclic.size else 0.0

    def fingerprint(self) -> "SymbolFingerprint":
        return SymbolFingerprint(
            graded_dims=self.dims,
            bracket_image_dims=tuple((pair, self.image_dim(*pair)) for pair in IMAGE_PAIRS),
            generating=tuple((level, self.generating(level)) for level in GENERATING_LEVELS),
            ad_ranks=tuple((level, self.ad_rank(level)) for level in AD_LEVELS),
        )


@dataclass(frozen=True)
class SymbolFingerprint:
    graded_dims: tuple[int, ...]
    bracket_image_dims: tuple[tuple[tuple[int, int], int], ...]
    generating: tuple[tuple[int, bool], ...]
    ad_ranks: tuple[tuple[int, int], ...]

    def checks(self) -> dict[str, object]:
        result: dict[str, object] = {"graded_dims": self.graded_dims}
        result.update({f"image[{p},{q}]": value for (p, q), value in self.bracket_image_dims})
        result.update({f"generating[{level}]": value for level, value in self.generating})
        result.update({f"ad_rank[{level}]": value for level, value in self.ad_ranks})
        return result


def symbol_algebra(
    sample: DistributionSample,
    filtration: Filtration | None = None,
    frame: np.ndarray | None = None,
    tol: float = RANK_TOL,
) -> GradedSymbol:
    """
    Graded symbol of the weak derived filtration at the sample point.

    The adapted coframe takes single system forms where possible at
    levels -4, -3, -2, and the independent coframe at level -1. A supplied
    ``frame`` (columns in tangent coordinates) must be dual to it.
    """
    data = _point_data(sample)
    filtration = filtration or weak_filtration(sample, tol)
    first, second, third = filtration.annihilators
    system = sample.system

    chosen: list[np.ndarray] = []
    entries: list[tuple[int, str, np.ndarray, np.ndarray]] = []
    for grade, target in ((-4, third), (-3, second), (-2, first)):
        for vector, label in _complete(target, chosen, system.labels, grade, tol):
            chosen.append(vector)
            entries.append(
                (grade, label, vector @ data.forms, np.einsum("f,fij->ij", vector, data.derivatives))
            )

    if system.independent:
        for form, label in zip(system.independent, system.independent_labels, strict=True):
            row = eval_form(form, sample.point).array @ data.tangent
            derivative = data.tangent.T @ eval_form(ext_d(form), sample.point).array @ data.tangent
            entries.append((-1, label, row, derivative))
    else:
        distribution = filtration.subspaces[0]
        for index, column in enumerate(distribution.T, start=1):
            entries.append((-1, f"e{index}", column, np.zeros((len(column), len(column)))))

    entries.sort(key=lambda entry: -entry[0])
    coframe = np.array([entry[2] for entry in entries])
    if coframe.shape[0] != coframe.shape[1]:
        raise NonAdaptedFrameError(
            f"{coframe.shape[0]} adapted forms for a tangent space of dimension {coframe.shape[1]}"
        )
    if frame is None:
        frame = np.linalg.inv(coframe)
    duality = float(np.abs(coframe @ frame - np.eye(len(coframe))).max())
    if duality > FRAME_TOL:
        raise NonAdaptedFrameError(f"frame is not dual to the adapted coframe (defect {duality:.3e})")

    grades = np.array([entry[0] for entry in entries])
    derivatives = np.array([entry[3] for entry in entries])
    structure = -np.einsum("gij,ia,jb->gab", derivatives, frame, frame)
    graded = grades[:, None, None] == grades[None, :, None] + grades[None, None, :]
    deeper = grades[:, None, None] < grades[None, :, None] + grades[None, None, :]
    residual = float(np.abs(structure[deeper]).max()) if deeper.any() else 0.0
    return GradedSymbol(
        labels=tuple(entry[1] for entry in entries),
        grades=tuple(int(grade) for grade in grades),
        constants=np.where(graded, structure, 0.0),
        filtration_residual=residual,
        frame=frame,
    )


# Published bracket tables: grades of each basis element and [left, right] = result
_REFERENCES: dict[tuple[EquationClass, int], tuple[dict[str, int], tuple[tuple[str, str, str], ...]]] = {
    (EquationClass.HYPERBOLIC, 0): (
        {"omega1": -1, "omega2": -1, "p11": -1, "p22": -1, "pi11": -2, "pi22": -2, "X1": -3, "X2": -3, "X0": -4},
        (
            ("p11", "omega1", "pi11"),
            ("p22", "omega2", "pi22"),
            ("pi11", "omega1", "X1"),
            ("pi22", "omega2", "X2"),
            ("X1", "omega1", "X0"),
            ("X2", "omega2", "X0"),
        ),
    ),
    (EquationClass.HYPERBOLIC, 1): (
        {"omega1": -1, "pi22": -1, "p12": -1, "p21": -1, "omega2": -2, "pi11": -2, "X1": -3, "X2": -3, "X0": -4},
        (
            ("p12", "pi22", "omega2"),
            ("p21", "omega1", "pi11"),
            ("pi11", "omega1", "X1"),
            ("pi22", "omega2", "X2"),
            ("X1", "omega1", "X0"),
        ),
    ),
    (EquationClass.HYPERBOLIC, 2): (
        {"pi11": -1, "pi22": -1, "p11": -1, "p22": -1, "omega1": -2, "omega2": -2, "X1": -3, "X2": -3, "X0": -4},
        (
            ("p11", "pi11", "omega1"),
            ("p22", "pi22", "omega2"),
            ("pi11", "omega1", "X1"),
            ("pi22", "omega2", "X2"),
        ),
    ),
    (EquationClass.PARABOLIC, 0): (
        {"omega1": -1, "omega2": -1, "p12": -1, "p22": -1, "pi12": -2, "pi22": -2, "X1": -3, "X2": -3, "X0": -4},
        (
            ("p12", "omega2", "pi12"),
            ("p12", "omega1", "pi22"),
            ("p22", "omega2", "pi22"),
            ("pi12", "omega2", "X1"),
            ("pi12", "omega1", "X2"),
            ("pi22", "omega2", "X2"),
            ("X1", "omega1", "X0"),
            ("X2", "omega2", "X0"),
        ),
    ),
    (EquationClass.PARABOLIC, 1): (
        {"pi12": -1, "pi22": -1, "p11": -1, "p12": -1, "omega1": -2, "omega2": -2, "X1": -3, "X2": -3, "X0": -4},
        (
            ("p11", "pi12", "omega1"),
            ("p12", "pi22", "omega1"),
            ("p12", "pi12", "omega2"),
            ("pi12", "omega2", "X1"),
            ("pi12", "omega1", "X2"),
            ("pi22", "omega2", "X2"),
            ("X1", "pi12", "X0"),
        ),
    ),
    (EquationClass.PARABOLIC, 2): (
        {"pi12": -1, "pi22": -1, "p11": -1, "p12": -1, "omega1": -2, "omega2": -2, "X1": -3, "X2": -3, "X0": -4},
        (
            ("p11", "pi12", "omega1"),
            ("p12", "pi22", "omega1"),
            ("p12", "pi12", "omega2"),
            ("pi12", "omega2", "X1"),
            ("pi12", "omega1", "X2"),
            ("pi22", "omega2", "X2"),
        ),
    ),
    (EquationClass.ELLIPTIC, 0): (
        {"omega1": -1, "omega2": -1, "p11": -1, "p12": -1, "pi11": -2, "pi12": -2, "X1": -3, "X2": -3, "X0": -4},
        (
            ("p11", "omega1", "pi11"),
            ("p12", "omega2", "pi11"),
            ("p12", "omega1", "pi12"),
            ("omega2", "p11", "pi12"),
            ("pi11", "omega1", "X1"),
            ("pi12", "omega2", "X1"),
            ("pi12", "omega1", "X2"),
            ("omega2", "pi11", "X2"),
            ("X1", "omega1", "X0"),
            ("X2", "omega2", "X0"),
        ),
    ),
    (EquationClass.ELLIPTIC, 2): (
        {"pi11": -1, "pi12": -1, "p11": -1, "p12": -1, "omega1": -2, "omega2": -2, "X1": -3, "X2": -3, "X0": -4},
        (
            ("p11", "pi11", "omega1"),
            ("p12", "pi12", "omega1"),
            ("p12", "pi11", "omega2"),
            ("pi12", "p11", "omega2"),
            ("pi11", "omega1", "X1"),
            ("pi12", "omega2", "X1"),
            ("pi12", "omega1", "X2"),
            ("omega2", "pi11", "X2"),
        ),
    ),
}


def reference_symbol(kind: EquationClass, stratum: int) -> GradedSymbol:
    key = (EquationClass(kind), int(stratum))
    if key not in _REFERENCES:
        raise ChartError(f"no reference symbol m{int(stratum)} for class {EquationClass(kind).value}")
    grading, brackets = _REFERENCES[key]
    labels = tuple(sorted(grading, key=lambda label: -grading[label]))
    size = len(labels)
    constants = np.zeros((size, size, size))
    for left, right, result in brackets:
        a, b, c = labels.index(left), labels.index(right), labels.index(result)
        constants[c, a, b] = 1.0
        constants[c, b, a] = -1.0
    return GradedSymbol(labels, tuple(grading[label] for label in labels), constants)


@dataclass(frozen=True)
class SymbolCheck:
    name: str
    expected: object
    actual: object

    @property
    def passed(self) -> bool:
        return self.expected == self.actual


@dataclass(frozen=True)
class SymbolComparison:
    reference: str
    checks: tuple[SymbolCheck, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


def compare_symbol(symbol: GradedSymbol, kind: EquationClass, stratum: int) -> SymbolComparison:
    """Signature by signature comparison with the reference symbol m_stratum."""
    reference = reference_symbol(kind, stratum)
    name = f"{EquationClass(kind).value}:m{int(stratum)}"
    expected, actual = reference.fingerprint().checks(), symbol.fingerprint().checks()
    if expected["graded_dims"] != actual["graded_dims"]:
        return SymbolComparison(name, (SymbolCheck("graded_dims", expected["graded_dims"], actual["graded_dims"]),))
    return SymbolComparison(name, tuple(SymbolCheck(key, expected[key], actual[key]) for key in expected))
