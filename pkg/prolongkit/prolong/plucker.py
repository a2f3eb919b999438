"""
Integral 2-planes of a rank 4 distribution in Plucker coordinates.

A 2-plane of D(w) with basis (u, v) is the bivector u ^ v with coordinates
xi_ij = u_i v_j - u_j v_i ordered as PAIRS. Integral planes are the
decomposable bivectors annihilated by every d(varpi_i); after solving the
linear conditions they form a quadric Q in projective 3-space.
"""

from dataclasses import dataclass
from enum import IntEnum, StrEnum

import numpy as np
from loguru import logger

from prolongkit.constants import RANK_TOL
from prolongkit.contact import DistributionSample
from prolongkit.exceptions import DegeneratePencilError, MeshError, NonIntegralPlaneError
from prolongkit.linalg import null_space, rank, threshold

PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))

# Klein quadric xi01 xi23 - xi02 xi13 + xi03 xi12 as a symmetric form
KLEIN = np.zeros((6, 6))
for _first, _second, _sign in ((0, 5, 1.0), (1, 4, -1.0), (2, 3, 1.0)):
    KLEIN[_first, _second] = KLEIN[_second, _first] = _sign / 2


def bivector(plane: np.ndarray) -> np.ndarray:
    u, v = plane[:, 0], plane[:, 1]
    return np.array([u[i] * v[j] - u[j] * v[i] for i, j in PAIRS])


def bivector_matrix(xi: np.ndarray) -> np.ndarray:
    matrix = np.zeros((4, 4))
    for value, (i, j) in zip(xi, PAIRS, strict=True):
        matrix[i, j], matrix[j, i] = value, -value
    return matrix


def plane_from_bivector(xi: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the plane of a decomposable bivector."""
    left, _, _ = np.linalg.svd(bivector_matrix(xi))
    return left[:, :2]


def integrability_rows(sample: DistributionSample) -> np.ndarray:
    return np.array([[matrix[i, j] for i, j in PAIRS] for matrix in sample.derivatives])


@dataclass(frozen=True, eq=False)
class PluckerFiber:
    """
    Fiber of Sigma(R) over a point, as the quadric ``y^T Q y = 0``.

    ``kernel`` (6 x 4) spans the bivectors satisfying the linear
    integrability conditions; ``quadric`` is the Klein form on it.
    """

    sample: DistributionSample
    conditions: np.ndarray
    kernel: np.ndarray
    quadric: np.ndarray

    def bivector(self, y: np.ndarray) -> np.ndarray:
        return self.kernel @ np.asarray(y, dtype=float)

    def plane(self, y: np.ndarray) -> np.ndarray:
        return plane_from_bivector(self.bivector(y))

    def value(self, y: np.ndarray) -> float:
        y = np.asarray(y, dtype=float)
        return float(y @ self.quadric @ y)

    def residual(self, plane: np.ndarray) -> float:
        """Largest integrability defect of a plane, normalized."""
        orthonormal, _ = np.linalg.qr(np.asarray(plane, dtype=float))
        xi = bivector(orthonormal)
        return float(np.abs(self.conditions @ xi).max())

    def sample_points(self, count: int, rng: np.random.Generator, attempts: int = 100) -> list[np.ndarray]:
        """Unit points of the quadric, from random lines through the 4-space."""
        points: list[np.ndarray] = []
        for _ in range(attempts * count):
            if len(points) >= count:
                break
            y, z = rng.standard_normal(4), rng.standard_normal(4)
            a, b, c = z @ self.quadric @ z, 2 * y @ self.quadric @ z, y @ self.quadric @ y
            discriminant = b * b - 4 * a * c
            if discriminant < 0 or abs(a) < 1e-12:
                continue
            root = (-b + np.sqrt(discriminant)) / (2 * a)
            point = y + root * z
            points.append(point / np.linalg.norm(point))
        if len(points) < count:
            raise MeshError("the fiber quadric has no real points")
        return points


def plucker_fiber(sample: DistributionSample, tol: float = RANK_TOL) -> PluckerFiber:
    if sample.rank != 4:
        raise DegeneratePencilError(f"the distribution has rank {sample.rank}, not 4")
    conditions = integrability_rows(sample)
    independent = rank(conditions, tol)
    if independent != 2:
        raise DegeneratePencilError(f"expected 2 independent integrability conditions, found {independent}")
    kernel = null_space(conditions, tol)
    quadric = kernel.T @ KLEIN @ kernel
    return PluckerFiber(sample, conditions, kernel, (quadric + quadric.T) / 2)


class TopologyLabel(StrEnum):
    TORUS = "Torus"
    PINCHED_TORUS = "PinchedTorus"
    SPHERE = "Sphere"
    OTHER = "Other"


@dataclass(frozen=True, eq=False)
class FiberTopology:
    signature: tuple[int, int, int]
    label: TopologyLabel
    eigenvalues: np.ndarray
    singular_planes: tuple[np.ndarray, ...] = ()
    diagnostics: str = ""

    @property
    def singular_count(self) -> int:
        return len(self.singular_planes)


def fiber_topology(fiber: PluckerFiber, tol: float = RANK_TOL) -> FiberTopology:
    """Topology of the fiber from the inertia of its quadric."""
    eigenvalues, vectors = np.linalg.eigh(fiber.quadric)
    limit = threshold(np.abs(eigenvalues), tol)
    positive = int(np.sum(eigenvalues > limit))
    negative = int(np.sum(eigenvalues < -limit))
    signature = (positive, negative, 4 - positive - negative)

    singular: tuple[np.ndarray, ...] = ()
    diagnostics = ""
    if signature == (2, 2, 0):
        label = TopologyLabel.TORUS
    elif signature in {(3, 1, 0), (1, 3, 0)}:
        label = TopologyLabel.SPHERE
    elif signature in {(2, 1, 1), (1, 2, 1)}:
        label = TopologyLabel.PINCHED_TORUS
        singular = (fiber.plane(vectors[:, int(np.argmin(np.abs(eigenvalues)))]),)
    else:
        label = TopologyLabel.OTHER
        diagnostics = f"quadric of signature {signature} with eigenvalues {np.round(eigenvalues, 12).tolist()}"
        logger.warning("Unexpected fiber quadric signature {signature}", signature=signature)
    return FiberTopology(signature, label, eigenvalues, singular, diagnostics)


class Stratum(IntEnum):
    """Corank of the base projection restricted to an integral plane."""

    SIGMA_0 = 0
    SIGMA_1 = 1
    SIGMA_2 = 2


def stratify(sample: DistributionSample, plane: np.ndarray, tol: float = RANK_TOL) -> Stratum:
    """
    Stratum of an integral plane, given in sample basis coordinates.

    The plane must be integral: every d(varpi_i) vanishes on it.
    """
    plane = np.asarray(plane, dtype=float).reshape(sample.rank, 2)
    if rank(plane, tol) < 2:
        raise NonIntegralPlaneError("the plane is spanned by dependent vectors")
    orthonormal, _ = np.linalg.qr(plane)
    u, v = orthonormal[:, 0], orthonormal[:, 1]
    defect = max((abs(float(u @ matrix @ v)) for matrix in sample.derivatives), default=0.0)
    scale = max((float(np.abs(matrix).max()) for matrix in sample.derivatives), default=1.0)
    if defect > 1e3 * tol * max(1.0, scale):
        raise NonIntegralPlaneError(f"the plane is not integral, defect {defect:.3e}")
    projection = sample.projection()
    if projection is None:
        raise NonIntegralPlaneError("the system has no base projection")
    return Stratum(2 - rank(projection @ orthonormal, tol))
