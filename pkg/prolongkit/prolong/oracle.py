"""
Mesh based topology check of a fiber quadric, independent of its inertia.

The unit sphere of the 4-space is replaced by the boundary of the cube
[-n, n]^4, triangulated by Kuhn tetrahedra on a unit lattice. Marching
tetrahedra extracts the zero set of the quadric as a closed triangle mesh;
the antipodal map acts freely on it, so the projective fiber has half the
Euler characteristic of the mesh.
"""

import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np
from loguru import logger
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from prolongkit.constants import ORACLE_MIN_SAMPLES, ORACLE_SAMPLES
from prolongkit.exceptions import MeshError
from prolongkit.prolong.plucker import PluckerFiber

Triangle = tuple[tuple[int, int], tuple[int, int], tuple[int, int]]


def _marching_cases() -> dict[int, list[Triangle]]:
    cases: dict[int, list[Triangle]] = {}
    for mask in range(16):
        positive = [i for i in range(4) if mask >> i & 1]
        negative = [i for i in range(4) if not mask >> i & 1]
        if len(positive) in (1, 3):
            alone = positive[0] if len(positive) == 1 else negative[0]
            rest = [i for i in range(4) if i != alone]
            cases[mask] = [((alone, rest[0]), (alone, rest[1]), (alone, rest[2]))]
        elif len(positive) == 2:
            (a, b), (c, d) = positive, negative
            cases[mask] = [((a, c), (a, d), (b, d)), ((a, c), (b, d), (b, c))]
    return cases


_CASES = _marching_cases()


@dataclass(frozen=True)
class OracleReport:
    lattice: int
    tetrahedra: int
    vertices: int
    edges: int
    faces: int
    cover_euler_characteristic: int
    euler_characteristic: float
    components: int
    rank_drop_candidates: int


def _lattice_index(coordinates: np.ndarray, n: int) -> np.ndarray:
    width = 2 * n + 1
    return ((coordinates + n) * width ** np.arange(4)).sum(axis=1)


def _lattice_coordinates(index: np.ndarray, n: int) -> np.ndarray:
    width = 2 * n + 1
    return np.stack([(index // width**d) % width - n for d in range(4)], axis=1)


def boundary_tetrahedra(n: int) -> np.ndarray:
    """Kuhn tetrahedra of the boundary of [-n, n]^4, as lattice indices (T x 4)."""
    side = np.arange(-n, n)
    bases = np.stack(np.meshgrid(side, side, side, indexing="ij"), axis=-1).reshape(-1, 3)
    blocks = []
    for axis in range(4):
        free = [a for a in range(4) if a != axis]
        for sign in (-1, 1):
            start = np.zeros((len(bases), 4), dtype=np.int64)
            start[:, free] = bases
            start[:, axis] = sign * n
            for order in permutations(range(3)):
                current = start.copy()
                vertices = [_lattice_index(current, n)]
                for step in order:
                    current[:, free[step]] += 1
                    vertices.append(_lattice_index(current, n))
                blocks.append(np.stack(vertices, axis=1))
    return np.concatenate(blocks)


def _edge_keys(first: np.ndarray, second: np.ndarray, total: int) -> np.ndarray:
    return np.minimum(first, second) * total + np.maximum(first, second)


def fiber_sampler_oracle(fiber: PluckerFiber, samples: int = ORACLE_SAMPLES) -> OracleReport:
    if samples < ORACLE_MIN_SAMPLES:
        raise MeshError(f"at least {ORACLE_MIN_SAMPLES} lattice samples are required, got {samples}")
    quadric = fiber.quadric / np.linalg.norm(fiber.quadric, 2)
    n = math.ceil((samples / 64) ** (1 / 3))
    total = (2 * n + 1) ** 4

    tetrahedra = boundary_tetrahedra(n)
    lattice = np.unique(tetrahedra)
    points = _lattice_coordinates(lattice, n).astype(float)
    values = np.einsum("ni,ij,nj->n", points, quadric, points)
    positive = values[np.searchsorted(lattice, tetrahedra)] >= 0
    masks = (positive * np.array([1, 2, 4, 8])).sum(axis=1)

    pieces = []
    for mask, triangles in _CASES.items():
        selected = tetrahedra[masks == mask]
        if not len(selected):
            continue
        for triangle in triangles:
            keys = [_edge_keys(selected[:, i], selected[:, j], total) for i, j in triangle]
            pieces.append(np.stack(keys, axis=1))
    if not pieces:
        raise MeshError("the quadric does not vanish on the sampled sphere")
    keys, inverse = np.unique(np.concatenate(pieces), return_inverse=True)
    faces = inverse.reshape(-1, 3)
    edges = np.unique(
        np.sort(np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]]), axis=1),
        axis=0,
    )
    cover_chi = len(keys) - len(edges) + len(faces)

    graph = coo_matrix((np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(len(keys), len(keys)))
    _, labels = connected_components(graph, directed=False)
    low, high = np.divmod(keys, total)
    antipodal = (total - 1 - high) * total + (total - 1 - low)
    partner = np.searchsorted(keys, antipodal)
    if np.any(partner >= len(keys)) or np.any(keys[np.minimum(partner, len(keys) - 1)] != antipodal):
        raise MeshError("the mesh is not antipodally symmetric")
    orbits = len(np.unique(np.minimum(labels, labels[partner])))

    unit = points / np.linalg.norm(points, axis=1, keepdims=True)
    gradient = np.linalg.norm(unit @ quadric, axis=1)
    level = np.abs(np.einsum("ni,ij,nj->n", unit, quadric, unit))
    candidates = unit[(gradient <= 2 / n) & (level <= 4 / n**2)]
    clusters = 0
    if len(candidates):
        pairs = cKDTree(candidates).query_pairs(3 / n, output_type="ndarray")
        adjacency = coo_matrix(
            (np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])) if len(pairs) else ([], ([], [])),
            shape=(len(candidates), len(candidates)),
        )
        clusters, _ = connected_components(adjacency, directed=False)

    report = OracleReport(
        lattice=n,
        tetrahedra=len(tetrahedra),
        vertices=len(keys),
        edges=len(edges),
        faces=len(faces),
        cover_euler_characteristic=int(cover_chi),
        euler_characteristic=cover_chi / 2,
        components=orbits,
        rank_drop_candidates=math.ceil(clusters / 2),
    )
    logger.bind(payload=report.__dict__).debug("Fiber mesh built")
    return report
