import pytest

from prolongkit.contact import J2, PdeSurface, induced_distribution
from prolongkit.exceptions import MeshError
from prolongkit.prolong.oracle import boundary_tetrahedra, fiber_sampler_oracle
from prolongkit.prolong.plucker import TopologyLabel, fiber_topology, plucker_fiber

ORIGIN = dict.fromkeys(J2.names, 0.0)


def test_boundary_of_the_cube_is_a_sphere():
    tetrahedra = boundary_tetrahedra(2)
    # 8 facets of 4^3 cubes, 6 tetrahedra each
    assert tetrahedra.shape == (8 * 64 * 6, 4)


def test_torus_fiber_mesh(wave_sample):
    report = fiber_sampler_oracle(plucker_fiber(wave_sample), 100_000)
    assert report.euler_characteristic == pytest.approx(0.0, abs=0.1)
    assert report.components == 1


def test_sphere_fiber_mesh(laplace_sample):
    report = fiber_sampler_oracle(plucker_fiber(laplace_sample), 100_000)
    assert report.euler_characteristic == pytest.approx(2.0, abs=0.1)
    assert report.components == 1


def test_pinched_torus_has_a_rank_drop(heat_sample):
    report = fiber_sampler_oracle(plucker_fiber(heat_sample), 100_000)
    assert report.rank_drop_candidates >= 1


@pytest.mark.parametrize(
    "text, label, euler",
    [
        ("s", TopologyLabel.TORUS, 0.0),
        ("r - t", TopologyLabel.TORUS, 0.0),
        ("s + x", TopologyLabel.TORUS, 0.0),
        ("r + t", TopologyLabel.SPHERE, 2.0),
        ("r + t + x", TopologyLabel.SPHERE, 2.0),
        ("r + t + q", TopologyLabel.SPHERE, 2.0),
        ("r", TopologyLabel.PINCHED_TORUS, None),
        ("t", TopologyLabel.PINCHED_TORUS, None),
        ("r + x", TopologyLabel.PINCHED_TORUS, None),
    ],
)
def test_mesh_counts_the_singular_points(text, label, euler):
    fiber = plucker_fiber(induced_distribution(PdeSurface.from_text(text), ORIGIN))
    topology = fiber_topology(fiber)
    report = fiber_sampler_oracle(fiber, 100_000)
    assert topology.label is label
    assert report.rank_drop_candidates == topology.singular_count
    if euler is not None:
        assert report.euler_characteristic == pytest.approx(euler, abs=0.1)
        assert report.components == 1


def test_too_few_samples(wave_sample):
    with pytest.raises(MeshError):
        fiber_sampler_oracle(plucker_fiber(wave_sample), 100)
