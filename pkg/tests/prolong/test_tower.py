import numpy as np
import pytest

from prolongkit.contact import DistributionType, EquationClass, PdeSurface, induced_distribution, rank4_type
from prolongkit.exceptions import (
    EmptyChartError,
    NonIntegralPlaneError,
    NormalFormError,
    RejectionError,
    SingularPointError,
)
from prolongkit.prolong import Stratum, plucker_fiber, prolong_rank4, prolong_tower
from prolongkit.prolong.charts import chart_defining_functions
from prolongkit.prolong.tower import locate_fiber_point
from tests.conftest import model_point

ZEROS = {"p11": 0.0, "p12": 0.0, "p21": 0.0, "p22": 0.0}
TYPES = {
    "hyperbolic": DistributionType.HYPERBOLIC,
    "parabolic": DistributionType.PARABOLIC,
    "elliptic": DistributionType.ELLIPTIC,
}
KINDS = {
    "hyperbolic": EquationClass.HYPERBOLIC,
    "parabolic": EquationClass.PARABOLIC,
    "elliptic": EquationClass.ELLIPTIC,
}


def test_origin_of_chart_i_is_generic(model_sample):
    point = locate_fiber_point(model_sample, "I", ZEROS)
    assert point.stratum is Stratum.SIGMA_0
    assert point.chart.numeral == "I"
    assert plucker_fiber(model_sample).residual(point.plane) < 1e-9


def test_origin_of_chart_vi_is_vertical(model_sample):
    point = locate_fiber_point(model_sample, "VI", ZEROS)
    assert point.stratum is Stratum.SIGMA_2


@pytest.mark.parametrize(
    "sample_name, coordinates",
    [("wave_sample", {"p11": 1.0, "p22": 0.0}), ("heat_sample", {"p11": 1.0, "p12": 0.0})],
)
def test_chart_vi_meets_the_middle_stratum(sample_name, coordinates, request):
    sample = request.getfixturevalue(sample_name)
    assert locate_fiber_point(sample, "VI", coordinates).stratum is Stratum.SIGMA_1


def test_non_graph_chart_moves_to_a_graph_chart(wave_sample):
    point = locate_fiber_point(wave_sample, "III", {"p11": 0.0, "p12": 0.25, "p21": 0.5, "p22": 0.0})
    assert point.chart.numeral == "I"
    assert point.coordinates["p11"] == pytest.approx(0.5)
    assert point.coordinates["p22"] == pytest.approx(4.0)
    assert point.kind is EquationClass.HYPERBOLIC


def test_empty_chart(wave_sample):
    with pytest.raises(EmptyChartError):
        locate_fiber_point(wave_sample, "II", {"p11": 0.0, "p12": 0.0, "p21": 0.0, "p22": 0.0})


def test_point_off_the_chart_equations(wave_sample):
    with pytest.raises(NonIntegralPlaneError):
        locate_fiber_point(wave_sample, "III", {"p11": 1.0, "p12": 0.0, "p21": 0.0, "p22": 0.0})


def test_singular_point_of_the_parabolic_fiber(heat_sample):
    with pytest.raises(SingularPointError) as error:
        locate_fiber_point(heat_sample, "III", {"p11": 0.0, "p12": 0.0, "p21": 0.0, "p22": 0.0})
    assert error.value.exit_code == 2


def test_prolongation_keeps_the_type(model_kind, model_sample, rng):
    prolonged = prolong_rank4(model_sample, "I", ZEROS, rng=rng)
    assert prolonged.system.level == 1
    assert prolonged.system.dimension == 9
    assert prolonged.rank == 4
    assert rank4_type(prolonged).label is TYPES[model_kind]
    assert prolonged.lift.stratum is Stratum.SIGMA_0


def test_prolongation_names_the_new_coordinates(wave_sample, rng):
    prolonged = prolong_rank4(wave_sample, "I", {"p11": 0.5, "p22": -1.0}, rng=rng)
    assert prolonged.chart.names[-2:] == ("p11", "p22")
    assert prolonged.point["p11"] == 0.5
    assert prolonged.system.labels[-2:] == ("varpi_pi11", "varpi_pi22")


def test_tower(model_kind, model_sample, rng):
    steps = prolong_tower(model_sample, depth=2, rng=rng)
    assert [step.level for step in steps] == [0, 1, 2]
    assert [step.dimension for step in steps] == [7, 9, 11]
    assert all(step.rank == 4 for step in steps)
    assert all(step.label is TYPES[model_kind] for step in steps)
    assert steps[0].chart is None
    assert steps[1].chart == "I"
    assert steps[2].stratum == 0


def test_tower_coordinates_are_reused_at_every_stage(wave_sample, rng):
    steps = prolong_tower(wave_sample, depth=2, coordinates={"p11": 0.1, "p22": 0.2}, rng=rng)
    assert steps[2].coordinates == (("p11", 0.1), ("p22", 0.2))


def test_varying_structure_equations_are_rejected():
    surface = PdeSurface.from_text("r*t - s^2 - 1")
    point = {"x": 0.0, "y": 0.0, "z": 0.0, "p": 0.0, "q": 0.0, "r": 1.0, "s": 0.0, "t": 1.0}
    sample = induced_distribution(surface, point)
    with pytest.raises(NormalFormError) as error:
        prolong_rank4(sample, "I", ZEROS, rng=np.random.default_rng(3))
    assert isinstance(error.value, RejectionError)


def test_prolongation_keeps_the_type_at_random_fiber_points(model_kind, model_surface):
    rng = np.random.default_rng(11)
    free = chart_defining_functions(KINDS[model_kind], "I").graph.free
    for _ in range(20):
        sample = induced_distribution(model_surface, model_point(model_kind, rng))
        for level in (1, 2):
            coordinates = {name: float(rng.uniform(-1, 1)) for name in free}
            sample = prolong_rank4(sample, "I", coordinates, rng=rng)
            assert sample.system.level == level
            assert sample.system.dimension == 7 + 2 * level
            assert sample.rank == 4
            assert rank4_type(sample).label is TYPES[model_kind]
            assert sample.lift.stratum is Stratum.SIGMA_0
