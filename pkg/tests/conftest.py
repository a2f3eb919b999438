import random

import numpy as np
import pytest
from faker import Faker

from prolongkit.contact import J2, DistributionSample, PdeSurface, induced_distribution

ORIGIN = dict.fromkeys(J2.names, 0.0)
MODELS = {"hyperbolic": "s", "parabolic": "r", "elliptic": "r + t"}


@pytest.fixture(scope="session")
def faker_locale() -> list[str]:
    """
    Configure Faker to use correct locale.

    Returns:
        List[str]:
    """
    return ["en"]


@pytest.fixture(scope="session")
def faker_seed() -> int:
    """
    Configure Faker to use correct seed.

    Returns:
        int:
    """
    return random.randint(1, 10000)


@pytest.fixture(scope="session")
def session_faker(faker_locale: list[str], faker_seed: int) -> Faker:
    """
    Configure session lvl Faker to use correct seed and locale.

    Args:
        faker_locale: List[str]
        faker_seed: int

    Returns:
        Faker:
    """
    instance = Faker(locale=faker_locale)
    instance.seed_instance(seed=faker_seed)

    return instance


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(42)


@pytest.fixture
def origin() -> dict[str, float]:
    return dict(ORIGIN)


def model_point(kind: str, rng: np.random.Generator) -> dict[str, float]:
    """Random point of a model equation, with the solved coordinate set to 0 or -t."""
    point = {name: float(rng.uniform(-1, 1)) for name in J2.names}
    if kind == "hyperbolic":
        point["s"] = 0.0
    elif kind == "parabolic":
        point["r"] = 0.0
    else:
        point["r"] = -point["t"]
    return point


@pytest.fixture(params=sorted(MODELS))
def model_kind(request) -> str:
    return request.param


@pytest.fixture
def model_surface(model_kind: str) -> PdeSurface:
    return PdeSurface.from_text(MODELS[model_kind], name=model_kind)


@pytest.fixture
def model_sample(model_surface: PdeSurface) -> DistributionSample:
    return induced_distribution(model_surface, ORIGIN)


@pytest.fixture
def wave_sample() -> DistributionSample:
    return induced_distribution(PdeSurface.from_text("s"), ORIGIN)


@pytest.fixture
def heat_sample() -> DistributionSample:
    return induced_distribution(PdeSurface.from_text("r"), ORIGIN)


@pytest.fixture
def laplace_sample() -> DistributionSample:
    return induced_distribution(PdeSurface.from_text("r + t"), ORIGIN)
