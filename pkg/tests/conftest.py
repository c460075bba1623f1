import pytest

from geotax.core.rng import SeedSpec, rng_create


@pytest.fixture
def rng():
    return rng_create(SeedSpec(320, "tests"))


def random_embedding(rng, n, d):
    return rng.standard_normal((n, d))
