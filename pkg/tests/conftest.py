import json
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from newton_graphs.corpus import g2, torus_rose
from newton_graphs.elliptic import Lattice, ZeroPoleData, canonical

DATA = Path(__file__).parent / "data"

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

TAU = 0.3 + 1.0j


def load(name):
    return json.loads((DATA / name).read_text())


@pytest.fixture
def G2():
    return g2()


@pytest.fixture
def rose():
    return torus_rose()


@pytest.fixture(scope="session")
def lattice():
    return Lattice.from_tau(TAU)


@pytest.fixture(scope="session")
def f2(lattice):
    return canonical(ZeroPoleData((0.25, 0.5 + 0.75 * TAU), (0.5, None)), lattice)
