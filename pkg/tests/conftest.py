import pytest

from tdpi.resonance import tune_to_resonance


@pytest.fixture(scope="session")
def square_cert():
    return tune_to_resonance("square_well")


@pytest.fixture(scope="session")
def bump_cert():
    return tune_to_resonance("smooth_bump")
