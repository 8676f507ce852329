import pytest

from helpers import affine_system, quadratic_system


@pytest.fixture(scope="session")
def affine():
    return affine_system()


@pytest.fixture(scope="session")
def quadratic():
    return quadratic_system()
