import pytest

from ordersep.groupcore import cyclic_group, validate_group
from ordersep.words import FactorSpec, Factors, NormalForm, finite_factors


@pytest.fixture(scope="session")
def z2():
    return cyclic_group(2)


@pytest.fixture(scope="session")
def z3():
    return cyclic_group(3)


@pytest.fixture(scope="session")
def z6():
    return cyclic_group(6)


@pytest.fixture(scope="session")
def klein():
    return validate_group([[i ^ j for j in range(4)] for i in range(4)])


@pytest.fixture(scope="session")
def f23(z2, z3):
    """Factors of the free product of cyclic groups of orders 2 and 3."""
    return finite_factors(z2, z3)


@pytest.fixture(scope="session")
def zxz():
    return Factors((FactorSpec("infinite_cyclic"), FactorSpec("infinite_cyclic")))


def word(*syllables):
    return NormalForm(tuple(syllables))


@pytest.fixture(scope="session")
def w():
    """Shorthand word builder: w((0,1),(1,1)) is the word a*b."""
    return word
