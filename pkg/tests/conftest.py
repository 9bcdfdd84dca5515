import pytest
from sympy import Symbol

from redmod.jet import JetContext, U, jet_symbol


@pytest.fixture
def heat_ctx():
    """Coordinates (t, x1) with `x` as an alias of x1."""
    return JetContext(n=2, time_alias=True)


@pytest.fixture
def ctx1():
    return JetContext(n=1)


@pytest.fixture
def ctx2():
    return JetContext(n=2)


@pytest.fixture
def ctx3():
    return JetContext(n=3, r=3)


@pytest.fixture
def x():
    """Coordinate symbols by name."""
    return {name: Symbol(name) for name in ("t", "x1", "x2", "x3")}


@pytest.fixture
def jet():
    """`jet(1, 0)` is the symbol `u[1,0]`."""
    def make(*entries):
        return jet_symbol(entries) if any(entries) else U
    return make
