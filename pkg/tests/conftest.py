import pytest

from ecelgamal import curve as curve_mod
from ecelgamal.curve import get_curve


@pytest.fixture(scope="session")
def tiny():
    return get_curve("tiny23")


@pytest.fixture(scope="session")
def c256():
    return get_curve("secp256k1")


@pytest.fixture(scope="session")
def c192():
    return get_curve("secp192k1")


@pytest.fixture(scope="session")
def toy1009():
    """Toy curve big enough for 8-bit blocks at kappa=2.

    Generator and order were found by brute force: (1, 149) generates the
    whole group of 1034 points.
    """
    return curve_mod.CurveParams(1009, 1, 1, 1, 149, 1034, name="toy1009")


@pytest.fixture
def python_backend():
    """Force the pure-Python scalar-multiplication path for one test."""
    previous = curve_mod.set_backend("python")
    try:
        yield
    finally:
        curve_mod.set_backend(previous)


@pytest.fixture(autouse=True)
def _backend_isolation():
    """No test may leak a backend override into the rest of the session."""
    yield
    curve_mod.set_backend("auto")
