import numpy as np
import pytest

from semical import build_domain


# Domains are immutable and cache their LU factorization, so share them
# across the whole session.
@pytest.fixture(scope="session")
def square32():
    return build_domain("square", 32)


@pytest.fixture(scope="session")
def square64():
    return build_domain("square", 64)


@pytest.fixture(scope="session")
def square128():
    return build_domain("square", 128)


@pytest.fixture(scope="session")
def disk32():
    return build_domain("disk", 32)


@pytest.fixture(scope="session")
def disk64():
    return build_domain("disk", 64)


@pytest.fixture(scope="session")
def disk128():
    return build_domain("disk", 128)


@pytest.fixture(scope="session")
def domains(square32, square64, square128, disk32, disk64, disk128):
    return {
        ("square", 32): square32,
        ("square", 64): square64,
        ("square", 128): square128,
        ("disk", 32): disk32,
        ("disk", 64): disk64,
        ("disk", 128): disk128,
    }


def smooth_bump(param, lo, hi):
    """Compactly supported smooth bump on (lo, hi) with peak 1."""
    u = (2.0 * np.asarray(param) - lo - hi) / (hi - lo)
    out = np.zeros_like(u, dtype=float)
    inside = np.abs(u) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
    return out
