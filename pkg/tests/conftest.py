import numpy as np
import pytest

from seqpt import build_design, builtin_channel


@pytest.fixture(scope="session")
def design1():
    return build_design(1)


@pytest.fixture(scope="session")
def design2():
    return build_design(2)


@pytest.fixture(scope="session")
def design3():
    return build_design(3)


@pytest.fixture(scope="session")
def uc_channel():
    return builtin_channel("controlled_uc")


@pytest.fixture(scope="session")
def identity2():
    return builtin_channel("identity", {"n": 2})


def random_unitary(d, rng):
    """Haar-ish unitary via QR of a complex Gaussian matrix."""
    mat = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(mat)
    return q * (np.diag(r) / np.abs(np.diag(r)))
