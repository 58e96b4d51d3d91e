import numpy as np
import pytest

from spindd import SpinSystem

DEFAULT_COUPLING_SCALE = 2 * np.pi * 1e3  # rad/s
DEFAULT_SEED = 11


@pytest.fixture
def sys4():
    """Reference test cluster: M=4, zero offsets, seeded couplings in +-2pi*1 kHz."""
    return SpinSystem.random(4, DEFAULT_COUPLING_SCALE, seed=DEFAULT_SEED)


@pytest.fixture
def sys2():
    return SpinSystem.random(2, DEFAULT_COUPLING_SCALE, seed=DEFAULT_SEED)


def random_state(sys, seed=0):
    """Seeded random Hermitian traceless deviation matrix, unit Frobenius norm."""
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((sys.dim, sys.dim)) + 1j * rng.standard_normal((sys.dim, sys.dim))
    h = (a + a.conj().T) / 2.0
    h -= np.trace(h) / sys.dim * np.eye(sys.dim)
    return h / np.linalg.norm(h)
