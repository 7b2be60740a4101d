import numpy as np
import pytest

from qproc import DensityOperator, HermitianOperator, PureState


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_hermitian(rng, dim, scale=1.0):
    raw = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return HermitianOperator(scale * 0.5 * (raw + raw.conj().T))


def random_pure_state(rng, dim):
    amps = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return PureState(amps / np.linalg.norm(amps))


def random_density(rng, dim, full_rank=True):
    raw = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = raw @ raw.conj().T
    if full_rank:
        rho += 0.1 * np.eye(dim)
    return DensityOperator(rho / np.real(np.trace(rho)))


def random_traceless_hermitian(rng, dim, scale=1.0):
    op = random_hermitian(rng, dim, scale).entries
    op = op - np.eye(dim) * np.trace(op) / dim
    return HermitianOperator(op)
