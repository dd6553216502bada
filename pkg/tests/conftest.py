import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_hermitian(rng, n, scale=1.0):
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (x + x.conj().T)


def random_matrix(rng, n, scale=1.0):
    return scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))


def random_unitary(rng, n):
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(x)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def hermitian_with_spectrum(rng, eigenvalues):
    """Random Hermitian with exactly the given spectrum."""
    n = len(eigenvalues)
    u = random_unitary(rng, n)
    return (u * np.asarray(eigenvalues, dtype=float)) @ u.conj().T


def power_iteration_norm(m, iterations=500, seed=0):
    """Independent operator-norm oracle: power iteration on m* m."""
    gen = np.random.default_rng(seed)
    g = m.conj().T @ m
    v = gen.standard_normal(g.shape[0]) + 1j * gen.standard_normal(g.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iterations):
        w = g @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        lam = norm
    return float(np.sqrt(lam))
