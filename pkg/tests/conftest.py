import numpy as np
import pytest

from flowindex.sympcore import SymplecticSpace


def random_hermitian(rng, n, scale=1.0):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * 0.5 * (a + a.conj().T)


def random_unitary(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_gram(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return a @ a.conj().T / n + np.eye(n)


def random_form(rng, n):
    """Non-degenerate skew-Hermitian ``Omega`` with balanced signature of ``i Omega``."""
    k = n // 2
    P = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) + 2 * np.eye(n)
    D = np.diag([1.0] * k + [-1.0] * (n - k))
    return P.conj().T @ (1j * D) @ P


def random_space(rng, n):
    G = random_gram(rng, n)
    omega = random_form(rng, n)
    return SymplecticSpace(G, np.linalg.solve(G, omega))


def omega_defect(space, frame):
    """``max |q_i^H (G J) q_j|`` over an orthonormal basis of the span."""
    q, _ = np.linalg.qr(frame)
    return float(np.abs(q.conj().T @ (space.gram @ space.J) @ q).max())


@pytest.fixture
def rng():
    return np.random.default_rng(20240521)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
