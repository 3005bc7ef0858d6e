import numpy as np
import pytest

from toeplitz_fr.toeplitz import BlockToeplitz, ToeplitzMatrix, pure_toeplitz


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


def random_unitary(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_psd_toeplitz(rng, n, atoms=None):
    atoms = atoms or n + 1
    c = np.zeros(2 * n - 1, dtype=complex)
    for _ in range(atoms):
        c += rng.uniform(0.1, 1.0) * pure_toeplitz(n, np.exp(2j * np.pi * rng.random())).coeffs
    return ToeplitzMatrix(n, c)


def random_shifted_block(rng, n, m):
    """Random Hermitian block-Toeplitz matrix shifted by 1.1 |min eig| I."""
    b = rng.normal(size=(2 * n - 1, m, m)) + 1j * rng.normal(size=(2 * n - 1, m, m))
    b = (b + b[::-1].conj().transpose(0, 2, 1)) / 2
    lo = np.linalg.eigvalsh(BlockToeplitz(n, b).dense())[0]
    b[n - 1] += 1.1 * abs(lo) * np.eye(m)
    return BlockToeplitz(n, b)


ACCEPTANCE_LINES = []


def record_criterion(label, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
