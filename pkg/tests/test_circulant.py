import numpy as np
import pytest

from conftest import random_hermitian
from toeplitz_fr.circulant import (
    GeneralizedCirculant,
    circulant_corner_test,
    circulant_eigenvalues,
    circulant_expectation,
    circulant_from_spectrum,
    circulant_spectrum,
    diagonalize_circulant,
    u_theta,
)
from toeplitz_fr.errors import DimensionMismatch, NotUnitModulus
from toeplitz_fr.numerics import psd_check
from toeplitz_fr.toeplitz import averaging_projection


def test_u_theta_examples():
    assert np.array_equal(u_theta(2, 0).dense().real, [[0, 1], [1, 0]])
    shift = u_theta(3, 0).dense().real
    assert np.array_equal(shift, np.roll(np.eye(3), 1, axis=0))
    for theta in (0.0, np.pi, 1.3):
        u = u_theta(3, theta).dense()
        assert np.allclose(u.conj().T @ u, np.eye(3))
        assert np.allclose(np.linalg.matrix_power(u, 3), np.exp(1j * theta) * np.eye(3))


def test_corner_entry_carries_the_twist():
    g = GeneralizedCirculant(3, 0.4, [1, 2, 3]).dense()
    assert np.isclose(g[0, 2], 2 * np.exp(0.4j))  # alpha_1 e^{i theta}
    assert np.isclose(g[0, 1], 3 * np.exp(0.4j))  # alpha_{n-1} e^{i theta}
    assert np.isclose(g[2, 0], 3)


def test_diagonalization(rng):
    for n, theta in [(2, 0.0), (3, np.pi), (5, 0.7)]:
        v, omega = diagonalize_circulant(n, theta)
        assert np.allclose(v.conj().T @ v, np.eye(n))
        d = v.conj().T @ u_theta(n, theta).dense() @ v
        assert np.linalg.norm(d - np.diag(np.diag(d))) < 1e-10
        assert np.allclose(omega ** n, np.exp(1j * theta))
        for _ in range(20):
            g = GeneralizedCirculant(n, theta, rng.normal(size=n) + 1j * rng.normal(size=n)).dense()
            d = v.conj().T @ g @ v
            assert np.linalg.norm(d - np.diag(np.diag(d))) < 1e-10


def test_hadamard_basis_for_n2():
    v, _ = diagonalize_circulant(2, 0.0)
    assert np.allclose(np.abs(v), np.full((2, 2), 1 / np.sqrt(2)))


def test_expectation_two_by_two_closed_form():
    a, b, c, d = 1.0, 2.0 + 1j, 3.0, 4.0
    f = circulant_expectation(np.array([[a, b], [c, d]]), 0.0)
    assert np.allclose(f.poly_coeffs, [(a + d) / 2, (b + c) / 2])


def test_expectation_is_idempotent_and_cp(rng):
    for theta in (0.0, 0.9):
        for _ in range(100):
            x = random_hermitian(rng, 4) + 1j * 0
            f = circulant_expectation(x, theta)
            again = circulant_expectation(f.dense(), theta)
            assert np.linalg.norm(again.dense() - f.dense()) <= 1e-10
            a = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
            assert psd_check(circulant_expectation(a @ a.conj().T, theta).dense()).passes
    # Choi block of the map on 2 x 2 matrices
    units = [np.eye(2)[:, [i]] @ np.eye(2)[[j], :] for i in range(2) for j in range(2)]
    choi = sum(np.kron(e, circulant_expectation(e, 0.0).dense()) for e in units)
    assert psd_check(choi).passes


def test_expectation_composed_with_averaging(rng):
    for theta in (0.0, 1.1):
        for _ in range(20):
            x = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
            direct = circulant_expectation(x, theta).dense()
            via = circulant_expectation(averaging_projection(x).dense(), theta).dense()
            assert np.linalg.norm(direct - via) <= 1e-9


def test_positive_cone_is_simplicial(rng):
    for _ in range(20):
        spec = rng.uniform(0, 2, size=4)
        g = circulant_from_spectrum(4, 0.3, spec)
        assert np.allclose(np.sort(circulant_spectrum(g).real), np.sort(spec))
        v, omega = diagonalize_circulant(4, 0.3)
        atoms = sum(s * np.outer(v[:, k], v[:, k].conj()) for k, s in enumerate(spec))
        assert np.linalg.norm(atoms - g.dense()) <= 1e-10


def test_eigenvalues_are_phase_ordered():
    omega = circulant_eigenvalues(4, 0.8)
    assert np.all(np.diff(np.angle(omega) % (2 * np.pi)) > 0)
    assert np.isclose(np.angle(omega[0]), 0.2)


def test_corner_test_examples():
    assert circulant_corner_test(1, 3).feasible
    res = circulant_corner_test(np.exp(2j * np.pi / 3), 3)
    assert res.feasible
    corner = res.circulant.dense()[:2, :2]
    assert np.allclose(corner, [[1, np.exp(-2j * np.pi / 3)], [np.exp(2j * np.pi / 3), 1]])
    assert psd_check(res.circulant.dense()).passes
    res = circulant_corner_test(1j, 3)
    assert not res.feasible and res.lp.margin > 0


def test_corner_test_rejects_bad_input():
    with pytest.raises(NotUnitModulus):
        circulant_corner_test(0.5, 3)
    with pytest.raises(DimensionMismatch):
        circulant_corner_test(1, 2)


def test_json_round_trip():
    g = GeneralizedCirculant(3, 0.5, [1, 2j, 3])
    again = GeneralizedCirculant.from_json(g.to_json())
    assert np.array_equal(again.dense(), g.dense())
