import numpy as np
import pytest

from conftest import random_hermitian, random_psd_toeplitz, random_shifted_block
from toeplitz_fr.circulant import circulant_expectation, circulant_from_spectrum
from toeplitz_fr.errors import (
    BlocksNotCirculant,
    BlockStructureViolated,
    GramMismatch,
    NotPositive,
)
from toeplitz_fr.numerics import psd_check
from toeplitz_fr.separability import (
    douglas_unitary,
    from_hermitian_coordinates,
    gurvits_decompose,
    hermitian_coordinates,
    max_cone_membership,
    moment_extension,
    pure_product,
    separate_2xN,
    toeplitz_circulant_separate,
)
from toeplitz_fr.toeplitz import BlockToeplitz, ToeplitzMatrix, pure_toeplitz


def product_block(n, lam, b):
    ell = np.arange(-n + 1, n)
    return BlockToeplitz(n, (lam ** ell)[:, None, None] * np.asarray(b, dtype=complex)[None])


def test_hermitian_coordinates_isometry(rng):
    c = rng.normal(size=(3, 5)) + 1j * rng.normal(size=(3, 5))
    c = (c + c[::-1, ::-1].conj()) / 2
    d = rng.normal(size=(3, 5)) + 1j * rng.normal(size=(3, 5))
    d = (d + d[::-1, ::-1].conj()) / 2
    assert np.allclose(from_hermitian_coordinates(hermitian_coordinates(c), c.shape), c)
    inner = np.sum(c.conj() * d).real
    assert abs(hermitian_coordinates(c) @ hermitian_coordinates(d) - inner) < 1e-12


def test_douglas_unitary(rng):
    x = rng.normal(size=(3, 5)) + 1j * rng.normal(size=(3, 5))
    q, _ = np.linalg.qr(rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)))
    w = douglas_unitary(x, x @ q)
    assert np.allclose(x @ w, x @ q) and np.allclose(w @ w.conj().T, np.eye(5))
    low = np.outer([1, 2, 3], [1, 1j, 0, 0, 1])
    assert np.allclose(low @ douglas_unitary(low, low @ q), low @ q)
    with pytest.raises(GramMismatch):
        douglas_unitary(x, 2 * x)


def test_gurvits_single_atom():
    lam = np.exp(0.7j)
    b = np.array([[2, 1j], [-1j, 1]])
    dec = gurvits_decompose(product_block(3, lam, b))
    assert dec.verified and len(dec.atoms) == 1
    got_lam, got_b = dec.atoms[0]
    assert abs(got_lam - lam) < 1e-9 and np.allclose(got_b, b, atol=1e-9)


def test_gurvits_identity():
    dec = gurvits_decompose(BlockToeplitz(3, np.array([np.zeros((2, 2))] * 2 + [np.eye(2)] + [np.zeros((2, 2))] * 2)))
    assert dec.verified
    assert np.allclose(dec.reconstruct().dense(), np.eye(6), atol=1e-9)


def test_gurvits_zero_matrix():
    dec = gurvits_decompose(BlockToeplitz(2, np.zeros((3, 2, 2))))
    assert dec.verified and dec.atoms == []


def test_gurvits_random(rng):
    for n, m in [(2, 2), (3, 2), (2, 3), (4, 3), (3, 4)]:
        for _ in range(10):
            x = random_shifted_block(rng, n, m)
            dec = gurvits_decompose(x)
            assert dec.verified, (n, m, dec.residual)
            assert len(dec.atoms) <= n * m
            assert all(abs(abs(lam) - 1) < 1e-12 for lam, _ in dec.atoms)


def test_gurvits_low_rank(rng):
    for _ in range(10):
        x = product_block(3, np.exp(2j * np.pi * rng.random()), np.eye(2))
        x = BlockToeplitz(3, x.blocks + product_block(3, np.exp(2j * np.pi * rng.random()), [[1, 1], [1, 1]]).blocks)
        dec = gurvits_decompose(x)
        assert dec.verified and dec.rank == 3


def test_gurvits_rejects_bad_input():
    with pytest.raises(NotPositive):
        gurvits_decompose(BlockToeplitz(2, np.array([np.zeros((1, 1)), -np.eye(1), np.zeros((1, 1))])))
    with pytest.raises(BlockStructureViolated):
        gurvits_decompose(BlockToeplitz(2, np.array([np.eye(1), 2 * np.eye(1), 3 * np.eye(1)])))


def test_separate_2xN_random(rng):
    for n in (2, 3, 4):
        for _ in range(10):
            a = random_psd_toeplitz(rng, n)
            # c = a scaled and twisted keeps [[a, c*], [c, a]] positive
            c = ToeplitzMatrix(n, 0.5 * np.exp(1j * rng.random()) * a.coeffs)
            dec = separate_2xN(a, c)
            assert dec.residual <= 1e-9 * max(1, np.linalg.norm(a.dense()))
            assert all(w >= 0 for w, _, _ in dec.atoms)


def test_separate_2xN_rejects_indefinite():
    a = ToeplitzMatrix(2, [0, 1, 0])
    with pytest.raises(NotPositive):
        separate_2xN(a, ToeplitzMatrix(2, [0, 2, 0]))


def test_moment_extension(rng):
    for n in (2, 3):
        a = random_psd_toeplitz(rng, n)
        c = ToeplitzMatrix(n, 0.6 * a.coeffs)
        ext = moment_extension(a, c, 5)
        assert psd_check(ext.dense()).passes
        assert np.allclose(ext.block(0), a.dense()) and np.allclose(ext.block(1), c.dense())


def test_circulant_separation(rng):
    theta = 0.9
    m = 3
    blocks = np.zeros((5, m, m), dtype=complex)
    for _ in range(3):
        circ = circulant_from_spectrum(m, theta, rng.uniform(0, 1, m)).dense()
        blocks += product_block(3, np.exp(2j * np.pi * rng.random()), circ).blocks
    x = BlockToeplitz(3, blocks)
    dec = toeplitz_circulant_separate(x, theta)
    assert dec.verified
    for _, b in dec.atoms:
        assert np.allclose(circulant_expectation(b, theta).dense(), b)
        assert psd_check(b, 1e-9).passes


def test_circulant_separation_rejects_general_blocks(rng):
    b = random_hermitian(rng, 3) + 5 * np.eye(3)
    with pytest.raises(BlocksNotCirculant):
        toeplitz_circulant_separate(product_block(2, 1 + 0j, b), 0.3)


def test_max_cone_feasible_for_products():
    c = 0.5 * pure_product(2, 2, 1, 1j) + 0.5 * pure_product(2, 2, -1, np.exp(2j * np.pi / 24))
    rep = max_cone_membership(c, 2, 2)
    assert rep.status == "feasible"
    assert np.allclose(rep.decomposition.coefficient_array(), c, atol=1e-8)


def test_max_cone_unknown_outside_cone():
    c = np.zeros((3, 3), dtype=complex)
    c[1, 1] = 1
    c[0, 0] = c[2, 2] = 2  # off-diagonal blocks too large for positivity
    rep = max_cone_membership(c, 2, 2)
    assert rep.status == "unknown" and rep.farkas_pairing < 0
