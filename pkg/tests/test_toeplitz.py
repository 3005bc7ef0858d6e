import numpy as np
import pytest

from conftest import random_psd_toeplitz
from toeplitz_fr.errors import IndexOutOfRange, InputFormatError, NotUnitModulus
from toeplitz_fr.numerics import psd_check
from toeplitz_fr.toeplitz import (
    BlockToeplitz,
    ToeplitzMatrix,
    averaging_projection,
    caratheodory_decompose,
    conv_hull_matrix,
    conv_hull_membership,
    pure_toeplitz,
    r_basis,
    r_matrix,
    r_n_separable_decomposition,
)


def test_dense_layout_follows_subdiagonal_convention():
    t = ToeplitzMatrix(3, [10, 20, 30, 40, 50])  # tau_-2 .. tau_2
    d = t.dense()
    assert d[0, 0] == 30 and d[1, 0] == 40 and d[2, 0] == 50
    assert d[0, 1] == 20 and d[0, 2] == 10


def test_r_basis_has_one_on_subdiagonal():
    assert np.array_equal(r_basis(3, 1).dense().real, np.eye(3, k=-1))
    assert np.array_equal(r_basis(3, -2).dense().real, np.eye(3, k=2))
    with pytest.raises(IndexOutOfRange):
        r_basis(3, 3)


def test_pure_toeplitz_is_rank_one_outer_product():
    lam = np.exp(0.7j)
    v = lam ** np.arange(4)
    assert np.allclose(pure_toeplitz(4, lam).dense(), np.outer(v, v.conj()))
    with pytest.raises(NotUnitModulus):
        pure_toeplitz(3, 1.1)


def test_hermitian_flag():
    assert ToeplitzMatrix(2, [1j, 2, -1j]).is_hermitian
    assert not ToeplitzMatrix(2, [1j, 2, 1j]).is_hermitian


def test_json_round_trip():
    t = ToeplitzMatrix(3, np.arange(5) + 1j)
    again = ToeplitzMatrix.from_json(t.to_json())
    assert np.array_equal(again.coeffs, t.coeffs)
    with pytest.raises(InputFormatError):
        ToeplitzMatrix.from_json({"n": 3, "coeffs": [[1, 0]]})
    b = BlockToeplitz(2, np.arange(12).reshape(3, 2, 2) * (1 + 1j))
    assert np.array_equal(BlockToeplitz.from_json(b.to_json()).blocks, b.blocks)


def test_averaging_projection_is_idempotent_and_positive(rng):
    for _ in range(20):
        a = rng.normal(size=(4, 3)) + 1j * rng.normal(size=(4, 3))
        x = a @ a.conj().T
        t = averaging_projection(x)
        assert np.allclose(averaging_projection(t.dense()).coeffs, t.coeffs)
        assert psd_check(t.dense()).passes


def test_block_dense_matches_kron_sum(rng):
    n, m = 3, 2
    blocks = rng.normal(size=(2 * n - 1, m, m))
    x = BlockToeplitz(n, blocks)
    ref = sum(np.kron(r_basis(n, ell).dense(), blocks[ell + n - 1]) for ell in range(-n + 1, n))
    assert np.allclose(x.dense(), ref)
    assert np.allclose(BlockToeplitz.from_dense(ref, n).blocks, blocks)


def test_caratheodory_examples():
    dec = caratheodory_decompose(pure_toeplitz(3, 1j))
    assert len(dec.atoms) == 1 and abs(dec.atoms[0][0] - 1j) < 1e-9 and abs(dec.atoms[0][1] - 1) < 1e-9
    # 2 I = T_2(lam) + T_2(-lam) for any lam; only the antipodal pair is forced
    dec = caratheodory_decompose(ToeplitzMatrix(2, [0, 2, 0]))
    (p, w), (q, v) = dec.atoms
    assert abs(p + q) < 1e-9 and abs(w - 1) < 1e-9 and abs(v - 1) < 1e-9


def test_caratheodory_reconstructs_random(rng):
    for n in (2, 3, 5):
        for _ in range(10):
            t = random_psd_toeplitz(rng, n)
            dec = caratheodory_decompose(t)
            assert dec.residual <= 1e-9 * max(1, np.linalg.norm(t.dense()))
            assert len(dec.atoms) <= n
            assert all(w > 0 and abs(abs(lam) - 1) < 1e-12 for lam, w in dec.atoms)


def test_r_matrix_prime_root_decomposition():
    for n in range(2, 6):
        dec = r_n_separable_decomposition(n)
        assert dec.meta["q"] > 2 * n
        assert len(dec.atoms) == dec.meta["q"]
        assert dec.residual <= 1e-11
        assert np.allclose(dec.reconstruct().dense(), r_matrix(n).dense())


def test_conv_hull_membership():
    ok, dec = conv_hull_membership([0.0])
    assert ok and abs(sum(w for _, w in dec.atoms) - 1) < 1e-9
    ok, _ = conv_hull_membership([1.0, -1.0])
    assert not ok
    assert np.linalg.eigvalsh(conv_hull_matrix([1.0, -1.0]))[0] <= -0.5


def test_conv_hull_members_are_moment_averages(rng):
    for _ in range(20):
        pts = np.exp(2j * np.pi * rng.random(3))
        w = rng.dirichlet(np.ones(3))
        xi = [np.sum(w * pts ** k) for k in (1, 2)]
        ok, dec = conv_hull_membership(xi)
        assert ok
        rebuilt = [sum(wt * lam ** k for lam, wt in dec.atoms) for k in (1, 2)]
        assert np.allclose(rebuilt, xi, atol=1e-8)
