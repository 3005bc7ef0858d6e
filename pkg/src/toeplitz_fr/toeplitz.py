"""Toeplitz matrices, their positive cone and block-Toeplitz elements.

A Toeplitz matrix of size n is stored by its 2n-1 diagonal values
``tau_l`` for ``l = -n+1 .. n-1``; ``tau_l`` sits on the l-th subdiagonal,
so the dense entry ``(i, j)`` equals ``tau_{i-j}``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import jsonio
from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    InputFormatError,
    NotPositive,
    NotUnitModulus,
)
from .numerics import as_complex_matrix, psd_check

UNIT_TOL = 1e-10
HERMITIAN_TOL = 1e-12


def check_unit(z: complex, tol: float = UNIT_TOL) -> complex:
    z = complex(z)
    if abs(abs(z) - 1.0) > tol:
        raise NotUnitModulus(f"|{z}| = {abs(z)} is not 1")
    return z


@dataclass(frozen=True, eq=False)
class ToeplitzMatrix:
    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        if self.n < 1 or c.size != 2 * self.n - 1:
            raise DimensionMismatch(f"n={self.n} needs {2 * self.n - 1} coefficients, got {c.size}")
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite Toeplitz coefficient")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def coeff(self, ell: int) -> complex:
        if abs(ell) > self.n - 1:
            raise IndexOutOfRange(f"l={ell} outside -{self.n - 1}..{self.n - 1}")
        return complex(self.coeffs[ell + self.n - 1])

    @property
    def is_hermitian(self) -> bool:
        c = self.coeffs
        return bool(np.all(np.abs(c - c[::-1].conj()) <= HERMITIAN_TOL * max(1.0, np.abs(c).max())))

    def dense(self) -> np.ndarray:
        i = np.arange(self.n)
        return self.coeffs[i[:, None] - i[None, :] + self.n - 1].copy()

    @classmethod
    def from_dense(cls, x, tol: float = 1e-12) -> "ToeplitzMatrix":
        """Read the diagonals of a dense matrix that is already Toeplitz."""
        x = as_complex_matrix(x)
        n = x.shape[0]
        if x.shape != (n, n):
            raise DimensionMismatch("Toeplitz matrices are square")
        t = averaging_projection(x)
        if np.linalg.norm(t.dense() - x) > tol * max(1.0, np.linalg.norm(x)):
            raise ValueError("matrix is not Toeplitz")
        return t

    def __add__(self, other: "ToeplitzMatrix") -> "ToeplitzMatrix":
        if other.n != self.n:
            raise DimensionMismatch("sizes differ")
        return ToeplitzMatrix(self.n, self.coeffs + other.coeffs)

    def __mul__(self, scalar) -> "ToeplitzMatrix":
        return ToeplitzMatrix(self.n, self.coeffs * complex(scalar))

    __rmul__ = __mul__

    def to_json(self) -> dict:
        return {"n": self.n, "coeffs": jsonio.encode_complex_array(self.coeffs)}

    @classmethod
    def from_json(cls, doc) -> "ToeplitzMatrix":
        n = jsonio.require(doc, "n", int)
        coeffs = jsonio.decode_complex_array(jsonio.require(doc, "coeffs", list), 1)
        if n < 1 or coeffs.size != 2 * n - 1:
            raise InputFormatError(f"n={n} needs {2 * n - 1} coefficients")
        return cls(n, coeffs)


@dataclass(frozen=True, eq=False)
class BlockToeplitz:
    """``sum_l r_l (x) a_l`` with m x m blocks ``a_l`` for ``l = -n+1 .. n-1``.

    The dense form is the block matrix whose ``(i, j)`` block is ``a_{i-j}``.
    """

    n: int
    blocks: np.ndarray

    def __post_init__(self):
        b = np.array(self.blocks, dtype=complex)
        if b.ndim != 3 or b.shape[0] != 2 * self.n - 1 or b.shape[1] != b.shape[2]:
            raise DimensionMismatch(f"blocks must have shape (2n-1, m, m); got {b.shape}")
        if not np.all(np.isfinite(b)):
            raise ValueError("non-finite block entry")
        b.setflags(write=False)
        object.__setattr__(self, "blocks", b)

    @property
    def m(self) -> int:
        return self.blocks.shape[1]

    def block(self, ell: int) -> np.ndarray:
        if abs(ell) > self.n - 1:
            raise IndexOutOfRange(f"l={ell} outside -{self.n - 1}..{self.n - 1}")
        return self.blocks[ell + self.n - 1]

    def hermitian_defect(self) -> float:
        b = self.blocks
        return float(np.linalg.norm(b - b[::-1].conj().transpose(0, 2, 1)))

    @property
    def is_hermitian(self) -> bool:
        return self.hermitian_defect() <= HERMITIAN_TOL * max(1.0, float(np.linalg.norm(self.blocks)))

    def dense(self) -> np.ndarray:
        n, m = self.n, self.m
        i = np.arange(n)
        grid = self.blocks[i[:, None] - i[None, :] + n - 1]  # (n, n, m, m)
        return grid.transpose(0, 2, 1, 3).reshape(n * m, n * m)

    @classmethod
    def from_dense(cls, x, n: int, tol: float = 1e-12) -> "BlockToeplitz":
        """Average the block diagonals of a dense ``nm x nm`` matrix.

        Raises ValueError if the result differs from ``x`` by more than
        ``tol`` (relative), i.e. if ``x`` is not block Toeplitz.
        """
        x = as_complex_matrix(x)
        if x.shape[0] % n or x.shape[0] != x.shape[1]:
            raise DimensionMismatch(f"{x.shape} is not a square multiple of n={n}")
        m = x.shape[0] // n
        grid = x.reshape(n, m, n, m).transpose(0, 2, 1, 3)
        blocks = np.zeros((2 * n - 1, m, m), dtype=complex)
        for ell in range(-n + 1, n):
            idx = np.arange(max(0, ell), min(n, n + ell))
            blocks[ell + n - 1] = grid[idx, idx - ell].mean(axis=0)
        out = cls(n, blocks)
        if np.linalg.norm(out.dense() - x) > tol * max(1.0, np.linalg.norm(x)):
            raise ValueError("matrix is not block Toeplitz")
        return out

    @classmethod
    def from_toeplitz_coeffs(cls, coeffs, n: int, m: int) -> "BlockToeplitz":
        """Element ``sum_{l,k} coeffs[l, k] r_l (x) r_k`` of Toeplitz (x) Toeplitz."""
        c = np.asarray(coeffs, dtype=complex)
        if c.shape != (2 * n - 1, 2 * m - 1):
            raise DimensionMismatch(f"coefficient array must be {(2 * n - 1, 2 * m - 1)}")
        blocks = np.array([ToeplitzMatrix(m, row).dense() for row in c])
        return cls(n, blocks)

    def toeplitz_coeffs(self, tol: float = 1e-9) -> np.ndarray:
        """Inverse of :meth:`from_toeplitz_coeffs`; blocks must be Toeplitz."""
        m = self.m
        rows = []
        for blk in self.blocks:
            t = averaging_projection(blk)
            if np.linalg.norm(t.dense() - blk) > tol * max(1.0, float(np.linalg.norm(blk))):
                raise ValueError("blocks are not Toeplitz")
            rows.append(t.coeffs)
        return np.array(rows).reshape(2 * self.n - 1, 2 * m - 1)

    def to_json(self) -> dict:
        return {"n": self.n, "m": self.m, "blocks": jsonio.encode_complex_array(self.blocks)}

    @classmethod
    def from_json(cls, doc) -> "BlockToeplitz":
        n = jsonio.require(doc, "n", int)
        m = jsonio.require(doc, "m", int)
        blocks = jsonio.decode_complex_array(jsonio.require(doc, "blocks", list), 3)
        if n < 1 or m < 1 or blocks.shape != (2 * n - 1, m, m):
            raise InputFormatError(f"blocks must have shape {(2 * n - 1, m, m)}")
        return cls(n, blocks)


@dataclass(frozen=True)
class CaratheodoryDecomposition:
    atoms: list  # (unit-modulus point, weight >= 0)
    residual: float

    def reconstruct(self, n: int) -> ToeplitzMatrix:
        c = np.zeros(2 * n - 1, dtype=complex)
        for lam, w in self.atoms:
            c += w * pure_toeplitz(n, lam).coeffs
        return ToeplitzMatrix(n, c)

    def to_json(self) -> dict:
        return {
            "atoms": [{"point": [lam.real, lam.imag], "weight": w} for lam, w in self.atoms],
            "residual": self.residual,
        }


@dataclass(frozen=True)
class ProductDecomposition:
    """``sum_j w_j T_n(lam_j) (x) T_m(mu_j)`` with nonnegative weights."""

    n: int
    m: int
    atoms: list  # (weight, lam, mu)
    residual: float
    tolerance: float = 0.0
    meta: dict = field(default_factory=dict)

    def coefficient_array(self) -> np.ndarray:
        c = np.zeros((2 * self.n - 1, 2 * self.m - 1), dtype=complex)
        ln = np.arange(-self.n + 1, self.n)
        lm = np.arange(-self.m + 1, self.m)
        for w, lam, mu in self.atoms:
            c += w * np.outer(lam ** ln, mu ** lm)
        return c

    def reconstruct(self) -> BlockToeplitz:
        return BlockToeplitz.from_toeplitz_coeffs(self.coefficient_array(), self.n, self.m)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "atoms": [
                {"weight": float(w), "lambda": [lam.real, lam.imag], "mu": [mu.real, mu.imag]}
                for w, lam, mu in self.atoms
            ],
            "residual": self.residual,
            "tolerance": self.tolerance,
        }


def r_basis(n: int, ell: int) -> ToeplitzMatrix:
    """Canonical basis element: 1 on the ell-th subdiagonal, 0 elsewhere."""
    if n < 1 or abs(ell) > n - 1:
        raise IndexOutOfRange(f"l={ell} outside -{n - 1}..{n - 1}")
    c = np.zeros(2 * n - 1, dtype=complex)
    c[ell + n - 1] = 1.0
    return ToeplitzMatrix(n, c)


def pure_toeplitz(n: int, lam: complex) -> ToeplitzMatrix:
    """T_n(lam): the rank-one positive Toeplitz matrix with ``tau_l = lam**l``."""
    lam = check_unit(lam)
    ell = np.arange(-n + 1, n)
    return ToeplitzMatrix(n, lam ** ell)


def averaging_projection(x) -> ToeplitzMatrix:
    """Replace every diagonal of a square matrix by its mean."""
    x = as_complex_matrix(x)
    n = x.shape[0]
    if x.shape != (n, n):
        raise DimensionMismatch("input must be square")
    c = np.array([np.diagonal(x, offset=-ell).mean() for ell in range(-n + 1, n)])
    return ToeplitzMatrix(n, c)


def _merge_atoms(points, weights, arc: float = 1e-7):
    merged: list[list] = []
    for lam, w in sorted(zip(points, weights), key=lambda p: np.angle(p[0])):
        for item in merged:
            if abs(np.angle(lam / item[0])) <= arc:
                total = item[1] + w
                if total > 0:
                    item[0] = (item[0] * item[1] + lam * w) / total
                    item[0] /= abs(item[0])
                item[1] = total
                break
        else:
            merged.append([lam, w])
    return [(complex(lam), float(w)) for lam, w in merged if w > 0]


def caratheodory_decompose(t: ToeplitzMatrix, tol: float = 1e-9) -> CaratheodoryDecomposition:
    """Write a positive Toeplitz matrix as ``sum_j w_j T_n(lam_j)``.

    Runs the Gurvits decomposition with 1 x 1 blocks; at most ``rank(t)``
    atoms are produced.  Points closer than 1e-7 in arc length are merged.
    """
    from .separability import gurvits_decompose

    if not t.is_hermitian:
        raise NotPositive("Toeplitz matrix is not Hermitian")
    if t.n == 1:
        w = t.coeffs[0].real
        if w < -tol:
            raise NotPositive(f"negative 1x1 matrix {w}")
        atoms = [(1 + 0j, float(w))] if w > 0 else []
        return CaratheodoryDecomposition(atoms, 0.0)
    sep = gurvits_decompose(BlockToeplitz(t.n, t.coeffs[:, None, None]), tol)
    atoms = _merge_atoms([lam for lam, _ in sep.atoms], [b[0, 0].real for _, b in sep.atoms])
    rec = np.zeros(2 * t.n - 1, dtype=complex)
    for lam, w in atoms:
        rec += w * pure_toeplitz(t.n, lam).coeffs
    residual = float(np.linalg.norm(ToeplitzMatrix(t.n, rec).dense() - t.dense()))
    return CaratheodoryDecomposition(atoms, residual)


def conv_hull_membership(xi, tol: float = 1e-9) -> tuple[bool, Optional[CaratheodoryDecomposition]]:
    """Is ``xi`` a convex combination of points ``(lam, lam**2, ..., lam**(n-1))``?

    Decided by positivity of the Toeplitz matrix with unit diagonal and
    ``xi`` down the first column.  Members come with convex weights.
    """
    xi = np.asarray(xi, dtype=complex).ravel()
    n = xi.size + 1
    coeffs = np.concatenate([xi[::-1].conj(), [1.0], xi])
    t = ToeplitzMatrix(n, coeffs)
    if not psd_check(t.dense(), tol).passes:
        return False, None
    return True, caratheodory_decompose(t, tol)


def conv_hull_matrix(xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=complex).ravel()
    return ToeplitzMatrix(xi.size + 1, np.concatenate([xi[::-1].conj(), [1.0], xi])).dense()


def r_matrix(n: int) -> BlockToeplitz:
    """R_n = sum_l r_l (x) r_l."""
    if n < 2:
        raise DimensionMismatch("R_n needs n >= 2")
    return BlockToeplitz(n, np.array([r_basis(n, ell).dense() for ell in range(-n + 1, n)]))


def smallest_prime_above(k: int) -> int:
    q = k + 1
    while q < 2 or any(q % d == 0 for d in range(2, int(q ** 0.5) + 1)):
        q += 1
    return q


def r_n_separable_decomposition(n: int) -> ProductDecomposition:
    """Separable decomposition of R_n over the q-th roots of unity.

    q is the smallest prime exceeding 2n and the atoms are
    ``(1/q) T_n(lam**j) (x) T_n(lam**-j)`` for ``j = 1..q`` with
    ``lam = exp(2 pi i / q)``.
    """
    if n < 2:
        raise DimensionMismatch("R_n needs n >= 2")
    q = smallest_prime_above(2 * n)
    lam = np.exp(2j * np.pi / q)
    atoms = []
    for j in range(1, q + 1):
        # Reduce the exponent mod q so that each point is computed directly.
        p = np.exp(2j * np.pi * (j % q) / q)
        atoms.append((1.0 / q, complex(p), complex(p.conjugate())))
    dec = ProductDecomposition(n, n, atoms, residual=0.0, meta={"q": q, "root": complex(lam)})
    residual = float(np.linalg.norm(dec.reconstruct().dense() - r_matrix(n).dense()))
    return ProductDecomposition(n, n, atoms, residual=residual, meta={"q": q, "root": complex(lam)})


def product_atom(n: int, m: int, lam: complex, mu: complex) -> np.ndarray:
    """Dense ``T_n(lam) (x) T_m(mu)``."""
    return np.kron(pure_toeplitz(n, lam).dense(), pure_toeplitz(m, mu).dense())
