"""Constructive separability for positive block-Toeplitz matrices.

The core routine follows Gurvits' argument: factor ``x = y y*``, observe
that the upper and lower row-blocks of ``y`` have equal Gram matrices, find
the unitary ``w`` linking them, and read the atoms off the spectral
projections of ``w``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import jsonio
from .circulant import circulant_expectation
from .errors import (
    BlocksNotCirculant,
    BlockStructureViolated,
    DimensionMismatch,
    GramMismatch,
    NotPositive,
)
from .numerics import (
    hermitian_eigendecompose,
    procrustes_unitary,
    psd_check,
    solve_conic_lp,
    unitary_eigendecompose,
)
from .toeplitz import (
    BlockToeplitz,
    ProductDecomposition,
    ToeplitzMatrix,
    averaging_projection,
    pure_toeplitz,
)

RANK_RTOL = 1e-9
GRAM_RTOL = 1e-6
SNAP_LIMIT = 1e-6


@dataclass(frozen=True)
class SeparableDecomposition:
    n: int
    m: int
    atoms: list  # (unit-modulus lam, PSD m x m matrix b)
    residual: float
    verified: bool
    tolerance: float
    rank: int = 0

    def reconstruct(self) -> BlockToeplitz:
        ell = np.arange(-self.n + 1, self.n)
        blocks = np.zeros((2 * self.n - 1, self.m, self.m), dtype=complex)
        for lam, b in self.atoms:
            blocks += (lam ** ell)[:, None, None] * b[None]
        return BlockToeplitz(self.n, blocks)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "atoms": [
                {"lambda": [lam.real, lam.imag], "b": jsonio.encode_complex_array(b)}
                for lam, b in self.atoms
            ],
            "residual": self.residual,
            "verified": self.verified,
            "tolerance": self.tolerance,
        }


def hermitian_coordinates(c) -> np.ndarray:
    """Real coordinates of a conjugate-centrosymmetric coefficient array.

    For arrays with ``c[-i] = conj(c[i])`` (flattened, indices mirrored
    about the centre) the map is an isometry onto R^N: the centre entry's
    real part, then ``sqrt(2)`` times real and imaginary parts of the upper
    half.
    """
    v = np.asarray(c, dtype=complex).ravel()
    h = v.size // 2
    upper = v[h + 1:]
    return np.concatenate([[v[h].real], np.sqrt(2) * upper.real, np.sqrt(2) * upper.imag])


def from_hermitian_coordinates(coords, shape) -> np.ndarray:
    coords = np.asarray(coords, dtype=float)
    size = int(np.prod(shape))
    h = size // 2
    upper = (coords[1:1 + h] + 1j * coords[1 + h:]) / np.sqrt(2)
    v = np.concatenate([upper[::-1].conj(), [coords[0]], upper])
    return v.reshape(shape)


def douglas_unitary(x, y, tol: float = 1e-9) -> np.ndarray:
    """Unitary ``w`` with ``y = x w`` when ``x x* = y y*``.

    The least-squares (Procrustes) solution is returned; it is exact when
    the Gram matrices agree.
    """
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if x.shape != y.shape:
        raise DimensionMismatch(f"{x.shape} vs {y.shape}")
    gx = x @ x.conj().T
    gap = float(np.linalg.norm(y @ y.conj().T - gx))
    if gap > tol * max(1.0, float(np.linalg.norm(gx))):
        raise GramMismatch(f"||yy* - xx*||_F = {gap:.3e}")
    w = _douglas_by_qr(x, y)
    if w is not None:
        return w
    return procrustes_unitary(x, y)


def _douglas_by_qr(x: np.ndarray, y: np.ndarray) -> Optional[np.ndarray]:
    """Fast path for full row rank: ``x* = q1 r`` and ``y* = q2 r`` share ``r``.

    Equal Grams fix the triangular factor up to diagonal phases, so
    ``w = q1 q2*`` on the full square bases.  Returns None when the rows are
    nearly dependent or the result does not reproduce ``y``.
    """
    k, r = x.shape
    if k > r:
        return None
    q1, r1 = np.linalg.qr(x.conj().T, mode="complete")
    q2, r2 = np.linalg.qr(y.conj().T, mode="complete")
    d1, d2 = np.diag(r1[:k]), np.diag(r2[:k])
    if min(np.min(np.abs(d1)), np.min(np.abs(d2))) <= 1e-6 * max(np.max(np.abs(d1)), 1e-300):
        return None
    q1[:, :k] *= d1 / np.abs(d1)
    q2[:, :k] *= d2 / np.abs(d2)
    w = q1 @ q2.conj().T
    if np.linalg.norm(x @ w - y) > 1e-9 * max(1.0, float(np.linalg.norm(y))):
        return None
    return w


def gurvits_decompose(x: BlockToeplitz, tol: float = 1e-9) -> SeparableDecomposition:
    """Separable decomposition ``x = sum_j T_n(lam_j) (x) b_j`` of a PSD block-Toeplitz matrix.

    Parameters
    ----------
    x : BlockToeplitz
        Hermitian, positive semidefinite, with m x m blocks.
    tol : float
        PSD tolerance for the input and for the atoms; the decomposition is
        marked verified when its residual is at most ``tol * max(1, ||x||_F)``
        and every atom passes ``psd_check`` at ``tol``.

    Returns
    -------
    SeparableDecomposition
        At most ``rank(x)`` atoms.  ``verified`` is False, rather than an
        exception being raised, when the eigenvalues of the linking unitary
        drift more than 1e-6 from the circle or the residual is too large.
    """
    n, m = x.n, x.m
    scale = max(1.0, float(np.linalg.norm(x.blocks)))
    if x.hermitian_defect() > max(tol, 1e-12) * scale:
        raise BlockStructureViolated(f"a_(-l) != a_l* (defect {x.hermitian_defect():.3e})")
    dense = x.dense()
    dense = 0.5 * (dense + dense.conj().T)
    eig = hermitian_eigendecompose(dense)
    if eig.eigenvalues[0] < -tol:
        raise NotPositive(f"minimum eigenvalue {eig.eigenvalues[0]:.3e} < -{tol:g}")
    top = float(eig.eigenvalues[-1])
    if top <= 0.0:
        return SeparableDecomposition(n, m, [], 0.0, True, tol, 0)
    keep = eig.eigenvalues > RANK_RTOL * top
    rank = int(np.count_nonzero(keep))
    y = eig.vectors[:, keep] * np.sqrt(eig.eigenvalues[keep])
    y0 = y[:m]
    if n == 1:
        atoms = [(1 + 0j, y0 @ y0.conj().T)]
        return _finish(x, atoms, tol, rank, snapped=0.0)
    w = douglas_unitary(y[: (n - 1) * m], y[m:], GRAM_RTOL)
    lams, bases = unitary_eigendecompose(w)
    drift = float(np.max(np.abs(np.abs(lams) - 1.0)))
    atoms = []
    for lam, vecs in zip(lams, bases):
        z = y0 @ vecs
        atoms.append((complex(lam / abs(lam)), z @ z.conj().T))
    return _finish(x, atoms, tol, rank, snapped=drift)


def _finish(x: BlockToeplitz, atoms, tol, rank, snapped) -> SeparableDecomposition:
    dec = SeparableDecomposition(x.n, x.m, atoms, 0.0, False, tol, rank)
    residual = float(np.linalg.norm(dec.reconstruct().dense() - x.dense()))
    scale = max(1.0, float(np.linalg.norm(x.dense())))
    ok = residual <= tol * scale and snapped <= SNAP_LIMIT
    ok = ok and all(psd_check(0.5 * (b + b.conj().T), tol).passes for _, b in atoms)
    return SeparableDecomposition(x.n, x.m, atoms, residual, bool(ok), tol, rank)


def _two_by_two_block(a: ToeplitzMatrix, c: ToeplitzMatrix) -> np.ndarray:
    """Coefficients ``coef[s, k]`` of ``[[a, c*], [c, a]] = sum r_s (x) r_k`` (s in -1, 0, 1)."""
    if a.n != c.n:
        raise DimensionMismatch("a and c must have the same size")
    c_star = c.coeffs[::-1].conj()
    return np.stack([c_star, a.coeffs, c.coeffs])


def separate_2xN(a: ToeplitzMatrix, c: ToeplitzMatrix, tol: float = 1e-9) -> ProductDecomposition:
    """Write ``[[a, c*], [c, a]]`` as ``sum_j w_j T_2(lam_j) (x) T_n(mu_j)``.

    The 2 x 2 factor is moved inside (tensor-factor swap), Gurvits'
    decomposition gives ``sum T_n(mu_j) (x) c_j``, each ``c_j`` is averaged
    onto 2 x 2 Toeplitz form and split into at most three pure atoms.
    """
    coef = _two_by_two_block(a, c)
    n = a.n
    dense = BlockToeplitz.from_toeplitz_coeffs(coef, 2, n).dense()
    if not psd_check(0.5 * (dense + dense.conj().T), tol).passes:
        raise NotPositive("[[a, c*], [c, a]] is not positive semidefinite")
    swapped = BlockToeplitz.from_toeplitz_coeffs(coef.T, n, 2)
    inner = gurvits_decompose(swapped, tol)
    atoms = []
    for mu, cj in inner.atoms:
        b = averaging_projection(cj)
        beta0 = float(b.coeff(0).real)
        beta1 = b.coeff(1)
        r = abs(beta1)
        if r > 0:
            atoms.append((r, complex(beta1 / r), mu))
        rest = max(beta0 - r, 0.0) / 2.0
        if rest > 0:
            atoms.append((rest, 1 + 0j, mu))
            atoms.append((rest, -1 + 0j, mu))
    dec = ProductDecomposition(2, n, atoms, 0.0, tol)
    residual = float(np.linalg.norm(dec.reconstruct().dense() - dense))
    return ProductDecomposition(2, n, atoms, residual, tol, {"gurvits_verified": inner.verified})


def toeplitz_circulant_separate(x: BlockToeplitz, theta: float, tol: float = 1e-9) -> SeparableDecomposition:
    """Separable decomposition whose matrix factors are positive generalised circulants."""
    for blk in x.blocks:
        proj = circulant_expectation(blk, theta).dense()
        if np.linalg.norm(proj - blk) > 1e-9 * max(1.0, float(np.linalg.norm(blk))):
            raise BlocksNotCirculant("a block is not in the circulant algebra for this theta")
    dec = gurvits_decompose(x, tol)
    atoms = [(lam, circulant_expectation(b, theta).dense()) for lam, b in dec.atoms]
    return _finish(x, atoms, tol, dec.rank, snapped=0.0 if dec.verified else np.inf)


def moment_extension(x0: ToeplitzMatrix, x1: ToeplitzMatrix, n: int, tol: float = 1e-9) -> BlockToeplitz:
    """Extend ``[[x0, x1*], [x1, x0]]`` to a positive n x n block-Toeplitz matrix with Toeplitz blocks."""
    if n < 2:
        raise DimensionMismatch("target degree must be at least 2")
    if not x0.is_hermitian:
        raise NotPositive("x0 must be Hermitian")
    dec = separate_2xN(x0, x1, tol)
    lifted = ProductDecomposition(n, x0.n, dec.atoms, 0.0, tol)
    return lifted.reconstruct()


@dataclass(frozen=True)
class MaxConeReport:
    status: str  # "feasible" | "unknown"
    decomposition: ProductDecomposition | None
    farkas: np.ndarray | None
    farkas_pairing: float
    grid: tuple

    def to_json(self) -> dict:
        out = {"status": self.status, "grid": list(self.grid)}
        if self.decomposition is not None:
            out["decomposition"] = self.decomposition.to_json()
        if self.farkas is not None:
            out["farkas"] = [float(v) for v in self.farkas]
            out["farkas_pairing"] = self.farkas_pairing
        return out


def product_grid_generators(n: int, m: int, lams, mus) -> np.ndarray:
    ln = np.arange(-n + 1, n)
    lm = np.arange(-m + 1, m)
    return np.array([hermitian_coordinates(np.outer(lam ** ln, mu ** lm)) for lam in lams for mu in mus])


def max_cone_membership(
    coeffs, n: int, m: int, grid=(24, 24), tol: float = 1e-9
) -> MaxConeReport:
    """Inner test for the separable (= max) cone of Toeplitz (x) Toeplitz.

    ``coeffs[l, k]`` are the coordinates of ``x = sum coeffs[l, k] r_l (x) r_k``.
    Feasibility of the grid LP certifies membership; infeasibility only
    reports ``unknown`` with the grid Farkas vector.
    """
    c = np.asarray(coeffs, dtype=complex)
    if c.shape != (2 * n - 1, 2 * m - 1):
        raise DimensionMismatch(f"expected coefficient array of shape {(2 * n - 1, 2 * m - 1)}")
    lams = np.exp(2j * np.pi * np.arange(grid[0]) / grid[0])
    mus = np.exp(2j * np.pi * np.arange(grid[1]) / grid[1])
    gens = product_grid_generators(n, m, lams, mus)
    target = hermitian_coordinates(c)
    out = solve_conic_lp(gens, target, tol=tol)
    if out.feasible:
        atoms = []
        for idx in np.flatnonzero(out.weights > 0):
            i, j = divmod(int(idx), grid[1])
            atoms.append((float(out.weights[idx]), complex(lams[i]), complex(mus[j])))
        dec = ProductDecomposition(n, m, atoms, out.residual, tol)
        return MaxConeReport("feasible", dec, None, 0.0, tuple(grid))
    return MaxConeReport("unknown", None, out.farkas, float(out.farkas @ target), tuple(grid))


def pure_product(n: int, m: int, lam: complex, mu: complex) -> np.ndarray:
    return np.outer(pure_toeplitz(n, lam).coeffs, pure_toeplitz(m, mu).coeffs)
