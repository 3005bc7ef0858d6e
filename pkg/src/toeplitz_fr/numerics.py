"""Dense complex linear algebra and a small conic LP solver.

Everything here works on plain numpy arrays of modest size (at most a few
dozen rows).  The eigensolver is a cyclic Jacobi method, the root finder is
Durand-Kerner, and the LP solver is a dense two-phase tableau simplex using
Bland's rule so that certificates are reproducible.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DegenerateLeadingCoefficient,
    DimensionMismatch,
    NoConvergence,
    NonHermitian,
)

MAX_SWEEPS = 100
OFF_DIAGONAL_RTOL = 1e-13


@dataclass(frozen=True)
class HermitianEig:
    eigenvalues: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class PsdReport:
    min_eigenvalue: float
    passes: bool
    tolerance_used: float


@dataclass(frozen=True)
class ConicLpOutcome:
    """Result of :func:`solve_conic_lp`.

    Exactly one of ``weights`` and ``farkas`` is set.  ``residual`` is the
    Euclidean reconstruction error in the feasible case; ``margin`` is
    ``-<farkas, target>`` in the infeasible case.
    """

    feasible: bool
    weights: Optional[np.ndarray] = None
    farkas: Optional[np.ndarray] = None
    residual: float = 0.0
    margin: float = 0.0
    iterations: int = 0


def as_complex_matrix(a) -> np.ndarray:
    m = np.array(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def hermitian_defect(h: np.ndarray) -> float:
    return float(np.linalg.norm(h - h.conj().T))


def _require_hermitian(h) -> np.ndarray:
    h = as_complex_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise NonHermitian(f"matrix is not square: {h.shape}")
    scale = max(1.0, float(np.linalg.norm(h)))
    if hermitian_defect(h) > 1e-12 * scale:
        raise NonHermitian(
            f"||H - H*||_F = {hermitian_defect(h):.3e} exceeds 1e-12 * {scale:.3e}"
        )
    return 0.5 * (h + h.conj().T)


@functools.lru_cache(maxsize=None)
def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Parallel Jacobi ordering: n-1 rounds of disjoint index pairs."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        p, q = [], []
        for k in range(m // 2):
            i, j = players[k], players[m - 1 - k]
            if i < n and j < n:
                p.append(min(i, j))
                q.append(max(i, j))
        rounds.append((np.array(p, dtype=int), np.array(q, dtype=int)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def hermitian_eigendecompose(h) -> HermitianEig:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Rotations on disjoint index pairs are applied together, one round-robin
    round at a time.  Eigenvalues are returned in ascending order and the
    eigenvectors are the columns of ``vectors``.

    Raises
    ------
    NonHermitian
        If ``h`` is not square or not Hermitian to 1e-12 (relative).
    NoConvergence
        If 100 sweeps do not drive the off-diagonal mass below
        1e-13 * ||h||_F.
    """
    a = _require_hermitian(h)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    if n == 1:
        return HermitianEig(np.array([a[0, 0].real]), v)
    scale = float(np.linalg.norm(a))
    if scale == 0.0:
        return HermitianEig(np.zeros(n), v)
    threshold = OFF_DIAGONAL_RTOL * scale
    rounds = _round_robin(n)
    idx = np.arange(n)
    for _ in range(MAX_SWEEPS):
        off = a.copy()
        off[idx, idx] = 0.0
        if np.linalg.norm(off) <= threshold:
            break
        for p, q in rounds:
            apq = a[p, q]
            g = np.abs(apq)
            active = g > 1e-300
            if not np.any(active):
                continue
            p, q, apq, g = p[active], q[active], apq[active], g[active]
            phase = apq / g
            app = a[p, p].real
            aqq = a[q, q].real
            theta = (aqq - app) / (2.0 * g)
            t = np.sign(theta) / (np.abs(theta) + np.hypot(theta, 1.0))
            t[theta == 0.0] = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            e = phase.conj()
            # a <- J* a J and v <- v J, touching only rows/columns p and q.
            cp, cq = a[:, p], a[:, q]
            a[:, p] = c * cp - (s * e) * cq
            a[:, q] = s * cp + (c * e) * cq
            rp, rq = a[p, :], a[q, :]
            a[p, :] = c[:, None] * rp - (s * e.conj())[:, None] * rq
            a[q, :] = s[:, None] * rp + (c * e.conj())[:, None] * rq
            vp, vq = v[:, p], v[:, q]
            v[:, p] = c * vp - (s * e) * vq
            v[:, q] = s * vp + (c * e) * vq
    else:
        raise NoConvergence(f"Jacobi did not converge in {MAX_SWEEPS} sweeps")
    w = a[idx, idx].real
    order = np.argsort(w, kind="stable")
    return HermitianEig(w[order], v[:, order])


def psd_check(h, tol: float = 1e-9) -> PsdReport:
    eig = hermitian_eigendecompose(h)
    lo = float(eig.eigenvalues[0])
    return PsdReport(min_eigenvalue=lo, passes=lo >= -tol, tolerance_used=float(tol))


def unitary_eigendecompose(w, merge_arc: float = 1e-7) -> tuple[np.ndarray, list[np.ndarray]]:
    """Spectral decomposition of a normal (typically unitary) matrix.

    Only Hermitian eigenproblems are solved: the Hermitian part of a rotated
    copy of ``w`` is diagonalised, near-degenerate clusters are compressed
    and split again with a different rotation.  Returns the distinct
    eigenvalues and, for each, an orthonormal basis of its eigenspace
    (eigenvalues closer than ``merge_arc`` are merged).
    """
    w = as_complex_matrix(w)
    n = w.shape[0]
    vecs = _normal_eigvecs(w, np.eye(n, dtype=complex), depth=0)
    vals = np.array([vecs[:, k].conj() @ w @ vecs[:, k] for k in range(n)])
    order = np.argsort(np.angle(vals), kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    groups: list[list[int]] = []
    for k in range(n):
        for grp in groups:
            if abs(vals[grp[0]] - vals[k]) <= merge_arc:
                grp.append(k)
                break
        else:
            groups.append([k])
    eigvals = np.array([vals[g].mean() for g in groups])
    bases = [vecs[:, g] for g in groups]
    return eigvals, bases


_GOLDEN_ANGLES = (0.61803398875, 2.39996322973, 1.1283791671, 0.3183098862, 1.7320508076)


def _normal_eigvecs(w: np.ndarray, basis: np.ndarray, depth: int) -> np.ndarray:
    k = w.shape[0]
    if k == 1:
        return basis
    mu = np.trace(w) / k
    dev = w - mu * np.eye(k)
    spread = float(np.linalg.norm(dev))
    if spread <= 1e-14 * max(1.0, abs(mu)) or depth >= len(_GOLDEN_ANGLES):
        return basis
    z = np.exp(1j * _GOLDEN_ANGLES[depth]) * dev / spread
    eig = hermitian_eigendecompose(0.5 * (z + z.conj().T))
    lam, vec = eig.eigenvalues, eig.vectors
    out = []
    start = 0
    for i in range(1, k + 1):
        if i == k or lam[i] - lam[i - 1] > 1e-6:
            block = vec[:, start:i]
            if i - start > 1:
                sub = block.conj().T @ w @ block
                block = block @ _normal_eigvecs(sub, np.eye(i - start, dtype=complex), depth + 1)
            out.append(block)
            start = i
    return basis @ np.hstack(out)


def polynomial_roots(coeffs: Sequence[complex], seed: int = 0) -> np.ndarray:
    """Roots of ``sum coeffs[k] z**k`` by Durand-Kerner iteration.

    Runs at most 500 iterations per attempt and restarts from a randomly
    perturbed start when an attempt stalls.
    """
    c = np.asarray(coeffs, dtype=complex)
    if c.ndim != 1 or c.size == 0:
        raise DimensionMismatch("coefficients must be a non-empty vector")
    big = float(np.max(np.abs(c)))
    if big == 0.0 or abs(c[-1]) <= 1e-14 * big:
        raise DegenerateLeadingCoefficient(
            f"|leading coefficient| = {abs(c[-1]):.3e} is negligible"
        )
    deg = c.size - 1
    if deg == 0:
        return np.zeros(0, dtype=complex)
    a = c / c[-1]
    if deg == 1:
        return np.array([-a[0]])
    high_first = a[::-1]
    absa = np.abs(a)
    radius = 2.0 * max(float(np.max(absa[:-1] ** (1.0 / (deg - np.arange(deg))))), 1e-3)
    rng = np.random.default_rng(seed)
    best, best_res = None, np.inf
    for attempt in range(8):
        k = np.arange(deg)
        z = radius * np.exp(1j * (2 * np.pi * k / deg + 0.4))
        if attempt:
            z = z * (1 + 0.1 * rng.standard_normal(deg)) + 0.05 * radius * rng.standard_normal(deg)
        for _ in range(500):
            num = np.polyval(high_first, z)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            den = np.prod(diff, axis=1)
            den[den == 0] = 1e-300
            step = num / den
            z = z - step
            if np.all(np.abs(step) <= 4e-16 * (1 + np.abs(z))):
                break
        scale = np.polyval(absa[::-1], np.abs(z))
        res = float(np.max(np.abs(np.polyval(high_first, z)) / scale))
        if np.all(np.isfinite(z)) and res < best_res:
            best, best_res = z, res
        if best_res <= 1e-12:
            break
    if best is None or best_res > 1e-8:
        raise NoConvergence(f"Durand-Kerner residual {best_res:.3e} after restarts")
    return best


def procrustes_unitary(a, b) -> np.ndarray:
    """Unitary ``w`` minimising ``||a w - b||_F`` (polar factor of a* b).

    Singular triplets of ``a* b`` come from the Hermitian embedding
    ``[[0, m], [m*, 0]]`` so no condition number is squared.  Directions in
    the kernel are completed by arbitrary orthonormal bases.
    """
    a = as_complex_matrix(a)
    b = as_complex_matrix(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    m = a.conj().T @ b
    r = m.shape[0]
    if not np.any(m):
        return np.eye(r, dtype=complex)
    jw = np.zeros((2 * r, 2 * r), dtype=complex)
    jw[:r, r:] = m
    jw[r:, :r] = m.conj().T
    eig = hermitian_eigendecompose(jw)
    s = eig.eigenvalues[::-1][:r]
    x = eig.vectors[:, ::-1][:, :r]
    keep = s > 1e-12 * s[0]
    u = x[:r, keep]
    v = x[r:, keep]
    u = u / np.linalg.norm(u, axis=0)
    v = v / np.linalg.norm(v, axis=0)
    u = _complete_orthonormal(u, r)
    v = _complete_orthonormal(v, r)
    w = u @ v.conj().T
    for _ in range(2):
        w = 0.5 * w @ (3.0 * np.eye(r) - w.conj().T @ w)
    return w


def _complete_orthonormal(q: np.ndarray, dim: int) -> np.ndarray:
    k = q.shape[1]
    if k == dim:
        return q
    # Householder QR of [q, I] spans q first, then its orthogonal complement.
    full, _ = np.linalg.qr(np.hstack([q, np.eye(dim, dtype=complex)]))
    return np.hstack([q, full[:, k:dim]])


def solve_conic_lp(
    generators,
    target,
    tol: float = 1e-9,
    cost=None,
    max_iterations: Optional[int] = None,
) -> ConicLpOutcome:
    """Decide whether ``target`` lies in the cone spanned by ``generators``.

    Phase I of a dense tableau simplex (Dantzig pricing with a Bland fallback) minimises the total
    artificial mass.  If that optimum is at most ``tol`` the basic solution
    is returned as nonnegative weights, optionally improved in a phase II
    that minimises ``cost @ weights``.  Otherwise the phase I dual prices
    give a Farkas vector ``y`` with ``<y, g_i> >= 0`` for every generator and
    ``<y, target> < 0``.
    """
    g = np.atleast_2d(np.asarray(generators, dtype=float))
    b = np.asarray(target, dtype=float).ravel()
    if g.shape[0] < 1:
        raise DimensionMismatch("at least one generator is required")
    if g.shape[1] != b.size:
        raise DimensionMismatch(f"generators have dimension {g.shape[1]}, target {b.size}")
    d, k = b.size, g.shape[0]
    sign = np.where(b < 0, -1.0, 1.0)
    a = (g.T * sign[:, None])
    rhs = b * sign
    scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(rhs))))
    eps = 1e-11 * scale

    # Columns: k structural, d artificial, then rhs.
    tab = np.zeros((d + 1, k + d + 1))
    tab[:d, :k] = a
    tab[:d, k:k + d] = np.eye(d)
    tab[:d, -1] = rhs
    tab[d, :k] = -a.sum(axis=0)
    tab[d, -1] = -rhs.sum()
    basis = np.arange(k, k + d)
    limit = max_iterations or 50 * (k + d) + 1000

    iters = _simplex(tab, basis, allowed=k + d, eps=eps, limit=limit)
    phase1 = -tab[d, -1]

    if phase1 > tol:
        # Dual prices: y = c_B B^-1, read from the artificial block of the
        # reduced-cost row (reduced cost of artificial i is 1 - y_i).
        y = 1.0 - tab[d, k:k + d]
        y = y * sign
        farkas = -y
        return ConicLpOutcome(
            feasible=False,
            farkas=farkas,
            margin=float(-(farkas @ b)),
            iterations=iters,
        )

    if cost is not None:
        c = np.asarray(cost, dtype=float).ravel()
        if c.size != k:
            raise DimensionMismatch("cost vector must have one entry per generator")
        tab, basis = _drop_artificials(tab, basis, k, eps)
        rows = tab.shape[0] - 1
        tab[rows, :] = 0.0
        tab[rows, :k] = c
        for i in range(rows):
            if basis[i] < k:
                tab[rows, :] -= c[basis[i]] * tab[i, :]
        iters += _simplex(tab, basis, allowed=k, eps=eps, limit=limit)
        weights = np.zeros(k)
        for i in range(rows):
            if basis[i] < k:
                weights[basis[i]] = tab[i, -1]
    else:
        weights = np.zeros(k)
        for i in range(d):
            if basis[i] < k:
                weights[basis[i]] = tab[i, -1]
    weights = np.clip(weights, 0.0, None)
    residual = float(np.linalg.norm(g.T @ weights - b))
    return ConicLpOutcome(feasible=True, weights=weights, residual=residual, iterations=iters)


def _simplex(tab: np.ndarray, basis: np.ndarray, allowed: int, eps: float, limit: int, stall: int = 50) -> int:
    """Dantzig pricing, dropping to Bland's rule after ``stall`` degenerate pivots."""
    rows = tab.shape[0] - 1
    best_obj = tab[rows, -1]
    flat = 0
    for it in range(limit):
        red = tab[rows, :allowed]
        candidates = np.flatnonzero(red < -eps)
        if candidates.size == 0:
            return it
        col = int(candidates[0]) if flat >= stall else int(candidates[np.argmin(red[candidates])])
        colv = tab[:rows, col]
        pos = colv > eps
        if not np.any(pos):
            raise RuntimeError("unbounded direction in a bounded phase; numerical breakdown")
        ratios = np.full(rows, np.inf)
        ratios[pos] = tab[:rows, -1][pos] / colv[pos]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + eps * max(1.0, abs(best)))
        row = int(ties[np.argmin(basis[ties])])
        _pivot(tab, row, col)
        basis[row] = col
        # The tableau stores -objective, so progress means an increase.
        if tab[rows, -1] > best_obj + eps:
            best_obj, flat = tab[rows, -1], 0
        else:
            flat += 1
    raise NoConvergence(f"simplex exceeded {limit} pivots")


def _pivot(tab: np.ndarray, row: int, col: int) -> None:
    tab[row, :] /= tab[row, col]
    colv = tab[:, col].copy()
    colv[row] = 0.0
    tab -= np.outer(colv, tab[row, :])


def _drop_artificials(tab: np.ndarray, basis: np.ndarray, k: int, eps: float):
    """Pivot zero-level artificials out of the basis; delete redundant rows."""
    rows = tab.shape[0] - 1
    keep_rows = []
    for i in range(rows):
        if basis[i] >= k:
            nz = np.flatnonzero(np.abs(tab[i, :k]) > eps)
            if nz.size == 0:
                continue
            _pivot(tab, i, int(nz[0]))
            basis[i] = int(nz[0])
        keep_rows.append(i)
    new = np.vstack([tab[keep_rows][:, list(range(k)) + [tab.shape[1] - 1]],
                     np.zeros((1, k + 1))])
    return new, basis[keep_rows].copy()
