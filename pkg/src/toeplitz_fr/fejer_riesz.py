"""Trigonometric polynomials of bounded band and their positive cone.

A polynomial of band n is stored by its Fourier coefficients ``f_hat(l)`` for
``l = -n+1 .. n-1`` and evaluates on the circle as ``sum_l f_hat(l) z**l``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jsonio
from .errors import (
    DimensionMismatch,
    FactorizationUnstable,
    IndexOutOfRange,
    InputFormatError,
    NotNonnegative,
    NotRealValued,
)
from .numerics import polynomial_roots
from .toeplitz import check_unit

REAL_TOL = 1e-12
GRID = 1024
RESIDUAL_GRID = 512
NEWTON_STEPS = 3
ON_CIRCLE = 1e-6
CLUSTER_ARC = 1e-6


@dataclass(frozen=True, eq=False)
class TrigPoly:
    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        if self.n < 1 or c.size != 2 * self.n - 1:
            raise DimensionMismatch(f"band {self.n} needs {2 * self.n - 1} coefficients, got {c.size}")
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite Fourier coefficient")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def coeff(self, ell: int) -> complex:
        if abs(ell) > self.n - 1:
            raise IndexOutOfRange(f"l={ell} outside -{self.n - 1}..{self.n - 1}")
        return complex(self.coeffs[ell + self.n - 1])

    @property
    def is_real_valued(self) -> bool:
        c = self.coeffs
        return bool(np.all(np.abs(c - c[::-1].conj()) <= REAL_TOL * max(1.0, np.abs(c).max())))

    def __call__(self, z) -> complex:
        return evaluate(self, z)

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        if other.n != self.n:
            raise DimensionMismatch("band limits differ")
        return TrigPoly(self.n, self.coeffs + other.coeffs)

    def __sub__(self, other: "TrigPoly") -> "TrigPoly":
        return self + (-1.0) * other

    def __mul__(self, scalar) -> "TrigPoly":
        return TrigPoly(self.n, self.coeffs * complex(scalar))

    __rmul__ = __mul__

    def to_json(self) -> dict:
        return {"n": self.n, "coeffs": jsonio.encode_complex_array(self.coeffs)}

    @classmethod
    def from_json(cls, doc) -> "TrigPoly":
        n = jsonio.require(doc, "n", int)
        coeffs = jsonio.decode_complex_array(jsonio.require(doc, "coeffs", list), 1)
        if n < 1 or coeffs.size != 2 * n - 1:
            raise InputFormatError(f"band {n} needs {2 * n - 1} coefficients")
        return cls(n, coeffs)


@dataclass(frozen=True)
class SpectralFactor:
    """Analytic ``h`` (coefficients low to high) with ``|h(z)|**2 = f(z)`` on the circle."""

    h: np.ndarray
    residual: float

    def to_json(self) -> dict:
        return {"h": jsonio.encode_complex_array(self.h), "residual": self.residual}


@dataclass(frozen=True)
class NonnegReport:
    nonneg: bool
    min_value: float
    argmin: complex
    tolerance: float

    def to_json(self) -> dict:
        return {
            "nonneg": self.nonneg,
            "min_value": self.min_value,
            "argmin": jsonio.encode_complex_array(self.argmin),
            "tolerance": self.tolerance,
        }


def chi(n: int, ell: int) -> TrigPoly:
    """The monomial ``z**ell`` in band n."""
    if abs(ell) > n - 1:
        raise IndexOutOfRange(f"l={ell} outside band {n}")
    c = np.zeros(2 * n - 1, dtype=complex)
    c[ell + n - 1] = 1.0
    return TrigPoly(n, c)


def evaluate(f: TrigPoly, z) -> complex:
    """``sum_l f_hat(l) z**l`` at a point of the circle, by Horner's rule."""
    z = check_unit(z)
    acc = 0j
    for c in f.coeffs[::-1]:
        acc = acc * z + c
    return complex(acc * np.conj(z) ** (f.n - 1))


def evaluate_angles(f: TrigPoly, theta, order: int = 0) -> np.ndarray:
    """The ``order``-th derivative in theta of ``f(e^{i theta})`` on an array of angles."""
    ell = np.arange(-f.n + 1, f.n)
    theta = np.asarray(theta, dtype=float)
    phases = np.exp(1j * np.multiply.outer(theta, ell))
    return phases @ (f.coeffs * (1j * ell) ** order)


def _require_real(f: TrigPoly) -> None:
    if not f.is_real_valued:
        raise NotRealValued("coefficients are not conjugate-symmetric")


def circle_minimum(f: TrigPoly, grid: int = GRID) -> tuple[float, float]:
    """Minimum of a real-valued ``f`` on the circle and the angle where it occurs.

    Every grid-local minimum is polished by Newton steps on theta using the
    analytic first and second derivatives.
    """
    theta = 2 * np.pi * np.arange(grid) / grid
    vals = evaluate_angles(f, theta).real
    local = np.flatnonzero((vals <= np.roll(vals, 1)) & (vals <= np.roll(vals, -1)))
    t = theta[local]
    for _ in range(NEWTON_STEPS):
        d1 = evaluate_angles(f, t, 1).real
        d2 = evaluate_angles(f, t, 2).real
        step = np.where(d2 > 0, d1 / np.where(d2 > 0, d2, 1.0), 0.0)
        t = t - np.clip(step, -np.pi / grid, np.pi / grid)
    refined = evaluate_angles(f, t).real
    k = int(np.argmin(vals))
    best_val, best_t = float(vals[k]), float(theta[k])
    if refined.size and refined.min() < best_val:
        j = int(np.argmin(refined))
        best_val, best_t = float(refined[j]), float(t[j])
    return best_val, best_t % (2 * np.pi)


def is_nonneg_on_circle(f: TrigPoly, tol: float = 1e-9) -> NonnegReport:
    """Whether ``f(z) >= -tol`` on the whole circle.

    Raises
    ------
    NotRealValued
        If ``f_hat(-l) != conj f_hat(l)``.
    """
    _require_real(f)
    lo, t = circle_minimum(f)
    return NonnegReport(lo >= -tol, lo, complex(np.exp(1j * t)), float(tol))


def from_factor(h, n: int | None = None) -> TrigPoly:
    """``|h(z)|**2`` for an analytic polynomial ``h`` (coefficients low to high)."""
    h = np.asarray(h, dtype=complex).ravel()
    band = h.size if n is None else n
    if h.size > band:
        raise DimensionMismatch(f"degree {h.size - 1} does not fit band {band}")
    full = np.convolve(h, h[::-1].conj())  # index k <-> l = k - (len(h) - 1)
    c = np.zeros(2 * band - 1, dtype=complex)
    d = h.size - 1
    c[band - 1 - d: band + d] = full
    return TrigPoly(band, c)


def _effective_band(f: TrigPoly) -> int:
    mag = np.abs(f.coeffs)
    scale = mag.max()
    for d in range(f.n - 1, 0, -1):
        if max(mag[f.n - 1 + d], mag[f.n - 1 - d]) > 1e-14 * scale:
            return d
    return 0


def _cluster_on_circle(roots: np.ndarray) -> list[complex]:
    """Halve the on-circle roots, which must come in coincident pairs."""
    if roots.size == 0:
        return []
    ang = np.sort(np.angle(roots) % (2 * np.pi))
    gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
    start = (int(np.argmax(gaps)) + 1) % ang.size
    # Cut the circle at the widest gap so no cluster straddles the cut.
    ang = np.concatenate([ang[start:], ang[:start] + 2 * np.pi])
    clusters, current = [], [ang[0]]
    for a in ang[1:]:
        if a - current[-1] <= CLUSTER_ARC:
            current.append(a)
        else:
            clusters.append(current)
            current = [a]
    clusters.append(current)
    out = []
    for c in clusters:
        if len(c) % 2:
            raise FactorizationUnstable(
                f"root on the circle near angle {np.mean(c):.6f} has odd multiplicity {len(c)}"
            )
        out.extend([complex(np.exp(1j * np.mean(c)))] * (len(c) // 2))
    return out


def fejer_riesz_factorize(f: TrigPoly, tol: float = 1e-9) -> SpectralFactor:
    """Spectral factor ``h`` with roots in the closed disk and ``|h|**2 = f``.

    Roots of ``z**d f(z)`` come in pairs ``(r, 1/conj r)``; the inner member
    of each pair is kept, and roots on the circle are clustered and halved.
    ``h`` is scaled so that ``sum |h_k|**2 = f_hat(0)``.

    Raises
    ------
    NotRealValued, NotNonnegative
        If ``f`` is not real-valued or dips below ``-tol`` on the circle.
    FactorizationUnstable
        If ``f`` is zero, the root pairing is ambiguous, or the recovered
        factor misses ``f`` by more than ``1e-7 * max(1, ||f||_inf)``.
    """
    report = is_nonneg_on_circle(f, tol)
    if not report.nonneg:
        raise NotNonnegative(f"minimum {report.min_value:.3e} at z = {report.argmin:.6f}")
    if not np.any(f.coeffs):
        raise FactorizationUnstable("the zero polynomial has no normalised spectral factor")
    c0 = f.coeff(0).real
    d = _effective_band(f)
    if d == 0:
        h = np.array([np.sqrt(c0)], dtype=complex)
    else:
        roots = polynomial_roots(f.coeffs[f.n - 1 - d: f.n + d])
        mag = np.abs(roots)
        on = np.abs(mag - 1.0) <= ON_CIRCLE
        inner = roots[(~on) & (mag < 1.0)]
        outer = roots[(~on) & (mag > 1.0)]
        if inner.size != outer.size:
            raise FactorizationUnstable(f"{inner.size} roots inside the disk but {outer.size} outside")
        chosen = np.concatenate([inner, np.array(_cluster_on_circle(roots[on]), dtype=complex)])
        if chosen.size != d:
            raise FactorizationUnstable(f"recovered {chosen.size} roots for degree {d}")
        h = np.poly(chosen)[::-1].astype(complex)
        h *= np.sqrt(c0 / np.sum(np.abs(h) ** 2))
    residual = factor_residual(f, h)
    sup = float(np.max(np.abs(evaluate_angles(f, 2 * np.pi * np.arange(RESIDUAL_GRID) / RESIDUAL_GRID))))
    if residual > 1e-7 * max(1.0, sup):
        raise FactorizationUnstable(f"factor residual {residual:.3e}")
    return SpectralFactor(h, residual)


def factor_residual(f: TrigPoly, h) -> float:
    """``max | |h(z)|**2 - f(z) |`` over 512 equispaced points of the circle."""
    theta = 2 * np.pi * np.arange(RESIDUAL_GRID) / RESIDUAL_GRID
    z = np.exp(1j * theta)
    hz = np.polyval(np.asarray(h, dtype=complex)[::-1], z)
    return float(np.max(np.abs(np.abs(hz) ** 2 - evaluate_angles(f, theta))))


def extremal_test(f: TrigPoly, tol: float = 1e-9) -> bool:
    """Whether ``f`` spans an extremal ray of the nonnegative cone in band n.

    A nonnegative ``f`` is extremal exactly when it has full degree ``n-1``
    and all ``2(n-1)`` roots of ``z**(n-1) f(z)`` lie on the circle (within
    1e-6 in modulus).  Polynomials of lower degree are never extremal for
    ``n >= 2``: multiplying by ``1 + eps cos`` splits them.
    """
    report = is_nonneg_on_circle(f, tol)
    if not report.nonneg:
        raise NotNonnegative(f"minimum {report.min_value:.3e}")
    if f.n == 1:
        return bool(f.coeff(0).real > 0)
    if _effective_band(f) != f.n - 1:
        return False
    roots = polynomial_roots(f.coeffs)
    return bool(np.all(np.abs(np.abs(roots) - 1.0) <= ON_CIRCLE))


def extremal_from_roots(roots, n: int | None = None) -> TrigPoly:
    """``|prod (z - w_i)|**2`` scaled to ``f_hat(0) = 1``; extremal when ``len(roots) = n-1``."""
    roots = np.array([check_unit(w, 1e-10) for w in np.atleast_1d(roots)], dtype=complex)
    f = from_factor(np.poly(roots)[::-1] if roots.size else np.ones(1), n)
    return f * (1.0 / f.coeff(0).real)


def rotate(f: TrigPoly, mu: complex) -> TrigPoly:
    """``z -> f(mu z)``: coefficients ``f_hat(l) mu**l``."""
    mu = check_unit(mu)
    ell = np.arange(-f.n + 1, f.n)
    return TrigPoly(f.n, f.coeffs * mu ** ell)


def point_functional(lam: complex, f: TrigPoly) -> float:
    """Evaluation ``f(lam)`` of a real-valued polynomial."""
    _require_real(f)
    return evaluate(f, lam).real


def induced_functional_phi(lam: complex, f: TrigPoly) -> complex:
    """``phi_lam(f) = sum_l f_hat(-l) lam**l``, which equals ``f(conj lam)``."""
    lam = check_unit(lam)
    ell = np.arange(-f.n + 1, f.n)
    return complex(np.sum(f.coeffs[::-1] * lam ** ell))


@dataclass(frozen=True, eq=False)
class BivariateTrigPoly:
    """``F(z, w) = sum C[k, l] z**k w**l`` with ``|k| < n`` and ``|l| < m``."""

    n: int
    m: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (2 * self.n - 1, 2 * self.m - 1):
            raise DimensionMismatch(f"need shape {(2 * self.n - 1, 2 * self.m - 1)}, got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def is_real_valued(self) -> bool:
        c = self.coeffs
        return bool(np.all(np.abs(c - c[::-1, ::-1].conj()) <= REAL_TOL * max(1.0, np.abs(c).max())))

    def evaluate_angles(self, s, t, ds: int = 0, dt: int = 0) -> np.ndarray:
        """Mixed partial derivative of ``F(e^{is}, e^{it})`` on broadcast angle arrays."""
        k = np.arange(-self.n + 1, self.n)
        ell = np.arange(-self.m + 1, self.m)
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        ps = np.exp(1j * np.multiply.outer(s, k)) * (1j * k) ** ds
        pt = np.exp(1j * np.multiply.outer(t, ell)) * (1j * ell) ** dt
        return np.einsum("...k,kl,...l->...", ps, self.coeffs, pt)

    def __call__(self, z, w) -> complex:
        z, w = check_unit(z), check_unit(w)
        return complex(self.evaluate_angles(np.angle(z), np.angle(w)))

    def to_json(self) -> dict:
        return {"n": self.n, "m": self.m, "coeffs": jsonio.encode_complex_array(self.coeffs)}

    @classmethod
    def from_json(cls, doc) -> "BivariateTrigPoly":
        n = jsonio.require(doc, "n", int)
        m = jsonio.require(doc, "m", int)
        c = jsonio.decode_complex_array(jsonio.require(doc, "coeffs", list), 2)
        if n < 1 or m < 1 or c.shape != (2 * n - 1, 2 * m - 1):
            raise InputFormatError(f"coefficient array must have shape {(2 * n - 1, 2 * m - 1)}")
        return cls(n, m, c)


def tensor_product(f: TrigPoly, g: TrigPoly) -> BivariateTrigPoly:
    """``(z, w) -> f(z) g(w)``."""
    return BivariateTrigPoly(f.n, g.n, np.outer(f.coeffs, g.coeffs))
