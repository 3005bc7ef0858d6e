"""Generalised circulants: polynomials in the twisted shift u_theta.

``u_theta`` has ones on the first subdiagonal and ``exp(i theta)`` in the
upper-right corner.  Its eigenvalues are the n-th roots of ``exp(i theta)``
and a single Fourier-type unitary diagonalises every ``g(u_theta)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import jsonio
from .errors import DimensionMismatch, InputFormatError
from .numerics import ConicLpOutcome, as_complex_matrix, solve_conic_lp
from .toeplitz import ToeplitzMatrix, check_unit


@dataclass(frozen=True, eq=False)
class GeneralizedCirculant:
    n: int
    theta: float
    poly_coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.poly_coeffs, dtype=complex).ravel()
        if self.n < 1 or c.size != self.n:
            raise DimensionMismatch(f"need {self.n} polynomial coefficients, got {c.size}")
        c.setflags(write=False)
        object.__setattr__(self, "poly_coeffs", c)
        object.__setattr__(self, "theta", float(self.theta))

    def toeplitz(self) -> ToeplitzMatrix:
        a = self.poly_coeffs
        n = self.n
        tau = np.zeros(2 * n - 1, dtype=complex)
        tau[n - 1:] = a
        # tau_{-l} = exp(i theta) * alpha_{n-l} for l = 1..n-1
        tau[: n - 1] = np.exp(1j * self.theta) * a[1:]
        return ToeplitzMatrix(n, tau)

    def dense(self) -> np.ndarray:
        return self.toeplitz().dense()

    def to_json(self) -> dict:
        return {"n": self.n, "theta": self.theta, "poly": jsonio.encode_complex_array(self.poly_coeffs)}

    @classmethod
    def from_json(cls, doc) -> "GeneralizedCirculant":
        n = jsonio.require(doc, "n", int)
        theta = jsonio.require(doc, "theta", (int, float))
        poly = jsonio.decode_complex_array(jsonio.require(doc, "poly", list), 1)
        if poly.size != n:
            raise InputFormatError(f"poly must have {n} entries")
        return cls(n, float(theta), poly)


def u_theta(n: int, theta: float) -> GeneralizedCirculant:
    if n < 2:
        raise DimensionMismatch("u_theta needs n >= 2")
    a = np.zeros(n, dtype=complex)
    a[1] = 1.0
    return GeneralizedCirculant(n, theta, a)


def circulant_eigenvalues(n: int, theta: float) -> np.ndarray:
    """Roots of ``z**n = exp(i theta)``, phase ascending from ``theta/n``."""
    return np.exp(1j * (theta + 2 * np.pi * np.arange(n)) / n)


def diagonalize_circulant(n: int, theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Unitary ``v`` with ``v* u_theta v`` diagonal, and the diagonal.

    Column k is ``(omega_k ** -j) / sqrt(n)`` for the k-th eigenvalue
    ``omega_k``.
    """
    if n < 2:
        raise DimensionMismatch("needs n >= 2")
    omega = circulant_eigenvalues(n, theta)
    j = np.arange(n)
    v = omega[None, :] ** (-j[:, None]) / np.sqrt(n)
    return v, omega


def circulant_expectation(x, theta: float) -> GeneralizedCirculant:
    """Completely positive idempotent onto the generalised circulants.

    Conjugate into the eigenbasis of ``u_theta``, keep the diagonal,
    conjugate back.
    """
    x = as_complex_matrix(x)
    n = x.shape[0]
    if x.shape != (n, n):
        raise DimensionMismatch("input must be square")
    if n == 1:
        return GeneralizedCirculant(1, theta, x[0])
    v, _ = diagonalize_circulant(n, theta)
    d = np.einsum("ik,ij,jk->k", v.conj(), x, v)
    f = (v * d) @ v.conj().T
    return GeneralizedCirculant(n, theta, f[:, 0])


def circulant_spectrum(c: GeneralizedCirculant) -> np.ndarray:
    """Eigenvalues of ``g(u_theta)``, i.e. ``g`` at the roots of ``z**n = e^{i theta}``."""
    omega = circulant_eigenvalues(c.n, c.theta)
    return np.polyval(c.poly_coeffs[::-1], omega)


def circulant_from_spectrum(n: int, theta: float, spectrum) -> GeneralizedCirculant:
    v, _ = diagonalize_circulant(n, theta)
    f = (v * np.asarray(spectrum, dtype=complex)) @ v.conj().T
    return GeneralizedCirculant(n, theta, f[:, 0])


@dataclass(frozen=True)
class CornerTestResult:
    feasible: bool
    zeta: complex
    m: int
    circulant: Optional[GeneralizedCirculant]
    lp: ConicLpOutcome


def circulant_corner_test(zeta: complex, m: int, tol: float = 1e-9) -> CornerTestResult:
    """Is ``[[1, conj zeta], [zeta, 1]]`` the top-left corner of a positive m x m circulant?

    Positive circulants are nonnegative combinations of the m spectral
    projections ``v_k v_k*``, whose ``(1, 0)`` entry is ``conj(omega_k) / m``,
    so the question is a three-coordinate conic LP.
    """
    zeta = check_unit(zeta)
    if m < 3:
        raise DimensionMismatch("corner test needs m >= 3")
    omega = circulant_eigenvalues(m, 0.0)
    corner = omega.conj()
    gens = np.stack([np.ones(m), corner.real, corner.imag], axis=1) / m
    target = np.array([1.0, zeta.real, zeta.imag])
    out = solve_conic_lp(gens, target, tol=tol)
    circ = circulant_from_spectrum(m, 0.0, out.weights) if out.feasible else None
    return CornerTestResult(out.feasible, zeta, m, circ, out)
