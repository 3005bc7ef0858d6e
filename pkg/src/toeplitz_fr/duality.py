"""Duality between Toeplitz matrices and trigonometric polynomials, and maps between them.

The pairing ``<T, f> = sum_k tau_{-k} f_hat(k)`` identifies Toeplitz
matrices of size n with linear functionals on band-n polynomials; positive
matrices correspond to functionals that are nonnegative on nonnegative
polynomials.  A linear map out of the polynomial side is described by its
images of the monomials ``chi_l``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import jsonio
from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    InputFormatError,
    NotAdjointPreserving,
    NotPositive,
)
from .fejer_riesz import GRID, TrigPoly, circle_minimum
from .numerics import hermitian_eigendecompose, psd_check
from .toeplitz import (
    BlockToeplitz,
    ToeplitzMatrix,
    caratheodory_decompose,
    check_unit,
    pure_toeplitz,
    r_basis,
)

ADJOINT_TOL = 1e-12
CODOMAINS = ("toeplitz", "dense", "trigpoly")

Image = Union[ToeplitzMatrix, np.ndarray, TrigPoly]


def _fsum_complex(values) -> complex:
    values = np.asarray(values, dtype=complex)
    return complex(math.fsum(values.real), math.fsum(values.imag))


def pair(t: ToeplitzMatrix, f: TrigPoly) -> complex:
    """``sum_k tau_{-k} f_hat(k)``, summed with correct rounding.

    Correctly rounded summation makes the value independent of term order
    and of zero padding, so the truncation/embedding adjoint identity holds
    exactly.
    """
    if t.n != f.n:
        raise DimensionMismatch(f"Toeplitz size {t.n} vs band {f.n}")
    return _fsum_complex(t.coeffs[::-1] * f.coeffs)


@dataclass(frozen=True, eq=False)
class FrFunctional:
    """Linear functional on band-n polynomials given by its values on ``chi_k``."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex).ravel()
        if v.size != 2 * self.n - 1:
            raise DimensionMismatch(f"need {2 * self.n - 1} values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __call__(self, f: TrigPoly) -> complex:
        if f.n != self.n:
            raise DimensionMismatch("band limits differ")
        return _fsum_complex(self.values * f.coeffs)


def functional_from_toeplitz(t: ToeplitzMatrix) -> FrFunctional:
    """``f -> <t, f>``; its value on ``chi_k`` is ``tau_{-k}``."""
    return FrFunctional(t.n, t.coeffs[::-1])


def toeplitz_from_functional(phi) -> ToeplitzMatrix:
    """Inverse of :func:`functional_from_toeplitz`; accepts the values on ``chi_k`` directly."""
    if isinstance(phi, FrFunctional):
        values = phi.values
    else:
        values = np.asarray(phi, dtype=complex).ravel()
    if values.size % 2 == 0:
        raise DimensionMismatch("need an odd number of values")
    return ToeplitzMatrix((values.size + 1) // 2, values[::-1])


@dataclass(frozen=True, eq=False)
class ToeplitzFRTensor:
    """``sum C[l, k] r_l (x) chi_k``: block Toeplitz matrix whose blocks are polynomials."""

    n: int
    m: int
    coeffs: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (2 * self.n - 1, 2 * self.m - 1):
            raise DimensionMismatch(f"need shape {(2 * self.n - 1, 2 * self.m - 1)}, got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def block(self, ell: int) -> TrigPoly:
        if abs(ell) > self.n - 1:
            raise IndexOutOfRange(f"l={ell} outside -{self.n - 1}..{self.n - 1}")
        return TrigPoly(self.m, self.coeffs[ell + self.n - 1])

    @property
    def is_hermitian(self) -> bool:
        c = self.coeffs
        return bool(np.all(np.abs(c - c[::-1, ::-1].conj()) <= ADJOINT_TOL * max(1.0, np.abs(c).max())))

    def at(self, w: complex) -> np.ndarray:
        """The n x n Toeplitz matrix obtained by evaluating every block at ``w``."""
        w = check_unit(w)
        k = np.arange(-self.m + 1, self.m)
        return ToeplitzMatrix(self.n, self.coeffs @ (w ** k)).dense()

    def to_json(self) -> dict:
        doc = {"n": self.n, "m": self.m, "coeffs": jsonio.encode_complex_array(self.coeffs)}
        if self.meta:
            doc["meta"] = self.meta
        return doc

    @classmethod
    def from_json(cls, doc) -> "ToeplitzFRTensor":
        n = jsonio.require(doc, "n", int)
        m = jsonio.require(doc, "m", int)
        c = jsonio.decode_complex_array(jsonio.require(doc, "coeffs", list), 2)
        if n < 1 or m < 1 or c.shape != (2 * n - 1, 2 * m - 1):
            raise InputFormatError(f"coefficient array must have shape {(2 * n - 1, 2 * m - 1)}")
        meta = doc.get("meta", {})
        if not isinstance(meta, dict):
            raise InputFormatError("meta must be an object")
        return cls(n, m, c, meta)


def universal_toeplitz(n: int, m: Optional[int] = None) -> ToeplitzFRTensor:
    """``T_n = sum_l r_l (x) chi_l``: the Toeplitz matrix of monomials ``z**l``."""
    m = n if m is None else m
    if n < 2 or m < n:
        raise DimensionMismatch("need 2 <= n <= m")
    c = np.zeros((2 * n - 1, 2 * m - 1), dtype=complex)
    for ell in range(-n + 1, n):
        c[ell + n - 1, ell + m - 1] = 1.0
    return ToeplitzFRTensor(n, m, c, {"name": f"T_{n}"})


def maximally_entangled(n: int) -> ToeplitzFRTensor:
    """``xi_n = sum_l r_l (x) chi_{-l}``.

    Reversing the polynomial coefficients blockwise carries ``xi_n`` to the
    universal matrix ``T_n``, which is entangled; ``xi_n`` is therefore
    entangled too, and the metadata records this.
    """
    if n < 2:
        raise DimensionMismatch("needs n >= 2")
    c = np.zeros((2 * n - 1, 2 * n - 1), dtype=complex)
    for ell in range(-n + 1, n):
        c[ell + n - 1, -ell + n - 1] = 1.0
    meta = {"name": f"xi_{n}", "entangled": True, "reason": "coefficient reversal maps it to T_n"}
    return ToeplitzFRTensor(n, n, c, meta)


def coefficient_reversal(x: ToeplitzFRTensor) -> ToeplitzFRTensor:
    """Apply ``chi_l -> chi_{-l}`` to every block."""
    return ToeplitzFRTensor(x.n, x.m, x.coeffs[:, ::-1])


def product_functional(x: ToeplitzFRTensor, toeplitz_side, fr_side) -> complex:
    """``(psi (x) phi)(x)`` from the values of psi on ``r_l`` and of phi on ``chi_k``."""
    a = np.asarray(toeplitz_side, dtype=complex).ravel()
    b = np.asarray(fr_side, dtype=complex).ravel()
    if a.size != 2 * x.n - 1 or b.size != 2 * x.m - 1:
        raise DimensionMismatch("functional sizes do not match the tensor")
    return complex(a @ x.coeffs @ b)


def hat_map(x, f: TrigPoly):
    """``x_hat(f) = sum_l f_hat(-l) t_l`` for ``x = sum_l r_l (x) t_l``.

    ``x`` is a :class:`BlockToeplitz` (matrix blocks, dense result) or a
    :class:`ToeplitzFRTensor` (polynomial blocks, :class:`TrigPoly` result).
    """
    if f.n != x.n:
        raise DimensionMismatch(f"band {f.n} vs Toeplitz size {x.n}")
    weights = f.coeffs[::-1]
    if isinstance(x, ToeplitzFRTensor):
        return TrigPoly(x.m, weights @ x.coeffs)
    if isinstance(x, BlockToeplitz):
        return np.tensordot(weights, x.blocks, axes=1)
    raise TypeError(f"unsupported tensor type {type(x).__name__}")


def _adjoint(image: Image) -> Image:
    if isinstance(image, ToeplitzMatrix):
        return ToeplitzMatrix(image.n, image.coeffs[::-1].conj())
    if isinstance(image, TrigPoly):
        return TrigPoly(image.n, image.coeffs[::-1].conj())
    return np.asarray(image).conj().T


def _raw(image: Image) -> np.ndarray:
    if isinstance(image, (ToeplitzMatrix, TrigPoly)):
        return image.coeffs
    return np.asarray(image)


@dataclass(frozen=True, eq=False)
class FrLinearMap:
    """Linear map fixed by its images ``images[l + n - 1] = phi(chi_l)``.

    The same container describes maps out of the Toeplitz system, with
    ``images[l + n - 1] = phi(r_l)``.  ``codomain`` is one of ``"toeplitz"``,
    ``"dense"`` or ``"trigpoly"``.
    """

    n: int
    codomain: str
    images: tuple

    def __post_init__(self):
        if self.codomain not in CODOMAINS:
            raise InputFormatError(f"codomain must be one of {CODOMAINS}")
        imgs = []
        for im in self.images:
            if self.codomain == "dense":
                im = np.array(im, dtype=complex)
                if im.ndim != 2 or im.shape[0] != im.shape[1]:
                    raise DimensionMismatch("dense images must be square matrices")
                im.setflags(write=False)
            elif self.codomain == "toeplitz" and not isinstance(im, ToeplitzMatrix):
                raise InputFormatError("toeplitz codomain needs ToeplitzMatrix images")
            elif self.codomain == "trigpoly" and not isinstance(im, TrigPoly):
                raise InputFormatError("trigpoly codomain needs TrigPoly images")
            imgs.append(im)
        if len(imgs) != 2 * self.n - 1:
            raise DimensionMismatch(f"need {2 * self.n - 1} images, got {len(imgs)}")
        sizes = {_raw(im).shape for im in imgs}
        if len(sizes) != 1:
            raise DimensionMismatch("images have different sizes")
        object.__setattr__(self, "images", tuple(imgs))

    def image(self, ell: int) -> Image:
        if abs(ell) > self.n - 1:
            raise IndexOutOfRange(f"l={ell} outside -{self.n - 1}..{self.n - 1}")
        return self.images[ell + self.n - 1]

    @property
    def codomain_size(self) -> int:
        im = self.images[0]
        return im.n if isinstance(im, (ToeplitzMatrix, TrigPoly)) else im.shape[0]

    def adjoint_defect(self) -> float:
        return float(max(
            np.max(np.abs(_raw(self.image(-ell)) - _raw(_adjoint(self.image(ell)))))
            for ell in range(-self.n + 1, self.n)
        ))

    @property
    def is_adjoint_preserving(self) -> bool:
        scale = max(1.0, max(float(np.max(np.abs(_raw(im)))) for im in self.images))
        return self.adjoint_defect() <= ADJOINT_TOL * scale

    def dense_images(self) -> np.ndarray:
        """Images as a (2n-1, p, p) stack; only for matrix codomains."""
        if self.codomain == "trigpoly":
            raise TypeError("polynomial images have no dense form")
        return np.array([im.dense() if isinstance(im, ToeplitzMatrix) else im for im in self.images])

    def raw_images(self) -> np.ndarray:
        return np.array([_raw(im) for im in self.images])

    def apply(self, coefficients) -> Image:
        """``sum_l c_l images[l]``; for polynomial input, ``c_l = f_hat(l)``."""
        c = coefficients.coeffs if isinstance(coefficients, (TrigPoly, ToeplitzMatrix)) else coefficients
        c = np.asarray(c, dtype=complex).ravel()
        if c.size != 2 * self.n - 1:
            raise DimensionMismatch("input size does not match the map")
        out = np.tensordot(c, self.raw_images(), axes=1)
        if self.codomain == "toeplitz":
            return ToeplitzMatrix(self.codomain_size, out)
        if self.codomain == "trigpoly":
            return TrigPoly(self.codomain_size, out)
        return out

    def to_json(self) -> dict:
        if self.codomain == "dense":
            images = [jsonio.encode_complex_array(im) for im in self.images]
        else:
            images = [im.to_json() for im in self.images]
        return {"n": self.n, "codomain": self.codomain, "images": images}

    @classmethod
    def from_json(cls, doc) -> "FrLinearMap":
        n = jsonio.require(doc, "n", int)
        codomain = jsonio.require(doc, "codomain", str)
        raw = jsonio.require(doc, "images", list)
        if codomain == "dense":
            images = [jsonio.decode_complex_array(im, 2) for im in raw]
        elif codomain == "toeplitz":
            images = [ToeplitzMatrix.from_json(im) for im in raw]
        elif codomain == "trigpoly":
            images = [TrigPoly.from_json(im) for im in raw]
        else:
            raise InputFormatError(f"unknown codomain {codomain!r}")
        return cls(n, codomain, tuple(images))


def _require_adjoint_preserving(phi: FrLinearMap) -> None:
    if not phi.is_adjoint_preserving:
        raise NotAdjointPreserving(f"phi(chi_-l) != phi(chi_l)* (defect {phi.adjoint_defect():.3e})")


def choi_block(phi: FrLinearMap, at: Optional[complex] = None) -> np.ndarray:
    """Dense ``sum_l r_l (x) phi(chi_l)``.

    For a polynomial codomain the block is a matrix-valued function on the
    circle and ``at`` selects the point where it is evaluated.
    """
    _require_adjoint_preserving(phi)
    n = phi.n
    if phi.codomain == "trigpoly":
        if at is None:
            raise TypeError("a polynomial codomain needs an evaluation point")
        w = check_unit(at)
        k = np.arange(-phi.codomain_size + 1, phi.codomain_size)
        values = phi.raw_images() @ (w ** k)
        return ToeplitzMatrix(n, values).dense()
    images = phi.dense_images()
    return sum(np.kron(r_basis(n, ell).dense(), images[ell + n - 1]) for ell in range(-n + 1, n))


@dataclass(frozen=True)
class CpReport:
    completely_positive: bool
    min_eigenvalue: float
    vector: Optional[np.ndarray]
    argmin: Optional[complex]
    tolerance: float

    def to_json(self) -> dict:
        return {
            "completely_positive": self.completely_positive,
            "min_eigenvalue": self.min_eigenvalue,
            "vector": None if self.vector is None else jsonio.encode_complex_array(self.vector),
            "argmin": None if self.argmin is None else jsonio.encode_complex_array(self.argmin),
            "tolerance": self.tolerance,
        }


def cp_test(phi: FrLinearMap, tol: float = 1e-9, grid: int = GRID) -> CpReport:
    """Complete positivity of ``phi`` via positivity of its Choi-type block.

    Matrix codomains need one eigensolve.  A polynomial codomain makes the
    block a matrix-valued function on the circle, whose smallest eigenvalue
    is scanned on ``grid`` equispaced points.
    """
    _require_adjoint_preserving(phi)
    if phi.codomain != "trigpoly":
        eig = hermitian_eigendecompose(choi_block(phi))
        lo = float(eig.eigenvalues[0])
        vec = None if lo >= -tol else eig.vectors[:, 0]
        return CpReport(lo >= -tol, lo, vec, None, float(tol))
    best = (np.inf, None, None)
    for w in np.exp(2j * np.pi * np.arange(grid) / grid):
        eig = hermitian_eigendecompose(choi_block(phi, w))
        if eig.eigenvalues[0] < best[0]:
            best = (float(eig.eigenvalues[0]), eig.vectors[:, 0], complex(w))
    lo, vec, w = best
    return CpReport(lo >= -tol, lo, vec if lo < -tol else None, w, float(tol))


@dataclass(frozen=True)
class PositivityReport:
    positive: bool
    min_value: float
    argmin: complex
    tolerance: float

    def to_json(self) -> dict:
        return {
            "positive": self.positive,
            "min_value": self.min_value,
            "argmin": jsonio.encode_complex_array(self.argmin),
            "tolerance": self.tolerance,
        }


def _image_min(phi: FrLinearMap, lam: complex) -> float:
    out = phi.apply(pure_toeplitz(phi.n, lam).coeffs)
    if isinstance(out, TrigPoly):
        return circle_minimum(out, 256)[0]
    mat = out.dense() if isinstance(out, ToeplitzMatrix) else out
    return float(psd_check(0.5 * (mat + mat.conj().T)).min_eigenvalue)


def golden_section(fun, lo: float, hi: float, iterations: int = 40) -> tuple[float, float]:
    """Minimise a scalar function on ``[lo, hi]``; returns ``(argmin, value)``."""
    ratio = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - ratio * (b - a), a + ratio * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iterations):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - ratio * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + ratio * (b - a)
            fd = fun(d)
    return (c, fc) if fc <= fd else (d, fd)


def positive_map_test_toeplitz_domain(
    phi: FrLinearMap, grid: int = 720, tol: float = 1e-9
) -> PositivityReport:
    """Positivity of a map on Toeplitz matrices, given by ``images[l] = phi(r_l)``.

    Positive Toeplitz matrices are sums of the rank-one ``T_n(lam)``, so it
    suffices to check ``phi(T_n(lam)) >= 0`` around the circle: a grid of
    ``grid`` angles followed by golden-section refinement of the three best
    grid points.  On this domain positivity already implies complete
    positivity.
    """
    _require_adjoint_preserving(phi)
    theta = 2 * np.pi * np.arange(grid) / grid
    vals = np.array([_image_min(phi, np.exp(1j * t)) for t in theta])
    best_t, best_v = float(theta[np.argmin(vals)]), float(vals.min())
    step = 2 * np.pi / grid
    for k in np.argsort(vals)[:3]:
        t, v = golden_section(lambda s: _image_min(phi, np.exp(1j * s)), theta[k] - step, theta[k] + step)
        if v < best_v:
            best_t, best_v = float(t), float(v)
    return PositivityReport(best_v >= -tol, best_v, complex(np.exp(1j * best_t)), float(tol))


def truncate(t: ToeplitzMatrix, n: int) -> ToeplitzMatrix:
    """Leading n x n principal submatrix."""
    if n < 1 or n > t.n:
        raise IndexOutOfRange(f"cannot truncate size {t.n} to {n}")
    return ToeplitzMatrix(n, t.coeffs[t.n - n: t.n + n - 1])


def embed(f: TrigPoly, m: int) -> TrigPoly:
    """The same polynomial regarded in the larger band m (zero padding)."""
    if m < f.n:
        raise IndexOutOfRange(f"cannot embed band {f.n} into band {m}")
    c = np.zeros(2 * m - 1, dtype=complex)
    c[m - f.n: m + f.n - 1] = f.coeffs
    return TrigPoly(m, c)


def toeplitz_extension(t: ToeplitzMatrix, m: int, tol: float = 1e-9) -> ToeplitzMatrix:
    """Positive m x m Toeplitz matrix whose leading n x n corner is ``t``.

    ``t = sum w_j T_n(lam_j)`` lifts to ``sum w_j T_m(lam_j)``.
    """
    if m < t.n:
        raise IndexOutOfRange(f"extension size {m} is below {t.n}")
    report = psd_check(0.5 * (t.dense() + t.dense().conj().T), tol)
    if not t.is_hermitian or not report.passes:
        raise NotPositive(f"minimum eigenvalue {report.min_eigenvalue:.3e}")
    dec = caratheodory_decompose(t, tol)
    c = np.zeros(2 * m - 1, dtype=complex)
    for lam, w in dec.atoms:
        c += w * pure_toeplitz(m, lam).coeffs
    return ToeplitzMatrix(m, c)
