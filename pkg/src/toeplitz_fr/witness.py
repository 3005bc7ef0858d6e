"""Block-positivity tests and entanglement witnesses.

Positive functionals on the Toeplitz side are vector states, and the
extremal ones come from vectors whose polynomial ``sum xi_l z**(n-1-l)``
has every root on the circle.  Positive functionals on the polynomial side
are generated by point evaluations.  Testing membership in the dual
separable cone therefore reduces to minimising over a few angles.

Entanglement of a Toeplitz (x) polynomial element is certified by a conic
LP over gridded product generators whose Farkas functional is then checked,
and if necessary repaired, over the whole continuum of product generators.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import jsonio
from .duality import ToeplitzFRTensor, golden_section
from .errors import DimensionMismatch, InputFormatError, NonHermitian, NotRealValued
from .fejer_riesz import BivariateTrigPoly
from .numerics import solve_conic_lp
from .separability import from_hermitian_coordinates, hermitian_coordinates
from .toeplitz import BlockToeplitz, ToeplitzMatrix, check_unit

CONTINUUM_RTOL = 1e-8
SHIFT_BUFFER = 1e-6


@dataclass(frozen=True)
class DualExtremalVector:
    roots: np.ndarray
    xi: np.ndarray

    def state(self, x) -> float:
        """``<x xi, xi>`` for a dense or Toeplitz matrix ``x``."""
        mat = x.dense() if isinstance(x, ToeplitzMatrix) else np.asarray(x, dtype=complex)
        return float(np.real(self.xi.conj() @ mat @ self.xi))


def dual_extremal_vector(roots) -> DualExtremalVector:
    """Unit vector ``xi`` with ``sum xi_l z**(n-1-l) = c prod (z - root)``."""
    roots = np.array([check_unit(w) for w in np.atleast_1d(roots)], dtype=complex)
    xi = np.poly(roots).astype(complex) if roots.size else np.ones(1, dtype=complex)
    return DualExtremalVector(roots, xi / np.linalg.norm(xi))


def _xi_from_angles(angles: np.ndarray) -> np.ndarray:
    """Rows of unit vectors for a (count, k) array of root angles."""
    angles = np.atleast_2d(angles)
    out = np.ones((angles.shape[0], 1), dtype=complex)
    for j in range(angles.shape[1]):
        w = np.exp(1j * angles[:, j])[:, None]
        nxt = np.zeros((out.shape[0], out.shape[1] + 1), dtype=complex)
        nxt[:, :-1] += out
        nxt[:, 1:] -= w * out
        out = nxt
    return out / np.linalg.norm(out, axis=1, keepdims=True)


def _angle_tuples(k: int, grid: int) -> np.ndarray:
    """Unordered k-tuples of grid angles (roots are a multiset)."""
    if k == 0:
        return np.zeros((1, 0))
    steps = 2 * np.pi * np.arange(grid) / grid
    return np.array([[steps[i] for i in c] for c in itertools.combinations_with_replacement(range(grid), k)])


@dataclass(frozen=True)
class SepStarReport:
    member: bool
    min_value: float
    argmin: dict
    tolerance: float

    def to_json(self) -> dict:
        return {
            "member": self.member,
            "min_value": self.min_value,
            "argmin": self.argmin,
            "tolerance": self.tolerance,
        }


def _default_tol(scale: float) -> float:
    return 1e-8 * (1.0 + scale)


def _coordinate_descent(
    fun, start: np.ndarray, step: float, rounds: int = 3, iterations: int = 30
) -> tuple[np.ndarray, float]:
    x = np.array(start, dtype=float)
    best = fun(x)
    for _ in range(rounds):
        for i in range(x.size):
            def along(s, i=i):
                y = x.copy()
                y[i] = s
                return fun(y)

            s, v = golden_section(along, x[i] - step, x[i] + step, iterations)
            if v < best:
                x[i], best = s, v
        step /= 2
    return x, float(best)


def tt_product_value(x, xi_angles, eta_angles) -> float:
    """``<x (xi (x) eta), xi (x) eta>`` for extremal vectors given by root angles.

    ``x`` is a :class:`BlockToeplitz` or its dense matrix.
    """
    dense = x.dense() if isinstance(x, BlockToeplitz) else x
    xi = _xi_from_angles(np.asarray(xi_angles, dtype=float)[None])[0]
    eta = _xi_from_angles(np.asarray(eta_angles, dtype=float)[None])[0]
    v = np.outer(xi, eta).ravel()
    return float(np.real(v.conj() @ dense @ v))


def sep_star_test_toeplitz_toeplitz(
    x: BlockToeplitz, grid: int = 24, tol: Optional[float] = None, starts: int = 5
) -> SepStarReport:
    """Block-positivity of ``x = sum r_l (x) a_l`` with Toeplitz blocks ``a_l``.

    Minimises ``<x (xi (x) eta), xi (x) eta>`` over extremal vectors on both
    factors: a grid of root angles, then three rounds of coordinate
    refinement from the best ``starts`` grid points.  A negative minimum is
    a certificate; a nonnegative one is membership up to grid resolution.
    """
    n, m = x.n, x.m
    dense = x.dense()
    if tol is None:
        tol = _default_tol(float(np.linalg.norm(dense)))
    a_angles = _angle_tuples(n - 1, grid)
    b_angles = _angle_tuples(m - 1, grid)
    xis = _xi_from_angles(a_angles)
    etas = _xi_from_angles(b_angles)
    blocks = dense.reshape(n, m, n, m)
    # compress the first factor: (A, m, m) matrices, then evaluate on every eta
    comp = np.einsum("ai,ikjl,aj->akl", xis.conj(), blocks, xis)
    vals = np.real(np.einsum("bk,akl,bl->ab", etas.conj(), comp, etas))
    flat = np.argsort(vals, axis=None)[:starts]
    k1 = n - 1

    def fun(p):
        return tt_product_value(dense, p[:k1], p[k1:])

    best_p, best_v = None, np.inf
    for idx in flat:
        i, j = np.unravel_index(idx, vals.shape)
        p0 = np.concatenate([a_angles[i], b_angles[j]])
        if p0.size:
            p, v = _coordinate_descent(fun, p0, 2 * np.pi / grid)
        else:
            p, v = p0, float(vals[i, j])
        if v < best_v:
            best_p, best_v = p, v
    argmin = {
        "xi_roots": [jsonio.encode_complex_array(np.exp(1j * a)) for a in best_p[:k1]],
        "eta_roots": [jsonio.encode_complex_array(np.exp(1j * a)) for a in best_p[k1:]],
        "xi_angles": [float(a) for a in best_p[:k1]],
        "eta_angles": [float(a) for a in best_p[k1:]],
    }
    return SepStarReport(best_v >= -tol, float(best_v), argmin, float(tol))


def _min_eig_2x2(p: np.ndarray, q: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Smallest eigenvalue of ``[[p, conj r], [r, q]]`` with p, q real."""
    return 0.5 * (p + q) - np.sqrt(0.25 * (p - q) ** 2 + np.abs(r) ** 2)


def sep_star_value_2x2(a: ToeplitzMatrix, b: ToeplitzMatrix, theta) -> np.ndarray:
    """``lambda_min(a + (e^{i theta} b + e^{-i theta} b*) / 2)`` on an array of angles."""
    theta = np.asarray(theta, dtype=float)
    e = np.exp(1j * theta)[..., None, None]
    bd = b.dense()
    h = a.dense() + 0.5 * (e * bd + e.conj() * bd.conj().T)
    return _min_eig_2x2(h[..., 0, 0].real, h[..., 1, 1].real, h[..., 1, 0])


def sep_star_test_2x2(
    a: ToeplitzMatrix, b: ToeplitzMatrix, grid: int = 720, tol: Optional[float] = None
) -> SepStarReport:
    """Block-positivity of ``[[a, b*], [b, a]]`` for 2 x 2 Toeplitz ``a`` (Hermitian) and ``b``.

    The element is in the dual separable cone exactly when
    ``(e^{i theta} b + e^{-i theta} b*) / 2 + a >= 0`` for every theta.
    """
    if a.n != 2 or b.n != 2:
        raise DimensionMismatch("sep_star_test_2x2 takes 2 x 2 Toeplitz matrices")
    if not a.is_hermitian:
        raise NonHermitian("a must be Hermitian")
    if tol is None:
        tol = _default_tol(float(np.hypot(np.linalg.norm(a.dense()) * np.sqrt(2), np.linalg.norm(b.dense()) * np.sqrt(2))))
    theta = 2 * np.pi * np.arange(grid) / grid
    vals = sep_star_value_2x2(a, b, theta)
    best_t, best_v = float(theta[np.argmin(vals)]), float(vals.min())
    step = 2 * np.pi / grid
    for k in np.argsort(vals)[:3]:
        t, v = golden_section(lambda s: float(sep_star_value_2x2(a, b, s)), theta[k] - step, theta[k] + step, 60)
        if v < best_v:
            best_t, best_v = float(t), float(v)
    best_t %= 2 * np.pi
    return SepStarReport(best_v >= -tol, best_v, {"theta": best_t}, float(tol))


def two_by_two_element(a: ToeplitzMatrix, b: ToeplitzMatrix) -> BlockToeplitz:
    """``[[a, b*], [b, a]] = r_0 (x) a + r_1 (x) b + r_-1 (x) b*`` as a block-Toeplitz element."""
    if a.n != b.n:
        raise DimensionMismatch("a and b must have the same size")
    bd = b.dense()
    return BlockToeplitz(2, np.array([bd.conj().T, a.dense(), bd]))


def sep_star_test_fr_fr(
    f: BivariateTrigPoly, grid: int = 256, tol: Optional[float] = None, starts: int = 8
) -> SepStarReport:
    """Nonnegativity of a real-valued two-variable polynomial on the torus.

    Point evaluations generate the positive functionals on each factor, so
    this is block-positivity, and also membership in the minimal cone.  A
    ``grid x grid`` scan is followed by damped Newton steps from the best
    ``starts`` grid points.

    Raises
    ------
    NotRealValued
        If the coefficients lack the symmetry ``C[-k, -l] = conj C[k, l]``.
    """
    if not f.is_real_valued:
        raise NotRealValued("coefficients are not conjugate-symmetric")
    if tol is None:
        tol = _default_tol(float(np.linalg.norm(f.coeffs)))
    t = 2 * np.pi * np.arange(grid) / grid
    vals = f.evaluate_angles(t[:, None], t[None, :]).real
    best = (float(vals.min()), *np.unravel_index(int(np.argmin(vals)), vals.shape))
    best_v, best_s, best_t = best[0], float(t[best[1]]), float(t[best[2]])
    h = 2 * np.pi / grid
    for idx in np.argsort(vals, axis=None)[:starts]:
        i, j = np.unravel_index(int(idx), vals.shape)
        p = np.array([t[i], t[j]])
        for _ in range(8):
            g = np.array([f.evaluate_angles(p[0], p[1], 1, 0).real, f.evaluate_angles(p[0], p[1], 0, 1).real])
            hs = np.array([
                [f.evaluate_angles(p[0], p[1], 2, 0).real, f.evaluate_angles(p[0], p[1], 1, 1).real],
                [f.evaluate_angles(p[0], p[1], 1, 1).real, f.evaluate_angles(p[0], p[1], 0, 2).real],
            ])
            if np.linalg.det(hs) <= 0 or hs[0, 0] <= 0:
                break
            step = np.linalg.solve(hs, g)
            p = p - np.clip(step, -h, h)
        v = float(f.evaluate_angles(p[0], p[1]).real)
        if v < best_v:
            best_v, best_s, best_t = v, float(p[0]), float(p[1])
    argmin = {
        "z": jsonio.encode_complex_array(np.exp(1j * best_s)),
        "w": jsonio.encode_complex_array(np.exp(1j * best_t)),
        "angles": [best_s % (2 * np.pi), best_t % (2 * np.pi)],
    }
    return SepStarReport(best_v >= -tol, best_v, argmin, float(tol))


# ---------------------------------------------------------------------------
# Entanglement certificates for Toeplitz (x) polynomial elements


def _fr_atom_coeffs(root_angles: np.ndarray, m: int) -> np.ndarray:
    """Rows: coefficients of ``|prod(z - w_i)|**2`` normalised to ``f_hat(0) = 1``."""
    h = _xi_from_angles(root_angles)[:, ::-1]  # low-to-high, unit norm so f_hat(0) = 1
    out = np.zeros((h.shape[0], 2 * m - 1), dtype=complex)
    for a in range(h.shape[1]):
        for b in range(h.shape[1]):
            # h_a conj(h_b) contributes to z**(a - b)
            out[:, a - b + m - 1] += h[:, a] * h[:, b].conj()
    return out


def _generator_values(y_array: np.ndarray, lam_angles, root_angles, m: int) -> np.ndarray:
    """``<y, T_n(lam) (x) f_roots>`` on the product of the two parameter lists."""
    n = (y_array.shape[0] + 1) // 2
    ell = np.arange(-n + 1, n)
    lam = np.exp(1j * np.multiply.outer(np.asarray(lam_angles, dtype=float), ell))
    fr = _fr_atom_coeffs(np.atleast_2d(root_angles), m)
    return np.real(lam @ y_array.conj() @ fr.T)


def _generator_coords(lam_angles, root_angles, n: int, m: int) -> np.ndarray:
    ell = np.arange(-n + 1, n)
    fr = _fr_atom_coeffs(np.atleast_2d(root_angles), m)
    rows = []
    for a in np.atleast_1d(lam_angles):
        lam = np.exp(1j * a * ell)
        rows.extend(hermitian_coordinates(np.outer(lam, g)) for g in fr)
    return np.array(rows)


@dataclass(frozen=True)
class ContinuumReport:
    min_value: float
    lam_angle: float
    root_angles: np.ndarray
    candidates: list = field(default_factory=list)


def continuum_minimum(
    y_array: np.ndarray, m: int, lam_grid: int = 96, root_grid: int = 48, starts: int = 20
) -> ContinuumReport:
    """Minimise ``<y, T_n(lam) (x) f>`` over the circle and extremal ``f`` of band m.

    Grid scan, then coordinate descent with golden-section line searches
    from the ``starts`` best grid points.  Every local minimum found is
    returned in ``candidates`` as ``(value, lam_angle, root_angles)``.
    """
    lam_angles = 2 * np.pi * np.arange(lam_grid) / lam_grid
    roots = _angle_tuples(m - 1, root_grid)
    vals = _generator_values(y_array, lam_angles, roots, m)

    def fun(p):
        return float(_generator_values(y_array, p[:1], p[None, 1:], m)[0, 0])

    step = 2 * np.pi / min(lam_grid, root_grid)
    candidates = []
    for idx in np.argsort(vals, axis=None)[:starts]:
        i, j = np.unravel_index(int(idx), vals.shape)
        p, v = _coordinate_descent(fun, np.concatenate([[lam_angles[i]], roots[j]]), step, rounds=6, iterations=50)
        candidates.append((v, float(p[0] % (2 * np.pi)), np.mod(p[1:], 2 * np.pi)))
    candidates.sort(key=lambda c: c[0])
    v, a, r = candidates[0]
    return ContinuumReport(v, a, r, candidates)


@dataclass(frozen=True)
class WitnessCertificate:
    """Functional ``y`` (unit norm, real tensor coordinates) separating ``target`` from the separable cone."""

    n: int
    m: int
    functional: np.ndarray
    target: np.ndarray
    pairing: float
    lp_margin: float
    continuum_min: float
    argmin: dict
    valid: bool

    @property
    def target_hash(self) -> str:
        return jsonio.sha256_hex(jsonio.encode_complex_array(self.target))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "functional": [float(v) for v in self.functional],
            "target": jsonio.encode_complex_array(self.target),
            "pairing": self.pairing,
            "lp_margin": self.lp_margin,
            "continuum_min": self.continuum_min,
            "argmin": self.argmin,
            "valid": self.valid,
            "target_hash": self.target_hash,
        }


@dataclass(frozen=True)
class CertifyResult:
    status: str  # "separable" | "entangled" | "unknown"
    certificate: Optional[WitnessCertificate] = None
    weights: list = field(default_factory=list)  # (weight, lam, roots)
    residual: float = 0.0
    rounds: int = 0

    def to_json(self) -> dict:
        out = {"status": self.status, "rounds": self.rounds}
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_json()
        if self.status == "separable":
            out["weights"] = [
                {
                    "weight": float(w),
                    "lambda": jsonio.encode_complex_array(lam),
                    "roots": [jsonio.encode_complex_array(r) for r in roots],
                }
                for w, lam, roots in self.weights
            ]
            out["residual"] = self.residual
        return out


def entanglement_certify(
    x: ToeplitzFRTensor,
    lam_grid: int = 48,
    root_grid: int = 24,
    tol: float = 1e-9,
    max_rounds: int = 6,
) -> CertifyResult:
    """Decide separability of ``x`` by LP, or certify entanglement with a witness.

    Generators are ``T_n(lam) (x) f`` with ``lam`` on a grid and ``f`` either
    the constant or an extremal nonnegative polynomial with gridded roots,
    all normalised to ``f_hat(0) = 1``.  A feasible LP gives separable
    weights.  Otherwise the unit-norm Farkas functional is minimised over
    the continuum of generators; the minimisers found are added as new
    generators and the LP is solved again.  Any remaining negative dip is
    removed by adding a multiple of the functional that reads the
    ``r_0 (x) chi_0`` coordinate, which is 1 on every generator.  The result
    is a valid certificate when the repaired functional still pairs
    negatively with ``x``.
    """
    n, m = x.n, x.m
    if not x.is_hermitian:
        raise NonHermitian("x must satisfy C[-l, -k] = conj C[l, k]")
    if m < 2:
        raise DimensionMismatch("the polynomial factor needs band >= 2")
    target = hermitian_coordinates(x.coeffs)
    scale = float(np.linalg.norm(target))
    lam_angles = 2 * np.pi * np.arange(lam_grid) / lam_grid
    params = [(a, r) for a in lam_angles for r in _angle_tuples(m - 1, root_grid)]
    gens = [hermitian_coordinates(np.outer(np.exp(1j * a * np.arange(-n + 1, n)), _fr_atom_coeffs(r[None], m)[0]))
            for a, r in params]
    const = np.zeros(2 * m - 1)
    const[m - 1] = 1.0
    for a in lam_angles:
        gens.append(hermitian_coordinates(np.outer(np.exp(1j * a * np.arange(-n + 1, n)), const)))
        params.append((a, None))
    gens = np.array(gens)

    y = None
    cont = None
    for rounds in range(1, max_rounds + 1):
        out = solve_conic_lp(gens, target, tol=tol * max(1.0, scale))
        if out.feasible:
            weights = []
            for idx in np.flatnonzero(out.weights > 0):
                a, r = params[idx]
                roots = [] if r is None else [complex(np.exp(1j * t)) for t in r]
                weights.append((float(out.weights[idx]), complex(np.exp(1j * a)), roots))
            return CertifyResult("separable", None, weights, out.residual, rounds)
        y = out.farkas / np.linalg.norm(out.farkas)
        y_array = from_hermitian_coordinates(y, x.coeffs.shape)
        cont = continuum_minimum(y_array, m)
        if cont.min_value >= -CONTINUUM_RTOL:
            break
        new = [(a, r) for v, a, r in cont.candidates if v < -CONTINUUM_RTOL]
        gens = np.vstack([gens, np.array([_generator_coords([a], r[None], n, m)[0] for a, r in new])])
        params.extend(new)

    # Repair: y + eta * e_00 is >= 0 on every generator once eta >= -min.
    e00 = hermitian_coordinates(np.pad([[1.0]], ((n - 1, n - 1), (m - 1, m - 1))))
    eta = max(0.0, -cont.min_value) + (SHIFT_BUFFER if cont.min_value < 0 else 0.0)
    y = y + eta * e00
    y = y / np.linalg.norm(y)
    y_array = from_hermitian_coordinates(y, x.coeffs.shape)
    cont = continuum_minimum(y_array, m)
    pairing = float(y @ target)
    margin = -pairing / max(scale, 1e-300)
    valid = bool(cont.min_value >= -CONTINUUM_RTOL and margin > 0)
    cert = WitnessCertificate(
        n=n,
        m=m,
        functional=y,
        target=np.array(x.coeffs),
        pairing=pairing,
        lp_margin=float(margin),
        continuum_min=float(cont.min_value),
        argmin={
            "lambda": jsonio.encode_complex_array(np.exp(1j * cont.lam_angle)),
            "roots": [jsonio.encode_complex_array(np.exp(1j * t)) for t in cont.root_angles],
        },
        valid=valid,
    )
    return CertifyResult("entangled" if valid else "unknown", cert, [], 0.0, rounds)


def verify_certificate(doc: dict, recheck_continuum: bool = True) -> dict:
    """Re-check a certificate from its JSON alone.

    Recomputes the pairing with the recorded target, the relative margin,
    the value at the recorded argmin, and (optionally) the continuum
    minimum of the functional.  No LP is solved.
    """
    n = jsonio.require(doc, "n", int)
    m = jsonio.require(doc, "m", int)
    y = np.asarray(jsonio.require(doc, "functional", list), dtype=float)
    target = jsonio.decode_complex_array(jsonio.require(doc, "target", list), 2)
    if target.shape != (2 * n - 1, 2 * m - 1) or y.size != target.size:
        raise InputFormatError("functional and target sizes disagree with n, m")
    if jsonio.sha256_hex(jsonio.encode_complex_array(target)) != doc.get("target_hash"):
        raise InputFormatError("target hash mismatch")
    coords = hermitian_coordinates(target)
    pairing = float(y @ coords)
    margin = -pairing / max(float(np.linalg.norm(coords)), 1e-300)
    y_array = from_hermitian_coordinates(y, target.shape)
    arg = jsonio.require(doc, "argmin", dict)
    lam = jsonio.decode_complex_array(arg["lambda"], 0)
    roots = [jsonio.decode_complex_array(r, 0) for r in arg["roots"]]
    at_argmin = float(_generator_values(y_array, [np.angle(lam)], np.angle(np.array(roots))[None], m)[0, 0])
    out = {
        "pairing": pairing,
        "lp_margin": margin,
        "pairing_ok": bool(pairing <= -doc["lp_margin"] * np.linalg.norm(coords) * (1 - 1e-9) and margin > 0),
        "argmin_value": at_argmin,
    }
    cmin = continuum_minimum(y_array, m).min_value if recheck_continuum else doc["continuum_min"]
    out["continuum_min"] = float(cmin)
    out["continuum_ok"] = bool(cmin >= -CONTINUUM_RTOL)
    out["valid"] = out["pairing_ok"] and out["continuum_ok"]
    return out
