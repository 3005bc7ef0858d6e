import copy
import json

import numpy as np
import pytest

from conftest import random_psd_toeplitz
from toeplitz_fr.duality import ToeplitzFRTensor, coefficient_reversal, maximally_entangled, universal_toeplitz
from toeplitz_fr.errors import InputFormatError, NonHermitian, NotRealValued
from toeplitz_fr.fejer_riesz import BivariateTrigPoly, TrigPoly, from_factor, tensor_product
from toeplitz_fr.numerics import psd_check
from toeplitz_fr.toeplitz import BlockToeplitz, ToeplitzMatrix, pure_toeplitz, r_basis
from toeplitz_fr.witness import (
    dual_extremal_vector,
    entanglement_certify,
    sep_star_test_2x2,
    sep_star_test_fr_fr,
    sep_star_test_toeplitz_toeplitz,
    sep_star_value_2x2,
    tt_product_value,
    two_by_two_element,
    verify_certificate,
)


def separable_tt(rng, n, m, atoms=3):
    c = np.zeros((2 * n - 1, 2 * m - 1), dtype=complex)
    for _ in range(atoms):
        lam, mu = np.exp(2j * np.pi * rng.random(2))
        c += rng.uniform(0.1, 1) * np.outer(pure_toeplitz(n, lam).coeffs, pure_toeplitz(m, mu).coeffs)
    return BlockToeplitz.from_toeplitz_coeffs(c, n, m)


def random_2x2_pair(rng):
    a0 = rng.uniform(0.5, 2)
    a1 = complex(rng.normal(), rng.normal()) * 0.5
    b = ToeplitzMatrix(2, rng.normal(size=3) + 1j * rng.normal(size=3))
    return ToeplitzMatrix(2, [np.conj(a1), a0, a1]), b


@pytest.fixture(scope="module")
def t2_result():
    return entanglement_certify(universal_toeplitz(2))


def test_dual_extremal_vector_annihilates_its_roots():
    roots = [1j, np.exp(0.4j)]
    v = dual_extremal_vector(roots)
    assert abs(np.linalg.norm(v.xi) - 1) < 1e-14
    for w in roots:
        assert v.state(pure_toeplitz(3, w)) < 1e-14
    assert v.state(pure_toeplitz(3, -1)) > 0.1


def test_2x2_examples():
    eye = ToeplitzMatrix(2, [0, 1, 0])
    assert sep_star_test_2x2(eye, ToeplitzMatrix(2, [0, 0, 0])).min_value == pytest.approx(1, abs=1e-12)
    rep = sep_star_test_2x2(eye, r_basis(2, 1) * 2)
    assert rep.member and abs(rep.min_value) <= 1e-9
    rep = sep_star_test_2x2(eye, r_basis(2, 1) * 3)
    assert not rep.member and abs(rep.min_value + 0.5) < 1e-9


def test_2x2_gap_instance_is_not_positive():
    eye = ToeplitzMatrix(2, [0, 1, 0])
    dense = two_by_two_element(eye, r_basis(2, 1) * 2).dense()
    lo = psd_check(dense).min_eigenvalue
    assert abs(lo + 1) <= 1e-10


def test_2x2_rejects_non_hermitian_a():
    with pytest.raises(NonHermitian):
        sep_star_test_2x2(ToeplitzMatrix(2, [1, 1, 0]), ToeplitzMatrix(2, [0, 0, 0]))


def test_negative_reports_are_reproducible(rng):
    seen = 0
    for _ in range(60):
        a, b = random_2x2_pair(rng)
        rep = sep_star_test_2x2(a, b)
        if not rep.member:
            seen += 1
            again = float(sep_star_value_2x2(a, b, rep.argmin["theta"]))
            assert abs(again - rep.min_value) <= 1e-10
            x = two_by_two_element(a, b)
            tt = sep_star_test_toeplitz_toeplitz(x)
            if not tt.member:
                again = tt_product_value(x, tt.argmin["xi_angles"], tt.argmin["eta_angles"])
                assert abs(again - tt.min_value) <= 1e-10
    assert seen > 5


def test_fr_fr_negative_report_reproducible():
    c = tensor_product(from_factor([1, -1]), from_factor([1, 1])).coeffs.copy()
    c[1, 1] -= 0.1
    rep = sep_star_test_fr_fr(BivariateTrigPoly(2, 2, c))
    assert not rep.member
    s, t = rep.argmin["angles"]
    again = BivariateTrigPoly(2, 2, c).evaluate_angles(s, t).real
    assert abs(again - rep.min_value) <= 1e-10 and abs(rep.min_value + 0.1) < 1e-8


def test_fr_fr_rejects_complex_valued():
    with pytest.raises(NotRealValued):
        sep_star_test_fr_fr(BivariateTrigPoly(2, 2, np.eye(3) * 1j))


def test_separable_elements_pass_sep_star(rng):
    for n, m in [(2, 2), (3, 2), (2, 3)]:
        for _ in range(15):
            assert sep_star_test_toeplitz_toeplitz(separable_tt(rng, n, m)).member
    for _ in range(30):
        x = separable_tt(rng, 2, 2)
        a = ToeplitzMatrix(2, [x.block(0)[0, 1], x.block(0)[0, 0], x.block(0)[1, 0]])
        b = ToeplitzMatrix(2, [x.block(1)[0, 1], x.block(1)[0, 0], x.block(1)[1, 0]])
        assert sep_star_test_2x2(a, b).member
    for _ in range(30):
        f = from_factor(rng.normal(size=3) + 1j * rng.normal(size=3))
        g = from_factor(rng.normal(size=2) + 1j * rng.normal(size=2))
        assert sep_star_test_fr_fr(tensor_product(f, g)).member


def test_2x2_agrees_with_general_test(rng):
    checked = 0
    for _ in range(80):
        a, b = random_2x2_pair(rng)
        rep = sep_star_test_2x2(a, b)
        if abs(rep.min_value) <= 1e-4:
            continue
        checked += 1
        assert sep_star_test_toeplitz_toeplitz(two_by_two_element(a, b)).member == rep.member
    assert checked > 50


def test_certify_universal_toeplitz(t2_result):
    assert t2_result.status == "entangled"
    cert = t2_result.certificate
    assert cert.valid and cert.lp_margin >= 1e-3 and cert.continuum_min >= -1e-8
    doc = json.loads(json.dumps(cert.to_json()))
    check = verify_certificate(doc)
    assert check["valid"]
    assert abs(check["pairing"] - cert.pairing) <= 1e-12


def test_certificate_json_is_checked(t2_result):
    doc = t2_result.certificate.to_json()
    tampered = copy.deepcopy(doc)
    tampered["target"][0][0] = 5.0
    with pytest.raises(InputFormatError):
        verify_certificate(tampered, recheck_continuum=False)
    flipped = copy.deepcopy(doc)
    flipped["functional"] = [-v for v in doc["functional"]]
    assert not verify_certificate(flipped)["valid"]


def test_certify_reversed_maximally_entangled(t2_result):
    x = coefficient_reversal(maximally_entangled(2))
    res = entanglement_certify(x)
    assert res.status == "entangled"
    assert np.allclose(res.certificate.functional, t2_result.certificate.functional)


def test_certify_product_atom_is_separable():
    c = np.outer(pure_toeplitz(2, 1).coeffs, [0.25, 0.5, 0.25])
    res = entanglement_certify(ToeplitzFRTensor(2, 2, c))
    assert res.status == "separable"
    assert max(w for w, _, _ in res.weights) >= 0.4
    assert res.residual <= 1e-8


def test_certify_rejects_non_hermitian():
    c = np.zeros((3, 3), dtype=complex)
    c[0, 0] = 1
    with pytest.raises(NonHermitian):
        entanglement_certify(ToeplitzFRTensor(2, 2, c))
