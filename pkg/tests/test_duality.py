import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpedl.arithmetics import GOLDEN
from qpedl.cocycle import Cocycle
from qpedl.duality import build_dual_eigenfunction, diagonalize_near_identity, duality_identity_check
from qpedl.errors import InconsistentInput, RationalRotation
from qpedl.kam import reduce_to_constant, rotation_tune
from qpedl.localization import C_ELL_FLOOR, certify_good
from qpedl.trigpoly import TrigPoly


def _diag_error(t, nu, rho):
    U, branch = diagonalize_near_identity((t, nu), rho)
    G = np.array([[1j * t, nu], [np.conj(nu), -1j * t]])
    D = np.linalg.inv(U) @ G @ U
    return U, branch, float(np.abs(D - np.diag([1j * rho, -1j * rho])).max())


def test_diagonalize_trivial():
    U, branch, err = _diag_error(0.4, 0j, 0.4)
    assert branch == "lemma" and np.array_equal(U, np.eye(2))
    U, branch, err = _diag_error(0.4, 0j, -0.4)
    assert branch == "swap" and err < 1e-15


def test_diagonalize_lemma_estimate():
    t, nu = 0.5, 0.01 + 0j
    rho = math.sqrt(t * t - abs(nu) ** 2)
    U, branch, err = _diag_error(t, nu, rho)
    assert branch == "lemma" and err < 1e-14
    assert np.linalg.norm(U - np.eye(2), 2) <= abs(nu / rho)
    assert abs(np.linalg.det(U) - 1) < 1e-14


@pytest.mark.parametrize("t,sign", [(0.5, -1), (-0.5, 1)])
def test_diagonalize_conjugated_branch(t, sign):
    nu = 0.01 - 0.005j
    rho = sign * math.sqrt(t * t - abs(nu) ** 2)
    U, branch, err = _diag_error(t, nu, rho)
    assert branch == "conjugated" and err < 1e-14
    assert abs(np.linalg.det(U) - 1) < 1e-14


def test_diagonalize_general_and_inconsistent():
    t, nu = 0.3, 0.2 + 0j
    rho = math.sqrt(t * t - 0.04)
    _, branch, err = _diag_error(t, nu, rho)
    assert branch == "unitary" and err < 1e-12
    with pytest.raises(InconsistentInput):
        diagonalize_near_identity((0.5, 0.01), 0.2)


def _random_poly(rng, d, band, count, real=False):
    modes = {}
    for _ in range(count):
        k = tuple(int(v) for v in rng.integers(-band, band + 1, d))
        modes[k] = rng.standard_normal() + (0 if real else 1j * rng.standard_normal())
    return TrigPoly.from_modes(modes, (2 * band + 3,) * d)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 2))
def test_identity_random(seed, d):
    rng = np.random.default_rng(seed)
    z = _random_poly(rng, d, 3, 6)
    V = _random_poly(rng, d, 2, 4)
    err = duality_identity_check(z, V, rng.uniform(0.5, 5), rng.uniform(size=d), rng.uniform(), rng.uniform(-3, 3))
    assert err <= 1e-12


def test_identity_constant_and_band_edge():
    z = TrigPoly.from_modes({(0,): 1.0}, (5,))
    V = TrigPoly.from_modes({(0,): 0.0}, (5,))
    assert duality_identity_check(z, V, 2.0, GOLDEN, 0.3, 0.7) == 0.0
    band = 8
    z = TrigPoly.from_modes({(band,): 1.0, (-band,): 0.5j}, (2 * band + 1,))
    V = TrigPoly.from_modes({(3,): 0.4, (-3,): 0.4}, (7,))
    assert duality_identity_check(z, V, 1.5, GOLDEN, 0.11, -0.4) <= 1e-12


def test_free_dual_eigenfunction_is_a_delta():
    rho, lam = 0.3, 3.0
    E = 2 * math.cos(2 * math.pi * rho)
    V = TrigPoly.cosine(0.0)
    res = reduce_to_constant(Cocycle.schrodinger(E, V, GOLDEN), force=True)
    assert len(res.trace) == 1
    de = build_dual_eigenfunction(res, V, lam, GOLDEN, E, rho)
    assert de.residual <= 1e-10
    assert de.energy == pytest.approx(lam * E)
    u = np.abs(de.coefficients)
    assert u.max() == pytest.approx(1.0) and np.sort(u)[-2] < 1e-12
    cert = certify_good(de.coefficients, 1.0, 5, de.box)
    assert cert.ell == (0,) and cert.C_ell == C_ELL_FLOOR


def test_rational_rotation_rejected():
    # 2 rho = alpha is resonant with the frequency
    rho = GOLDEN / 2
    E = 2 * math.cos(2 * math.pi * rho)
    V = TrigPoly.cosine(0.0)
    res = reduce_to_constant(Cocycle.schrodinger(E, V, GOLDEN), force=True)
    with pytest.raises(RationalRotation):
        build_dual_eigenfunction(res, V, 2.0, GOLDEN, E, rho)


@pytest.mark.slow
def test_end_to_end_dual_amo():
    lam, alpha = math.e ** 4, math.sqrt(5) - 2
    target = GOLDEN / 2
    E = rotation_tune(lambda e: Cocycle.amo(e, 1 / lam, alpha), target, (-2.5, 2.5))
    res = reduce_to_constant(Cocycle.amo(E, 1 / lam, alpha), h=0.1, target_h=0.05, rot_dc=(0.05, 2.0),
                             rho=target, force=True)
    assert res.final.eps < 1e-24
    de = build_dual_eigenfunction(res, TrigPoly.cosine(2.0), lam, alpha, E, target)
    assert de.residual <= 1e-6
    cert = certify_good(de.coefficients, 0.85 * math.log(lam), 10, de.box)
    assert cert.fit_residual <= 0
