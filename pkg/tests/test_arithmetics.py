import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpedl.arithmetics import (GOLDEN, FrequencyVector, cf_expand, certify_dc, dc_alpha_check, lattice_ball,
                               torus_dist)
from qpedl.errors import DegenerateAtPrecision, NotInUnitInterval, RationalResonance

alphas = st.floats(min_value=1e-3, max_value=1 - 1e-3).filter(lambda a: a not in (0.5, 0.25, 0.75))


def test_golden_is_fibonacci():
    cf = cf_expand(GOLDEN, 10)
    assert cf.partial_quotients == (1,) * 10
    assert cf.q[1:] == [1, 2, 3, 5, 8, 13, 21, 34, 55, 89]


def test_pi_minus_three_against_high_precision_division():
    mpmath.mp.dps = 50
    x = mpmath.pi - 3
    oracle = []
    for _ in range(5):
        x = 1 / x
        a = int(mpmath.floor(x))
        oracle.append(a)
        x -= a
    cf = cf_expand(math.pi - 3, 8)
    assert cf.partial_quotients[:5] == tuple(oracle) == (7, 15, 1, 292, 1)
    p1, q1 = cf.convergents[1]
    assert (p1, q1) == (1, 7)
    assert abs(math.pi - 3 - 1 / 7) < 1 / (7 * cf.q[2])


def test_rejects_outside_unit_interval():
    for bad in (0.0, 1.0, -0.2, 1.7, float("nan")):
        with pytest.raises(NotInUnitInterval):
            cf_expand(bad, 4)
    with pytest.raises(DegenerateAtPrecision):
        cf_expand(1e-16, 4)


def test_rational_halts_early():
    cf = cf_expand(0.375, 20)
    assert cf.partial_quotients == (2, 1, 2)
    assert Fraction(*cf.convergents[-1]) == Fraction(3, 8)


@settings(max_examples=200, deadline=None)
@given(alphas, st.integers(min_value=2, max_value=25))
def test_convergent_invariants(alpha, depth):
    cf = cf_expand(alpha, depth)
    p, q = cf.p, cf.q
    x = Fraction(alpha)
    for n in range(1, len(q)):
        assert p[n] * q[n - 1] - p[n - 1] * q[n] == (-1) ** (n - 1)
        if n >= 2:
            assert q[n] == cf.partial_quotients[n - 1] * q[n - 1] + q[n - 2]
            assert q[n] > q[n - 1]
    for n in range(1, len(q) - 1):
        err = x - Fraction(p[n], q[n])
        exact_next = Fraction(p[n + 1], q[n + 1]) == x  # expansion terminated on the binary value
        bound = Fraction(1, q[n] * q[n + 1])
        assert abs(err) <= bound if exact_next else abs(err) < bound
        assert (err > 0) == (n % 2 == 0) or err == 0
        # 1/(2 q_{n+1}) <= ||q_n alpha|| <= 1/q_{n+1}, exactly on the stored rational
        d = abs(q[n] * x - p[n])
        assert Fraction(1, 2 * q[n + 1]) <= d <= Fraction(1, q[n + 1])


def test_beta_estimate_golden():
    cf = cf_expand(GOLDEN, 30)
    qs = cf.q
    expected = max(math.log(qs[n + 1]) / qs[n] for n in range(1, len(qs) - 1))
    assert cf.beta_estimate == pytest.approx(expected)
    assert cf.beta_estimate == pytest.approx(math.log(2), rel=1e-12)  # q_1 = 1, q_2 = 2


@pytest.mark.parametrize("x, want", [(0.0, 0.0), (0.75, 0.25), (-1.3, 0.3)])
def test_torus_dist_examples(x, want):
    assert torus_dist(x) == pytest.approx(want, abs=1e-15)


@given(st.floats(min_value=-1e6, max_value=1e6))
def test_torus_dist_symmetries(x):
    d = torus_dist(x)
    assert 0 <= d <= 0.5
    assert torus_dist(-x) == pytest.approx(d, abs=1e-9)
    assert torus_dist(x + 1) == pytest.approx(d, abs=1e-9)


def _scan_kappa(alpha, tau, bound):
    best = math.inf
    a = np.atleast_1d(alpha)
    for n in lattice_ball(len(a), bound):
        s = float(np.abs(n).sum())
        v = abs(float(n @ a)) % 1.0
        best = min(best, min(v, 1 - v) * s ** tau)
    return best


def test_certify_dc_golden_matches_scan():
    k = certify_dc(GOLDEN, 1.5, 100)
    assert k > 0
    assert k == pytest.approx(_scan_kappa(GOLDEN, 1.5, 100), rel=1e-12)


def test_certify_dc_rational_resonance():
    with pytest.raises(RationalResonance):
        certify_dc(1 / 3, 1.5, 10)


def test_certify_dc_two_dim():
    a = (math.sqrt(2) - 1, math.sqrt(3) - 1)
    k = certify_dc(a, 2.5, 50)
    assert k > 0
    assert k == pytest.approx(_scan_kappa(a, 2.5, 50), rel=1e-12)
    fv = FrequencyVector(a).certified(2.5, 50)
    assert fv.dio_kappa == k and fv.search_bound == 50


@settings(max_examples=30, deadline=None)
@given(alphas, st.integers(min_value=1, max_value=60))
def test_certify_dc_monotone_in_bound(alpha, bound):
    try:
        k1 = certify_dc(alpha, 1.5, bound)
        k2 = certify_dc(alpha, 1.5, bound + 10)
    except RationalResonance:
        return
    assert k2 <= k1


def test_dc_alpha_check_examples():
    assert not dc_alpha_check(GOLDEN / 2, GOLDEN, 1e-6, 1.0, 10)
    assert not dc_alpha_check(0.123, GOLDEN, 0.6, 1.0, 10)
    phi = GOLDEN / 4
    ms = np.arange(-200, 201)
    margin = min(torus_dist(2 * phi - m * GOLDEN) * (abs(m) + 1) ** 1.0 for m in ms)
    assert dc_alpha_check(phi, GOLDEN, 0.99 * margin, 1.0, 200)
    assert not dc_alpha_check(phi, GOLDEN, 1.01 * margin, 1.0, 200)
