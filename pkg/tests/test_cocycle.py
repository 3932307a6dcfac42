import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpedl.arithmetics import GOLDEN
from qpedl.cocycle import (Cocycle, acceleration_probe, degree_probe, lyapunov, rotation_number, transfer,
                           uh_probe)
from qpedl.eigensolver import eigen_all
from qpedl.errors import GridTooCoarse
from qpedl.kam import synthetic_reducible
from qpedl.operators import build_amo
from qpedl.sl2 import det2, expm_traceless, rot
from qpedl.trigpoly import TrigPoly

DIAG = np.diag([2.0, 0.5])


def test_transfer_constant_power():
    a = np.array([[2.0, 1.0], [1.0, 1.0]])
    c = Cocycle.constant(a, GOLDEN)
    assert np.allclose(transfer(c, 0.3, 3), a @ a @ a)
    assert np.allclose(transfer(c, 0.3, 0), np.eye(2))
    assert np.allclose(transfer(c, 0.3, -2), np.linalg.inv(a @ a))


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=0, max_value=1), st.integers(min_value=-20, max_value=20),
       st.integers(min_value=-20, max_value=20), st.floats(min_value=-3, max_value=3))
def test_cocycle_identity_and_det(x, n, m, E):
    c = Cocycle.amo(E, 1.3, GOLDEN)
    lhs = transfer(c, x, n + m)
    rhs = transfer(c, x + m * GOLDEN, n) @ transfer(c, x, m)
    # round-off in a product of k matrices scales with the product of their norms
    scale = np.linalg.norm(transfer(c, x + m * GOLDEN, n), 2) * np.linalg.norm(transfer(c, x, m), 2)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1, abs(n) + abs(m)) * scale
    # det of a product cancels down to eps * ||A_n||^2
    k = max(1, abs(n + m))
    assert abs(det2(lhs) - 1) <= max(1e-9 * k, 1e-14 * k * np.linalg.norm(lhs, 2) ** 2)


def test_free_cocycle_is_elliptic():
    omega = 0.17
    c = Cocycle.schrodinger(2 * math.cos(2 * math.pi * omega), TrigPoly.cosine(0.0), GOLDEN)
    for n in (5, 50, 500):
        ev = np.linalg.eigvals(transfer(c, 0.0, n))
        assert np.allclose(np.abs(ev), 1.0, atol=1e-8)


def test_lyapunov_constants():
    assert lyapunov(Cocycle.constant(DIAG, GOLDEN), 10_000).value == pytest.approx(math.log(2), abs=1e-6)
    assert lyapunov(Cocycle.constant(rot(0.3), GOLDEN), 10_000).value == pytest.approx(0.0, abs=1e-6)
    with pytest.raises(ValueError):
        lyapunov(Cocycle.constant(DIAG, GOLDEN), 10)


def test_lyapunov_amo_supercritical():
    dec = eigen_all(build_amo(3.0, GOLDEN, 0.0, 60))
    E = float(dec.values[60])
    est = lyapunov(Cocycle.amo(E, 3.0, GOLDEN), 100_000, 4)
    assert est.value == pytest.approx(math.log(3), rel=0.02)
    assert est.stderr >= 0


def test_lyapunov_inverse_cocycle():
    c = Cocycle.amo(0.7, 2.0, GOLDEN)
    a = lyapunov(c, 50_000, 2).value
    b = lyapunov(c.inverse(), 50_000, 2).value
    assert a == pytest.approx(b, rel=1e-2)


def test_rotation_constant():
    assert rotation_number(Cocycle.constant(rot(0.3), GOLDEN), 10_000) == pytest.approx(0.3, abs=1e-4)


def test_rotation_outside_spectrum():
    # convention rho(R_phi) = phi: 0 above the spectrum, 1/2 below its bottom
    assert rotation_number(Cocycle.amo(12.0, 2.0, GOLDEN), 10_000) == pytest.approx(0.0, abs=1e-9)
    assert rotation_number(Cocycle.amo(-12.0, 2.0, GOLDEN), 10_000) == pytest.approx(0.5, abs=1e-9)


@pytest.mark.parametrize("E", [0.0, 1.3, -2.1])
def test_rotation_matches_eigenvalue_count(E):
    N = 400
    ids = np.mean([np.mean(eigen_all(build_amo(3.0, GOLDEN, th, N)).values < E) for th in (0.0, 0.37)])
    rho = rotation_number(Cocycle.amo(E, 3.0, GOLDEN), 100_000)
    assert rho == pytest.approx((1 - ids) / 2, abs=1e-2)


def test_rotation_shift_under_degree_conjugacy():
    alpha = math.sqrt(5) - 2
    for n, xi in ((1, 0.2), (2, 0.13), (-1, 0.31)):
        c, _ = synthetic_reducible(alpha, xi, n)
        rho = rotation_number(c, 50_000)
        expect = (xi + n * alpha / 2) % 1.0
        assert min(abs(rho - expect), 1 - abs(rho - expect)) < 1e-6


def test_degree_probe_cases():
    n0 = np.array([2, -1])
    assert degree_probe(lambda p: rot(p @ n0 / 2), d=2).tolist() == [2, -1]
    assert degree_probe(lambda p: np.broadcast_to(DIAG, (len(p), 2, 2)), d=1).tolist() == [0]
    with pytest.raises(GridTooCoarse):
        degree_probe(lambda p: rot(p @ np.array([200]) / 2), grid=64, d=1)


@settings(max_examples=20, deadline=None)
@given(st.integers(-3, 3), st.integers(-3, 3), st.integers(-3, 3), st.integers(-3, 3),
       st.floats(-0.3, 0.3), st.floats(-0.3, 0.3))
def test_degree_additive(a1, a2, b1, b2, s, t):
    n1, n2 = np.array([a1, a2]), np.array([b1, b2])

    def Y(p, amp):
        x = amp * np.cos(2 * np.pi * p[:, 0])
        y = amp * np.sin(2 * np.pi * p[:, 1])
        return np.stack([np.stack([x, y], -1), np.stack([y, -x], -1)], -2)

    B1 = lambda p: rot(p @ n1 / 2) @ expm_traceless(Y(p, s))
    B2 = lambda p: expm_traceless(Y(p, t)) @ rot(p @ n2 / 2)
    prod = lambda p: B1(p) @ B2(p)
    d1, d2, d12 = (degree_probe(f, grid=512, d=2) for f in (B1, B2, prod))
    assert (d12 == d1 + d2).all()
    assert d1.tolist() == n1.tolist()


def test_uh_probe():
    assert uh_probe(Cocycle.constant(DIAG, GOLDEN))
    assert not uh_probe(Cocycle.constant(rot(0.2), GOLDEN))
    radius = float(np.max(np.abs(eigen_all(build_amo(3.0, GOLDEN, 0.0, 60)).values)))
    assert uh_probe(Cocycle.amo(radius + 1, 3.0, GOLDEN))


def test_acceleration_constant_is_flat():
    pts = acceleration_probe(Cocycle.constant(DIAG, GOLDEN), [0.0, 0.1, 0.2], 5_000)
    assert all(v == pytest.approx(math.log(2), abs=1e-6) for _, v in pts)


def test_acceleration_subcritical_and_supercritical():
    eps = [0.0, 0.03, 0.06]
    sub = acceleration_probe(Cocycle.amo(0.3, 0.5, GOLDEN), eps, 20_000)
    assert all(v < 2e-2 for _, v in sub)
    sup = acceleration_probe(Cocycle.amo(0.3, 3.0, GOLDEN), [0.05, 0.1, 0.15], 20_000)
    for e, v in sup:
        assert v == pytest.approx(math.log(3) + 2 * math.pi * e, rel=0.03)
