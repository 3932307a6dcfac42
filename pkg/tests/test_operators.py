import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpedl.arithmetics import GOLDEN
from qpedl.errors import BoxTooLarge, NonHermitianPotential
from qpedl.operators import (BoxIndex, build_amo, build_longrange, build_md_longrange, build_md_schrodinger,
                             gershgorin_bound)
from qpedl.trigpoly import TrigPoly

A2 = (math.sqrt(2) - 1, math.sqrt(3) - 1)


def free_dirichlet(N):
    k = np.arange(1, 2 * N + 2)
    return np.sort(2 * np.cos(k * np.pi / (2 * N + 2)))


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.integers(0, 5))
def test_box_flattening_round_trip(d, N):
    box = BoxIndex(d, N)
    sites = box.sites()
    assert len(sites) == box.size == (2 * N + 1) ** d
    idx = box.flat(sites)
    assert sorted(np.atleast_1d(idx).tolist()) == list(range(box.size))
    assert (box.unflat(idx) == sites).all()
    assert (sites[box.origin()] == 0).all()


def test_amo_free_and_shifted():
    N = 12
    op = build_amo(0.0, GOLDEN, 0.3, N)
    assert np.allclose(np.linalg.eigvalsh(op.matrix), free_dirichlet(N))
    op = build_amo(1.0, 0.0, 0.0, N)
    assert np.allclose(np.linalg.eigvalsh(op.matrix), 2 + free_dirichlet(N))
    op = build_amo(2.0, GOLDEN, 0.1, 40)
    assert np.abs(np.linalg.eigvalsh(op.matrix)).max() <= 6 + 1e-12
    assert (op.matrix == op.matrix.T).all()
    with pytest.raises(ValueError):
        build_amo(1.0, GOLDEN, 0.0, 0)


def test_amo_covariance():
    N, lam, th = 20, 1.7, 0.23
    a = build_amo(lam, GOLDEN, th, N).matrix
    b = build_amo(lam, GOLDEN, th + GOLDEN, N).matrix
    # H_{theta+alpha}(n, m) = H_theta(n+1, m+1) on the overlap
    assert np.allclose(b[:-1, :-1], a[1:, 1:], atol=1e-12)


def test_amo_evenness():
    e1 = np.linalg.eigvalsh(build_amo(2.5, GOLDEN, 0.17, 30).matrix)
    e2 = np.linalg.eigvalsh(build_amo(2.5, GOLDEN, -0.17, 30).matrix)
    assert np.allclose(e1, e2, atol=1e-10)


def test_longrange_cosine_equals_amo():
    a = build_longrange(TrigPoly.cosine(2.0), 1.3, GOLDEN, 0.2, 15).matrix
    b = build_amo(1.3, GOLDEN, 0.2, 15).matrix
    assert np.allclose(a, b, atol=1e-14)


def test_longrange_single_mode_is_pentadiagonal():
    V = TrigPoly.from_modes({2: 0.5, -2: 0.5}, (8,))
    m = build_longrange(V, 0.7, GOLDEN, 0.0, 10).matrix
    off = m - np.diag(np.diag(m))
    assert np.allclose(np.diag(off, 2), 0.5) and np.allclose(np.diag(off, -2), 0.5)
    off[np.arange(19), np.arange(2, 21)] = 0
    off[np.arange(2, 21), np.arange(19)] = 0
    assert not off.any()


def test_longrange_gershgorin_large_lambda():
    V = TrigPoly.from_modes({1: 0.3, -1: 0.3, 2: 0.1 + 0.05j, -2: 0.1 - 0.05j}, (8,))
    op = build_longrange(V, 50.0, GOLDEN, 0.1, 20)
    ev = np.linalg.eigvalsh(op.matrix)
    radius = 2 * (0.3 + abs(0.1 + 0.05j))
    diag = np.real(np.diag(op.matrix))
    for e in ev:
        assert np.min(np.abs(diag - e)) <= radius + 1e-9
    assert np.abs(ev).max() <= gershgorin_bound(op) + 1e-9


def test_longrange_rejects_nonhermitian():
    V = TrigPoly.from_modes({1: 1.0, -1: 0.5}, (8,))
    with pytest.raises(NonHermitianPotential):
        build_longrange(V, 1.0, GOLDEN, 0.0, 5)


def test_md_schrodinger():
    a = build_md_schrodinger(0.5, GOLDEN, 0.3, 10).matrix
    assert np.allclose(a, build_amo(0.5, GOLDEN, 0.3, 10).matrix)
    f = build_md_schrodinger(0.0, A2, (0.1, 0.2), 10).matrix
    assert np.allclose(np.linalg.eigvalsh(f), free_dirichlet(10))
    m = build_md_schrodinger(0.8, A2, (0.1, 0.2), 30).matrix
    assert np.abs(np.diag(m)).max() <= 2 * 2 * 0.8 + 1e-12


def test_md_longrange():
    N = 4
    f = build_md_longrange(0.0, A2, 0.0, N)
    one = free_dirichlet(N)
    expect = np.sort(np.add.outer(one, one).ravel())
    assert np.allclose(np.linalg.eigvalsh(f.matrix), expect)
    assert np.allclose(build_md_longrange(1.1, GOLDEN, 0.2, 9).matrix, build_amo(1.1, GOLDEN, 0.2, 9).matrix)


def test_md_longrange_small_box_brute_force():
    op = build_md_longrange(1.0, A2, 0.3, 1)
    assert op.matrix.shape == (9, 9)
    # brute-force assembly from the definition
    sites = [(i, j) for i in (-1, 0, 1) for j in (-1, 0, 1)]
    H = np.zeros((9, 9))
    for a, n in enumerate(sites):
        H[a, a] = 2 * math.cos(2 * math.pi * (0.3 + n[0] * A2[0] + n[1] * A2[1]))
        for b, m in enumerate(sites):
            if abs(n[0] - m[0]) + abs(n[1] - m[1]) == 1:
                H[a, b] = 1.0
    assert np.allclose(np.linalg.eigvalsh(op.matrix), np.linalg.eigvalsh(H))


def test_site_cap():
    with pytest.raises(BoxTooLarge):
        build_md_longrange(1.0, A2, 0.0, 40)


def test_dump(tmp_path):
    op = build_amo(1.0, GOLDEN, 0.0, 3)
    op.dump(str(tmp_path / "m.csv"))
    back = np.loadtxt(tmp_path / "m.csv", delimiter=",")
    assert np.array_equal(back, op.matrix)
    op.dump(str(tmp_path / "m.npy"))
    assert np.array_equal(np.load(tmp_path / "m.npy"), op.matrix)
