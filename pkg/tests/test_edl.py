import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpedl.arithmetics import GOLDEN
from qpedl.edl import (amo_schedule, c_gamma, criterion_budget, criterion_sums, dynamical_kernel, edl_profile,
                       evolve_column, evolve_overlap, overlap_envelope)
from qpedl.eigensolver import eigen_all, eigen_window
from qpedl.errors import IncompleteDecomposition
from qpedl.operators import build_amo, build_md_longrange


@pytest.fixture(scope="module")
def amo_dec():
    return eigen_all(build_amo(2.0, GOLDEN, 0.21, 25))


def test_kernel_dominates_overlaps(amo_dec):
    T = dynamical_kernel(amo_dec).T
    rng = np.random.default_rng(0)
    for t in np.concatenate([[0.0], np.logspace(-2, 4, 30)]):
        k, l = rng.integers(0, T.shape[0], 2)
        assert abs(evolve_overlap(amo_dec, k, l, t)) <= T[k, l] + 1e-10
        col = np.abs(evolve_column(amo_dec, l, t))
        assert np.all(col <= T[:, l] + 1e-10)
        assert np.sum(col ** 2) == pytest.approx(1.0, abs=1e-10)


def test_envelope_below_kernel(amo_dec):
    T = dynamical_kernel(amo_dec).T
    o = 25
    env = overlap_envelope(amo_dec, o, np.concatenate([[0.0], np.logspace(-1, 3, 40)]))
    assert np.all(env <= T[:, o] + 1e-10)
    assert env[o] == pytest.approx(1.0)


def test_kernel_md():
    dec = eigen_all(build_md_longrange(4.0, (math.sqrt(2) - 1, math.sqrt(3) - 1), 0.1, 3))
    K = dynamical_kernel(dec)
    assert K.box.d == 2 and K.box.N == 3
    assert np.allclose(K.T, K.T.T)
    assert np.all(np.diag(K.T) >= 1 - 1e-12)


def test_incomplete_decomposition():
    op = build_amo(2.0, GOLDEN, 0.0, 20)
    part = eigen_window(op, (-0.5, 0.5))
    with pytest.raises(IncompleteDecomposition):
        dynamical_kernel(part)


def test_free_profile_does_not_decay():
    prof = edl_profile(0.0, GOLDEN, grid=20, N=40, bootstrap=20)
    assert abs(prof.gamma_hat) < 1e-6


def test_profile_rate_and_phase_offset_stability():
    a = edl_profile(2.0, GOLDEN, grid=40, N=40, bootstrap=100, offset=0.0)
    b = edl_profile(2.0, GOLDEN, grid=40, N=40, bootstrap=100, offset=0.5)
    assert a.gamma_hat == pytest.approx(math.log(2), rel=0.2)
    assert a.ci[0] <= a.gamma_hat <= a.ci[1]
    width = max(a.ci[1] - a.ci[0], b.ci[1] - b.ci[0])
    assert abs(a.gamma_hat - b.gamma_hat) <= width
    r, k = a.radial()
    assert r[0] == 0 and k[0] == pytest.approx(1.0)
    rows = list(a.rows())
    assert len(rows) == a.box.size


def test_profile_argument_checks():
    with pytest.raises(ValueError):
        edl_profile(2.0, GOLDEN, grid=5, N=20)
    with pytest.raises(ValueError):
        edl_profile(2.0, GOLDEN, grid=20, N=20, window=(5, 30))


def test_c_gamma():
    assert c_gamma(1.0) == pytest.approx(sum(math.exp(-j) for j in range(200)))


def test_criterion_geometric_oracle():
    s = criterion_sums(0, 0, 0, 1.0)
    assert s.lhs[0] == pytest.approx(1 / math.tanh(1), rel=1e-12)
    assert all(s.holds)


def test_criterion_large_gamma_leading_term():
    g = 12.0
    s = criterion_sums([0, 0], [2, 1], [1, 0], g)
    # minimisers of |p-k|+|q-k| fill the box between p and q: (2+1)(1+1) sites
    assert s.lhs[0] == pytest.approx(6 * math.exp(-3 * g), rel=1e-3)
    assert s.lhs[0] <= (3 + 1) ** 2 * math.exp(-3 * g)
    assert all(s.holds)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 2), st.integers(0, 2 ** 32 - 1), st.floats(0.05, 3.0))
def test_criterion_inequalities_hold(d, seed, gamma):
    rng = np.random.default_rng(seed)
    p, q, ell = (rng.integers(-6, 7, d) for _ in range(3))
    assert all(criterion_sums(p, q, ell, gamma).holds)


def test_criterion_rejects_nonpositive_gamma():
    with pytest.raises(ValueError):
        criterion_sums(0, 0, 0, 0.0)


def test_budget_cases():
    zero = criterion_budget([(0.0, 1.0, 1.0)] * 10)
    assert zero.total == 0.0 and zero.convergent
    assert not criterion_budget([(1.0, 0.0, 1.0)] * 50).convergent
    # the polylog prefactor peaks near step 35; the verdict needs the decaying tail
    amo = criterion_budget(amo_schedule(200))
    assert amo.convergent and math.isfinite(amo.total)
    assert amo.partial_sums[-1] == pytest.approx(amo.partial_sums[-50], rel=1e-6)
    with pytest.raises(ValueError):
        criterion_budget([(1.0, 0.0, 0.1), (1.0, 0.0, 0.2)])
