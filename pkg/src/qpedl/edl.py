"""Dynamical-localization kernels, phase-averaged EDL profiles and the
criterion-side sums used to bound them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .eigensolver import EigenDecomposition, eigen_all
from .errors import IncompleteDecomposition
from .operators import BoxIndex, TruncatedOperator, build_amo, build_md_longrange


@dataclass
class DynamicalKernel:
    box: BoxIndex
    T: np.ndarray
    source: dict = field(default_factory=dict)


def _box_of(dec: EigenDecomposition, box: BoxIndex | None) -> BoxIndex:
    if box is not None:
        return box
    n = dec.vectors.shape[0]
    d = len(dec.source.get("alpha", [0.0]))
    side = round(n ** (1.0 / d))
    return BoxIndex(d, (side - 1) // 2)


def dynamical_kernel(dec: EigenDecomposition, box: BoxIndex | None = None) -> DynamicalKernel:
    """T(k, l) = sum_m |u_m(k)| |u_m(l)|, which dominates sup_t |<d_k, e^{-itH} d_l>|."""
    if not dec.complete or dec.vectors.shape[1] != dec.vectors.shape[0]:
        raise IncompleteDecomposition("the kernel needs every eigenpair of the truncation")
    a = np.abs(dec.vectors)
    T = a @ a.T
    T = (T + T.T) / 2
    return DynamicalKernel(_box_of(dec, box), T, dict(dec.source))


def evolve_overlap(dec: EigenDecomposition, k: int, l: int, t: float) -> complex:
    """<d_k, e^{-itH} d_l> from the eigenpairs (flat site indices)."""
    u = dec.vectors
    return complex(np.sum(np.exp(-1j * t * dec.values) * np.conj(u[k]) * u[l]))


def evolve_column(dec: EigenDecomposition, l: int, t: float) -> np.ndarray:
    u = dec.vectors
    return u @ (np.exp(-1j * t * dec.values) * np.conj(u[l]))


def overlap_envelope(dec: EigenDecomposition, l: int, times) -> np.ndarray:
    """max over the sampled t of |<d_n, e^{-itH} d_l>|, an empirical lower envelope of sup_t."""
    out = np.zeros(dec.vectors.shape[0])
    for t in np.atleast_1d(times):
        out = np.maximum(out, np.abs(evolve_column(dec, l, float(t))))
    return out


@dataclass
class EdlProfile:
    box: BoxIndex
    distance: np.ndarray  # l1 distance of each site from the origin
    K: np.ndarray  # phase-averaged T(n, 0)
    window: tuple[int, int]
    gamma_hat: float
    intercept: float
    ci: tuple[float, float]
    grid: dict
    envelope: np.ndarray | None = None

    def radial(self) -> tuple[np.ndarray, np.ndarray]:
        """K averaged over the sites at each l1 distance."""
        r = np.unique(self.distance)
        return r, np.array([self.K[self.distance == v].mean() for v in r])

    def rows(self):
        fit = np.exp(-(self.intercept + self.gamma_hat * self.distance))
        sites = self.box.sites()
        for s, k, f in zip(sites, self.K, fit):
            yield tuple(int(v) for v in s), float(k), float(f)

    def to_json(self) -> dict:
        return {"gamma_hat": self.gamma_hat, "intercept": self.intercept, "ci": list(self.ci),
                "window": list(self.window), "grid": self.grid, "d": self.box.d, "N": self.box.N}


def _fit_rate(dist: np.ndarray, K: np.ndarray, window: tuple[int, int]) -> tuple[float, float]:
    """Least squares -ln K = intercept + gamma |n| over window[0] <= |n| <= window[1]."""
    sel = (dist >= window[0]) & (dist <= window[1]) & (K > 0)
    x = dist[sel].astype(float)
    y = -np.log(K[sel])
    if np.unique(x).size < 2:
        raise ValueError("fit window holds fewer than two distances")
    X = np.column_stack([np.ones_like(x), x])
    (b0, b1), *_ = np.linalg.lstsq(X, y, rcond=None)
    return float(b1), float(b0)


BUILDERS: dict[str, Callable] = {
    "amo": lambda lam, alpha, theta, N: build_amo(lam, float(np.atleast_1d(alpha)[0]), theta, N),
    "md_longrange": build_md_longrange,
}


def edl_profile(lam: float, alpha, builder="amo", grid: int = 200, N: int = 80,
                window: tuple[int, int] | None = None, seed: int = 0, bootstrap: int = 200,
                offset: float | None = None, times=None) -> EdlProfile:
    """Phase-averaged kernel column K(n) = mean_theta T_theta(n, 0) and its fitted decay rate.

    ``builder`` is a name in BUILDERS or a callable (lam, alpha, theta, N) -> TruncatedOperator.
    The theta grid is uniform with one random offset drawn from ``seed`` (or given as ``offset``).
    ``times``, if given, adds the sampled-t lower envelope averaged over the same grid.
    """
    if grid < 10:
        raise ValueError("theta grid must have at least 10 points")
    build = BUILDERS[builder] if isinstance(builder, str) else builder
    if window is None:
        window = (min(10, N // 4), N // 2)
    if not 0 <= window[0] < window[1] <= N:
        raise ValueError("fit window must sit inside the box")
    rng = np.random.default_rng(seed)
    off = float(rng.uniform()) if offset is None else float(offset)
    thetas = (np.arange(grid) + off) / grid
    cols, envs = [], []
    box = None
    for th in thetas:
        op: TruncatedOperator = build(lam, alpha, float(th), N)
        box = op.box
        dec = eigen_all(op)
        o = box.origin()
        a = np.abs(dec.vectors)
        cols.append(a @ a[o])
        if times is not None:
            envs.append(overlap_envelope(dec, o, times))
    cols = np.array(cols)
    K = cols.sum(axis=0) / grid  # fixed-order reduction
    dist = np.abs(box.sites()).sum(axis=1)
    gamma, b0 = _fit_rate(dist, K, window)
    reps = []
    for _ in range(bootstrap):
        idx = rng.integers(0, grid, grid)
        try:
            reps.append(_fit_rate(dist, cols[idx].mean(axis=0), window)[0])
        except ValueError:
            continue
    ci = (float(np.quantile(reps, 0.025)), float(np.quantile(reps, 0.975))) if reps else (gamma, gamma)
    meta = {"count": grid, "offset": off, "seed": seed, "builder": builder if isinstance(builder, str) else "custom",
            "lambda": lam, "alpha": [float(v) for v in np.atleast_1d(alpha)]}
    env = np.array(envs).sum(axis=0) / grid if envs else None
    return EdlProfile(box, dist, K, tuple(window), gamma, b0, ci, meta, env)


# criterion-side sums

def c_gamma(gamma: float) -> float:
    """C(gamma) = sum_{j>=0} e^{-gamma j}."""
    return 1.0 / (1.0 - math.exp(-gamma))


@dataclass
class CriterionSums:
    lhs: tuple[float, float, float]
    rhs: tuple[float, float, float]
    radius: int

    @property
    def holds(self) -> tuple[bool, bool, bool]:
        return tuple(a <= b * (1 + 1e-12) for a, b in zip(self.lhs, self.rhs))


def _dist_grid(center: np.ndarray, R: int) -> list[np.ndarray]:
    r = np.arange(-R, R + 1)
    return [np.abs(c - r) for c in center]


def _grid_sum(gamma: float, a: np.ndarray, b: np.ndarray, R: int) -> float:
    """sum over the box |k_i| <= R of exp(-gamma(|a-k| + |b-k|))."""
    da, db = _dist_grid(a, R), _dist_grid(b, R)
    total = np.zeros(())
    for x, y in zip(da, db):
        total = np.add.outer(total, x + y)
    return float(np.sum(np.exp(-gamma * total)))


def criterion_sums(p, q, ell, gamma: float, tail: float = 1e-12) -> CriterionSums:
    """Brute-force left sides of the three geometric-sum inequalities and their bounds.

    Sums run over a box large enough that the neglected tail is below ``tail``.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    p, q, ell = (np.atleast_1d(np.asarray(v, dtype=int)) for v in (p, q, ell))
    d = len(p)
    M = int(max(np.abs(v).max() for v in (p, q, p + ell, q + ell)))
    # every exponent is >= 2 gamma (|k|_inf - M); bound the tail by d disjoint slabs
    per_axis = 2.0 * (2 * M + 1 + 2 * c_gamma(2 * gamma))
    log_extra = (d - 1) * math.log(per_axis) + math.log(2 * d * c_gamma(2 * gamma))
    R = M + max(1, math.ceil((math.log(1 / tail) + log_extra) / (2 * gamma)))
    s1 = _grid_sum(gamma, p, q, R)
    s2 = _grid_sum(gamma, p + ell, q + ell, R)
    s3 = _grid_sum(gamma, p, q + ell, R) + _grid_sum(gamma, p + ell, q, R)
    pq = int(np.abs(p - q).sum())
    base = (2 * c_gamma(gamma) + d + pq) ** d * math.exp(-gamma * pq)
    return CriterionSums((s1, s2, s3), (base, base, 2 * math.exp(gamma * int(np.abs(ell).sum())) * base), R)


@dataclass
class BudgetVerdict:
    partial_sums: np.ndarray
    total: float
    convergent: bool
    tail_ratio: float


def criterion_budget(certs, ratio_cut: float = 0.999) -> BudgetVerdict:
    """Partial sums of C_i^2 (1 + S_i) mu_i for triples (C_i, S_i, mu_i).

    The verdict compares the median ratio of consecutive terms over the last half
    of the sequence with ``ratio_cut``; all-zero sequences are convergent.
    """
    arr = np.asarray(list(certs), dtype=float).reshape(-1, 3)
    mu = arr[:, 2]
    if np.any(np.diff(mu) > 1e-15 * np.maximum(mu[:-1], 1e-300)):
        raise ValueError("tail measures must be nonincreasing")
    terms = arr[:, 0] ** 2 * (1 + arr[:, 1]) * mu
    partial = np.cumsum(terms)
    if not np.any(terms > 0):
        return BudgetVerdict(partial, 0.0, True, 0.0)
    tail = terms[len(terms) // 2:]
    pos = tail[:-1] > 0
    ratios = tail[1:][pos] / tail[:-1][pos]
    if ratios.size == 0:
        ratio = 0.0
    else:
        ratio = float(np.median(ratios))
    return BudgetVerdict(partial, float(partial[-1]), bool(ratio < ratio_cut), ratio)


def amo_schedule(count: int, C4: float = 1.0, tau: float = 1.0, eps: float = 0.1, h1: float = 0.2):
    """Triples (C_i, sup_m C_{i,m} e^{gamma m}, c_{i-1}) for c_i = 10^{-i}.

    C_i = C4 |ln c_i|^{4 tau} c_i^{-eps/(10 h1)}; the supremum uses its bound
    2 (C4/c_i)^{1 - 2 eps/(5 h1)}; the tail mass of step i is c_{i-1}.
    """
    out = []
    for i in range(1, count + 1):
        c = 10.0 ** (-i)
        lc = abs(math.log(c))
        Ci = C4 * lc ** (4 * tau) * c ** (-eps / (10 * h1))
        sup = 2 * (C4 / c) ** (1 - 2 * eps / (5 * h1))
        out.append((Ci, sup, 10.0 ** (-(i - 1))))
    return out
