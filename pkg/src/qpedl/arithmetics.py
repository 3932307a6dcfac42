"""Continued fractions, torus distance and Diophantine certification."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .errors import DegenerateAtPrecision, NotInUnitInterval, RationalResonance

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
REMAINDER_CUTOFF = 1e-14


@dataclass(frozen=True)
class ContinuedFraction:
    alpha: float
    partial_quotients: tuple[int, ...]
    # convergents[n] = (p_n, q_n) for n = 0..depth, with (p_0, q_0) = (0, 1)
    convergents: tuple[tuple[int, int], ...]
    beta_estimate: float

    @property
    def depth(self) -> int:
        return len(self.partial_quotients)

    @property
    def q(self) -> list[int]:
        return [c[1] for c in self.convergents]

    @property
    def p(self) -> list[int]:
        return [c[0] for c in self.convergents]


def cf_expand(alpha: float, depth: int, cutoff: float = REMAINDER_CUTOFF) -> ContinuedFraction:
    """Expand alpha in (0,1); stops early once the Gauss-map remainder falls below cutoff.

    The remainders are tracked in exact rational arithmetic on the binary value of
    alpha, so every convergent invariant holds exactly for the number actually given.
    """
    if not (0.0 < alpha < 1.0) or not math.isfinite(alpha):
        raise NotInUnitInterval(f"alpha={alpha!r} is not in (0,1)")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if alpha < cutoff:
        raise DegenerateAtPrecision(f"alpha={alpha!r} below remainder cutoff {cutoff}")
    x = Fraction(alpha)
    quotients: list[int] = []
    p_prev, p = 1, 0  # p_{-1}, p_0
    q_prev, q = 0, 1
    convs = [(0, 1)]
    while len(quotients) < depth and x != 0 and x >= cutoff:
        inv = 1 / x
        a = math.floor(inv)
        x = inv - a
        quotients.append(a)
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        convs.append((p, q))
    qs = [c[1] for c in convs]
    beta = 0.0
    for n in range(1, len(qs) - 1):
        beta = max(beta, math.log(qs[n + 1]) / qs[n])
    return ContinuedFraction(float(alpha), tuple(quotients), tuple(convs), beta)


def torus_dist(x):
    """Distance to the nearest integer; works elementwise on arrays."""
    y = np.abs(np.asarray(x, dtype=float) - np.round(x))
    return float(y) if np.ndim(y) == 0 else y


def lattice_ball(d: int, bound: int, include_zero: bool = False) -> np.ndarray:
    """All n in Z^d with |n|_1 <= bound, as an (m, d) int array in lexicographic order."""
    axes = [np.arange(-bound, bound + 1)] * d
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    norm = np.abs(grid).sum(axis=1)
    keep = norm <= bound
    if not include_zero:
        keep &= norm > 0
    return grid[keep]


@dataclass(frozen=True)
class FrequencyVector:
    components: tuple[float, ...]
    dio_kappa: float | None = None
    dio_tau: float | None = None
    search_bound: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(float(c) for c in np.atleast_1d(self.components)))

    @property
    def d(self) -> int:
        return len(self.components)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.components)

    def dot(self, n) -> np.ndarray:
        return np.asarray(n, dtype=float) @ self.array

    def certified(self, tau: float, search_bound: int) -> "FrequencyVector":
        k = certify_dc(self, tau, search_bound)
        return replace(self, dio_kappa=k, dio_tau=tau, search_bound=search_bound)


def as_frequency(alpha) -> FrequencyVector:
    if isinstance(alpha, FrequencyVector):
        return alpha
    return FrequencyVector(tuple(np.atleast_1d(alpha)))


def certify_dc(alpha, tau: float, search_bound: int) -> float:
    """Largest kappa' with dist(<n,alpha>) >= kappa'/|n|^tau for 0 < |n|_1 <= search_bound."""
    alpha = as_frequency(alpha)
    if tau <= alpha.d - 1:
        raise ValueError("tau must exceed d-1")
    if search_bound < 1:
        raise ValueError("search_bound must be >= 1")
    ns = lattice_ball(alpha.d, search_bound)
    norms = np.abs(ns).sum(axis=1).astype(float)
    vals = torus_dist(ns @ alpha.array) * norms**tau
    k = float(vals.min())
    if k == 0.0:
        bad = ns[int(np.argmin(vals))]
        raise RationalResonance(f"<n,alpha> is an integer at n={bad.tolist()}")
    return k


def dc_alpha_check(phi, alpha, kappa: float, tau: float, search_bound: int) -> bool:
    """True iff dist(2 phi - <m,alpha>) >= kappa/(|m|+1)^tau for all |m|_1 <= search_bound."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    alpha = as_frequency(alpha)
    ms = lattice_ball(alpha.d, search_bound, include_zero=True)
    norms = np.abs(ms).sum(axis=1).astype(float)
    lhs = torus_dist(2.0 * float(phi) - ms @ alpha.array)
    return bool(np.all(lhs >= kappa / (norms + 1.0) ** tau))
