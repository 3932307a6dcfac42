"""Quasi-periodic SL(2) cocycles over torus shifts: transfer products, Lyapunov
exponents, fibered rotation numbers, degree, hyperbolicity and acceleration probes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .arithmetics import FrequencyVector, as_frequency
from .errors import GridTooCoarse, NotHomotopicToIdentity, OverflowGuard
from .sl2 import det2, inv2, norm2
from .trigpoly import TrigPoly, sample_points


@dataclass
class Cocycle:
    """(alpha, A). Exactly one of ``matrix``, ``poly``, ``potential`` or ``func`` defines A."""

    frequency: FrequencyVector
    matrix: np.ndarray | None = None
    poly: TrigPoly | None = None
    energy: float | None = None
    potential: TrigPoly | None = None
    func: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        self.frequency = as_frequency(self.frequency)

    @classmethod
    def constant(cls, a, alpha) -> "Cocycle":
        return cls(as_frequency(alpha), matrix=np.asarray(a))

    @classmethod
    def schrodinger(cls, energy: float, potential: TrigPoly, alpha) -> "Cocycle":
        return cls(as_frequency(alpha), energy=float(energy), potential=potential)

    @classmethod
    def amo(cls, energy: float, lam: float, alpha) -> "Cocycle":
        """S_E^V with V = 2 lam sum_i cos 2 pi x_i."""
        alpha = as_frequency(alpha)
        return cls.schrodinger(energy, TrigPoly.cosine(2 * lam, alpha.d), alpha)

    @property
    def d(self) -> int:
        return self.frequency.d

    @property
    def kind(self) -> str:
        for k in ("matrix", "poly", "potential", "func"):
            if getattr(self, k) is not None:
                return "schrodinger" if k == "potential" else k
        raise ValueError("empty cocycle")

    def matrices(self, points) -> np.ndarray:
        """A(x) for points of shape (m, d); complex points give complex matrices."""
        pts = np.asarray(points).reshape(-1, self.d)
        m = pts.shape[0]
        kind = self.kind
        cplx = np.iscomplexobj(pts)
        if kind == "matrix":
            return np.broadcast_to(self.matrix, (m, 2, 2)).copy()
        if kind == "poly":
            out = self.poly(pts)
            return out if cplx else out.real
        if kind == "func":
            return self.func(pts)
        v = self.potential(pts)
        v = v if cplx else v.real
        out = np.zeros((m, 2, 2), dtype=v.dtype)
        out[:, 0, 0] = self.energy - v
        out[:, 0, 1] = -1
        out[:, 1, 0] = 1
        return out

    def orbit(self, x, n: int) -> np.ndarray:
        """x + k alpha for k = 0..n-1 (unreduced; every map here is 1-periodic)."""
        x = np.asarray(x).reshape(1, self.d)
        return x + np.arange(n)[:, None] * self.frequency.array[None, :]

    def inverse(self) -> "Cocycle":
        """(-alpha, A(x - alpha)^{-1})."""
        alpha = self.frequency.array
        return Cocycle(FrequencyVector(tuple(-alpha)), func=lambda p: inv2(self.matrices(p - alpha)))

    def det_defect(self, grid: int = 32) -> float:
        pts = sample_points((grid,) * self.d).reshape(-1, self.d)
        return float(np.max(np.abs(det2(self.matrices(pts)) - 1)))


def transfer(c: Cocycle, x, n: int) -> np.ndarray:
    """A_n(x): A(x+(n-1)a)...A(x) for n >= 0, A^{-1}(x+na)...A^{-1}(x-a) for n < 0."""
    x = np.asarray(x, dtype=float).reshape(c.d)
    if n >= 0:
        mats = c.matrices(c.orbit(x, n)) if n else np.zeros((0, 2, 2))
    else:
        mats = inv2(c.matrices(c.orbit(x + n * c.frequency.array, -n)))[::-1]
    out = np.eye(2, dtype=mats.dtype if n else float)
    for a in mats:
        out = a @ out
    return out


def _block_products(mats: np.ndarray) -> np.ndarray:
    """Group consecutive matrices into products small enough not to overflow."""
    mx = float(np.max(norm2(mats))) if len(mats) else 1.0
    if not np.isfinite(mx):
        raise OverflowGuard("non-finite cocycle entries")
    b = int(np.clip(80.0 / max(np.log10(max(mx, 1.0 + 1e-12)), 1e-3), 1, 16))
    n = len(mats)
    nb, rem = divmod(n, b)
    blocks = []
    if nb:
        body = mats[: nb * b].reshape(nb, b, 2, 2)
        prod = body[:, 0]
        for k in range(1, b):
            prod = body[:, k] @ prod
        blocks.append(prod)
    if rem:
        tail = mats[nb * b :]
        prod = tail[0]
        for k in range(1, rem):
            prod = tail[k] @ prod
        blocks.append(prod[None])
    out = np.concatenate(blocks) if blocks else np.zeros((0, 2, 2))
    if not np.all(np.isfinite(out)):
        raise OverflowGuard("block product overflowed; renormalize more often")
    return out


GOLDEN_V = 0.6180339887498949


def _log_growth(blocks: np.ndarray, v0=(1.0, GOLDEN_V)) -> tuple[float, tuple]:
    """Sum of log growth of a renormalized vector pushed through the blocks, and the final vector."""
    a = blocks[:, 0, 0].tolist()
    b = blocks[:, 0, 1].tolist()
    c = blocks[:, 1, 0].tolist()
    d = blocks[:, 1, 1].tolist()
    nrm = math.hypot(abs(v0[0]), abs(v0[1]))
    x, y = v0[0] / nrm, v0[1] / nrm
    total = 0.0
    if np.iscomplexobj(blocks):
        for i in range(len(a)):
            x, y = a[i] * x + b[i] * y, c[i] * x + d[i] * y
            s = math.sqrt(abs(x) ** 2 + abs(y) ** 2)
            if s == 0.0 or not math.isfinite(s):
                raise OverflowGuard("vector degenerated")
            total += math.log(s)
            x, y = x / s, y / s
    else:
        for i in range(len(a)):
            x, y = a[i] * x + b[i] * y, c[i] * x + d[i] * y
            s = math.hypot(x, y)
            if s == 0.0 or not math.isfinite(s):
                raise OverflowGuard("vector degenerated")
            total += math.log(s)
            x, y = x / s, y / s
    return total, (x, y)


def phase_grid(d: int, count: int, rng: np.random.Generator | None) -> np.ndarray:
    """count points on T^d: a uniform lattice (per-axis count^(1/d)) plus one random offset."""
    per = max(1, int(round(count ** (1.0 / d))))
    pts = sample_points((per,) * d).reshape(-1, d)
    off = rng.random(d) / per if rng is not None else np.zeros(d)
    return (pts + off) % 1.0


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    stderr: float
    per_phase: tuple[float, ...]

    def __float__(self) -> float:
        return self.value


def lyapunov(c: Cocycle, iterates: int = 100_000, phase_samples: int = 4, seed: int = 0,
             imag_shift: float = 0.0, bootstrap: int = 200) -> LyapunovEstimate:
    """Birkhoff estimate of L(alpha, A(. + i imag_shift)) by unit-vector renormalization."""
    if iterates < 1000:
        raise ValueError("iterates must be >= 1000")
    rng = np.random.default_rng(seed)
    phases = phase_grid(c.d, phase_samples, rng)
    burn = min(iterates // 10, 1000)
    vals = []
    for x in phases:
        # a discarded burn-in aligns the vector with the growing direction
        pts = c.orbit(x - burn * c.frequency.array, burn + iterates)
        if imag_shift:
            pts = pts + 1j * imag_shift
        mats = c.matrices(pts)
        _, v = _log_growth(_block_products(mats[:burn]))
        total, _ = _log_growth(_block_products(mats[burn:]), v)
        vals.append(max(0.0, total / iterates))
    vals_arr = np.array(vals)
    if len(vals) > 1 and bootstrap:
        idx = rng.integers(0, len(vals), size=(bootstrap, len(vals)))
        err = float(np.std(vals_arr[idx].mean(axis=1)))
    else:
        err = 0.0
    return LyapunovEstimate(float(vals_arr.mean()), err, tuple(vals))


def _lift_grid(phi: np.ndarray) -> np.ndarray:
    """Continuous lift of an angle field sampled on a periodic grid (axis by axis)."""
    if phi.ndim == 1:
        return np.unwrap(phi)
    base = _lift_grid(phi[..., 0])
    lines = np.unwrap(phi, axis=-1)
    return lines + (base - lines[..., 0])[..., None]


def _windings(phi: np.ndarray, unit: float) -> list[int]:
    """Winding of a sampled angle field around each coordinate circle through the origin."""
    out = []
    for ax in range(phi.ndim):
        idx = [0] * phi.ndim
        idx[ax] = slice(None)
        line = phi[tuple(idx)]
        steps = np.angle(np.exp(1j * (np.roll(line, -1) - line)))
        out.append(int(round(float(np.sum(steps)) / unit)))
    return out


def _polar_angle(mats):
    return np.arctan2(mats[..., 1, 0] - mats[..., 0, 1], mats[..., 0, 0] + mats[..., 1, 1])


class _PolarLift:
    """Lifted polar angle of a degree-zero map, resolved on a grid."""

    def __init__(self, c: Cocycle, grid: int):
        self.c = c
        if c.kind in ("matrix", "schrodinger"):
            self.grid = None
            return
        g = grid if c.d == 1 else max(8, int(grid ** (2.0 / c.d)) // 2)
        self.grid = (g,) * c.d
        pts = sample_points(self.grid)
        phi = _polar_angle(c.matrices(pts.reshape(-1, c.d)).reshape(self.grid + (2, 2)))
        w = _windings(phi, 2 * np.pi)
        if any(w):
            raise NotHomotopicToIdentity(f"polar angle winds {w} times")
        for ax in range(c.d):
            step = np.angle(np.exp(1j * (np.roll(phi, -1, axis=ax) - phi)))
            if np.max(np.abs(step)) > np.pi / 2:
                raise GridTooCoarse("polar angle step exceeds pi/2; refine the grid")
        self.lifted = _lift_grid(phi)

    def __call__(self, pts, mats):
        phi = _polar_angle(mats)
        if self.grid is None:
            return phi
        g = np.array(self.grid)
        idx = tuple((np.rint((pts % 1.0) * g).astype(int) % g).T)
        ref = self.lifted[idx]
        return phi + 2 * np.pi * np.rint((ref - phi) / (2 * np.pi))


def _bump_weights(n: int) -> np.ndarray:
    t = (np.arange(n) + 0.5) / n
    w = np.exp(-1.0 / (t * (1 - t)))
    return w / w.sum()


def rotation_number(c: Cocycle, iterates: int = 100_000, phase=None, weighted: bool = True,
                    lift_grid: int = 256) -> float:
    """Fibered rotation number in [0, 1), normalised so that rho(R_phi) = phi.

    Each step's projective increment is split as polar-angle + symmetric-part
    increment, the latter confined to (-pi/2, pi/2). ``weighted`` uses the smooth
    bump-weighted Birkhoff average, which converges super-polynomially along
    quasi-periodic orbits.
    """
    if iterates < 1000:
        raise ValueError("iterates must be >= 1000")
    lift = _PolarLift(c, lift_grid)
    x0 = np.zeros(c.d) if phase is None else np.asarray(phase, dtype=float).reshape(c.d)
    pts = c.orbit(x0, iterates)
    mats = c.matrices(pts)
    phi = lift(pts, mats)
    a = mats[:, 0, 0].tolist()
    b = mats[:, 0, 1].tolist()
    cc = mats[:, 1, 0].tolist()
    d = mats[:, 1, 1].tolist()
    ph = phi.tolist()
    incs = [0.0] * iterates
    x, y = 1.0, 0.0
    ang = 0.0
    two_pi, pi = 2 * math.pi, math.pi
    atan2, hypot = math.atan2, math.hypot
    for i in range(iterates):
        x, y = a[i] * x + b[i] * y, cc[i] * x + d[i] * y
        s = hypot(x, y)
        x, y = x / s, y / s
        new = atan2(y, x)
        delta = new - ang - ph[i]
        delta -= two_pi * round(delta / two_pi)
        incs[i] = delta + ph[i]
        ang = new
    inc = np.array(incs)
    avg = float(_bump_weights(iterates) @ inc) if weighted else float(inc.mean())
    r = avg / (2 * pi)
    if -1e-9 < r < 0:  # round-off below zero, e.g. energies above the spectrum
        r = 0.0
    return r % 1.0


def _column_angles(mats, col: int):
    return np.arctan2(mats[..., 1, col], mats[..., 0, col])


def degree_probe(b, grid: int = 256, d: int | None = None) -> np.ndarray:
    """Degree of a map T^d -> SL(2,R) (winding in units of pi of a column angle).

    ``b`` is a TrigPoly of 2x2 matrices or a vectorised callable on (m, d) points;
    maps on the double torus (period 2) are probed over their full period.
    """
    if isinstance(b, TrigPoly):
        d, period, fn = b.d, b.period, (lambda p: b(p).real)
    else:
        if d is None:
            raise ValueError("d required for callables")
        period, fn = 1, b
    out = []
    t = period * np.arange(grid) / grid
    for ax in range(d):
        pts = np.zeros((grid, d))
        pts[:, ax] = t
        mats = fn(pts)
        col = 0
        n0 = np.hypot(mats[:, 0, 0], mats[:, 1, 0])
        if n0.min() < 1e-8 * max(n0.max(), 1e-300):
            col = 1
        ang = _column_angles(mats, col)
        closed = np.append(ang, _column_angles(fn(pts[:1] + period * np.eye(d)[ax])[:1], col))
        steps = np.angle(np.exp(1j * np.diff(closed)))
        if np.max(np.abs(steps)) > np.pi / 2:
            raise GridTooCoarse("column angle step exceeds pi/2")
        out.append(int(round(float(steps.sum()) / np.pi / period)))
    return np.array(out)


def _log_norms(c: Cocycle, phases: np.ndarray, n: int, imag_shift: float = 0.0) -> np.ndarray:
    """ln ||A_n(x)|| for each phase, via renormalized batched products."""
    P = len(phases)
    prod = np.broadcast_to(np.eye(2), (P, 2, 2)).astype(complex if imag_shift else float)
    acc = np.zeros(P)
    alpha = c.frequency.array
    for k in range(n):
        pts = phases + k * alpha
        if imag_shift:
            pts = pts + 1j * imag_shift
        prod = c.matrices(pts) @ prod
        if k % 8 == 7 or k == n - 1:
            s = norm2(prod)
            acc += np.log(s)
            prod = prod / s[:, None, None]
    return acc


def uh_probe(c: Cocycle, iterates: int = 400, phase_samples: int = 256, seed: int = 0,
             margin: float = 0.02) -> bool:
    """Numerical uniform-hyperbolicity probe: min_x ln||A_n(x)||/n > margin at n and n/2."""
    rng = np.random.default_rng(seed)
    phases = phase_grid(c.d, phase_samples, rng)
    half = max(1, iterates // 2)
    r_half = float(np.min(_log_norms(c, phases, half))) / half
    r_full = float(np.min(_log_norms(c, phases, iterates))) / iterates
    return bool(r_half > margin and r_full > margin)


def acceleration_probe(c: Cocycle, epsilons, iterates: int = 20_000, phase_samples: int = 2,
                       seed: int = 0) -> list[tuple[float, float]]:
    """Complexified Lyapunov exponents L(alpha, A(. + i eps)) on an eps grid."""
    if c.kind == "matrix":
        val = lyapunov(c, iterates, 1, seed).value
        return [(float(e), val) for e in epsilons]
    if c.kind == "func":
        raise ValueError("acceleration needs an analytic (TrigPoly or Schrodinger) cocycle")
    return [(float(e), lyapunov(c, iterates, phase_samples, seed, imag_shift=float(e)).value)
            for e in epsilons]
