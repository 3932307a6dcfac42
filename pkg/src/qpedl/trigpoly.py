"""Finite Fourier series on T^d (or the double torus), stored as FFT coefficient grids."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _axes(d: int) -> tuple[int, ...]:
    return tuple(range(d))


def mode_grid(grid: tuple[int, ...]) -> np.ndarray:
    """Integer mode labels in FFT order, shape grid + (d,)."""
    freqs = [np.rint(np.fft.fftfreq(m) * m).astype(int) for m in grid]
    return np.stack(np.meshgrid(*freqs, indexing="ij"), axis=-1)


def sample_points(grid: tuple[int, ...], period: int = 1) -> np.ndarray:
    """Uniform sample points, shape grid + (d,)."""
    axes = [period * np.arange(m) / m for m in grid]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def _entry_norm(c: np.ndarray, nv: int) -> np.ndarray:
    """Norm of each coefficient: |c| for scalars, spectral norm for 2x2 blocks."""
    if nv == 0:
        return np.abs(c)
    if nv == 2 and c.shape[-2:] == (2, 2):
        # largest singular value of a 2x2 block in closed form
        fro2 = np.sum(np.abs(c) ** 2, axis=(-1, -2))
        det = np.abs(c[..., 0, 0] * c[..., 1, 1] - c[..., 0, 1] * c[..., 1, 0])
        disc = np.sqrt(np.maximum(fro2**2 - 4 * det**2, 0.0))
        return np.sqrt(np.maximum((fro2 + disc) / 2, 0.0))
    return np.sqrt(np.sum(np.abs(c) ** 2, axis=tuple(range(-nv, 0))))


@dataclass
class TrigPoly:
    """f(x) = sum_k coef[k] exp(2 pi i <k, x> / period).

    ``coef`` has shape grid + vshape with modes in FFT order. ``period`` is 2 for
    functions on the double torus (half-integer frequencies on T^d).
    """

    coef: np.ndarray
    d: int
    h: float = 0.0
    period: int = 1

    @property
    def grid(self) -> tuple[int, ...]:
        return self.coef.shape[: self.d]

    @property
    def vshape(self) -> tuple[int, ...]:
        return self.coef.shape[self.d :]

    # construction -----------------------------------------------------------------
    @classmethod
    def from_samples(cls, samples, d: int, h: float = 0.0, period: int = 1) -> "TrigPoly":
        samples = np.asarray(samples)
        grid = samples.shape[:d]
        coef = np.fft.fftn(samples, axes=_axes(d)) / np.prod(grid)
        return cls(coef, d, h, period)

    @classmethod
    def from_modes(cls, modes: dict, grid, vshape=(), h: float = 0.0, period: int = 1) -> "TrigPoly":
        grid = tuple(int(g) for g in grid)
        d = len(grid)
        coef = np.zeros(grid + tuple(vshape), dtype=complex)
        for k, v in modes.items():
            k = tuple(np.atleast_1d(k).astype(int))
            if len(k) != d or any(abs(ki) > (g - 1) // 2 for ki, g in zip(k, grid)):
                raise ValueError(f"mode {k} does not fit grid {grid}")
            idx = tuple(ki % g for ki, g in zip(k, grid))
            coef[idx] = v
        return cls(coef, d, h, period)

    @classmethod
    def from_function(cls, fn, grid, d: int | None = None, h: float = 0.0, period: int = 1) -> "TrigPoly":
        grid = tuple(int(g) for g in grid)
        d = len(grid) if d is None else d
        pts = sample_points(grid, period)
        vals = fn(pts.reshape(-1, d))
        vals = np.asarray(vals).reshape(grid + np.shape(vals)[1:])
        return cls.from_samples(vals, d, h, period)

    @classmethod
    def constant(cls, value, grid, h: float = 0.0) -> "TrigPoly":
        value = np.asarray(value, dtype=complex)
        coef = np.zeros(tuple(grid) + value.shape, dtype=complex)
        coef[(0,) * len(grid)] = value
        return cls(coef, len(grid), h)

    @classmethod
    def cosine(cls, amplitude: float, d: int = 1, grid: int = 8, direction=None) -> "TrigPoly":
        """amplitude * cos(2 pi <e, x>); with direction None, sum over coordinate directions."""
        dirs = [np.eye(d, dtype=int)[i] for i in range(d)] if direction is None else [np.asarray(direction)]
        modes: dict = {}
        for e in dirs:
            for s in (1, -1):
                key = tuple(s * e)
                modes[key] = modes.get(key, 0) + amplitude / 2
        return cls.from_modes(modes, (grid,) * d)

    # views -------------------------------------------------------------------------
    def samples(self) -> np.ndarray:
        return np.fft.ifftn(self.coef, axes=_axes(self.d)) * np.prod(self.grid)

    def modes(self) -> np.ndarray:
        return mode_grid(self.grid)

    def mode_norms(self) -> np.ndarray:
        """|k|_1 in units of the actual frequency (k/period)."""
        return np.abs(self.modes()).sum(axis=-1) / self.period

    def coef_norms(self) -> np.ndarray:
        return _entry_norm(self.coef, len(self.vshape))

    def norm(self, h: float | None = None) -> float:
        """Dominating analytic norm sum_k ||c_k|| e^{2 pi |k| h}."""
        h = self.h if h is None else h
        w = np.exp(2 * np.pi * self.mode_norms() * h)
        return float(np.sum(self.coef_norms() * w))

    def sup_norm(self) -> float:
        s = self.samples()
        return float(np.max(_entry_norm(s, len(self.vshape))))

    def band(self, tol: float = 0.0) -> int:
        mask = self.coef_norms() > tol
        if not mask.any():
            return 0
        return int(np.abs(self.modes())[mask].sum(axis=-1).max())

    def is_real(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.samples().imag), initial=0.0) <= tol * max(1.0, self.sup_norm()))

    def __call__(self, points) -> np.ndarray:
        """Evaluate at real or complex points of shape (m, d) (or (d,))."""
        pts = np.asarray(points)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts).reshape(-1, self.d)
        flat = self.coef.reshape((-1,) + self.vshape)
        ks = self.modes().reshape(-1, self.d)
        keep = self.coef_norms().reshape(-1) > 0
        flat, ks = flat[keep], ks[keep]
        phase = np.exp(2j * np.pi * (pts @ ks.T) / self.period)  # (m, K)
        out = np.tensordot(phase, flat, axes=(1, 0))
        return out[0] if single else out

    # algebra ------------------------------------------------------------------------
    def _like(self, coef) -> "TrigPoly":
        return TrigPoly(coef, self.d, self.h, self.period)

    def map_samples(self, fn) -> "TrigPoly":
        return TrigPoly.from_samples(fn(self.samples()), self.d, self.h, self.period)

    def shift(self, alpha) -> "TrigPoly":
        """x -> f(x + alpha)."""
        ph = np.exp(2j * np.pi * (self.modes() @ np.atleast_1d(alpha)) / self.period)
        ph = ph.reshape(self.grid + (1,) * len(self.vshape))
        return self._like(self.coef * ph)

    def real(self) -> "TrigPoly":
        return self.map_samples(np.real)

    def truncate(self, K: float) -> "TrigPoly":
        mask = (self.mode_norms() <= K).reshape(self.grid + (1,) * len(self.vshape))
        return self._like(self.coef * mask)

    def __add__(self, other):
        if isinstance(other, TrigPoly):
            return self._like(self.coef + other.coef)
        c = self.coef.copy()
        c[(0,) * self.d] += other
        return self._like(c)

    def __sub__(self, other):
        return self + (-1) * other if not isinstance(other, TrigPoly) else self._like(self.coef - other.coef)

    def __mul__(self, s):
        if isinstance(s, TrigPoly):
            return TrigPoly.from_samples(self.samples() * s.samples(), self.d, self.h, self.period)
        return self._like(self.coef * s)

    __rmul__ = __mul__

    def __matmul__(self, other: "TrigPoly") -> "TrigPoly":
        return TrigPoly.from_samples(self.samples() @ other.samples(), self.d, self.h, self.period)

    def with_h(self, h: float) -> "TrigPoly":
        return TrigPoly(self.coef, self.d, h, self.period)

    def resample(self, grid) -> "TrigPoly":
        """Zero-pad or crop the coefficient grid (band-limited interpolation)."""
        grid = tuple(int(g) for g in grid)
        new = np.zeros(grid + self.vshape, dtype=complex)
        ks = self.modes().reshape(-1, self.d)
        flat = self.coef.reshape((-1,) + self.vshape)
        for k, c in zip(ks, flat):
            if all(abs(ki) <= (g - 1) // 2 for ki, g in zip(k, grid)):
                new[tuple(ki % g for ki, g in zip(k, grid))] += c
        return self._like(new)
