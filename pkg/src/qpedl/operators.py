"""Finite-box truncations of quasi-periodic operators (Dirichlet boundary).

Cosines are taken in revolutions: 2 lam cos 2 pi (theta + <n, alpha>).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .arithmetics import FrequencyVector, as_frequency
from .errors import BoxTooLarge, NonHermitianPotential
from .trigpoly import TrigPoly

SITE_CAP = 4096


@dataclass(frozen=True)
class BoxIndex:
    d: int
    N: int

    @property
    def side(self) -> int:
        return 2 * self.N + 1

    @property
    def size(self) -> int:
        return self.side**self.d

    def sites(self) -> np.ndarray:
        """(size, d) integer sites in flattening order (last coordinate fastest)."""
        r = np.arange(-self.N, self.N + 1)
        return np.stack(np.meshgrid(*([r] * self.d), indexing="ij"), -1).reshape(-1, self.d)

    def flat(self, n) -> np.ndarray | int:
        n = np.asarray(n)
        idx = np.zeros(n.shape[:-1], dtype=int) if n.ndim > 1 else 0
        for i in range(self.d):
            idx = idx * self.side + (n[..., i] + self.N)
        return idx

    def unflat(self, i) -> np.ndarray:
        i = np.asarray(i)
        out = []
        for _ in range(self.d):
            out.append(i % self.side - self.N)
            i = i // self.side
        return np.stack(out[::-1], -1)

    def contains(self, n) -> np.ndarray:
        return np.all(np.abs(np.asarray(n)) <= self.N, axis=-1)

    def origin(self) -> int:
        return int(self.flat(np.zeros(self.d, dtype=int)))


@dataclass
class TruncatedOperator:
    box: BoxIndex
    matrix: np.ndarray
    meta: dict = field(default_factory=dict)
    tridiagonal: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def dump(self, path: str) -> None:
        """Dense matrix as CSV (``.csv``) or numpy binary (anything else)."""
        if str(path).endswith(".csv"):
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh)
                for row in self.matrix:
                    w.writerow([repr(float(v)) for v in np.real(row)])
        else:
            with open(path, "wb") as fh:
                np.save(fh, self.matrix)


def _tridiag(diag: np.ndarray, box: BoxIndex, meta: dict) -> TruncatedOperator:
    off = np.ones(len(diag) - 1)
    mat = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    return TruncatedOperator(box, mat, meta, (diag.copy(), off))


def amo_diagonal(lam: float, alpha, theta, sites: np.ndarray) -> np.ndarray:
    alpha = as_frequency(alpha).array
    return 2 * lam * np.cos(2 * np.pi * (theta + sites @ alpha))


def build_amo(lam: float, alpha: float, theta: float, N: int) -> TruncatedOperator:
    if N < 1:
        raise ValueError("N must be >= 1")
    box = BoxIndex(1, N)
    diag = amo_diagonal(lam, alpha, theta, box.sites())
    meta = {"family": "amo", "lambda": lam, "alpha": [float(alpha)], "theta": float(theta), "N": N}
    return _tridiag(diag, box, meta)


def build_md_schrodinger(lam_inv: float, alpha, theta, N: int) -> TruncatedOperator:
    """1-D operator with diagonal 2 lam_inv sum_i cos 2 pi (theta_i + n alpha_i)."""
    alpha = as_frequency(alpha)
    theta = np.broadcast_to(np.asarray(theta, dtype=float), (alpha.d,))
    box = BoxIndex(1, N)
    n = box.sites()[:, 0].astype(float)
    diag = 2 * lam_inv * np.cos(2 * np.pi * (theta[None, :] + n[:, None] * alpha.array[None, :])).sum(axis=1)
    meta = {"family": "md_schrodinger", "lambda_inv": lam_inv, "alpha": list(alpha.components),
            "theta": theta.tolist(), "N": N}
    return _tridiag(diag, box, meta)


def hopping_modes(V: TrigPoly, hop_cut: float = 1e-12) -> tuple[np.ndarray, np.ndarray, int]:
    """Modes k and coefficients V_k kept after dropping a tail of total size < hop_cut."""
    ks = V.modes().reshape(-1, V.d)
    cs = V.coef.reshape(-1)
    norms = np.abs(ks).sum(axis=1)
    mag = np.abs(cs)
    K = int(norms.max()) if len(norms) else 0
    for cand in range(int(norms.max()) + 1):
        if mag[norms > cand].sum() < hop_cut:
            K = cand
            break
    keep = (norms <= K) & (mag > 0)
    return ks[keep], cs[keep], K


def check_hermitian(V: TrigPoly, tol: float = 1e-12) -> None:
    ks = V.modes().reshape(-1, V.d)
    cs = V.coef.reshape(-1)
    lookup = {tuple(k): c for k, c in zip(ks.tolist(), cs)}
    scale = max(1.0, float(np.abs(cs).max(initial=0.0)))
    for k, c in lookup.items():
        mk = tuple(-x for x in k)
        other = lookup.get(mk, 0.0)
        if abs(other - np.conj(c)) > tol * scale:
            raise NonHermitianPotential(f"V_{{-k}} != conj(V_k) at k={k}")


def build_longrange(V: TrigPoly, lam: float, alpha, theta: float, N: int,
                    hop_cut: float = 1e-12, site_cap: int = SITE_CAP) -> TruncatedOperator:
    """sum_k V_k u_{n-k} + 2 lam cos 2 pi (theta + <n, alpha>) u_n on the box |n_i| <= N."""
    alpha = as_frequency(alpha)
    if V.d != alpha.d:
        raise ValueError("V and alpha dimensions differ")
    check_hermitian(V)
    box = BoxIndex(alpha.d, N)
    if box.size > site_cap:
        raise BoxTooLarge(f"{box.size} sites exceeds cap {site_cap}")
    sites = box.sites()
    ks, cs, K = hopping_modes(V, hop_cut)
    real = bool(np.all(np.abs(cs.imag) <= 1e-15 * max(1.0, np.abs(cs).max(initial=0.0))))
    mat = np.zeros((box.size, box.size), dtype=float if real else complex)
    for k, c in zip(ks, cs):
        src = sites - k  # entry [m, m-k] = V_k
        ok = box.contains(src)
        rows = np.nonzero(ok)[0]
        cols = box.flat(src[ok])
        mat[rows, cols] += c.real if real else c
    mat[np.arange(box.size), np.arange(box.size)] += amo_diagonal(lam, alpha, theta, sites)
    if real:
        mat = (mat + mat.T) / 2
    else:
        mat = (mat + mat.conj().T) / 2
    meta = {"family": "longrange", "lambda": lam, "alpha": list(alpha.components), "theta": float(theta),
            "N": N, "hop_K": K, "hop_cut": hop_cut}
    return TruncatedOperator(box, mat, meta)


def laplacian_md(box: BoxIndex) -> np.ndarray:
    sites = box.sites()
    mat = np.zeros((box.size, box.size))
    for i in range(box.d):
        e = np.zeros(box.d, dtype=int)
        e[i] = 1
        nb = sites + e
        ok = box.contains(nb)
        r, c = np.nonzero(ok)[0], box.flat(nb[ok])
        mat[r, c] = 1.0
        mat[c, r] = 1.0
    return mat


def build_md_longrange(lam: float, alpha, theta: float, N: int, site_cap: int = SITE_CAP) -> TruncatedOperator:
    """Z^d Laplacian plus 2 lam cos 2 pi (theta + <n, alpha>) on the box |n_i| <= N."""
    alpha = as_frequency(alpha)
    box = BoxIndex(alpha.d, N)
    if box.size > site_cap:
        raise BoxTooLarge(f"{box.size} sites exceeds cap {site_cap}")
    mat = laplacian_md(box)
    mat[np.diag_indices(box.size)] = amo_diagonal(lam, alpha, theta, box.sites())
    meta = {"family": "md_longrange", "lambda": lam, "alpha": list(alpha.components), "theta": float(theta), "N": N}
    tri = None
    if alpha.d == 1:
        tri = (np.diag(mat).copy(), np.ones(box.size - 1))
    return TruncatedOperator(box, mat, meta, tri)


def gershgorin_bound(op: TruncatedOperator) -> float:
    return float(np.max(np.sum(np.abs(op.matrix), axis=1)))
