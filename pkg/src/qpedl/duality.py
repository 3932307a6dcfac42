"""Aubry duality: eigenfunctions of the long-range operator L_{V,lam,alpha,rho}
built from a reduced Schrodinger cocycle (alpha, S_E^{V/lam})."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arithmetics import as_frequency, lattice_ball, torus_dist
from .errors import InconsistentInput, RationalRotation, ResidualTooLarge
from .kam import ReductionResult
from .operators import BoxIndex, build_longrange
from .sl2 import M_INV, norm2, su11_params
from .trigpoly import TrigPoly, sample_points


def diagonalize_near_identity(su11: tuple[float, complex], rho: float, tol: float = 1e-8):
    """U with U^{-1} [[i t, nu], [conj nu, -i t]] U = diag(i rho, -i rho).

    Returns (U, branch). With |4 nu / rho| <= 1 and rho t > 0 the explicit
    near-identity U is used ("lemma"), certified ||U - I|| <= |nu / rho|. When
    rho t < 0 the same formula is applied to the conjugate problem ("conjugated").
    Otherwise U comes from the eigenvectors, columns scaled to det 1 ("unitary").
    """
    t, nu = float(su11[0]), complex(su11[1])
    if abs(t * t - abs(nu) ** 2 - rho * rho) > tol * max(1.0, t * t):
        raise InconsistentInput(f"t^2 - |nu|^2 = {t * t - abs(nu) ** 2:.3g} != rho^2 = {rho * rho:.3g}")
    if nu == 0:
        if t * rho >= 0:
            return np.eye(2, dtype=complex), "lemma"
        return np.array([[0, 1j], [1j, 0]]), "swap"
    small = rho != 0 and abs(4 * nu / rho) <= 1
    if small and rho * t > 0:
        x = nu / (t + rho)
        U = np.array([[1, 1j * x], [-1j * np.conj(x), 1]]) / math.sqrt(1 - abs(x) ** 2)
        return U, "lemma"
    if small and rho * t < 0:
        # the lemma applied with -rho (same sign as t), then the eigenvalue order swapped
        x = nu / (t - rho)
        V = np.array([[1, 1j * x], [-1j * np.conj(x), 1]]) / math.sqrt(1 - abs(x) ** 2)
        return V @ np.array([[0, 1j], [1j, 0]]), "conjugated"
    G = np.array([[1j * t, nu], [np.conj(nu), -1j * t]])
    vals, vecs = np.linalg.eig(G)
    order = [int(np.argmin(np.abs(vals - 1j * rho))), int(np.argmin(np.abs(vals + 1j * rho)))]
    U = vecs[:, order]
    U = U / np.sqrt(np.linalg.det(U))
    return U, "unitary"


@dataclass
class DualEigenfunction:
    box: BoxIndex
    coefficients: np.ndarray  # z_11(n) in box.sites() order, unit l2 norm
    energy: float  # lam * E
    phase: float  # effective rho used in L
    rho: float
    ell: tuple[int, ...]
    ell0: tuple[int, ...]
    C: float
    C_ell: float
    residual: float
    mass: float
    mass_bound: float
    half_mode_leak: float
    branch: str
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"energy": self.energy, "phase": self.phase, "rho": self.rho, "ell": list(self.ell),
                "ell0": list(self.ell0), "C": self.C, "C_ell": self.C_ell, "residual": self.residual,
                "mass": self.mass, "mass_bound": self.mass_bound, "half_mode_leak": self.half_mode_leak,
                "branch": self.branch, "N": self.box.N, "d": self.box.d, **self.meta}


def _rational_gap(rho: float, alpha, bound: int = 50) -> float:
    alpha = as_frequency(alpha)
    ms = lattice_ball(alpha.d, bound, include_zero=True)
    return float(np.min(torus_dist(2 * rho - ms @ alpha.array)))


def residual_against(coeffs: np.ndarray, box: BoxIndex, V: TrigPoly, lam: float, alpha, phase: float,
                     energy: float) -> float:
    """||(L - energy) u|| / ||u|| with L freshly assembled on the box."""
    op = build_longrange(V, lam, alpha, phase, box.N)
    u = np.asarray(coeffs)
    r = op.matrix @ u - energy * u
    return float(np.linalg.norm(r) / np.linalg.norm(u))


def build_dual_eigenfunction(red: ReductionResult, V: TrigPoly, lam: float, alpha, E: float, rho: float,
                             tol: float = 1e-6, rational_tol: float = 1e-10) -> DualEigenfunction:
    """Fourier coefficients of z_11 = e^{-i pi <l + l0, th>} b_11, where b_11 is the
    first entry of B_1 = B M^{-1} U and U^{-1} M A M^{-1} U is diagonal."""
    alpha = as_frequency(alpha)
    d = alpha.d
    if _rational_gap(rho, alpha) < rational_tol:
        raise RationalRotation(f"2 rho - <m, alpha> is an integer to {rational_tol:g} for some |m| <= 50")
    dec = red.decomposition
    A = red.A_final.A
    Lsum = np.array(dec.ell) + np.array(dec.deg_Btilde)
    shift = float(Lsum @ alpha.array) / 2
    phi = 2 * np.pi * (rho - shift)
    t, nu = su11_params(A)
    r = math.sqrt(max(t * t - abs(nu) ** 2, 0.0))
    rho_g = r if abs(np.exp(1j * r) - np.exp(1j * phi)) <= abs(np.exp(-1j * r) - np.exp(1j * phi)) else -r
    U, branch = diagonalize_near_identity((t, nu), rho_g)
    phase = (rho_g / (2 * np.pi) + shift) % 1.0

    grid = dec.Y.grid
    g2 = tuple(2 * m for m in grid)
    pts = sample_points(g2, 2).reshape(-1, d)
    B1 = dec.evaluate(pts) @ M_INV @ U
    b11 = B1[:, 0, 0]
    z = np.exp(-1j * np.pi * (pts @ Lsum)) * b11
    zc = np.fft.fftn(z.reshape(g2), axes=tuple(range(d))) / np.prod(g2)
    ks = TrigPoly(zc, d, period=2).modes()
    even = np.all(ks % 2 == 0, axis=-1)
    total = float(np.sqrt(np.sum(np.abs(zc) ** 2)))
    leak = float(np.sqrt(np.sum(np.abs(zc[~even]) ** 2)) / total)
    N = min(grid) // 2 - 1
    box = BoxIndex(d, N)
    sites = box.sites()
    idx = tuple((2 * sites[:, i]) % g2[i] for i in range(d))
    coeffs = zc[idx]
    mass = float(np.linalg.norm(coeffs))
    B1_c0 = float(np.max(norm2(B1)))
    coeffs = coeffs / mass
    energy = lam * E
    res = residual_against(coeffs, box, V, lam, alpha, phase, energy)
    ell_n = float(np.abs(dec.ell).sum())
    C = 8 * dec.norms["B_tilde"] ** 4
    gap = float(torus_dist(2 * rho - Lsum @ alpha.array))
    C_ell = min(1.0, dec.norms["Y"] + 2 * abs(nu) / gap) if gap > 0 else 1.0
    out = DualEigenfunction(box, coeffs, energy, phase, rho, tuple(dec.ell), tuple(dec.deg_Btilde), C, C_ell,
                            res, mass, 1.0 / (2 * B1_c0), leak, branch,
                            {"phase_offset": float(torus_dist(phase - rho)), "ell_norm": ell_n})
    if res > tol:
        err = ResidualTooLarge(f"residual {res:.3g} exceeds {tol:g}")
        err.result = out
        raise err
    return out


def _direct_apply(zhat: dict, V: dict, lam: float, alpha: np.ndarray, rho: float, E: float) -> dict:
    """(L - lam E) zhat by explicit convolution over dictionaries of modes."""
    out: dict = {}
    for n, zn in zhat.items():
        for k, vk in V.items():
            m = tuple(a + b for a, b in zip(n, k))
            out[m] = out.get(m, 0) + vk * zn
    for n, zn in zhat.items():
        out[n] = out.get(n, 0) + (2 * lam * math.cos(2 * math.pi * (rho + float(np.dot(n, alpha)))) - lam * E) * zn
    return out


def _as_dict(p: TrigPoly, tol: float = 0.0) -> dict:
    ks = p.modes().reshape(-1, p.d)
    cs = p.coef.reshape(-1)
    return {tuple(int(v) for v in k): complex(c) for k, c in zip(ks, cs) if abs(c) > tol}


def duality_identity_check(z: TrigPoly, V: TrigPoly, lam: float, alpha, rho: float, E: float) -> float:
    """l2 norm of lam * F[defect of the z-equation] + (L - lam E) zhat.

    The defect (E - V/lam) z(th) - e^{-2 pi i rho} z(th - a) - e^{2 pi i rho} z(th + a)
    is formed from samples on a grid wide enough to hold the product exactly; the
    operator side is a direct convolution. Both must agree for any inputs.
    """
    alpha = as_frequency(alpha)
    d = alpha.d
    zb, vb = z.band(), V.band()
    size = 2 * (zb + vb) + 2
    grid = (size,) * d
    zz, vv = z.resample(grid), V.resample(grid)
    a = alpha.array
    defect = ((E - vv.samples() / lam) * zz.samples()
              - np.exp(-2j * np.pi * rho) * zz.shift(-a).samples()
              - np.exp(2j * np.pi * rho) * zz.shift(a).samples())
    dhat = _as_dict(TrigPoly.from_samples(defect, d))
    applied = _direct_apply(_as_dict(z), _as_dict(V), lam, a, rho, E)
    keys = set(dhat) | set(applied)
    diff = [lam * dhat.get(k, 0) + applied.get(k, 0) for k in keys]
    return float(np.sqrt(np.sum(np.abs(diff) ** 2)))
