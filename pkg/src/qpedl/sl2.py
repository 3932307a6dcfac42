"""Closed-form 2x2 algebra: rotations, sl(2,R) <-> su(1,1), exp/log, elliptic normal forms.

All functions broadcast over leading axes.
"""
from __future__ import annotations

import numpy as np

from .errors import HyperbolicConstant

M = np.array([[1, -1j], [1, 1j]]) / 2j
M_INV = np.linalg.inv(M)
J = np.array([[0.0, -1.0], [1.0, 0.0]])


def rot(phi) -> np.ndarray:
    """R_phi, rotation by 2 pi phi."""
    phi = np.asarray(phi, dtype=float)
    c, s = np.cos(2 * np.pi * phi), np.sin(2 * np.pi * phi)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)


def det2(a):
    return a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]


def inv2(a):
    out = np.empty_like(a)
    out[..., 0, 0] = a[..., 1, 1]
    out[..., 1, 1] = a[..., 0, 0]
    out[..., 0, 1] = -a[..., 0, 1]
    out[..., 1, 0] = -a[..., 1, 0]
    return out / det2(a)[..., None, None]


def norm2(a):
    """Spectral norm of 2x2 blocks."""
    fro2 = np.sum(np.abs(a) ** 2, axis=(-1, -2))
    det = np.abs(det2(a))
    disc = np.sqrt(np.maximum(fro2**2 - 4 * det**2, 0.0))
    return np.sqrt((fro2 + disc) / 2)


def _sinc_like(delta2):
    """sinh(delta)/delta with delta^2 = delta2 (possibly negative or complex)."""
    delta2 = np.asarray(delta2, dtype=complex)
    dl = np.sqrt(delta2)
    small = np.abs(delta2) < 1e-8
    safe = np.where(small, 1.0, dl)
    return np.where(small, 1 + delta2 / 6 + delta2**2 / 120, np.sinh(safe) / safe), np.cosh(dl)


def expm_traceless(x):
    """exp of traceless 2x2 matrices by Cayley-Hamilton: cosh(d) I + sinh(d)/d X, d^2 = -det X."""
    x = np.asarray(x)
    sh, ch = _sinc_like(-det2(x))
    out = sh[..., None, None] * x + ch[..., None, None] * np.eye(2)
    return out.real if np.isrealobj(x) else out


def logm_sl2(g):
    """Principal log of 2x2 unimodular matrices near the identity (traceless result)."""
    g = np.asarray(g)
    c = (g[..., 0, 0] + g[..., 1, 1]) / 2
    c = np.asarray(c, dtype=complex)
    # g - c I = sinh(d)/d * X with cosh(d) = c
    dl = np.arccosh(c)
    small = np.abs(c - 1) < 1e-10
    safe = np.where(small, 1.0, dl)
    factor = np.where(small, 1 - (c - 1) / 3, safe / np.where(small, 1.0, np.sinh(safe)))
    out = factor[..., None, None] * (g - c[..., None, None] * np.eye(2))
    return out.real if np.isrealobj(g) else out


def to_xyz(f):
    """Real sl(2,R) matrix [[x, y+z],[y-z, -x]] -> (x, y, z)."""
    x = f[..., 0, 0]
    y = (f[..., 0, 1] + f[..., 1, 0]) / 2
    z = (f[..., 0, 1] - f[..., 1, 0]) / 2
    return x, y, z


def from_xyz(x, y, z):
    return np.stack([np.stack([x, y + z], -1), np.stack([y - z, -x], -1)], -2)


def su11_of(f):
    """M f M^{-1} for f in sl(2,R): returns (z, w) with M f M^{-1} = [[i z, w],[conj w, -i z]]."""
    x, y, z = to_xyz(f)
    return z, x - 1j * y


def sl2_from_su11(z, w):
    return from_xyz(np.real(w), -np.imag(w), z)


def su11_params(a):
    """(t, nu) with M a M^{-1} = exp([[i t, nu],[conj nu, -i t]]) for elliptic or parabolic a."""
    a = np.asarray(a, dtype=float)
    tr = np.trace(a)
    if abs(tr) > 2 + 1e-12:
        raise HyperbolicConstant(f"|trace|={abs(tr):.6g} > 2")
    g = logm_sl2(a) if tr > -2 + 1e-12 else None
    if g is None:
        # -I neighbourhood: log(-a) + log(-I) with log(-I) = pi J
        g = logm_sl2(-a) + np.pi * J
    z, w = su11_of(g)
    return float(z), complex(w)


def from_su11_params(t: float, nu: complex) -> np.ndarray:
    return expm_traceless(sl2_from_su11(t, nu))


def rotation_angle(a) -> float:
    """Signed xi in (-1/2, 1/2] with a conjugate in SL(2,R) to R_xi; a must be elliptic."""
    a = np.asarray(a, dtype=float)
    tr = a[0, 0] + a[1, 1]
    if abs(tr) >= 2:
        raise HyperbolicConstant(f"trace {tr:.6g} is not elliptic")
    xi = np.arccos(tr / 2) / (2 * np.pi)
    return float(xi if a[1, 0] - a[0, 1] > 0 else -xi)


def elliptic_normal_form(a):
    """Return (Q, xi) with Q in SL(2,R) symmetric positive and Q^{-1} a Q = R_xi.

    Q = P^{-1/2} where P is the a-invariant quadratic form normalised to det 1.
    """
    a = np.asarray(a, dtype=float)
    xi = rotation_angle(a)
    (p, q), (r, s) = a
    form = np.array([[r, (s - p) / 2], [(s - p) / 2, -q]])
    if r < 0:
        form = -form
    form /= np.sqrt(det2(form))
    w, v = np.linalg.eigh(form)
    Q = (v / np.sqrt(w)) @ v.T
    return Q, xi


# Relative-precision arithmetic near the identity: g is carried as G = g - I so that
# products and logs of elements within eps of I keep ~1e-16 relative accuracy in eps.

def _ch_terms(q):
    """(cosh d - 1, sinh d / d) as functions of q = d^2, accurate for small |q|."""
    q = np.asarray(q, dtype=complex)
    small = np.abs(q) < 1e-3
    qs = np.where(small, q, 0.0)
    c1_ser = qs / 2 * (1 + qs / 12 * (1 + qs / 30 * (1 + qs / 56 * (1 + qs / 90))))
    s_ser = 1 + qs / 6 * (1 + qs / 20 * (1 + qs / 42 * (1 + qs / 72)))
    dl = np.sqrt(np.where(small, 1.0, q))
    c1 = np.where(small, c1_ser, 2 * np.sinh(dl / 2) ** 2)
    s = np.where(small, s_ser, np.sinh(dl) / dl)
    return c1, s


def expm1_traceless(x):
    """exp(x) - I for traceless x, without cancellation for small x."""
    x = np.asarray(x)
    c1, s = _ch_terms(-det2(x))
    out = s[..., None, None] * x + c1[..., None, None] * np.eye(2)
    return out.real if np.isrealobj(x) else out


def _acosh_ratio(u):
    """arccosh(1+u) / sqrt(u (u+2)), analytic at u = 0."""
    u = np.asarray(u, dtype=complex)
    small = np.abs(u) < 1e-3
    us = np.where(small, u, 0.0)
    ser = 1 - us / 3 + 2 * us**2 / 15 - 2 * us**3 / 35 + 8 * us**4 / 315 - 8 * us**5 / 693
    ub = np.where(small, 1.0, u)
    closed = np.arccosh(1 + ub) / np.sqrt(ub * (ub + 2))
    return np.where(small, ser, closed)


def log1p_sl2(G):
    """log(I + G) for I + G in SL(2) near the identity; traceless result."""
    G = np.asarray(G)
    u = (G[..., 0, 0] + G[..., 1, 1]) / 2
    traceless = G - u[..., None, None] * np.eye(2)
    out = _acosh_ratio(u)[..., None, None] * traceless
    return out.real if np.isrealobj(G) else out


def compose1(*Gs):
    """(I + G1)(I + G2)... - I, accumulated without forming the identity."""
    acc = np.asarray(Gs[0])
    for G in Gs[1:]:
        acc = acc + G + acc @ G
    return acc
