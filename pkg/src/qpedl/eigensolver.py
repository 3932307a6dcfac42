"""Symmetric eigensolver: Householder tridiagonalization, implicit-shift QL with
Wilkinson shifts, and Sturm-sequence bisection with inverse iteration.

Eigenvectors of matrices that are already tridiagonal are recomputed by twisted
factorization, which keeps exponentially small components to relative accuracy
instead of the absolute ~eps accuracy of the QL rotations.

numpy is used for array storage and vectorised row/column updates only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import NoConvergence
from .operators import TruncatedOperator

MAX_SWEEPS = 60
EPS = np.finfo(float).eps


@dataclass
class EigenDecomposition:
    values: np.ndarray
    vectors: np.ndarray  # columns
    residual_bound: float
    source: dict = field(default_factory=dict)
    complete: bool = True

    @property
    def size(self) -> int:
        return len(self.values)


def _as_matrix(H) -> np.ndarray:
    mat = H.matrix if isinstance(H, TruncatedOperator) else np.asarray(H)
    if np.iscomplexobj(mat):
        raise TypeError("eigensolver handles real symmetric matrices only")
    return np.array(mat, dtype=float)


def _is_tridiagonal(a: np.ndarray) -> bool:
    n = a.shape[0]
    if n <= 2:
        return True
    return not np.any(np.triu(a, 2)) and not np.any(np.tril(a, -2))


def tridiagonalize(H) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Householder reduction H = Q T Q^T. Returns (diag, offdiag, Q)."""
    a = _as_matrix(H)
    n = a.shape[0]
    if isinstance(H, TruncatedOperator) and H.tridiagonal is not None:
        dg, off = H.tridiagonal
        return dg.astype(float).copy(), off.astype(float).copy(), np.eye(n)
    if _is_tridiagonal(a):
        return np.diag(a).copy(), np.diag(a, 1).copy() if n > 1 else np.zeros(0), np.eye(n)
    q = np.eye(n)
    for k in range(n - 2):
        x = a[k + 1 :, k].copy()
        alpha = math.sqrt(math.fsum(x * x))
        if alpha == 0.0:
            continue
        if x[0] > 0:
            alpha = -alpha
        v = x
        v[0] -= alpha
        vn = math.sqrt(math.fsum(v * v))
        if vn == 0.0:
            continue
        v /= vn
        # a <- P a P with P = I - 2 v v^T acting on indices k+1..
        sub = a[k + 1 :, k:]
        sub -= 2.0 * np.outer(v, v @ sub)
        sub2 = a[k:, k + 1 :]
        sub2 -= 2.0 * np.outer(sub2 @ v, v)
        qs = q[:, k + 1 :]
        qs -= 2.0 * np.outer(qs @ v, v)
    diag = np.diag(a).copy()
    off = np.diag(a, 1).copy()
    return diag, off, q


@njit(cache=True)
def _tql_kernel(d, e, zt, max_sweeps, eps, floor):
    """In-place implicit QL. Returns -1 on success or the index that failed to converge.

    e[m] is dropped when negligible against its neighbours or below ``floor``
    (an absolute eps^2 ||T|| level that keeps the backward error norm-relative).
    """
    n = d.shape[0]
    ncol = zt.shape[1]
    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd or abs(e[m]) <= floor:
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > max_sweeps:
                return l
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                for k in range(ncol):
                    zi = zt[i, k]
                    zj = zt[i + 1, k]
                    zt[i, k] = c * zi - s * zj
                    zt[i + 1, k] = s * zi + c * zj
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return -1


def tql_implicit(d: np.ndarray, e: np.ndarray, z: np.ndarray | None = None, max_sweeps: int = MAX_SWEEPS):
    """Implicit QL with Wilkinson shift on the tridiagonal (d, e); rotations accumulate into z."""
    n = len(d)
    dd = np.array(d, dtype=float)
    ee = np.zeros(n)
    ee[: n - 1] = e
    zt = np.zeros((n, 0)) if z is None else np.ascontiguousarray(np.asarray(z, dtype=float).T)
    tnorm = float(np.max(np.abs(dd), initial=0.0)) + 2 * float(np.max(np.abs(ee), initial=0.0))
    bad = _tql_kernel(dd, ee, zt, max_sweeps, EPS, EPS * EPS * tnorm)
    if bad >= 0:
        raise NoConvergence(f"eigenvalue {bad} did not converge in {max_sweeps} sweeps")
    return dd, (None if z is None else zt.T.copy())


def _canonical(vectors: np.ndarray, values: np.ndarray, scale: float) -> np.ndarray:
    """Deterministic signs, plus Gram-Schmidt within near-degenerate clusters."""
    v = vectors.copy()
    n = len(values)
    if n == 0:
        return v
    tol = 1e-12 * max(scale, 1e-300)
    start = 0
    for i in range(1, n + 1):
        if i == n or values[i] - values[i - 1] >= tol:
            if i - start > 1:
                block = v[:, start:i]
                first = [int(np.argmax(np.abs(block[:, j]) > 1e-8)) for j in range(block.shape[1])]
                order = np.argsort(first, kind="stable")
                block = block[:, order]
                for j in range(block.shape[1]):
                    for k in range(j):
                        block[:, j] -= (block[:, k] @ block[:, j]) * block[:, k]
                    block[:, j] /= math.sqrt(math.fsum(block[:, j] ** 2))
                v[:, start:i] = block
            start = i
    thresh = 1e-8 * np.max(np.abs(v), axis=0)
    first = np.argmax(np.abs(v) > thresh, axis=0)
    signs = np.sign(v[first, np.arange(v.shape[1])])
    signs[signs == 0] = 1.0
    return v * signs


def _residual(a: np.ndarray, values: np.ndarray, vectors: np.ndarray) -> float:
    if len(values) == 0:
        return 0.0
    r = a @ vectors - vectors * values
    return float(np.max(np.sqrt(np.sum(r * r, axis=0))))


@njit(cache=True)
def _twisted_kernel(d, e, vals, z, out):
    """Solve (T - E) u = gamma e_k with u_k = 1, k the peak of the QL vector.

    Left of k the LDL^T pivots give u_i = -e_i u_{i+1} / d+_i, right of k the
    UDU^T pivots give u_i = -e_{i-1} u_{i-1} / d-_i. Both recursions run in the
    decaying direction, so every ratio carries full relative precision.
    """
    n = d.shape[0]
    tiny = 1e-300
    dp = np.empty(n)
    dm = np.empty(n)
    for j in range(vals.shape[0]):
        E = vals[j]
        k = 0
        for i in range(n):
            if abs(z[i, j]) > abs(z[k, j]):
                k = i
        for i in range(k):
            p = d[i] - E
            if i > 0:
                p -= e[i - 1] * e[i - 1] / dp[i - 1]
            dp[i] = p if p != 0.0 else tiny
        for i in range(n - 1, k, -1):
            p = d[i] - E
            if i < n - 1:
                p -= e[i] * e[i] / dm[i + 1]
            dm[i] = p if p != 0.0 else tiny
        out[k, j] = 1.0
        for i in range(k - 1, -1, -1):
            out[i, j] = -e[i] * out[i + 1, j] / dp[i]
        for i in range(k + 1, n):
            out[i, j] = -e[i - 1] * out[i - 1, j] / dm[i]


def twisted_vectors(d: np.ndarray, e: np.ndarray, values: np.ndarray, z: np.ndarray,
                    agree: float = 1e-6) -> np.ndarray:
    """Relative-accuracy eigenvectors of tridiag(d, e) from accurate eigenvalues.

    ``z`` holds reference vectors (e.g. from QL); a twisted vector replaces its
    reference only if the two agree to ``agree`` in 2-norm, so near-degenerate
    pairs keep their reference vectors.
    """
    d = np.ascontiguousarray(d, dtype=float)
    e = np.ascontiguousarray(e, dtype=float)
    z = np.ascontiguousarray(z, dtype=float)
    u = np.zeros_like(z)
    if len(d) == 0:
        return u
    _twisted_kernel(d, e, np.ascontiguousarray(values, dtype=float), z, u)
    out = z.copy()
    for j in range(u.shape[1]):
        col = u[:, j]
        if not np.all(np.isfinite(col)):
            continue
        col = col / np.linalg.norm(col)
        if col @ z[:, j] < 0:
            col = -col
        if np.linalg.norm(col - z[:, j]) <= agree:
            out[:, j] = col
    return out


def eigen_all(H, max_size: int = 6000, refine: bool = True) -> EigenDecomposition:
    """All eigenpairs, ascending. ``refine`` enables twisted eigenvectors for tridiagonal input."""
    a = _as_matrix(H)
    n = a.shape[0]
    if n > max_size:
        raise ValueError(f"matrix of size {n} exceeds cap {max_size}")
    d, e, q = tridiagonalize(H)
    vals, z = tql_implicit(d, e, q.copy())
    order = np.argsort(vals, kind="stable")
    vals, z = vals[order], z[:, order]
    if refine and n > 2 and _is_tridiagonal(a):
        z = twisted_vectors(d, e, vals, z)
    scale = float(np.max(np.abs(vals))) if n else 0.0
    z = _canonical(z, vals, scale)
    meta = dict(H.meta) if isinstance(H, TruncatedOperator) else {}
    return EigenDecomposition(vals, z, _residual(a, vals, z), meta, True)


def sturm_count(d: np.ndarray, e: np.ndarray, x) -> np.ndarray:
    """Number of eigenvalues of tridiag(d, e) strictly below each x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    count = np.zeros(x.shape, dtype=int)
    e2 = np.asarray(e, dtype=float) ** 2
    pivmin = EPS * max(1.0, float(np.max(e2, initial=0.0)))
    q = d[0] - x
    for i in range(len(d)):
        if i:
            q = d[i] - x - e2[i - 1] / q
        q = np.where(np.abs(q) < pivmin, -pivmin, q)
        count += q < 0
    return count


def _bisect(d, e, k_lo: int, k_hi: int, lo: float, hi: float) -> np.ndarray:
    """Eigenvalues with indices k_lo..k_hi-1 (ascending), by simultaneous bisection."""
    ks = np.arange(k_lo, k_hi)
    a = np.full(len(ks), lo)
    b = np.full(len(ks), hi)
    for _ in range(200):
        mid = 0.5 * (a + b)
        c = sturm_count(d, e, mid)
        below = c > ks
        b = np.where(below, mid, b)
        a = np.where(below, a, mid)
        if np.all(b - a <= 2 * EPS * np.maximum(np.abs(a), np.abs(b)) + 1e-300):
            break
    return 0.5 * (a + b)


def _tridiag_solve(d, e, shift: float, rhs: np.ndarray) -> np.ndarray:
    """Solve (T - shift) x = rhs by Gaussian elimination with partial pivoting."""
    n = len(d)
    diag = [float(v) - shift for v in d]
    up = [float(v) for v in e] + [0.0]
    lo = [float(v) for v in e]
    up2 = [0.0] * n
    b = [float(v) for v in rhs]
    tiny = EPS * max(1.0, max(abs(v) for v in diag) if n else 1.0)
    for i in range(n - 1):
        if abs(diag[i]) >= abs(lo[i]):
            if diag[i] == 0.0:
                diag[i] = tiny
            f = lo[i] / diag[i]
            diag[i + 1] -= f * up[i]
            b[i + 1] -= f * b[i]
        else:
            f = diag[i] / lo[i]
            diag[i], lo[i] = lo[i], diag[i]
            up[i], diag[i + 1] = diag[i + 1], up[i] - f * diag[i + 1]
            up2[i] = up[i + 1]
            up[i + 1] = -f * up[i + 1]
            b[i], b[i + 1] = b[i + 1], b[i] - f * b[i + 1]
    if diag[n - 1] == 0.0:
        diag[n - 1] = tiny
    x = [0.0] * n
    for i in range(n - 1, -1, -1):
        s = b[i]
        if i + 1 < n:
            s -= up[i] * x[i + 1]
        if i + 2 < n:
            s -= up2[i] * x[i + 2]
        x[i] = s / diag[i]
    return np.array(x)


def eigen_window(H, window: tuple[float, float], iters: int = 4) -> EigenDecomposition:
    """Eigenpairs with values in [lo, hi) by bisection plus inverse iteration."""
    lo, hi = map(float, window)
    if not lo < hi:
        raise ValueError("empty window")
    a = _as_matrix(H)
    d, e, q = tridiagonalize(H)
    k_lo, k_hi = (int(v) for v in sturm_count(d, e, [lo, hi]))
    meta = dict(H.meta) if isinstance(H, TruncatedOperator) else {}
    n = len(d)
    if k_hi <= k_lo:
        return EigenDecomposition(np.zeros(0), np.zeros((n, 0)), 0.0, meta, False)
    vals = _bisect(d, e, k_lo, k_hi, lo, hi)
    scale = max(float(np.max(np.abs(d), initial=0.0)) + 2 * float(np.max(np.abs(e), initial=0.0)), 1e-300)
    vecs = np.zeros((n, len(vals)))
    rng = np.random.default_rng(12345)
    for j, lam in enumerate(vals):
        x = rng.standard_normal(n)
        # members of the same cluster are orthogonalised against each other
        cluster = [k for k in range(j) if abs(vals[k] - lam) < 1e-10 * scale]
        for _ in range(iters):
            x = _tridiag_solve(d, e, lam, x)
            for k in cluster:
                x -= (vecs[:, k] @ x) * vecs[:, k]
            nrm = math.sqrt(math.fsum(x * x))
            if not math.isfinite(nrm) or nrm == 0.0:
                raise NoConvergence("inverse iteration broke down")
            x /= nrm
        vecs[:, j] = x
    vecs = q @ vecs
    vecs = _canonical(vecs, vals, scale)
    complete = (k_lo == 0 and k_hi == n)
    return EigenDecomposition(vals, vecs, _residual(a, vals, vecs), meta, complete)


def trace_defect(H, dec: EigenDecomposition) -> float:
    a = _as_matrix(H)
    return abs(math.fsum(np.diag(a)) - math.fsum(dec.values))
