"""Eigenvector localization: centers, decay-rate fits, good-eigenfunction
certificates and SULE constants."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arithmetics import lattice_ball
from .eigensolver import EigenDecomposition
from .errors import NoFiniteCertificate, TooFewSamples
from .operators import BoxIndex

UNDERFLOW = 1e-13
C_ELL_FLOOR = 1e-16


def infer_box(u: np.ndarray, box: BoxIndex | None = None) -> BoxIndex:
    if box is not None:
        return box
    n = len(u)
    if n % 2 == 0:
        raise ValueError("cannot infer a symmetric 1-d box from an even length")
    return BoxIndex(1, (n - 1) // 2)


def _l1(x: np.ndarray) -> np.ndarray:
    return np.abs(x).sum(axis=-1)


@dataclass(frozen=True)
class DecayFit:
    gamma: float
    intercept: float
    r2: float
    center: tuple[int, ...]
    stderr: float = 0.0

    def __iter__(self):
        return iter((self.gamma, self.intercept, self.r2, self.center))


def decay_fit(u, exclude_margin: int = 0, box: BoxIndex | None = None, floor: float = UNDERFLOW) -> DecayFit:
    """Least-squares fit ln|u(n)| = intercept - gamma |n - center|."""
    u = np.asarray(u)
    box = infer_box(u, box)
    if box.N <= 2 * exclude_margin:
        raise ValueError("box radius must exceed twice the margin")
    sites = box.sites()
    a = np.abs(u)
    ci = int(np.argmax(a))
    center = sites[ci]
    interior = (box.N - np.max(np.abs(sites), axis=1)) > exclude_margin
    keep = interior & (a > floor)
    r = _l1(sites - center)[keep].astype(float)
    y = np.log(a[keep])
    if keep.sum() < 3 or np.unique(r).size < 2:
        raise TooFewSamples(f"only {int(keep.sum())} usable sites")
    X = np.column_stack([np.ones_like(r), -r])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    pred = X @ coef
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    dof = max(len(y) - 2, 1)
    var = ss_res / dof / max(float(np.sum((r - r.mean()) ** 2)), 1e-300)
    return DecayFit(float(coef[1]), float(coef[0]), r2, tuple(int(v) for v in center), math.sqrt(var))


@dataclass
class GoodCertificate:
    gamma: float
    ell: tuple[int, ...]
    C: float
    C_ell: float
    center: tuple[int, ...]
    shift: tuple[int, ...]
    fit_residual: float
    normalized: bool
    objective: float
    alternatives: list = field(default_factory=list)

    @property
    def budget(self) -> float:
        return budget(self.C, self.C_ell, self.gamma, float(np.abs(self.ell).sum()))

    def bound(self, n: np.ndarray) -> np.ndarray:
        """Template C(e^{-g|n|} + C_ell e^{-g|n+l|}) at re-centred sites n."""
        n = np.asarray(n)
        ell = np.asarray(self.ell)
        return self.C * (np.exp(-self.gamma * _l1(n)) + self.C_ell * np.exp(-self.gamma * _l1(n + ell)))


def budget(C: float, C_ell: float, gamma: float, ell_norm: float) -> float:
    """Per-eigenfunction term C^2 (1 + C_l e^{g|l|}) of the criterion series."""
    return C * C * (1.0 + C_ell * math.exp(gamma * ell_norm))


OBJECTIVES = {
    "envelope": lambda C, c, g, m: C * (1.0 + c),
    "weighted": lambda C, c, g, m: C * (1.0 + c * math.exp(g * m)),
    "budget": budget,
}


def _best_for_ell(logw: np.ndarray, rn: np.ndarray, rnl: np.ndarray, gamma: float, ell_norm: float,
                  objective, grid_pts: int = 400):
    """Minimal (C, C_l) for one l, under C_l <= 1. Works in logs; None if infeasible."""
    a = -gamma * rn
    log_cfree = float(np.max(logw - a))
    if ell_norm == 0:
        return math.exp(log_cfree), C_ELL_FLOOR, objective(math.exp(log_cfree), C_ELL_FLOOR, gamma, 0.0)
    b = -gamma * rnl
    log_cmin = float(np.max(logw - np.logaddexp(a, b)))

    def cell_of(lc):
        excess = np.exp(logw - lc) - np.exp(a)
        return max(float(np.max(excess * np.exp(-b), initial=0.0)), C_ELL_FLOOR)

    cands = np.unique(np.concatenate([
        [log_cmin, log_cfree],
        np.clip(logw - a, log_cmin, log_cfree),
        np.linspace(log_cmin, log_cfree, grid_pts),
    ]))
    best = None
    for lc in cands:
        cell = cell_of(lc)
        if cell > 1.0 + 1e-12:
            continue
        cell = min(cell, 1.0)
        obj = objective(math.exp(lc), cell, gamma, ell_norm)
        if best is None or obj < best[2] * (1 - 1e-12):
            best = (math.exp(lc), cell, obj)
    return best


def certify_good(u, gamma: float, ell_search: int = 20, box: BoxIndex | None = None,
                 recenter: bool = True, floor: float = UNDERFLOW, objective: str = "envelope") -> GoodCertificate:
    """Best (gamma, l, C, C_l)-good certificate for u.

    Sites with |u| <= floor count as numerically zero. ``objective`` picks the
    ranking: "envelope" = C(1 + C_l) (tightest template), "weighted" =
    C(1 + C_l e^{g|l|}), "budget" = C^2(1 + C_l e^{g|l|}). Near-ties go to the
    smaller |l|. l = 0 means a single exponential with C_l at its floor.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    obj_fn = OBJECTIVES[objective]
    u = np.asarray(u)
    box = infer_box(u, box)
    sites = box.sites()
    a = np.abs(u)
    nrm = float(np.sqrt(np.sum(a * a)))
    ci = int(np.argmax(a))
    shift = sites[ci] if recenter else np.zeros(box.d, dtype=int)
    rel = sites - shift
    keep = a > floor
    logw = np.log(a[keep])
    rk = rel[keep]
    rn = _l1(rk).astype(float)
    results = []
    ells = np.vstack([np.zeros((1, box.d), dtype=int), lattice_ball(box.d, ell_search)])
    for ell in ells:
        best = _best_for_ell(logw, rn, _l1(rk + ell).astype(float), gamma, float(_l1(ell)), obj_fn)
        if best is not None:
            results.append((tuple(int(v) for v in ell), *best))
    if not results:
        raise NoFiniteCertificate(f"no certificate at gamma={gamma}")
    omin = min(r[3] for r in results)
    near = [r for r in results if r[3] <= omin * (1 + 1e-9)]
    near.sort(key=lambda r: (int(np.abs(r[0]).sum()), r[0]))
    ell, C, C_ell, obj = near[0]
    C *= 1 + 1e-12  # absorb rounding in the post-hoc check
    cert = GoodCertificate(float(gamma), ell, C, C_ell, tuple(int(v) for v in sites[ci]),
                           tuple(int(v) for v in shift), 0.0, abs(nrm - 1.0) < 1e-8, obj,
                           sorted(results, key=lambda r: r[3])[:5])
    diff = a[keep] - cert.bound(rk)
    cert.fit_residual = float(np.max(diff, initial=-np.inf))
    return cert


@dataclass
class LocalizationReport:
    centers: list
    rates: np.ndarray
    rate_ci: np.ndarray
    certificates: list
    median_rate: float
    sule: tuple[float, float] | None

    def to_json(self) -> dict:
        return {
            "centers": [list(c) for c in self.centers],
            "rates": self.rates.tolist(),
            "rate_ci": self.rate_ci.tolist(),
            "median_rate": self.median_rate,
            "sule": None if self.sule is None else {"C": self.sule[0], "gamma": self.sule[1]},
            "certificates": [None if c is None else {"gamma": c.gamma, "ell": list(c.ell), "C": c.C,
                                                     "C_ell": c.C_ell, "center": list(c.center),
                                                     "fit_residual": c.fit_residual} for c in self.certificates],
        }


def sule_fit(vectors, epsilon: float, box: BoxIndex | None = None, gamma: float | None = None,
             margin: int = 0, floor: float = UNDERFLOW) -> tuple[float, float]:
    """Smallest C with |u_m(n)| <= C e^{eps|n_m|} e^{-gamma|n-n_m|} over all columns.

    gamma defaults to the median of the per-vector decay fits.
    """
    V = np.asarray(vectors)
    if V.ndim == 1:
        V = V[:, None]
    box = infer_box(V[:, 0], box)
    sites = box.sites()
    if gamma is None:
        rates = []
        for j in range(V.shape[1]):
            try:
                rates.append(decay_fit(V[:, j], margin, box, floor).gamma)
            except TooFewSamples:
                continue
        gamma = float(np.median(rates)) if rates else 0.0
    logC = -np.inf
    for j in range(V.shape[1]):
        a = np.abs(V[:, j])
        c = sites[int(np.argmax(a))]
        keep = a > floor
        val = np.log(a[keep]) + gamma * _l1(sites[keep] - c) - epsilon * float(_l1(c))
        logC = max(logC, float(np.max(val, initial=-np.inf)))
    return float(math.exp(logC)), float(gamma)


def localization_report(dec: EigenDecomposition, box: BoxIndex | None = None, margin: int = 0,
                        epsilon: float = 0.1, cert_gamma: float | None = None, ell_search: int = 10) -> LocalizationReport:
    V = dec.vectors
    box = infer_box(V[:, 0], box)
    centers, rates, cis, certs = [], [], [], []
    for j in range(V.shape[1]):
        try:
            fit = decay_fit(V[:, j], margin, box)
            centers.append(fit.center)
            rates.append(max(fit.gamma, 0.0))
            cis.append((fit.gamma - 1.96 * fit.stderr, fit.gamma + 1.96 * fit.stderr))
        except TooFewSamples:
            centers.append(tuple(int(v) for v in box.sites()[int(np.argmax(np.abs(V[:, j])))]))
            rates.append(0.0)
            cis.append((0.0, 0.0))
        if cert_gamma is not None:
            try:
                certs.append(certify_good(V[:, j], cert_gamma, ell_search, box))
            except NoFiniteCertificate:
                certs.append(None)
        else:
            certs.append(None)
    rates_arr = np.array(rates)
    sule = sule_fit(V, epsilon, box, gamma=float(np.median(rates_arr)), margin=margin)
    return LocalizationReport(centers, rates_arr, np.array(cis), certs, float(np.median(rates_arr)), sule)


@dataclass
class PhaseCenterMap:
    centers: dict
    localized: bool
    ipr: dict


def phase_center_map(family, box: BoxIndex | None = None) -> PhaseCenterMap:
    """For each (theta, decomposition): center of the eigenvector whose center is nearest 0.

    Ties go to the lower energy. ``localized`` is False when the selected vectors are
    spread out (median inverse participation ratio below 10/size).
    """
    if not family:
        raise ValueError("empty family")
    centers, iprs = {}, {}
    size = None
    for theta, dec in family:
        V = dec.vectors
        bx = infer_box(V[:, 0], box)
        sites = bx.sites()
        size = V.shape[0]
        idx = np.argmax(np.abs(V), axis=0)
        dist = _l1(sites[idx])
        j = int(np.argmin(dist))  # first minimum is the lowest energy
        centers[float(theta)] = tuple(int(v) for v in sites[idx[j]])
        iprs[float(theta)] = float(np.sum(V[:, j] ** 4))
    localized = bool(np.median(list(iprs.values())) > 10.0 / size)
    return PhaseCenterMap(centers, localized, iprs)
