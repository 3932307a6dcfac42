"""Quantitative KAM reduction of quasi-periodic SL(2,R) cocycles close to constants.

A step works in the frame where the constant part is a rotation R_xi, writes the
perturbation in su(1,1) coordinates (z real, w complex) and solves the
homological equation mode by mode:

    z_Y(n) = -z_f(n) / (1 - e^{2 pi i <n,alpha>})             n != 0
    w_Y(n) = -w_f(n) / (1 - e^{2 pi i (<n,alpha> + 2 xi)})

A w-mode n is resonant when <n,alpha> + 2 xi is within eps^sigma of an integer;
it is then removed by the rotation R_{<n*,theta>/2} with n* = -n, which shifts
the rotation angle by -<n*,alpha>/2 and adds n* to the degree.

Near-identity group elements are carried as G = g - I so that the new remainder
keeps relative accuracy far below double-precision epsilon.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .arithmetics import FrequencyVector, as_frequency, certify_dc, dc_alpha_check, torus_dist
from .cocycle import Cocycle, degree_probe, rotation_number
from .errors import (DcViolatedMidRun, GateFailed, HyperbolicConstant, MultipleResonances, NoConvergence,
                     NotBracketed, RationalResonance, SmallnessGateFailed, StepCapReached)
from .sl2 import (compose1, det2, elliptic_normal_form, expm1_traceless, expm_traceless, from_su11_params,
                  inv2, log1p_sl2, logm_sl2, norm2, rot, rotation_angle, sl2_from_su11, su11_of, su11_params)
from .trigpoly import TrigPoly, sample_points

DEFAULT_SIGMA = 0.5
DEFAULT_C0 = 4.0
ACTIVE_FRACTION = 1e-2  # modes below eps^2 * this (weighted) are left in the remainder


@dataclass
class ConstantCocycle:
    A: np.ndarray

    @property
    def su11(self) -> tuple[float, complex]:
        return su11_params(self.A)

    @property
    def xi(self) -> float:
        """Rotation angle: eig(A) = {e^{+-2 pi i xi}}, signed for elliptic A."""
        tr = float(np.trace(self.A))
        if abs(tr) < 2:
            return rotation_angle(self.A)
        if abs(tr) <= 2 + 1e-12:
            return 0.0 if tr > 0 else 0.5
        raise HyperbolicConstant(f"trace {tr:.6g} is hyperbolic")

    def roundtrip_error(self) -> float:
        t, nu = self.su11
        return float(np.max(np.abs(from_su11_params(t, nu) - self.A)))


@dataclass
class StepFactor:
    """One step's conjugacy Q e^{Y(theta)} R_{<n*,theta>/2} (n* = None when non-resonant)."""
    Q: np.ndarray
    Y: TrigPoly
    nstar: tuple[int, ...] | None
    L_before: np.ndarray


@dataclass
class KamState:
    j: int
    A: np.ndarray
    f: TrigPoly  # sl(2,R)-valued samples stored as Fourier coefficients
    h: float
    eps: float
    alpha: FrequencyVector
    P: np.ndarray  # periodic part of the accumulated conjugacy on the sample grid
    L: np.ndarray  # degree of the accumulated conjugacy
    N: int = 0
    case: str = "initial"
    resonance_log: list = field(default_factory=list)
    factors: list = field(default_factory=list)
    record: dict = field(default_factory=dict)

    @property
    def grid(self) -> tuple[int, ...]:
        return self.f.grid

    @property
    def deg(self) -> tuple[int, ...]:
        return tuple(int(v) for v in self.L)

    def conjugacy(self, points) -> np.ndarray:
        """Accumulated B(theta) = P(theta) R_{<L,theta>/2} at arbitrary (unreduced) points."""
        pts = np.asarray(points, dtype=float).reshape(-1, self.alpha.d)
        Pp = TrigPoly.from_samples(self.P, self.alpha.d)(pts).real
        return Pp @ rot(pts @ self.L / 2)

    def cocycle_at(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, self.alpha.d)
        fs = self.f(pts).real
        return self.A @ expm_traceless(fs)


def _grid_points(state_or_grid) -> np.ndarray:
    grid = state_or_grid if isinstance(state_or_grid, tuple) else state_or_grid.grid
    return sample_points(grid)


def smallness_bound(A, h: float, h_next: float, tau: float, kappa: float,
                    C0: float = DEFAULT_C0, D0: float | None = None) -> float:
    """D0 / ||A||^C0 (min{1, 1/h}(h - h_next))^{C0 tau}, with D0 = kappa/100 by default."""
    D0 = kappa / 100 if D0 is None else D0
    return float(D0 / float(norm2(np.asarray(A))) ** C0 * (min(1.0, 1.0 / h) * (h - h_next)) ** (C0 * tau))


def _frequency_dc(alpha: FrequencyVector, bound: int) -> tuple[float, float]:
    if alpha.dio_kappa is not None and alpha.dio_tau is not None:
        return float(alpha.dio_kappa), float(alpha.dio_tau)
    tau = float(alpha.d + 1)
    return certify_dc(alpha, tau, bound), tau


def initial_state(c: Cocycle, h: float, grid: int | None = None) -> KamState:
    """Split c = A e^{f} with A constant and f small, sampled on a uniform grid."""
    d = c.d
    grid = grid or (64 if d == 1 else 32)
    g = (grid,) * d
    pts = sample_points(g).reshape(-1, d)
    if c.kind == "schrodinger":
        A = np.array([[c.energy, -1.0], [1.0, 0.0]])
        v = c.potential(pts).real
        fs = np.zeros((len(pts), 2, 2))
        fs[:, 1, 0] = v
    elif c.kind == "matrix":
        A = np.asarray(c.matrix, dtype=float)
        fs = np.zeros((len(pts), 2, 2))
    else:
        mats = c.matrices(pts).real
        A = mats.mean(axis=0)
        dt = det2(A)
        if dt <= 0:
            raise GateFailed("mean of the cocycle is not in GL+(2,R)")
        A = A / math.sqrt(dt)
        fs = log1p_sl2(inv2(A) @ mats - np.eye(2))
    f = TrigPoly.from_samples(fs.reshape(g + (2, 2)), d, h)
    P = np.broadcast_to(np.eye(2), g + (2, 2)).copy()
    return KamState(0, A, f, h, f.norm(h), c.frequency, P, np.zeros(d, dtype=int))


def _sample(coef: np.ndarray, d: int) -> np.ndarray:
    n = int(np.prod(coef.shape[:d]))
    return np.fft.ifftn(coef, axes=tuple(range(d))) * n


def kam_step(state: KamState, h_next: float, sigma: float = DEFAULT_SIGMA, strict: bool = False,
             force: bool = True, C0: float = DEFAULT_C0, D0: float | None = None,
             N_cap: int | None = None) -> KamState:
    """One almost-reducibility step from radius state.h to h_next.

    The smallness gate is advisory when ``force`` is True (its status lands in the
    step record); otherwise a failing gate raises SmallnessGateFailed.
    """
    if not 0 < h_next < state.h:
        raise ValueError("h_next must lie in (0, h)")
    alpha, d = state.alpha, state.alpha.d
    eps = state.eps
    A = state.A
    rec: dict = {"step": state.j, "eps": eps, "h": state.h, "h_next": h_next}
    Nj = int(min(2 * abs(math.log(max(eps, 1e-300))) / (state.h - h_next), 10**6))
    if N_cap is not None:
        Nj = min(Nj, N_cap)
    rec["N"] = Nj
    try:
        kappa, tau = _frequency_dc(alpha, max(1, min(Nj, 200)))
        bound = smallness_bound(A, state.h, h_next, tau, kappa, C0, D0)
        rec["gate"] = {"bound": bound, "passed": bool(eps <= bound), "kappa": kappa, "tau": tau}
    except RationalResonance:
        rec["gate"] = {"bound": 0.0, "passed": False}
    if not rec["gate"]["passed"] and not force and eps > 0:
        raise SmallnessGateFailed(f"eps={eps:.3g} exceeds gate {rec['gate']['bound']:.3g}")

    Q, xi = elliptic_normal_form(A)
    grid = state.grid
    npts = int(np.prod(grid))
    fs = state.f.samples().real
    Qi = inv2(Q)
    ft = Qi @ fs @ Q
    z, w = su11_of(ft)
    zc = np.fft.fftn(np.real(z), axes=tuple(range(d))) / npts
    wc = np.fft.fftn(w, axes=tuple(range(d))) / npts
    ks = state.f.modes()
    kn = np.abs(ks).sum(axis=-1)
    dots = ks @ alpha.array
    weight = np.exp(2 * np.pi * kn * state.h)
    floor = ACTIVE_FRACTION * eps * eps
    inband = kn <= Nj
    act_z = inband & (np.abs(zc) * weight > floor) & (kn > 0)
    act_w = inband & (np.abs(wc) * weight > floor)
    gap = torus_dist(dots + 2 * xi)
    thresh = eps ** sigma if eps > 0 else 0.0
    zero = kn == 0
    res_mask = act_w & ~zero & (gap < thresh)
    elim_w = act_w & ~res_mask & ~(zero & (gap < thresh))

    nstar = None
    if res_mask.any():
        cands = ks[res_mask]
        order = sorted(range(len(cands)), key=lambda i: (int(np.abs(cands[i]).sum()), tuple(cands[i])))
        chosen = cands[order[0]]
        rec["resonant_modes"] = [tuple(int(v) for v in c) for c in cands]
        if len(cands) > 1:
            rec["multiple_resonances"] = True
            if strict:
                raise MultipleResonances(f"resonant modes {rec['resonant_modes']}")
        nstar = tuple(int(-v) for v in chosen)

    zY = np.zeros_like(zc)
    wY = np.zeros_like(wc)
    zY[act_z] = -zc[act_z] / (1 - np.exp(2j * np.pi * dots[act_z]))
    wdiv = 1 - np.exp(2j * np.pi * (dots + 2 * xi))
    wY[elim_w] = -wc[elim_w] / wdiv[elim_w]
    Yt = sl2_from_su11(np.real(_sample(zY, d)), _sample(wY, d))
    shift = np.exp(2j * np.pi * dots)
    Ys = sl2_from_su11(np.real(_sample(zY * shift, d)), _sample(wY * shift, d))
    Rx = rot(xi)
    X = inv2(Rx) @ Ys @ Rx
    G = compose1(expm1_traceless(-X), expm1_traceless(ft), expm1_traceless(Yt))
    pts = sample_points(grid)
    xi_new = xi
    if nstar is not None:
        phi = pts @ np.array(nstar) / 2
        Rp = rot(phi)
        G = inv2(Rp) @ G @ Rp
        xi_new = xi - float(np.dot(nstar, alpha.array)) / 2
    Z = log1p_sl2(G)
    c = Z.reshape(-1, 2, 2).mean(axis=0)
    c = c - np.trace(c) / 2 * np.eye(2)
    fnew = log1p_sl2(compose1(expm1_traceless(-c), G))
    A_new = rot(xi_new) @ expm_traceless(c)
    f_new = TrigPoly.from_samples(fnew, d, h_next)
    eps_new = f_new.norm(h_next)

    Ytp = TrigPoly.from_samples(Yt, d, state.h)
    L = state.L
    # P_{j+1} = P_j R_{<L,th>/2} Q e^{Y} R_{-<L,th>/2}; the rotation of this step moves into L
    RL = rot(pts @ L / 2)
    step_periodic = Q @ expm_traceless(Yt)
    P_new = state.P @ (RL @ step_periodic @ inv2(RL))
    L_new = L + (np.array(nstar) if nstar is not None else 0)

    rec.update({
        "case": "resonant" if nstar is not None else "non-resonant",
        "xi": xi, "xi_next": xi_new, "eps_next": eps_new,
        "Y_norm": Ytp.norm(state.h), "slack": eps_new / (eps * eps) if eps > 0 else 0.0,
        "resonance": list(nstar) if nstar is not None else None,
    })
    if nstar is not None:
        t, nu = su11_of(logm_sl2(A_new))  # defined for hyperbolic A_+ near the identity as well
        rec["t_plus"], rec["nu_plus"] = float(np.real(t)), float(abs(nu))
        rec["A_plus_elliptic"] = bool(abs(np.trace(A_new)) < 2)
    log = list(state.resonance_log)
    if nstar is not None:
        log.append((state.j, nstar))
    factors = state.factors + [StepFactor(Q, Ytp, nstar, L.copy())]
    return KamState(state.j + 1, A_new, f_new, h_next, eps_new, alpha, P_new, L_new, Nj, rec["case"],
                    log, factors, rec)


def step_residual(before: KamState, after: KamState, points=None, count: int = 64, seed: int = 0) -> float:
    """max |B(th+a)^{-1} A e^{f(th)} B(th) - A_+ e^{f_+(th)}| over test points, for the step's B."""
    d = before.alpha.d
    if points is None:
        points = np.random.default_rng(seed).uniform(size=(count, d))
    pts = np.asarray(points, dtype=float).reshape(-1, d)
    fac = after.factors[-1]

    def B(p):
        out = fac.Q @ expm_traceless(fac.Y(p).real)
        if fac.nstar is not None:
            out = out @ rot(p @ np.array(fac.nstar) / 2)
        return out

    a = before.alpha.array
    lhs = inv2(B(pts + a)) @ before.cocycle_at(pts) @ B(pts)
    return float(np.max(np.abs(lhs - after.cocycle_at(pts))))


def conjugacy_residual(c: Cocycle, state: KamState, count: int = 64, seed: int = 0) -> float:
    """max |B(th+a)^{-1} c(th) B(th) - A_j e^{f_j(th)}| for the accumulated B."""
    d = c.d
    pts = np.random.default_rng(seed).uniform(size=(count, d))
    a = c.frequency.array
    lhs = inv2(state.conjugacy(pts + a)) @ c.matrices(pts).real @ state.conjugacy(pts)
    return float(np.max(np.abs(lhs - state.cocycle_at(pts))))


@dataclass
class ConjugacyDecomposition:
    B_tilde: TrigPoly  # on the double torus (period 2)
    ell: tuple[int, ...]
    Y: TrigPoly
    nu: complex
    deg_Btilde: tuple[int, ...]
    norms: dict
    h_tilde: float
    certificates: dict = field(default_factory=dict)

    def evaluate(self, points) -> np.ndarray:
        """B_tilde(th) R_{<l,th>/2} e^{Y(th)}."""
        pts = np.asarray(points, dtype=float).reshape(-1, self.B_tilde.d)
        return self.B_tilde(pts).real @ rot(pts @ np.array(self.ell) / 2) @ expm_traceless(self.Y(pts).real)

    def to_json(self) -> dict:
        return {"ell": list(self.ell), "deg_Btilde": list(self.deg_Btilde), "nu": [self.nu.real, self.nu.imag],
                "norms": self.norms, "h_tilde": self.h_tilde, "certificates": self.certificates}


def decompose(state: KamState, h_tilde: float) -> ConjugacyDecomposition:
    """Split the accumulated conjugacy at the last resonance: B = B_tilde R_{<l,th>/2} e^{Y}."""
    d = state.alpha.d
    grid = state.grid
    pts = sample_points(grid)
    facs = state.factors
    res_idx = [i for i, fc in enumerate(facs) if fc.nstar is not None]
    r = res_idx[-1] if res_idx else -1
    ell = np.array(facs[r].nstar) if r >= 0 else np.zeros(d, dtype=int)
    # periodic part and degree right after step r
    P = np.broadcast_to(np.eye(2), grid + (2, 2)).copy()
    L = np.zeros(d, dtype=int)
    for fc in facs[: r + 1]:
        RL = rot(pts @ L / 2)
        P = P @ (RL @ fc.Q @ expm_traceless(fc.Y.samples().real) @ inv2(RL))
        if fc.nstar is not None:
            L = L + np.array(fc.nstar)
    ell0 = L - ell
    Q_next = facs[r + 1].Q if r + 1 < len(facs) else np.eye(2)
    # B_tilde = P R_{<L,th>/2} Q_next R_{-<l,th>/2}, sampled over the double torus
    g2 = tuple(2 * m for m in grid)
    pts2 = sample_points(g2, 2)
    idx = tuple(np.meshgrid(*[np.arange(m) % (m // 2) for m in g2], indexing="ij"))
    P2 = P[idx]
    Bt = P2 @ rot(pts2 @ L / 2) @ Q_next @ rot(-(pts2 @ ell) / 2)
    B_tilde = TrigPoly.from_samples(Bt, d, h_tilde, period=2)
    # e^{Y} = e^{Y_{r+1}} Q_{r+2} e^{Y_{r+2}} ...
    G = np.zeros(grid + (2, 2))
    for k, fc in enumerate(facs[r + 1:]):
        parts = [] if k == 0 else [fc.Q - np.eye(2)]
        parts.append(expm1_traceless(fc.Y.samples().real))
        G = compose1(G, *parts)
    Y = TrigPoly.from_samples(log1p_sl2(G), d, h_tilde)
    try:
        _, nu = su11_params(state.A)
    except HyperbolicConstant:
        nu = complex("nan")
    norms = {"B_tilde": B_tilde.norm(h_tilde), "Y": Y.norm(h_tilde), "nu": abs(nu)}
    return ConjugacyDecomposition(B_tilde, tuple(int(v) for v in ell), Y, nu, tuple(int(v) for v in ell0),
                                  norms, h_tilde)


def reconstruction_error(dec: ConjugacyDecomposition, state: KamState, count: int = 64, seed: int = 1) -> float:
    pts = np.random.default_rng(seed).uniform(0, 2, size=(count, state.alpha.d))
    return float(np.max(np.abs(dec.evaluate(pts) - state.conjugacy(pts))))


def radius_schedule(h: float, h_tilde: float, steps: int) -> list[float]:
    """h_0 = h, h_j - h_{j+1} = (h - (h + h_tilde)/2) / 4^{j+1}."""
    out = [h]
    gap = h - (h + h_tilde) / 2
    for j in range(steps):
        out.append(out[-1] - gap / 4 ** (j + 1))
    return out


@dataclass
class ReductionResult:
    decomposition: ConjugacyDecomposition
    A_final: ConstantCocycle
    trace: list
    final: KamState

    def to_json(self) -> dict:
        return {"decomposition": self.decomposition.to_json(), "A_final": self.A_final.A.tolist(),
                "steps": [s.record for s in self.trace[1:]], "final_eps": self.final.eps,
                "deg": list(self.final.deg)}


def reduce_to_constant(c: Cocycle, h: float = 0.1, target_h: float = 0.05, rot_dc: tuple[float, float] | None = None,
                       rho: float | None = None, tol: float = 1e-24, max_steps: int = 30, grid: int | None = None,
                       sigma: float = DEFAULT_SIGMA, force: bool = False, strict: bool = False,
                       C0: float = DEFAULT_C0, D0: float | None = None, dc_bound: int = 50) -> ReductionResult:
    """Iterate kam_step until the remainder's dominating norm is below ``tol``.

    The initial smallness gate and the rotation-number Diophantine check raise
    GateFailed unless ``force`` is set; either way their status is recorded in
    the decomposition's certificates.
    """
    if not 0 < target_h < h:
        raise ValueError("need 0 < target_h < h")
    state = initial_state(c, h, grid)
    sched = radius_schedule(h, target_h, max_steps)
    certs: dict = {}
    kappa_a, tau_a = _frequency_dc(c.frequency, dc_bound)
    gate = smallness_bound(state.A, h, sched[1], tau_a, kappa_a, C0, D0)
    certs["gate"] = {"eps0": state.eps, "bound": gate, "passed": bool(state.eps <= gate), "forced": force}
    if state.eps > gate and not force:
        raise GateFailed(f"initial eps={state.eps:.3g} exceeds gate {gate:.3g}")
    if rot_dc is not None:
        if rho is None:
            rho = rotation_number(c, 200_000)
        ok = dc_alpha_check(rho, c.frequency, rot_dc[0], rot_dc[1], dc_bound)
        certs["rho_dc"] = {"rho": rho, "kappa": rot_dc[0], "tau": rot_dc[1], "passed": ok}
        if not ok and not force:
            raise GateFailed(f"rotation number {rho:.12g} fails DC_alpha{tuple(rot_dc)}")
    trace = [state]
    while state.eps >= tol:
        if state.j >= max_steps:
            err = StepCapReached(f"eps={state.eps:.3g} after {state.j} steps")
            err.trace = trace
            raise err
        state = kam_step(state, sched[state.j + 1], sigma=sigma, strict=strict, force=True, C0=C0, D0=D0)
        trace.append(state)
        if rot_dc is not None and rho is not None and state.case == "resonant":
            gap = float(torus_dist(2 * rho - state.L @ c.frequency.array))
            need = rot_dc[0] / (1 + np.abs(state.L).sum()) ** rot_dc[1]
            if gap < need and strict:
                raise DcViolatedMidRun(f"phase gap {gap:.3g} < {need:.3g} after resonance {state.deg}")
    dec = decompose(state, target_h)
    A_final = ConstantCocycle(state.A)
    ell_n = float(np.abs(dec.ell).sum())
    certs["es1_Y"] = bool(dec.norms["Y"] <= math.exp(-2 * np.pi * ell_n * target_h))
    certs["es1_nu"] = bool(dec.norms["nu"] <= 2 * math.exp(-2 * np.pi * ell_n * target_h))
    if rot_dc is not None:
        kap, tau = rot_dc
        lk = abs(math.log(kap))
        certs["es2"] = bool(dec.norms["B_tilde"] < lk ** tau * kap ** (-2 * (h - target_h) / target_h))
        certs["es3"] = bool(ell_n <= lk ** 4 / (h - target_h))
        if rho is not None and ell_n > 0:
            a = c.frequency.array
            gap = float(torus_dist(2 * rho - np.dot(dec.ell, a) - np.dot(dec.deg_Btilde, a)))
            certs["gap"] = {"value": gap, "bound": kap / (2 ** tau * ell_n ** tau),
                            "passed": bool(gap >= kap / (2 ** tau * ell_n ** tau))}
    certs["reconstruction"] = reconstruction_error(dec, state)
    certs["conjugacy_residual"] = conjugacy_residual(c, state)
    try:
        certs["deg_Btilde_probe"] = degree_probe(dec.B_tilde, grid=256).tolist()
    except Exception as exc:  # probe failure is a diagnostic, not a run failure
        certs["deg_Btilde_probe"] = str(exc)
    dec.certificates = certs
    return ReductionResult(dec, A_final, trace, state)


def rotation_tune(builder: Callable[[float], Cocycle], target_rho: float, bracket: tuple[float, float],
                  tol: float = 1e-8, iterates: int = 100_000, max_iter: int = 200) -> float:
    """Bisection on E for rho(E) = target_rho, with rho nonincreasing in E."""
    lo, hi = map(float, bracket)
    rlo = rotation_number(builder(lo), iterates)
    rhi = rotation_number(builder(hi), iterates)
    if not (rhi - tol <= target_rho <= rlo + tol):
        raise NotBracketed(f"rho({lo})={rlo:.10g}, rho({hi})={rhi:.10g} do not straddle {target_rho}")
    if rlo < rhi - 1e-9:
        raise NoConvergence("rotation number increased along the bracket")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        r = rotation_number(builder(mid), iterates)
        if not (rhi - 1e-9 <= r <= rlo + 1e-9):
            raise NoConvergence(f"rotation number not monotone at E={mid!r}")
        if abs(r - target_rho) < tol:
            return mid
        if r > target_rho:
            lo, rlo = mid, r
        else:
            hi, rhi = mid, r
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(mid)):
            break
    raise NotBracketed(f"target {target_rho} sits on a plateau (gap) near E={0.5 * (lo + hi)!r}")


@dataclass
class SpacingReport:
    ok: bool
    diagnostics: list

    def __bool__(self) -> bool:
        return self.ok


def resonance_spacing_check(log, eps_schedule, tau: float) -> SpacingReport:
    """|n_{i+1}| >= eps_{m_i}^{-1/(18 tau)} |n_i| for consecutive resonances (step m_i, n_i)."""
    diags = []
    for (m0, n0), (m1, n1) in zip(log, log[1:]):
        a0 = float(np.abs(n0).sum())
        a1 = float(np.abs(n1).sum())
        need = eps_schedule[m0] ** (-1 / (18 * tau)) * a0
        if a1 < need:
            diags.append(f"step {m1}: |n|={a1:g} < {need:.4g} required after step {m0}")
    return SpacingReport(not diags, diags)


def synthetic_reducible(alpha, xi: float, n, amp: float = 1e-3) -> tuple[Cocycle, Callable]:
    """A(th) = B(th + alpha) R_xi B(th)^{-1} with B = R_{<n,th>/2} e^{Y0(th)}.

    Y0 has entries of size ``amp`` built from cos and sin of 2 pi th_1, so the
    reduced angle must come out as xi + <n,alpha>/2. Returns (cocycle, B).
    """
    freq = as_frequency(alpha)
    nv = np.atleast_1d(np.asarray(n, dtype=float))
    if nv.shape != (freq.d,):
        raise ValueError("n must have one entry per frequency")

    def B(pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, freq.d)
        a = amp * np.cos(2 * np.pi * pts[:, 0])
        b = amp * np.sin(2 * np.pi * pts[:, 0])
        Y0 = np.stack([np.stack([a, b], -1), np.stack([b, -a], -1)], -2)
        return rot(pts @ nv / 2) @ expm_traceless(Y0)

    def A(pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, freq.d)
        return B(pts + freq.array) @ rot(xi) @ inv2(B(pts))

    return Cocycle(freq, func=A), B
