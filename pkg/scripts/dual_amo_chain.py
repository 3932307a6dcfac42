"""Rotation tuning, KAM reduction, dual eigenfunction and good certificate for the
dual almost Mathieu cocycle; prints the per-step KAM trace."""
import argparse
import math

from qpedl.arithmetics import GOLDEN
from qpedl.cocycle import Cocycle
from qpedl.duality import build_dual_eigenfunction
from qpedl.kam import reduce_to_constant, rotation_tune
from qpedl.localization import certify_good
from qpedl.trigpoly import TrigPoly


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--log-lam", type=float, default=4.0)
    ap.add_argument("--gamma-frac", type=float, default=0.85)
    args = ap.parse_args()
    lam, alpha, target = math.exp(args.log_lam), math.sqrt(5) - 2, GOLDEN / 2
    E = rotation_tune(lambda e: Cocycle.amo(e, 1 / lam, alpha), target, (-2.5, 2.5))
    red = reduce_to_constant(Cocycle.amo(E, 1 / lam, alpha), h=0.1, target_h=0.05, rot_dc=(0.05, 2.0),
                             rho=target, force=True)
    print(f"E = {E!r}")
    for s in red.trace[1:]:
        r = s.record
        print(f"step {r['step']:2d} {r['case']:13s} eps {r['eps']:.3e} -> {r['eps_next']:.3e} N={r['N']} "
              f"resonance={r['resonance']}")
    print("certificates:", red.decomposition.certificates)
    de = build_dual_eigenfunction(red, TrigPoly.cosine(2.0), lam, alpha, E, target)
    print(f"dual residual {de.residual:.3e}, branch {de.branch}, C {de.C:.4g}, C_l {de.C_ell:.3g}")
    cert = certify_good(de.coefficients, args.gamma_frac * math.log(lam), 10, de.box)
    print(f"certificate: l={cert.ell} C={cert.C:.6g} C_l={cert.C_ell:.3g} fit_residual={cert.fit_residual:.3g}")


if __name__ == "__main__":
    main()
