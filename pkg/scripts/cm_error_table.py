"""Covariance-matrix and energy errors against the oracle for several rho and tolerances.

Writes CSV rows ``dims,rho,tol,cost_calls,energy_error,cm_frobenius,delta_x,delta_p``.

    python3 scripts/cm_error_table.py --dims 3 3 3 --rho 1.9 2.5 --tol 1e-5 1e-7
"""

import argparse
import csv
import sys

import numpy as np

from sympopt import cost as C
from sympopt.gaussian import block_diagonal_ground_cm, symplectic_spectrum
from sympopt.hamiltonian import LatticeSpec, build_qdo
from sympopt.optimize import OptimizerConfig, init_gamma_t, minimize


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", type=int, nargs="+", default=[3, 3, 3])
    ap.add_argument("--rho", type=float, nargs="+", default=[1.9, 2.5])
    ap.add_argument("--tol", type=float, nargs="+", default=[1e-5, 1e-7])
    ap.add_argument("--out", type=argparse.FileType("w"), default=sys.stdout)
    args = ap.parse_args(argv)

    w = csv.writer(args.out)
    w.writerow(["dims", "rho", "tol", "cost_calls", "energy_error", "cm_frobenius", "delta_x", "delta_p"])
    for rho in args.rho:
        ham = build_qdo(LatticeSpec(tuple(args.dims), rho))
        d = ham.d
        ref = block_diagonal_ground_cm(ham.V).gamma
        e0 = symplectic_spectrum(ham).e0
        for tol in args.tol:
            f0 = init_gamma_t(ham)
            x, trace = minimize(C.objective(ham, f0), f0.to_vector(), OptimizerConfig(tol=tol))
            f = f0.with_vector(x)
            diff = C.covariance(f).gamma - ref
            row = [
                C.energy_cost(f, ham) - e0,
                np.linalg.norm(diff),
                np.max(np.abs(diff[:d, :d])),
                np.max(np.abs(diff[d:, d:])),
            ]
            w.writerow(["x".join(map(str, args.dims)), rho, tol, len(trace)] + [f"{v:.6e}" for v in row])
            args.out.flush()


if __name__ == "__main__":
    main()
