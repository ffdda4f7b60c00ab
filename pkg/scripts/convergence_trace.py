"""Energy error versus cost calls for the gamma_T start and for a warm start.

Writes CSV rows ``init,step,energy_error``.

    python3 scripts/convergence_trace.py --dims 5 5 5 --rho 1.9 --warm-rho 1.919
"""

import argparse
import csv
import sys

from sympopt import cost as C
from sympopt.gaussian import symplectic_spectrum
from sympopt.hamiltonian import LatticeSpec, build_qdo
from sympopt.optimize import OptimizerConfig, init_gamma_t, minimize


def solve(ham, f0, tol, max_steps):
    x, trace = minimize(C.objective(ham, f0), f0.to_vector(), OptimizerConfig(tol=tol, max_steps=max_steps))
    return f0.with_vector(x), trace


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", type=int, nargs="+", default=[5, 5, 5])
    ap.add_argument("--rho", type=float, default=1.9)
    ap.add_argument("--warm-rho", type=float, default=1.919)
    ap.add_argument("--tol", type=float, default=1e-9)
    ap.add_argument("--max-steps", type=int, default=600)
    ap.add_argument("--out", type=argparse.FileType("w"), default=sys.stdout)
    args = ap.parse_args(argv)

    ham = build_qdo(LatticeSpec(tuple(args.dims), args.rho))
    e0 = symplectic_spectrum(ham).e0
    _, cold = solve(ham, init_gamma_t(ham), args.tol, args.max_steps)
    source = build_qdo(LatticeSpec(tuple(args.dims), args.warm_rho))
    f_src, _ = solve(source, init_gamma_t(source), 1e-7, args.max_steps)
    _, warm = solve(ham, f_src, args.tol, args.max_steps)

    w = csv.writer(args.out)
    w.writerow(["init", "step", "energy_error"])
    for name, trace in (("gamma_t", cold), (f"warm_rho{args.warm_rho:g}", warm)):
        for r in trace.records:
            w.writerow([name, r.step, f"{r.cost - e0:.17g}"])


if __name__ == "__main__":
    main()
