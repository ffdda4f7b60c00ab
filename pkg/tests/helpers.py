"""Random instances shared by the test modules."""

import numpy as np

from sympopt.cost import TriangularFactors
from sympopt.hamiltonian import from_matrix


def random_spd(rng, n, floor=0.5):
    A = rng.normal(size=(n, n)) / np.sqrt(n)
    return A @ A.T + floor * np.eye(n)


def random_sym(rng, d, scale=0.3):
    A = rng.normal(scale=scale, size=(d, d))
    return A + A.T


def random_factors(rng, d, mode="energy", k=0, scale=0.3):
    M1 = rng.normal(scale=scale, size=d) if mode == "gap" else random_sym(rng, d, scale)
    return TriangularFactors.from_matrices(
        M1, random_sym(rng, d, scale), random_sym(rng, d, scale), mode, k
    )


def random_hamiltonian(rng, d):
    return from_matrix(random_spd(rng, 2 * d))


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, title: str, checks) -> bool:
    """Log one PASS/FAIL line for an acceptance criterion.

    ``checks`` holds ``(label, value, limit, ok)`` tuples; the criterion passes
    when every check does.
    """
    ok = all(c[3] for c in checks)
    detail = "; ".join(f"{label}: {value:.3g} vs {limit}" for label, value, limit, _ in checks)
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}  [{detail}]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok
