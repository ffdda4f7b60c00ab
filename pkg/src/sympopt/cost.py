"""Trace cost functions over unit-triangular factorizations and their gradients.

The variational state is ``L3 = U(M1) L(M2) U(M3)`` with block unit-triangular
factors ``U(M) = [[I, M], [0, I]]`` and ``L(M) = [[I, 0], [M, I]]``; the
covariance matrix is ``gamma = L3^T L3``.

Matrix gradients returned here are true derivatives with respect to the full
(unconstrained) matrix arguments, so they pass finite-difference checks
directly; :func:`sympopt.core.chain_gradient_to_params` maps them onto the
triangle parameters.
"""

from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .core import SymmetricParam, build_pk, n_triu, triu_indices
from .gaussian import CovarianceMatrix, symplectic_spectrum

MODES = ("energy", "gap", "partial")

op_counts: Counter = Counter()


def _mm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if os.environ.get("SYMPOPT_COUNT_OPS") == "1":
        op_counts[(a.shape, b.shape)] += 1
    return a @ b


def reset_op_counts() -> None:
    op_counts.clear()


@dataclass(frozen=True)
class TriangularFactors:
    """Parameters of ``L3``.

    In ``energy`` and ``partial`` mode ``m1`` is a :class:`SymmetricParam`; in
    ``gap`` mode it is a free length-d vector standing for the first row of M1.
    """

    d: int
    m1: SymmetricParam | np.ndarray
    m2: SymmetricParam
    m3: SymmetricParam
    mode: str = "energy"
    k: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "gap":
            m1 = np.asarray(self.m1, dtype=float).reshape(-1)
            if m1.size != self.d:
                raise ValueError(f"gap-mode m1 needs {self.d} entries, got {m1.size}")
            m1.setflags(write=False)
            object.__setattr__(self, "m1", m1)
            object.__setattr__(self, "k", 1)
        elif self.mode == "energy":
            object.__setattr__(self, "k", self.d)
        else:
            build_pk(self.d, self.k)
        for p in (self.m2, self.m3) + ((self.m1,) if self.mode != "gap" else ()):
            if p.d != self.d:
                raise ValueError(f"factor dimension {p.d} does not match d={self.d}")

    @classmethod
    def zeros(cls, d: int, mode: str = "energy", k: int = 0) -> TriangularFactors:
        m1 = np.zeros(d) if mode == "gap" else SymmetricParam.zeros(d)
        return cls(d, m1, SymmetricParam.zeros(d), SymmetricParam.zeros(d), mode, k)

    @classmethod
    def from_matrices(cls, M1, M2, M3, mode: str = "energy", k: int = 0) -> TriangularFactors:
        M2 = np.asarray(M2, dtype=float)
        d = M2.shape[0]
        if mode == "gap":
            M1 = np.asarray(M1, dtype=float)
            m1 = M1[0] if M1.ndim == 2 else M1
        else:
            m1 = SymmetricParam.from_symmetric(M1)
        return cls(
            d, m1, SymmetricParam.from_symmetric(M2), SymmetricParam.from_symmetric(M3), mode, k
        )

    @property
    def n_params(self) -> int:
        return (self.d if self.mode == "gap" else n_triu(self.d)) + 2 * n_triu(self.d)

    @property
    def M1(self) -> np.ndarray:
        if self.mode == "gap":
            raise AttributeError("gap-mode factors only carry the first row m1 of M1")
        return self.m1.matrix

    @property
    def M2(self) -> np.ndarray:
        return self.m2.matrix

    @property
    def M3(self) -> np.ndarray:
        return self.m3.matrix

    def leading_rows(self) -> np.ndarray:
        """First ``k`` rows of M1 (the only part a projected cost sees)."""
        if self.mode == "gap":
            return self.m1[None, :]
        return self.M1[: self.k]

    def step_metric(self) -> np.ndarray:
        """Per-parameter weights turning the flat gradient into the step taken
        by a Frobenius gradient step on the symmetric matrices themselves.

        Off-diagonal triangle slots get 1/2, diagonal slots 1/4 (a diagonal
        entry of M is twice its slot); free m1 entries get 1.
        """
        rows, cols = triu_indices(self.d)
        sym = np.where(rows == cols, 0.25, 0.5)
        first = np.ones(self.d) if self.mode == "gap" else sym
        return np.concatenate([first, sym, sym])

    def to_vector(self) -> np.ndarray:
        first = self.m1 if self.mode == "gap" else self.m1.x
        return np.concatenate([first, self.m2.x, self.m3.x])

    def with_vector(self, vec: np.ndarray) -> TriangularFactors:
        return factors_from_vector(self.d, vec, self.mode, self.k)


def factors_from_vector(d: int, vec, mode: str = "energy", k: int = 0) -> TriangularFactors:
    vec = np.asarray(vec, dtype=float)
    n1 = d if mode == "gap" else n_triu(d)
    nt = n_triu(d)
    if vec.size != n1 + 2 * nt:
        raise ValueError(f"expected {n1 + 2 * nt} parameters, got {vec.size}")
    first = vec[:n1].copy() if mode == "gap" else SymmetricParam(d, vec[:n1].copy())
    m2 = SymmetricParam(d, vec[n1 : n1 + nt].copy())
    m3 = SymmetricParam(d, vec[n1 + nt :].copy())
    return TriangularFactors(d, first, m2, m3, mode, k)


def _hmat(H) -> np.ndarray:
    return np.asarray(getattr(H, "H", H), dtype=float)


def _is_block(H) -> bool:
    return getattr(H, "structure", None) == "block_diagonal"


def _check_dims(f: TriangularFactors, H) -> None:
    n = _hmat(H).shape[0]
    if n != 2 * f.d:
        raise ValueError(f"Hamiltonian is {n}x{n} but factors have d={f.d}")


# --- L3 ---------------------------------------------------------------------


def l3_blocks(M1, M2, M3):
    """Blocks ``(A, B, M2, C)`` of L3 = [[A, B], [M2, C]]."""
    d = M2.shape[0]
    A = np.eye(d) + _mm(M1, M2)
    B = _mm(A, M3) + M1
    C = _mm(M2, M3) + np.eye(d)
    return A, B, C


def build_l3(f: TriangularFactors) -> np.ndarray:
    if f.mode == "gap":
        raise ValueError("build_l3 needs the full M1; gap-mode factors only carry m1")
    M1, M2, M3 = f.M1, f.M2, f.M3
    A, B, C = l3_blocks(M1, M2, M3)
    return np.block([[A, B], [M2, C]])


def l3_triple_product(M1, M2, M3) -> np.ndarray:
    """Explicit product U(M1) L(M2) U(M3); reference for :func:`build_l3`."""
    d = np.asarray(M2).shape[0]
    eye, zero = np.eye(d), np.zeros((d, d))
    upper1 = np.block([[eye, M1], [zero, eye]])
    lower = np.block([[eye, zero], [M2, eye]])
    upper3 = np.block([[eye, M3], [zero, eye]])
    return upper1 @ lower @ upper3


def covariance(f: TriangularFactors) -> CovarianceMatrix:
    L = build_l3(f)
    g = L.T @ L
    return CovarianceMatrix(f.d, 0.5 * (g + g.T))


# --- ground-state energy --------------------------------------------------


def energy_cost(f: TriangularFactors, H) -> float:
    """``tr(L3 H L3^T) / 4``; d x d block products only when H = V (+) I."""
    _check_dims(f, H)
    if f.mode == "gap":
        raise ValueError("energy cost needs energy- or partial-mode factors")
    if _is_block(H):
        V = H.V
        A, B, C = l3_blocks(f.M1, f.M2, f.M3)
        M2 = f.M2
        total = (
            np.sum(_mm(A, V) * A)
            + np.sum(B * B)
            + np.sum(_mm(M2, V) * M2)
            + np.sum(C * C)
        )
        return 0.25 * float(total)
    L = build_l3(f)
    return 0.25 * float(np.sum(_mm(L, _hmat(H)) * L))


def energy_grad_generic(M1, M2, M3, H: np.ndarray):
    d = M2.shape[0]
    A, B, C = l3_blocks(M1, M2, M3)
    L = np.block([[A, B], [M2, C]])
    LH = _mm(L, H)
    K11, K12 = LH[:d, :d], LH[:d, d:]
    K21, K22 = LH[d:, :d], LH[d:, d:]
    g1 = _mm(_mm(K12, M3), M2) + K12 + _mm(K11, M2)
    g2 = _mm(_mm(M1, K12), M3) + _mm(M1, K11) + _mm(K22, M3) + K21
    g3 = _mm(_mm(M2, M1), K12) + K12 + _mm(M2, K22)
    return 0.5 * g1, 0.5 * g2, 0.5 * g3


def energy_grad_block(M1, M2, M3, V: np.ndarray):
    d = M2.shape[0]
    eye = np.eye(d)
    A, B, C = l3_blocks(M1, M2, M3)
    AV = _mm(A, V)
    g1 = _mm(B, eye + _mm(M3, M2)) + _mm(AV, M2)
    g2 = _mm(M1, _mm(B, M3) + AV) + _mm(C, M3) + _mm(M2, V)
    g3 = _mm(eye + _mm(M2, M1), B) + _mm(M2, C)
    return 0.5 * g1, 0.5 * g2, 0.5 * g3


def energy_grad(f: TriangularFactors, H):
    """Matrix gradients ``(dE/dM1, dE/dM2, dE/dM3)`` of :func:`energy_cost`."""
    _check_dims(f, H)
    if _is_block(H):
        return energy_grad_block(f.M1, f.M2, f.M3, H.V)
    return energy_grad_generic(f.M1, f.M2, f.M3, _hmat(H))


# --- projected (partial-sum / gap) costs ------------------------------------


def _projected_rows(R: np.ndarray, M2: np.ndarray, M3: np.ndarray):
    """Rows of P_k L3 given the leading rows R of M1: returns ``(top, bottom)``."""
    k, d = R.shape
    E = np.eye(k, d)
    top_pos = E + _mm(R, M2)
    top = np.hstack([top_pos, _mm(top_pos, M3) + R])
    bottom = np.hstack([M2[:k], _mm(M2[:k], M3) + E])
    return top, bottom


def _times_h(rows: np.ndarray, H) -> np.ndarray:
    if _is_block(H):
        d = H.d
        return np.hstack([_mm(rows[:, :d], H.V), rows[:, d:]])
    return _mm(rows, _hmat(H))


def _projected(f: TriangularFactors, H, k: int):
    _check_dims(f, H)
    build_pk(f.d, k)
    if f.mode == "gap" and k != 1:
        raise ValueError("gap-mode factors only support k = 1")
    R = f.leading_rows()[:k] if f.mode == "gap" else f.M1[:k]
    M2, M3 = f.M2, f.M3
    top, bottom = _projected_rows(R, M2, M3)
    PL = np.vstack([top, bottom])
    return R, M2, M3, PL, _times_h(PL, H)


def partial_cost(f: TriangularFactors, H, k: int | None = None) -> float:
    """``tr(P_k L3 H L3^T P_k^T) / 4`` using only 2k x 2d row blocks."""
    k = f.k if k is None else k
    *_, PL, B = _projected(f, H, k)
    return 0.25 * float(np.sum(B * PL))


def gap_cost(f: TriangularFactors, H) -> float:
    return partial_cost(f, H, 1)


def partial_grad(f: TriangularFactors, H, k: int | None = None):
    """Matrix gradients of :func:`partial_cost` w.r.t. (M1, M2, M3)."""
    k = f.k if k is None else k
    R, M2, M3, _, B = _projected(f, H, k)
    return _partial_grad_from(R, M2, M3, B)


def _partial_grad_from(R, M2, M3, B):
    k, d = R.shape
    E = np.eye(k, d)
    Bt1, Bt2 = B[:k, :d], B[:k, d:]
    Bb1, Bb2 = B[k:, :d], B[k:, d:]
    Bt2M3 = _mm(Bt2, M3)
    g1 = np.zeros((d, d))
    g1[:k] = _mm(Bt1, M2) + _mm(Bt2M3, M2) + Bt2
    g2 = _mm(R.T, Bt1 + Bt2M3) + _mm(E.T, Bb1 + _mm(Bb2, M3))
    g3 = _mm(E.T, Bt2) + _mm(_mm(M2, R.T), Bt2) + _mm(M2[:, :k], Bb2)
    return 0.5 * g1, 0.5 * g2, 0.5 * g3


def gap_grad(f: TriangularFactors, H):
    """Gradients ``(d/dm1, d/dM2, d/dM3)`` of :func:`gap_cost` as outer products.

    ``a1 = B[0]`` and ``a2 = B[1]`` are the two rows of ``B = P_1 L3 H``.
    """
    if f.mode != "gap":
        raise ValueError("gap_grad needs gap-mode factors")
    R, M2, M3, _, B = _projected(f, H, 1)
    return _gap_grad_from(R[0], M2, M3, B)


def _gap_grad_from(m1, M2, M3, B):
    d = m1.size
    e1 = np.zeros(d)
    e1[0] = 1.0
    a1_pos, a1_mom = B[0, :d], B[0, d:]
    a2_pos, a2_mom = B[1, :d], B[1, d:]
    a1_mom_M3 = a1_mom @ M3
    g_m1 = a1_mom_M3 @ M2 + a1_mom + a1_pos @ M2
    g2 = np.outer(m1, a1_mom_M3 + a1_pos) + np.outer(e1, a2_pos + a2_mom @ M3)
    g3 = np.outer(M2 @ m1, a1_mom) + np.outer(M2[0], a2_mom) + np.outer(e1, a1_mom)
    return 0.5 * g_m1, 0.5 * g2, 0.5 * g3


# --- flat-vector interface used by the optimizers ---------------------------


def cost_and_param_grad(f: TriangularFactors, H):
    """Cost and gradient w.r.t. :meth:`TriangularFactors.to_vector`."""
    from .core import chain_gradient_to_params

    if f.mode == "energy":
        value = energy_cost(f, H)
        g1, g2, g3 = energy_grad(f, H)
        first = chain_gradient_to_params(g1)
    else:
        R, M2, M3, PL, B = _projected(f, H, f.k)
        value = 0.25 * float(np.sum(B * PL))
        if f.mode == "gap":
            first, g2, g3 = _gap_grad_from(R[0], M2, M3, B)
        else:
            g1, g2, g3 = _partial_grad_from(R, M2, M3, B)
            first = chain_gradient_to_params(g1)
    grad = np.concatenate([first, chain_gradient_to_params(g2), chain_gradient_to_params(g3)])
    return value, grad


def objective(H, template: TriangularFactors):
    """Closure ``vec -> (cost, grad)`` over factors shaped like ``template``."""

    def fun(vec):
        return cost_and_param_grad(template.with_vector(vec), H)

    return fun


# --- estimators -------------------------------------------------------------


def gap_estimate(value: float) -> float:
    """Gap estimate from a converged k = 1 projected cost (``2 * value``)."""
    return 2.0 * value


def partial_sum_estimate(value: float) -> float:
    """Estimate of ``eps_1 + ... + eps_k`` from a converged k-projected cost."""
    return 2.0 * value


def eigenvalues_from_partial_sums(sums) -> np.ndarray:
    """Individual eigenvalue estimates as successive differences of partial sums."""
    sums = np.asarray(sums, dtype=float)
    return np.diff(np.concatenate([[0.0], sums]))


def projected_spectrum(f: TriangularFactors, H, k: int | None = None) -> np.ndarray:
    """Symplectic spectrum of the 2k x 2k matrix ``P_k L3 H L3^T P_k^T``."""
    k = f.k if k is None else k
    *_, PL, B = _projected(f, H, k)
    Hk = B @ PL.T
    return symplectic_spectrum(0.5 * (Hk + Hk.T)).eps


def congruence_spectrum(f: TriangularFactors, H) -> np.ndarray:
    """Ordinary eigenvalues of ``L3 H L3^T``, one per degenerate pair.

    At the optimum this congruence has the symplectic eigenvalues of H as its
    (doubly degenerate) ordinary spectrum.
    """
    L = build_l3(f)
    K = L @ _hmat(H) @ L.T
    return np.linalg.eigvalsh(0.5 * (K + K.T))


def fd_gradient_oracle(fun, params, step: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of scalar ``fun`` at ``params``."""
    x = np.asarray(params, dtype=float)
    flat = x.reshape(-1)
    grad = np.empty(flat.size)
    for i in range(flat.size):
        xp = flat.copy()
        xm = flat.copy()
        xp[i] += step
        xm[i] -= step
        grad[i] = (fun(xp.reshape(x.shape)) - fun(xm.reshape(x.shape))) / (2 * step)
    return grad.reshape(x.shape)
