"""Gaussian covariance matrices and the exact symplectic-diagonalization oracle."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import sigma

PURITY_TOL = 1e-8
PAIR_RTOL = 1e-8
EIG_FLOOR = 1e-14


class NotPositiveDefiniteError(ValueError):
    pass


class NumericalBreakdownError(RuntimeError):
    pass


@dataclass(frozen=True)
class CovarianceMatrix:
    d: int
    gamma: np.ndarray = field(repr=False)

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float)
        if g.shape != (2 * self.d, 2 * self.d):
            raise ValueError(f"gamma must be {2 * self.d}x{2 * self.d}, got {g.shape}")
        object.__setattr__(self, "gamma", g)

    @classmethod
    def from_array(cls, gamma) -> CovarianceMatrix:
        gamma = np.asarray(gamma, dtype=float)
        return cls(gamma.shape[0] // 2, gamma)

    @property
    def position_block(self) -> np.ndarray:
        return self.gamma[: self.d, : self.d]

    @property
    def momentum_block(self) -> np.ndarray:
        return self.gamma[self.d :, self.d :]


@dataclass(frozen=True)
class SymplecticSpectrum:
    eps: np.ndarray

    @property
    def d(self) -> int:
        return len(self.eps)

    @property
    def e0(self) -> float:
        return 0.5 * float(np.sum(self.eps))

    @property
    def gap(self) -> float:
        return float(self.eps[0])

    def partial_sum(self, k: int) -> float:
        return float(np.sum(self.eps[:k]))


def _as_matrix(H) -> np.ndarray:
    return np.asarray(getattr(H, "H", H), dtype=float)


def check_spd(A: np.ndarray, what: str = "matrix") -> float:
    """Return the smallest eigenvalue of symmetric ``A``; raise if not > 0."""
    lam_min = float(np.linalg.eigvalsh(A)[0])
    if not lam_min > 0:
        raise NotPositiveDefiniteError(
            f"{what} is not positive definite (smallest eigenvalue {lam_min:.6g})"
        )
    return lam_min


def symplectic_spectrum(H) -> SymplecticSpectrum:
    """Symplectic eigenvalues of an SPD ``H`` from the spectrum of sigma H sigma^T H.

    The 2d eigenvalues come in equal pairs; their square roots are sorted and
    every second one kept. Pairs disagreeing by more than ``PAIR_RTOL``
    (relative) signal numerical breakdown.
    """
    H = _as_matrix(H)
    n = H.shape[0]
    if H.ndim != 2 or n != H.shape[1] or n % 2:
        raise ValueError(f"H must be square with even dimension, got {H.shape}")
    check_spd(H, "Hamiltonian matrix")
    s = sigma(n // 2)
    try:
        lam = np.linalg.eigvals(s @ H @ s.T @ H)
    except np.linalg.LinAlgError as exc:
        raise NumericalBreakdownError(f"eigen-solver failed: {exc}") from exc
    scale = np.max(np.abs(lam))
    if np.max(np.abs(lam.imag)) > 1e-8 * scale or np.min(lam.real) <= 0:
        raise NumericalBreakdownError("sigma H sigma^T H has non-positive or complex eigenvalues")
    roots = np.sort(np.sqrt(lam.real))
    first, second = roots[0::2], roots[1::2]
    mismatch = np.max(np.abs(first - second) / second)
    if mismatch > PAIR_RTOL:
        raise NumericalBreakdownError(
            f"symplectic eigenvalue pairs differ by {mismatch:.3g} (relative)"
        )
    return SymplecticSpectrum(first.copy())


def _sym_power(V: np.ndarray, power: float) -> np.ndarray:
    lam, O = np.linalg.eigh(V)
    if lam[0] < EIG_FLOOR:
        raise NotPositiveDefiniteError(
            f"V is not positive definite (smallest eigenvalue {lam[0]:.6g})"
        )
    return (O * lam**power) @ O.T


def block_diagonal_ground_cm(V: np.ndarray) -> CovarianceMatrix:
    """Ground-state CM ``V^{-1/2} (+) V^{1/2}`` of ``H = V (+) I``."""
    V = np.asarray(V, dtype=float)
    d = V.shape[0]
    lam, O = np.linalg.eigh(V)
    if lam[0] < EIG_FLOOR:
        raise NotPositiveDefiniteError(
            f"V is not positive definite (smallest eigenvalue {lam[0]:.6g})"
        )
    root = np.sqrt(lam)
    gamma = np.zeros((2 * d, 2 * d))
    gamma[:d, :d] = (O / root) @ O.T
    gamma[d:, d:] = (O * root) @ O.T
    return CovarianceMatrix(d, gamma)


def purity_residual(gamma) -> float:
    g = _as_matrix(getattr(gamma, "gamma", gamma))
    gs = g @ sigma(g.shape[0] // 2)
    return float(np.linalg.norm(gs @ gs + np.eye(g.shape[0])))


def log_det(gamma) -> float:
    g = np.asarray(getattr(gamma, "gamma", gamma), dtype=float)
    sign, logdet = np.linalg.slogdet(g)
    return logdet if sign > 0 else float("nan")


def is_pure_cm(gamma, tol: float = PURITY_TOL) -> bool:
    """True iff ``||(gamma sigma)^2 + I||_F <= tol`` and gamma is SPD."""
    g = np.asarray(getattr(gamma, "gamma", gamma), dtype=float)
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        return False
    return purity_residual(g) <= tol


def is_physical_cm(gamma, tol: float = PURITY_TOL) -> bool:
    """gamma + i sigma >= 0, tested as all symplectic eigenvalues >= 1 - tol."""
    g = np.asarray(getattr(gamma, "gamma", gamma), dtype=float)
    try:
        spec = symplectic_spectrum(g)
    except (NotPositiveDefiniteError, NumericalBreakdownError):
        return False
    return bool(spec.eps[0] >= 1 - tol)


def pure_cm_from_xy(X: np.ndarray, Y: np.ndarray) -> CovarianceMatrix:
    """Pure CM with blocks ``[[X, XY], [YX, YXY + X^-1]]``."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    try:
        c = np.linalg.cholesky(X)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError("X must be symmetric positive definite") from None
    cinv = np.linalg.inv(c)
    Xinv = cinv.T @ cinv
    XY = X @ Y
    gamma = np.block([[X, XY], [XY.T, Y @ XY + Xinv]])
    return CovarianceMatrix(X.shape[0], 0.5 * (gamma + gamma.T))


def spd_symplectic_factor(gamma, tol: float = PURITY_TOL):
    """Recover ``(X, Y)`` with ``gamma = pure_cm_from_xy(X, Y)``."""
    g = np.asarray(getattr(gamma, "gamma", gamma), dtype=float)
    if not is_pure_cm(g, tol):
        raise ValueError("covariance matrix is not pure")
    d = g.shape[0] // 2
    X = g[:d, :d]
    try:
        Y = np.linalg.solve(X, g[:d, d:])
    except np.linalg.LinAlgError:
        raise ValueError("position block of gamma is singular") from None
    return X.copy(), 0.5 * (Y + Y.T)
