"""Quadratic Hamiltonians: dipole-coupled Drude-oscillator lattices and file input."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .core import read_mat1, write_mat1
from .gaussian import NotPositiveDefiniteError

ASYM_RTOL = 1e-12


@dataclass(frozen=True)
class LatticeSpec:
    """Open-boundary lattice of identical QDOs.

    ``dims`` holds 1-3 extents along x, y, z; a chain runs along x, so the
    first mode (x of site 0) is longitudinal.
    """

    dims: tuple[int, ...]
    rho: float
    c: float = 0.0

    def __post_init__(self):
        dims = tuple(int(n) for n in np.atleast_1d(self.dims))
        if not 1 <= len(dims) <= 3 or min(dims) < 1:
            raise ValueError(f"dims must be 1-3 positive integers, got {self.dims}")
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        object.__setattr__(self, "dims", dims)

    @property
    def n_sites(self) -> int:
        return int(np.prod(self.dims))

    @property
    def d(self) -> int:
        return 3 * self.n_sites

    def sites(self) -> np.ndarray:
        shape = self.dims + (1,) * (3 - len(self.dims))
        return np.array(list(itertools.product(*(range(n) for n in shape))), dtype=float)


@dataclass(frozen=True)
class QuadraticHamiltonian:
    """SPD matrix H of ``0.5 q^T H q``.

    ``structure`` is ``"block_diagonal"`` (H = V (+) I), ``"pm_coupled"``
    (off-diagonal blocks c I) or ``"generic"``.
    """

    H: np.ndarray = field(repr=False)
    structure: str = "generic"
    V: np.ndarray | None = field(default=None, repr=False)
    c: float = 0.0
    spec: LatticeSpec | None = None

    @property
    def d(self) -> int:
        return self.H.shape[0] // 2

    @property
    def block_diagonal(self) -> bool:
        return self.structure == "block_diagonal"

    @property
    def coupling(self) -> np.ndarray:
        """Interaction part of the position block (``rho^-3 T`` for QDO lattices)."""
        Vpos = self.H[: self.d, : self.d]
        if self.spec is not None:
            return Vpos - np.eye(self.d)
        return Vpos - np.diag(np.diag(Vpos))


def dipole_matrix(spec: LatticeSpec) -> np.ndarray:
    """Dipole tensor T with 3x3 blocks ``(I - 3 n n^T) / r^3`` for every site pair."""
    return dipole_tensor(spec.sites())


def dipole_tensor(sites) -> np.ndarray:
    """Dipole coupling of point dipoles at arbitrary ``sites`` (n x 3)."""
    r = np.asarray(sites, dtype=float)
    n = len(r)
    T = np.zeros((n, 3, n, 3))
    for i in range(n):
        for j in range(i + 1, n):
            rij = r[j] - r[i]
            dist = np.linalg.norm(rij)
            u = rij / dist
            block = (np.eye(3) - 3.0 * np.outer(u, u)) / dist**3
            T[i, :, j, :] = block
            T[j, :, i, :] = block
    return T.reshape(3 * n, 3 * n)


def _validated(H: np.ndarray, hint: str = "") -> None:
    lam_min = float(np.linalg.eigvalsh(H)[0])
    if not lam_min > 0:
        raise NotPositiveDefiniteError(
            f"Hamiltonian matrix is not positive definite "
            f"(smallest eigenvalue {lam_min:.6g}){hint}"
        )


def build_qdo(spec: LatticeSpec) -> QuadraticHamiltonian:
    d = spec.d
    V = np.eye(d) + dipole_matrix(spec) / spec.rho**3
    H = np.zeros((2 * d, 2 * d))
    H[:d, :d] = V
    H[d:, d:] = np.eye(d)
    if spec.c:
        H[:d, d:] = spec.c * np.eye(d)
        H[d:, :d] = spec.c * np.eye(d)
    _validated(H, "; try a larger rho or a smaller |c|")
    structure = "pm_coupled" if spec.c else "block_diagonal"
    return QuadraticHamiltonian(H, structure, V=V, c=spec.c, spec=spec)


def from_matrix(H: np.ndarray) -> QuadraticHamiltonian:
    """Wrap a dense matrix as a generic Hamiltonian after symmetry/SPD checks."""
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] % 2:
        raise ValueError(f"Hamiltonian must be square with even dimension, got {H.shape}")
    asym = np.linalg.norm(H - H.T)
    if asym > ASYM_RTOL * max(np.linalg.norm(H), 1.0):
        raise ValueError(f"Hamiltonian matrix is not symmetric (||H - H^T||_F = {asym:.3g})")
    if asym:
        H = 0.5 * (H + H.T)
    _validated(H)
    return QuadraticHamiltonian(H, "generic")


def load_hamiltonian(path) -> QuadraticHamiltonian:
    return from_matrix(read_mat1(path))


def save_hamiltonian(path, ham: QuadraticHamiltonian) -> None:
    write_mat1(path, ham.H)
