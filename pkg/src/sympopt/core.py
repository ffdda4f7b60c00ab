"""Symplectic form, quadrature projectors and the triangular parameterization
of symmetric matrices.

Quadratures are ordered ``(x_1, ..., x_d, p_1, ..., p_d)`` everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from pathlib import Path

import numpy as np

STRUCT_TOL = 1e-10


@dataclass(frozen=True)
class SymplecticForm:
    d: int
    sigma: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class BasisProjectors:
    """Position/momentum block selectors Pi1 = [I; 0] and Pi2 = [0; I].

    Stored as index ranges; ``Pi1``/``Pi2`` materialize dense copies on request.
    """

    d: int

    @property
    def pos(self) -> slice:
        return slice(0, self.d)

    @property
    def mom(self) -> slice:
        return slice(self.d, 2 * self.d)

    @property
    def Pi1(self) -> np.ndarray:
        return np.eye(2 * self.d)[:, : self.d]

    @property
    def Pi2(self) -> np.ndarray:
        return np.eye(2 * self.d)[:, self.d :]


@dataclass(frozen=True)
class SubspaceProjector:
    """Row selector keeping the first ``k`` positions and first ``k`` momenta."""

    d: int
    k: int

    @property
    def rows(self) -> np.ndarray:
        return np.concatenate([np.arange(self.k), self.d + np.arange(self.k)])

    @property
    def Pk(self) -> np.ndarray:
        return np.eye(2 * self.d)[self.rows]

    def apply(self, a: np.ndarray) -> np.ndarray:
        """Return ``Pk @ a`` without forming ``Pk``."""
        return a[self.rows]


def build_sigma(d: int) -> SymplecticForm:
    if d < 1:
        raise ValueError(f"mode count must be positive, got {d}")
    eye = np.eye(d)
    zero = np.zeros((d, d))
    return SymplecticForm(d, np.block([[zero, eye], [-eye, zero]]))


def sigma(d: int) -> np.ndarray:
    return build_sigma(d).sigma


def build_projectors(d: int) -> BasisProjectors:
    if d < 1:
        raise ValueError(f"mode count must be positive, got {d}")
    return BasisProjectors(d)


def build_pk(d: int, k: int) -> SubspaceProjector:
    if d < 1:
        raise ValueError(f"mode count must be positive, got {d}")
    if not 1 <= k <= d:
        raise ValueError(f"k must satisfy 1 <= k <= d={d}, got {k}")
    return SubspaceProjector(d, k)


def is_symplectic(S: np.ndarray, tol: float = STRUCT_TOL) -> bool:
    """True iff ``||S sigma_2d S^T - sigma_2k||_F <= tol`` for a 2k x 2d matrix."""
    S = np.asarray(S, dtype=float)
    rows, cols = S.shape
    if rows % 2 or cols % 2:
        raise ValueError(f"symplectic test needs even dimensions, got {S.shape}")
    lhs = S @ sigma(cols // 2) @ S.T
    return bool(np.linalg.norm(lhs - sigma(rows // 2)) <= tol)


def n_triu(d: int) -> int:
    return d * (d + 1) // 2


@lru_cache(maxsize=16)
def triu_indices(d: int):
    rows, cols = np.triu_indices(d)
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols


@dataclass(frozen=True)
class SymmetricParam:
    """Symmetric d x d matrix stored as the upper triangle of a free matrix X.

    ``x`` holds ``X[np.triu_indices(d)]`` in row-major order; the symmetric
    matrix is ``M = triu(X) + triu(X).T``.
    """

    d: int
    x: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).reshape(-1)
        if x.size != n_triu(self.d):
            raise ValueError(
                f"expected {n_triu(self.d)} parameters for d={self.d}, got {x.size}"
            )
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    @classmethod
    def zeros(cls, d: int) -> SymmetricParam:
        return cls(d, np.zeros(n_triu(d)))

    @classmethod
    def from_symmetric(cls, M: np.ndarray) -> SymmetricParam:
        """Inverse of :func:`materialize_symmetric` (diagonal is halved)."""
        M = np.asarray(M, dtype=float)
        d = M.shape[0]
        X = np.triu(M, 1) + 0.5 * np.diag(np.diag(M))
        return cls(d, X[triu_indices(d)])

    @cached_property
    def matrix(self) -> np.ndarray:
        M = materialize_symmetric(self)
        M.setflags(write=False)
        return M


def materialize_symmetric(p: SymmetricParam) -> np.ndarray:
    X = np.zeros((p.d, p.d))
    X[triu_indices(p.d)] = p.x
    return X + X.T


def chain_gradient_to_params(G: np.ndarray, d: int | None = None) -> np.ndarray:
    """Pull a gradient w.r.t. the full matrix M back to the triangle parameters.

    Off-diagonal slot (i, j) receives ``G[i, j] + G[j, i]``; diagonal slots ``2 G[i, i]``.
    """
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ValueError(f"gradient must be square, got shape {G.shape}")
    if d is not None and G.shape[0] != d:
        raise ValueError(f"gradient is {G.shape[0]}x{G.shape[0]}, expected d={d}")
    return (G + G.T)[triu_indices(G.shape[0])]


# --- MAT1 text format -----------------------------------------------------


def write_mat1(path, A: np.ndarray) -> None:
    """Write ``A`` as MAT1: a ``rows cols`` header then rows of %.17g values."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    lines = [f"{A.shape[0]} {A.shape[1]}"]
    lines += [" ".join(f"{v:.17g}" for v in row) for row in A]
    Path(path).write_text("\n".join(lines) + "\n")


def read_mat1(path) -> np.ndarray:
    tokens = Path(path).read_text().split()
    if len(tokens) < 2:
        raise ValueError(f"{path}: missing MAT1 header")
    rows, cols = int(tokens[0]), int(tokens[1])
    values = tokens[2:]
    if len(values) != rows * cols:
        raise ValueError(
            f"{path}: header says {rows}x{cols} but found {len(values)} values"
        )
    return np.array([float(v) for v in values]).reshape(rows, cols)
