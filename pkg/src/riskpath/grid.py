"""Uniform 1-D grid and the elliptic operator -(a u')' with Dirichlet boundaries.

All spatial inner products used elsewhere in the package are owned by this
module: the discrete L2 product is the lumped (h-weighted) dot product, so
pointwise operations (clipping, projections) are exactly orthogonal in it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cholesky_banded, cho_solve_banded


class EllipticityError(ValueError):
    """Conductivity violates uniform ellipticity (some entry <= 0)."""


class NumericalDegeneracyError(RuntimeError):
    """Direct factorization of the assembled operator broke down."""


@dataclass(frozen=True)
class Grid:
    """Interior nodes of a uniform mesh on (0, 1); boundary values are eliminated."""

    n_interior: int

    def __post_init__(self):
        if self.n_interior < 1:
            raise ValueError("n_interior must be a positive integer")

    @property
    def h(self) -> float:
        return 1.0 / (self.n_interior + 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(1, self.n_interior + 1) * self.h

    @property
    def n_cells(self) -> int:
        # cells between consecutive nodes, boundary cells included
        return self.n_interior + 1

    @property
    def cell_midpoints(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.h


@dataclass(frozen=True)
class EllipticOperator:
    """Assembled tridiagonal stencil for -(a u')' on a grid, SPD by construction.

    ``diag``/``off`` store the three bands (the matrix is symmetric); a banded
    Cholesky factor is cached at assembly so repeated solves are a pair of
    triangular sweeps.
    """

    grid: Grid
    conductivity: np.ndarray
    diag: np.ndarray
    off: np.ndarray
    _cho: np.ndarray = field(repr=False, compare=False, default=None)

    def matvec(self, u: np.ndarray) -> np.ndarray:
        v = self.diag * u
        v[:-1] += self.off * u[1:]
        v[1:] += self.off * u[:-1]
        return v

    def to_dense(self) -> np.ndarray:
        a = np.diag(self.diag)
        a += np.diag(self.off, 1) + np.diag(self.off, -1)
        return a


def assemble(grid: Grid, conductivity: np.ndarray) -> EllipticOperator:
    """Assemble the 3-point stencil with cell-midpoint conductivity.

    Row j carries (a_{j-1/2} + a_{j+1/2})/h^2 on the diagonal and
    -a_{j+-1/2}/h^2 off-diagonal.
    """
    a = np.asarray(conductivity, dtype=float)
    if a.shape != (grid.n_cells,):
        raise ValueError(
            f"conductivity must have length {grid.n_cells}, got {a.shape}"
        )
    if np.any(a <= 0.0):
        raise EllipticityError("conductivity must be strictly positive on every cell")
    h2 = grid.h**2
    diag = (a[:-1] + a[1:]) / h2
    off = -a[1:-1] / h2
    ab = np.zeros((2, grid.n_interior))
    ab[0, 1:] = off
    ab[1, :] = diag
    try:
        cho = cholesky_banded(ab, lower=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - SPD by construction
        raise NumericalDegeneracyError(f"factorization failed: {exc}") from exc
    return EllipticOperator(grid=grid, conductivity=a, diag=diag, off=off, _cho=cho)


def solve_state(op: EllipticOperator, rhs: np.ndarray) -> np.ndarray:
    """Solve op . u = rhs by the cached direct tridiagonal factorization."""
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != op.diag.shape:
        raise ValueError("rhs length does not match the operator")
    u = cho_solve_banded((op._cho, False), rhs)
    if not np.all(np.isfinite(u)):
        raise NumericalDegeneracyError("non-finite solution from tridiagonal solve")
    return u


def apply_adjoint_solve(op: EllipticOperator, rhs: np.ndarray) -> np.ndarray:
    """Adjoint solve; the operator is symmetric so this is a state solve."""
    return solve_state(op, rhs)


def inner_h(grid: Grid, u: np.ndarray, v: np.ndarray) -> float:
    """Lumped-mass L2 inner product sum_j h u_j v_j."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.shape != (grid.n_interior,):
        raise ValueError("inner_h requires two grid functions of matching length")
    return grid.h * float(np.dot(u, v))


def norm_h(grid: Grid, u: np.ndarray) -> float:
    return np.sqrt(max(inner_h(grid, u, u), 0.0))
