"""Nonnegativity cones, their projections, the quadratic penalty, and constraint maps.

The penalty is the Moreau envelope of the cone indicator evaluated at the
negated constraint value: for nonnegativity cones it collapses to the closed
form (gamma/2) ||max(0, i)||_H^2 with gradient gamma * max(0, i).

Three constraint maps are realized: a mixed control/state bound, a scalar
volume bound, and a bound on the state gradient magnitude (delta-smoothed so
the map stays continuously differentiable).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid


@dataclass(frozen=True)
class ConeSpec:
    """Pointwise-nonnegative cone in a weighted discrete L2 space.

    kind "nonneg-grid" uses the lumped inner product with weight h (grid
    functions on nodes or cells); "nonneg-scalar" is the half line with the
    plain real product.
    """

    kind: str
    weight: float = 1.0

    def __post_init__(self):
        if self.kind not in ("nonneg-grid", "nonneg-scalar"):
            raise ValueError(f"unknown cone kind {self.kind!r}")
        if self.weight <= 0.0:
            raise ValueError("cone weight must be positive")

    def inner(self, u, v) -> float:
        if self.kind == "nonneg-scalar":
            return float(u) * float(v)
        return self.weight * float(np.dot(np.ravel(u), np.ravel(v)))

    def norm(self, u) -> float:
        return np.sqrt(max(self.inner(u, u), 0.0))


def project(cone: ConeSpec, k):
    """H-orthogonal projection onto the cone: pointwise positive part."""
    if cone.kind == "nonneg-scalar":
        return max(0.0, float(k))
    return np.maximum(0.0, np.asarray(k, dtype=float))


@dataclass(frozen=True)
class PenaltyValue:
    value: float
    residual: np.ndarray | float  # max(0, i), the infeasible part


def penalty(cone: ConeSpec, gamma: float, i_value) -> PenaltyValue:
    """Quadratic exterior penalty (gamma/2) ||max(0, i)||_H^2.

    Zero exactly when the constraint value is feasible (i <= 0 everywhere).
    """
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    if cone.kind == "nonneg-scalar":
        r = max(0.0, float(i_value))
    else:
        r = np.maximum(0.0, np.asarray(i_value, dtype=float))
    return PenaltyValue(value=0.5 * gamma * cone.inner(r, r), residual=r)


def penalty_multiplier(cone: ConeSpec, gamma: float, i_value):
    """gamma * (i + proj(-i)) = gamma * max(0, i); always in the dual cone."""
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    if cone.kind == "nonneg-scalar":
        return gamma * max(0.0, float(i_value))
    return gamma * np.maximum(0.0, np.asarray(i_value, dtype=float))


@dataclass(frozen=True)
class ConstraintMap:
    """Per-scenario constraint i(x1, x2; omega), one of three kinds.

    mixed:    i = x2 - bound - epsilon*x1, nodewise (bound per scenario on nodes)
    volume:   i = sum_j h x2_j - b, scalar (b per scenario)
    gradient: i = sqrt((Du)^2 + delta^2) - delta - psi at cell midpoints, with
              Du the forward difference including boundary cells
    """

    kind: str
    grid: Grid
    bounds: tuple  # per scenario: nodal array | scalar | cell array
    epsilon: float = 0.0
    delta: float = 1e-8

    def __post_init__(self):
        if self.kind not in ("mixed", "volume", "gradient"):
            raise ValueError(f"unknown constraint kind {self.kind!r}")
        if self.epsilon < 0.0 or self.delta < 0.0:
            raise ValueError("epsilon and delta must be nonnegative")

    def cone_spec(self) -> ConeSpec:
        if self.kind == "volume":
            return ConeSpec(kind="nonneg-scalar")
        return ConeSpec(kind="nonneg-grid", weight=self.grid.h)

    def _bound(self, k: int):
        b = self.bounds[k]
        return float(b) if self.kind == "volume" and np.ndim(b) > 0 else b

    def _grad_cells(self, x2: np.ndarray) -> np.ndarray:
        full = np.concatenate(([0.0], x2, [0.0]))
        return np.diff(full) / self.grid.h


def constraint_eval(cmap: ConstraintMap, x1: np.ndarray, x2: np.ndarray, k: int):
    if cmap.kind == "mixed":
        return x2 - cmap.bounds[k] - cmap.epsilon * x1
    if cmap.kind == "volume":
        b = cmap._bound(k)
        return cmap.grid.h * float(np.sum(x2)) - float(np.atleast_1d(b)[0])
    du = cmap._grad_cells(x2)
    smooth = np.sqrt(du**2 + cmap.delta**2)
    return smooth - cmap.delta - cmap.bounds[k]


def constraint_adjoints(cmap: ConstraintMap, x1: np.ndarray, x2: np.ndarray, k: int, lam):
    """Adjoints (i_x1^* lam, i_x2^* lam) as dual (mass-weighted) vectors.

    Satisfy (lam, i_x1 du + i_x2 dy)_H = <i_x1^* lam, du> + <i_x2^* lam, dy>
    with the right-hand pairings the plain euclidean dot product.
    """
    h = cmap.grid.h
    if cmap.kind == "mixed":
        lam = np.asarray(lam, dtype=float)
        return -cmap.epsilon * h * lam, h * lam
    if cmap.kind == "volume":
        lam = float(lam)
        zeros = np.zeros(cmap.grid.n_interior)
        return zeros, h * lam * np.ones(cmap.grid.n_interior)
    lam = np.asarray(lam, dtype=float)
    du = cmap._grad_cells(x2)
    denom = np.sqrt(du**2 + cmap.delta**2)
    # subgradient tie-break: slope 0 where the smoothed norm is flat (delta=0, du=0)
    w = np.divide(du, denom, out=np.zeros_like(du), where=denom > 0.0)
    c = lam * w
    dual_x2 = c[:-1] - c[1:]
    return np.zeros(cmap.grid.n_interior), dual_x2
