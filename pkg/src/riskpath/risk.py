"""Coherent risk measures on weighted finite samples.

Shipped measures: expectation, average value-at-risk (exact, by sorting), and
a softplus-smoothed average value-at-risk used when a differentiable surrogate
is needed. The smoothed variant keeps convexity, monotonicity, and translation
equivariance but gives up positive homogeneity (the temperature is a fixed
length scale), so the homogeneity axiom check is skipped for it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit


@dataclass(frozen=True)
class RiskMeasure:
    """kind: "expectation" | "avar" | "avar-smooth"; alpha in (0, 1]."""

    kind: str = "expectation"
    alpha: float = 1.0
    tau: float = 1e-3  # smoothing temperature, avar-smooth only

    def __post_init__(self):
        if self.kind not in ("expectation", "avar", "avar-smooth"):
            raise ValueError(f"unknown risk measure kind {self.kind!r}")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        if self.kind == "avar-smooth" and self.tau <= 0.0:
            raise ValueError("tau must be positive for the smoothed measure")

    @property
    def positively_homogeneous(self) -> bool:
        return self.kind != "avar-smooth"


@dataclass(frozen=True)
class RiskSubgradient:
    """Density theta w.r.t. the weights: theta >= 0, E[theta] = 1."""

    theta: np.ndarray


def _check(xi, weights):
    xi = np.asarray(xi, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if xi.size == 0:
        raise ValueError("empty sample")
    if xi.shape != weights.shape:
        raise ValueError("sample and weights must have matching shapes")
    return xi, weights


def _quantile_threshold(xi, weights, alpha):
    """Smallest t with P(xi <= t) >= 1 - alpha (the value-at-risk level)."""
    order = np.argsort(xi, kind="stable")
    cum = np.cumsum(weights[order])
    target = 1.0 - alpha
    idx = int(np.searchsorted(cum, target - 1e-15, side="left"))
    idx = min(idx, xi.size - 1)
    return float(xi[order[idx]])


def _smooth_threshold(xi, weights, alpha, tau):
    """Root of 1 - (1/alpha) E[sigmoid((xi - t)/tau)] = 0 (strictly increasing in t)."""

    def phi_prime(t):
        return 1.0 - np.dot(weights, expit((xi - t) / tau)) / alpha

    lo = float(xi.min()) - 60.0 * tau - 1.0
    hi = float(xi.max()) + 60.0 * tau + 1.0
    if phi_prime(lo) >= 0.0:
        return lo
    return float(brentq(phi_prime, lo, hi, xtol=1e-15 * (1.0 + abs(hi)), rtol=1e-15))


def evaluate(rm: RiskMeasure, xi, weights) -> float:
    """Risk value of the sample.

    AVaR uses the epigraph form min_t { t + (1/alpha) E[max(0, xi - t)] },
    minimized exactly at the alpha-tail quantile.
    """
    xi, weights = _check(xi, weights)
    if rm.kind == "expectation":
        return float(np.dot(weights, xi))
    if rm.kind == "avar":
        t = _quantile_threshold(xi, weights, rm.alpha)
        return t + float(np.dot(weights, np.maximum(0.0, xi - t))) / rm.alpha
    t = _smooth_threshold(xi, weights, rm.alpha, rm.tau)
    z = (xi - t) / rm.tau
    softplus = np.where(z > 30.0, z, np.log1p(np.exp(np.minimum(z, 30.0))))
    return t + rm.tau * float(np.dot(weights, softplus)) / rm.alpha


def subgradient(rm: RiskMeasure, xi, weights) -> RiskSubgradient:
    """A maximizing density from the dual representation.

    For AVaR: 1/alpha strictly above the tail quantile, 0 strictly below, and
    the boundary atoms take fractional values filled in ascending scenario
    index until E[theta] = 1. A constant sample returns theta = 1 (documented
    tie-break; every feasible density is then optimal).
    """
    xi, weights = _check(xi, weights)
    if rm.kind == "expectation":
        return RiskSubgradient(theta=np.ones_like(xi))
    if rm.kind == "avar-smooth":
        t = _smooth_threshold(xi, weights, rm.alpha, rm.tau)
        return RiskSubgradient(theta=expit((xi - t) / rm.tau) / rm.alpha)
    if np.ptp(xi) == 0.0:
        return RiskSubgradient(theta=np.ones_like(xi))
    t = _quantile_threshold(xi, weights, rm.alpha)
    cap = 1.0 / rm.alpha
    theta = np.zeros_like(xi)
    theta[xi > t] = cap
    remaining = 1.0 - float(np.dot(weights, theta))
    for k in np.flatnonzero(xi == t):
        if remaining <= 0.0:
            break
        take = min(cap, remaining / weights[k]) if weights[k] > 0 else cap
        theta[k] = take
        remaining -= take * weights[k]
    return RiskSubgradient(theta=theta)


def dual_infeasibility_reason(rm: RiskMeasure, theta, weights, tol=1e-9) -> str | None:
    theta = np.asarray(theta, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if np.any(theta < -tol):
        return "theta has a negative component"
    if abs(float(np.dot(weights, theta)) - 1.0) > tol:
        return "E[theta] != 1"
    if rm.kind == "avar" and np.any(theta > 1.0 / rm.alpha + tol):
        return "theta exceeds 1/alpha"
    return None


def duality_gap(rm: RiskMeasure, xi, theta, weights) -> float:
    """R[xi] - E[xi theta]; nonnegative for feasible densities, 0 at maximizers.

    Infeasible densities are reported as an infinite gap.
    """
    xi, weights = _check(xi, weights)
    if dual_infeasibility_reason(rm, theta, weights) is not None:
        return math.inf
    return evaluate(rm, xi, weights) - float(np.dot(weights, np.asarray(theta) * xi))
