"""Finite scenario sets: random conductivity fields, constraint bounds, weights.

Sampling is a pure function of the configuration (seed included); the PRNG is
numpy's counter-based Philox, echoed by name in exported metadata so runs are
reproducible across implementations of the same generator.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

GENERATOR_NAME = "philox4x64"


@dataclass(frozen=True)
class ScenarioConfig:
    n_scenarios: int
    seed: int
    a0: float = 1.0
    sigma: tuple[float, ...] = (0.3, 0.15)
    a_min: float = 0.3
    # bound_spec: ("constant", value) | ("affine-in-s", c0, c1) | ("per-scenario-file", path)
    bound_spec: tuple = ("constant", 1.0)

    def __post_init__(self):
        if self.n_scenarios < 1:
            raise ValueError("n_scenarios must be positive")
        if self.a_min <= 0.0:
            raise ValueError("a_min must be positive")
        if self.a0 - sum(abs(s) for s in self.sigma) <= 0.0:
            raise ValueError("field model admits nonpositive conductivity (a0 - sum sigma <= 0)")


@dataclass(frozen=True)
class ScenarioSet:
    count: int
    weights: np.ndarray
    seed: int
    conductivities: tuple[np.ndarray, ...]
    bounds: tuple  # per-scenario bound field (array) or scalar, per constraint kind
    a_min: float
    generator: str = GENERATOR_NAME

    def __post_init__(self):
        w = self.weights
        if np.any(w < 0.0) or abs(float(w.sum()) - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1")
        for a in self.conductivities:
            if np.any(a < self.a_min):
                raise ValueError("conductivity below stored a_min")


def _bound_values(spec, midpoints_or_nodes: np.ndarray, n_scenarios: int):
    kind = spec[0]
    if kind == "constant":
        value = float(spec[1])
        return tuple(np.full_like(midpoints_or_nodes, value) for _ in range(n_scenarios))
    if kind == "affine-in-s":
        c0, c1 = float(spec[1]), float(spec[2])
        base = c0 + c1 * midpoints_or_nodes
        return tuple(base.copy() for _ in range(n_scenarios))
    if kind == "per-scenario-file":
        table = np.loadtxt(spec[1], ndmin=2)
        if table.shape[0] != n_scenarios:
            raise ValueError("per-scenario bound file row count != n_scenarios")
        return tuple(np.array(row, dtype=float) for row in table)
    raise ValueError(f"unknown bound_spec kind {kind!r}")


def sample(config: ScenarioConfig, n_cells: int, bound_points: np.ndarray | None = None) -> ScenarioSet:
    """Draw a scenario set: truncated sine expansions for the conductivity.

    a_k(s) = a0 + sum_m xi_{k,m} sigma_m sin(m pi s) with xi uniform on [-1,1],
    clipped from below at a_min (never active for valid configs). Weights are
    uniform.
    """
    rng = np.random.Generator(np.random.Philox(config.seed))
    n = config.n_scenarios
    s = (np.arange(n_cells) + 0.5) / n_cells
    conds = []
    for _ in range(n):
        a = np.full(n_cells, config.a0)
        for m, sig in enumerate(config.sigma, start=1):
            xi = rng.uniform(-1.0, 1.0)
            a = a + xi * sig * np.sin(m * np.pi * s)
        conds.append(np.maximum(a, config.a_min))
    if bound_points is None:
        # nodal bound fields by default
        bound_points = np.arange(1, n_cells) / n_cells
    bounds = _bound_values(config.bound_spec, np.asarray(bound_points, dtype=float), n)
    weights = np.full(n, 1.0 / n)
    return ScenarioSet(
        count=n,
        weights=weights,
        seed=config.seed,
        conductivities=tuple(conds),
        bounds=bounds,
        a_min=config.a_min,
    )


def empirical_expectation(scenarios: ScenarioSet, values: np.ndarray) -> float:
    """Probability-weighted mean sum_k p_k v_k."""
    values = np.asarray(values, dtype=float)
    if values.shape != (scenarios.count,):
        raise ValueError("values length does not match scenario count")
    return float(np.dot(scenarios.weights, values))


def export_table(scenarios: ScenarioSet) -> str:
    """Flat text table, one row per scenario: weight, conductivity..., bound..."""
    buf = io.StringIO()
    for k in range(scenarios.count):
        b = np.atleast_1d(np.asarray(scenarios.bounds[k], dtype=float))
        row = np.concatenate(([scenarios.weights[k]], scenarios.conductivities[k], b))
        buf.write(" ".join(repr(float(v)) for v in row) + "\n")
    return buf.getvalue()


def import_table(text: str, n_cells: int, seed: int = 0, a_min: float = 1e-12) -> ScenarioSet:
    """Inverse of export_table; bound width is inferred from the row length."""
    rows = np.loadtxt(io.StringIO(text), ndmin=2)
    weights = rows[:, 0].copy()
    conds = tuple(row[1 : 1 + n_cells].copy() for row in rows)
    bounds = tuple(row[1 + n_cells :].copy() for row in rows)
    return ScenarioSet(
        count=rows.shape[0],
        weights=weights,
        seed=seed,
        conductivities=conds,
        bounds=bounds,
        a_min=a_min,
    )
