"""Run configuration: JSON schema, validation with field-level messages, builders."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from . import path as path_mod
from .cone import ConstraintMap
from .grid import Grid
from .objective import ProblemData
from .risk import RiskMeasure
from .scenario import GENERATOR_NAME, ScenarioConfig, sample
from .solver import SolveOptions


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


DEFAULTS = {
    "problem": {
        "n_interior": 127,
        "y_d": {"kind": "parabola", "amplitude": 2.0},
        "mu_tik": 0.01,
        "control_lo": -50.0,
        "control_hi": 50.0,
        "constraint": {"kind": "mixed", "epsilon": 0.05, "delta": 1e-8},
        "tol_feas": 1e-9,
    },
    "scenarios": {
        "n_scenarios": 16,
        "seed": 7,
        "a0": 1.0,
        "sigma": [0.3, 0.15],
        "a_min": 0.3,
        "bound_spec": {"kind": "constant", "value": 0.1},
    },
    "risk": {"kind": "expectation", "alpha": 0.5, "tau": 1e-3},
    "solver": {
        "max_iters": 50000,
        "tol_stationarity": 1e-8,
        "step_rule": "backtracking",
        "accelerate": True,
        "subgradient_mode": False,
    },
    "gamma_schedule": {"start_exp": 0, "stop_exp": 6, "per_decade": 1},
    "feasible_reference": {"mode": "scaled-initial"},
    "output_dir": "out",
}


def _merge(defaults, overrides, prefix=""):
    if not isinstance(overrides, dict):
        raise ConfigError(f"{prefix or 'config'} must be an object")
    merged = {}
    for key, default in defaults.items():
        if key in overrides:
            value = overrides[key]
            if isinstance(default, dict) and key not in ("y_d", "constraint", "bound_spec",
                                                          "gamma_schedule", "feasible_reference"):
                value = _merge(default, value, f"{prefix}{key}.")
            merged[key] = value
        else:
            merged[key] = default
    for key in overrides:
        if key not in defaults:
            raise ConfigError(f"unknown config key {prefix}{key}")
    return merged


def load_config(path) -> dict:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    return resolve(raw)


def resolve(raw: dict) -> dict:
    """Merge with defaults and validate; returns the fully resolved config."""
    cfg = _merge(DEFAULTS, raw)
    _require(cfg["problem"]["n_interior"] >= 1, "problem.n_interior must be >= 1")
    _require(cfg["problem"]["mu_tik"] > 0.0, "problem.mu_tik must be > 0")
    _require(
        cfg["problem"]["control_lo"] <= cfg["problem"]["control_hi"],
        "problem.control_lo must be <= problem.control_hi",
    )
    kind = cfg["problem"]["constraint"].get("kind")
    _require(kind in ("mixed", "volume", "gradient"),
             "problem.constraint.kind must be mixed | volume | gradient")
    _require(cfg["problem"]["constraint"].get("epsilon", 0.0) >= 0.0,
             "problem.constraint.epsilon must be >= 0")
    _require(cfg["problem"]["constraint"].get("delta", 0.0) >= 0.0,
             "problem.constraint.delta must be >= 0")
    _require(cfg["scenarios"]["n_scenarios"] >= 1, "scenarios.n_scenarios must be >= 1")
    _require(cfg["scenarios"]["a_min"] > 0.0, "scenarios.a_min must be > 0")
    _require(
        cfg["scenarios"]["a0"] - sum(abs(s) for s in cfg["scenarios"]["sigma"]) > 0.0,
        "scenarios.a0 minus the sigma budget must stay positive",
    )
    _require(cfg["risk"]["kind"] in ("expectation", "avar", "avar-smooth"),
             "risk.kind must be expectation | avar | avar-smooth")
    _require(0.0 < cfg["risk"]["alpha"] <= 1.0, "risk.alpha must lie in (0, 1]")
    _require(cfg["solver"]["tol_stationarity"] > 0.0,
             "solver.tol_stationarity must be > 0")
    sched = cfg["gamma_schedule"]
    if "values" in sched:
        try:
            path_mod.validate_schedule(sched["values"])
        except ValueError as exc:
            raise ConfigError(f"gamma_schedule.values: {exc}") from exc
    else:
        _require(sched.get("stop_exp", 6) > sched.get("start_exp", 0),
                 "gamma_schedule.stop_exp must exceed start_exp")
    cfg["generator"] = GENERATOR_NAME
    return cfg


def _require(cond, message):
    if not cond:
        raise ConfigError(message)


def config_hash(cfg: dict) -> str:
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def _target_field(spec, nodes: np.ndarray) -> np.ndarray:
    kind = spec.get("kind", "parabola")
    if kind == "zero":
        return np.zeros_like(nodes)
    if kind == "parabola":
        return spec.get("amplitude", 1.0) * nodes * (1.0 - nodes)
    if kind == "sine":
        return spec.get("amplitude", 1.0) * np.sin(np.pi * nodes)
    if kind == "values":
        values = np.asarray(spec["values"], dtype=float)
        if values.shape != nodes.shape:
            raise ConfigError("problem.y_d.values length must equal n_interior")
        return values
    raise ConfigError("problem.y_d.kind must be zero | parabola | sine | values")


def _bound_spec_tuple(spec: dict):
    kind = spec.get("kind")
    if kind == "constant":
        return ("constant", float(spec["value"]))
    if kind == "affine-in-s":
        return ("affine-in-s", float(spec["c0"]), float(spec["c1"]))
    if kind == "per-scenario-file":
        return ("per-scenario-file", str(spec["path"]))
    raise ConfigError(
        "scenarios.bound_spec.kind must be constant | affine-in-s | per-scenario-file"
    )


def build_problem(cfg: dict) -> ProblemData:
    grid = Grid(n_interior=int(cfg["problem"]["n_interior"]))
    ckind = cfg["problem"]["constraint"]["kind"]
    if ckind == "mixed":
        bound_points = grid.nodes
    elif ckind == "gradient":
        bound_points = grid.cell_midpoints
    else:
        bound_points = np.array([0.0])
    try:
        scen_cfg = ScenarioConfig(
            n_scenarios=int(cfg["scenarios"]["n_scenarios"]),
            seed=int(cfg["scenarios"]["seed"]),
            a0=float(cfg["scenarios"]["a0"]),
            sigma=tuple(cfg["scenarios"]["sigma"]),
            a_min=float(cfg["scenarios"]["a_min"]),
            bound_spec=_bound_spec_tuple(cfg["scenarios"]["bound_spec"]),
        )
    except ValueError as exc:
        raise ConfigError(f"scenarios: {exc}") from exc
    scenarios = sample(scen_cfg, grid.n_cells, bound_points)
    constraint = ConstraintMap(
        kind=ckind,
        grid=grid,
        bounds=scenarios.bounds,
        epsilon=float(cfg["problem"]["constraint"].get("epsilon", 0.0)),
        delta=float(cfg["problem"]["constraint"].get("delta", 1e-8)),
    )
    risk = RiskMeasure(
        kind=cfg["risk"]["kind"],
        alpha=float(cfg["risk"]["alpha"]),
        tau=float(cfg["risk"].get("tau", 1e-3)),
    )
    y_d = _target_field(cfg["problem"]["y_d"], grid.nodes)
    return ProblemData.build(
        grid=grid,
        scenarios=scenarios,
        constraint=constraint,
        risk=risk,
        y_d=y_d,
        mu_tik=float(cfg["problem"]["mu_tik"]),
        lo=float(cfg["problem"]["control_lo"]),
        hi=float(cfg["problem"]["control_hi"]),
        tol_feas=float(cfg["problem"].get("tol_feas", 1e-9)),
    )


def build_schedule(cfg: dict) -> np.ndarray:
    sched = cfg["gamma_schedule"]
    if "values" in sched:
        return path_mod.validate_schedule(sched["values"])
    return path_mod.decade_schedule(
        int(sched.get("start_exp", 0)),
        int(sched.get("stop_exp", 6)),
        int(sched.get("per_decade", 1)),
    )


def build_solve_options(cfg: dict) -> SolveOptions:
    s = cfg["solver"]
    try:
        return SolveOptions(
            max_iters=int(s.get("max_iters", 50000)),
            tol_stationarity=float(s.get("tol_stationarity", 1e-8)),
            step_rule=str(s.get("step_rule", "backtracking")),
            accelerate=bool(s.get("accelerate", True)),
            subgradient_mode=bool(s.get("subgradient_mode", False)),
        )
    except ValueError as exc:
        raise ConfigError(f"solver: {exc}") from exc
