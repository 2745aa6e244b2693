"""Sparse linear solvers over a shared feature matrix.

Four interchangeable fitters produce (Coefficients, SolverReport):

- pathbuild: thresholded gradient descent on the squared ramp loss
- cdnet: elastic-net coordinate descent on a lambda path
- fpc: fixed-point continuation for L1-penalized least squares
- spgl1: spectral projected gradient for L1-constrained least squares
"""

from __future__ import annotations

from .cdnet import cd_elastic_net
from .common import (
    Coefficients,
    SolverError,
    SolverReport,
    SolverStep,
    fit_intercept,
    project_l1,
    soft_threshold,
)
from .fpc import fpc
from .pathbuild import PathbuildState, pathbuild, pathbuild_gradient_update
from .spg import spg_lasso

SOLVER_NAMES = ("pathbuild", "cdnet", "fpc", "spgl1")

DEFAULT_PARAMS = {
    "pathbuild": {"tau": 0.5, "delta": 0.01, "max_iter": 5000},
    "cdnet": {"alpha": 1.0, "lambda_min": 1e-3, "n_steps": 100},
    "fpc": {"mu_max": 1e3, "n_steps": 20},
    "spgl1": {"sigma": 10.0, "max_iter": 2000},
}

# The knob swept by the `sweep` command for each solver.
PRIMARY_PARAM = {
    "pathbuild": "tau",
    "cdnet": "lambda_min",
    "fpc": "mu_max",
    "spgl1": "sigma",
}


def solver_params(name: str, overrides: dict | None = None) -> dict:
    """Defaults for one solver with overrides applied; unknown keys are errors."""
    if name not in DEFAULT_PARAMS:
        raise SolverError(f"unknown solver '{name}'; choose from {', '.join(SOLVER_NAMES)}")
    merged = dict(DEFAULT_PARAMS[name])
    for key, value in (overrides or {}).items():
        if key not in merged:
            raise SolverError(f"solver '{name}' does not take parameter '{key}'")
        merged[key] = value
    return merged


def solve(name: str, features, labels, params: dict | None = None):
    """Run the named solver; returns (Coefficients, SolverReport)."""
    merged = solver_params(name, params)
    if name == "pathbuild":
        return pathbuild(features, labels, **merged)
    if name == "cdnet":
        report = cd_elastic_net(features, labels, **merged)
        return report.final, report
    if name == "fpc":
        report = fpc(features, labels, **merged)
        return report.final, report
    return spg_lasso(features, labels, **merged)


__all__ = [
    "Coefficients",
    "SolverError",
    "SolverReport",
    "SolverStep",
    "PathbuildState",
    "SOLVER_NAMES",
    "DEFAULT_PARAMS",
    "PRIMARY_PARAM",
    "cd_elastic_net",
    "fit_intercept",
    "fpc",
    "pathbuild",
    "pathbuild_gradient_update",
    "project_l1",
    "soft_threshold",
    "solve",
    "solver_params",
    "spg_lasso",
]
