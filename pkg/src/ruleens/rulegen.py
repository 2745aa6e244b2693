"""Gradient-boosted rule generation and feature-matrix assembly.

The boosting loop keeps a memory score vector F. Each iteration draws a row
subsample and a tree size, fits a regression tree to the pseudo residuals of
the current F on the subsample, harvests the tree's node rules, and advances
F on all rows by nu times the tree's prediction. Generation stops once
``max_rules`` rules have accumulated (the last tree's list is truncated to
land exactly on the cap) or the subsample residuals drop below tolerance.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .dataset import DataError, Dataset, IndexSubset, resolve_subsample_size
from .loss import LossKind, pseudo_residuals, risk
from .tree import (  # noqa: F401  (Rule/Constraint re-exported as part of this API)
    Constraint,
    Rule,
    TreeConfig,
    extract_rules,
    grow_tree,
    sample_tree_size,
)

log = logging.getLogger("ruleens")

_MAX_BOOST_ITERATIONS = 100_000


def evaluate_rule(rule: Rule, x: np.ndarray) -> int:
    """1 iff every constrained attribute of x lies in its interval."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("evaluate_rule expects a single observation")
    for attr, lo, hi in rule.constraints:
        if attr >= x.size:
            raise ValueError(f"rule references attribute {attr} but x has {x.size}")
        if not lo <= x[attr] < hi:
            return 0
    return 1


def flatten_rules(rules: tuple[Rule, ...]):
    """Pack rules into flat arrays for the evaluation kernel."""
    offsets = np.zeros(len(rules) + 1, dtype=np.int64)
    attrs, los, his = [], [], []
    for i, r in enumerate(rules):
        for c in r.constraints:
            attrs.append(c.attr)
            los.append(c.lo)
            his.append(c.hi)
        offsets[i + 1] = len(attrs)
    return (
        offsets,
        np.array(attrs, dtype=np.int64),
        np.array(los, dtype=np.float64),
        np.array(his, dtype=np.float64),
    )


@dataclass(frozen=True)
class RuleSet:
    """Ordered rules plus optional linear terms (column order: rules, then linear)."""

    rules: tuple[Rule, ...]
    include_linear: bool = False
    linear_attr_indices: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        object.__setattr__(self, "linear_attr_indices", tuple(self.linear_attr_indices))
        if self.include_linear != bool(self.linear_attr_indices):
            raise ValueError("include_linear must match presence of linear_attr_indices")

    @property
    def k_total(self) -> int:
        return len(self.rules) + len(self.linear_attr_indices)

    def with_linear(self, n_attrs: int) -> "RuleSet":
        return replace(self, include_linear=True, linear_attr_indices=tuple(range(n_attrs)))


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray  # (N, k_total) float64; rule block is 0/1
    n_rules: int
    linear_attr_indices: tuple[int, ...]

    @property
    def rule_supports(self) -> np.ndarray:
        return self.values[:, : self.n_rules].mean(axis=0)


def build_feature_matrix(rs: RuleSet, d) -> FeatureMatrix:
    """Evaluate every rule (0/1 columns) and append raw linear-term columns.

    ``d`` may be a Dataset or a plain (N, K) observation array.
    """
    if isinstance(d, Dataset):
        obs = d.observations
    else:
        obs = np.ascontiguousarray(np.asarray(d, dtype=np.float64))
        if obs.ndim != 2:
            raise ValueError("observations must be a 2-D matrix")
    blocks = []
    if rs.rules:
        blocks.append(_kernels.eval_rules(obs, *flatten_rules(rs.rules)))
    if rs.linear_attr_indices:
        blocks.append(obs[:, list(rs.linear_attr_indices)])
    if blocks:
        values = np.ascontiguousarray(np.hstack(blocks))
    else:
        values = np.zeros((obs.shape[0], 0), dtype=np.float64)
    return FeatureMatrix(values, len(rs.rules), rs.linear_attr_indices)


def dedupe(rs: RuleSet) -> tuple[RuleSet, int]:
    """Drop rules with identical constraint sets, keeping first occurrences."""
    seen: set[tuple[Constraint, ...]] = set()
    kept = []
    for r in rs.rules:
        if r.constraints not in seen:
            seen.add(r.constraints)
            kept.append(r)
    return replace(rs, rules=tuple(kept)), len(rs.rules) - len(kept)


@dataclass(frozen=True)
class BoostConfig:
    max_rules: int = 600
    eta: float | int = 0.25
    nu: float = 0.01
    residual_tolerance: float = 1e-6
    tree: TreeConfig = field(default_factory=TreeConfig)
    loss: LossKind = LossKind.SQUARED_RAMP
    seed: int = 0

    def __post_init__(self):
        if self.max_rules < 1:
            raise ValueError("max_rules must be at least 1")
        if not 0 <= self.nu <= 1:
            raise ValueError("nu must lie in [0, 1]")
        if self.residual_tolerance < 0:
            raise ValueError("residual_tolerance must be non-negative")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @property
    def mean_leaves(self) -> float:
        return self.tree.mean_leaves


def _initial_constant(labels: np.ndarray, kind: LossKind) -> float:
    mean = float(labels.mean())
    if kind is LossKind.SQUARED_RAMP:
        return max(-1.0, min(1.0, mean))
    return mean


def generate_rules(d: Dataset, cfg: BoostConfig) -> RuleSet:
    """Run the boosting loop and return the accumulated rules.

    Requires binary {-1,+1} labels with both classes present. Each iteration m
    uses its own stream seeded from (cfg.seed, m), covering the subsample
    draw, the tree-size draw, and per-split attribute sampling.
    """
    y = d.labels.astype(np.float64)
    present = set(np.unique(d.labels).tolist())
    if not present <= {-1, 1}:
        raise DataError("generate_rules needs binary {-1,+1} labels")
    if len(present) < 2:
        raise DataError("degenerate dataset: all labels identical")

    f = np.full(d.n, _initial_constant(y, cfg.loss))
    prev_risk = risk(cfg.loss, y, f)
    rules: list[Rule] = []
    m = 0
    while True:
        m += 1
        if m > _MAX_BOOST_ITERATIONS:
            raise RuntimeError("boosting failed to terminate; raise residual_tolerance or max_rules")
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, m]))
        size = resolve_subsample_size(cfg.eta, d.n)
        sub = np.sort(rng.choice(d.n, size=size, replace=False))
        rho = pseudo_residuals(cfg.loss, y[sub], f[sub])
        if np.abs(rho).max() < cfg.residual_tolerance:
            break
        t_m = sample_tree_size(cfg.tree.mean_leaves, rng)
        tree = grow_tree(IndexSubset(sub), rho, t_m, d, cfg.tree, rng)
        rules.extend(extract_rules(tree))
        f = f + cfg.nu * tree.predict(d.observations)
        cur_risk = risk(cfg.loss, y, f)
        if cur_risk > prev_risk:
            log.debug("boosting risk rose at iteration %d: %.6g -> %.6g", m, prev_risk, cur_risk)
        prev_risk = cur_risk
        if len(rules) >= cfg.max_rules:
            del rules[cfg.max_rules :]
            break

    if not rules:
        raise DataError("no rules generated: residuals were below tolerance at the first iteration")
    return RuleSet(tuple(rules))
