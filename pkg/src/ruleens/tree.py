"""CART regression trees grown best-first, exposing every non-root node as a rule.

A rule is the conjunction of half-open interval constraints accumulated along
the path from the root; repeated constraints on one attribute intersect into a
single interval. A tree with t terminal nodes therefore exposes exactly
2*(t - 1) rules, two per split, in node-creation order.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _kernels
from .dataset import Dataset, IndexSubset

NEG_INF = float("-inf")
POS_INF = float("inf")


class Constraint(NamedTuple):
    attr: int
    lo: float
    hi: float  # interval is [lo, hi)


@dataclass(frozen=True)
class Rule:
    """Conjunction of per-attribute interval constraints; empty means 'always 1'."""

    constraints: tuple[Constraint, ...]

    def __post_init__(self):
        cs = tuple(Constraint(int(a), float(lo), float(hi)) for a, lo, hi in self.constraints)
        object.__setattr__(self, "constraints", cs)
        attrs = [c.attr for c in cs]
        if attrs != sorted(set(attrs)):
            raise ValueError("constraints must be sorted by attribute, one per attribute")
        for c in cs:
            if c.attr < 0 or not c.lo < c.hi:
                raise ValueError(f"bad constraint {c}")

    @classmethod
    def from_map(cls, intervals: dict[int, tuple[float, float]]) -> "Rule":
        return cls(tuple(Constraint(a, lo, hi) for a, (lo, hi) in sorted(intervals.items())))

    def attributes(self) -> tuple[int, ...]:
        return tuple(c.attr for c in self.constraints)

    def describe(self, attribute_names: tuple[str, ...] | None = None) -> str:
        def name(a: int) -> str:
            return attribute_names[a] if attribute_names else f"x{a}"

        parts = []
        for c in self.constraints:
            if c.lo == NEG_INF:
                parts.append(f"{name(c.attr)} < {c.hi:.6g}")
            elif c.hi == POS_INF:
                parts.append(f"{name(c.attr)} >= {c.lo:.6g}")
            else:
                parts.append(f"{c.lo:.6g} <= {name(c.attr)} < {c.hi:.6g}")
        return " and ".join(parts) if parts else "always"


@dataclass(frozen=True)
class TreeConfig:
    mean_leaves: float = 20.0
    min_node_count: int = 5
    min_impurity: float = 1e-12
    attr_sample_fraction: float = 1.0 / 3.0

    def __post_init__(self):
        if not self.mean_leaves > 1:
            raise ValueError("mean_leaves must exceed 1")
        if self.min_node_count < 1:
            raise ValueError("min_node_count must be at least 1")
        if self.min_impurity < 0:
            raise ValueError("min_impurity must be non-negative")
        if not 0 < self.attr_sample_fraction <= 1:
            raise ValueError("attr_sample_fraction must be in (0, 1]")


@dataclass
class Leaf:
    node_mean: float
    node_count: int
    node_impurity: float  # variance


@dataclass
class SplitNode:
    attribute: int
    threshold: float
    left: "SplitNode | Leaf"
    right: "SplitNode | Leaf"
    node_mean: float
    node_count: int
    node_impurity: float


@dataclass(frozen=True)
class Tree:
    root: SplitNode | Leaf
    terminal_count: int
    node_rules: tuple[Rule, ...]  # creation order; 2*(terminal_count-1) entries

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Route each row to its leaf mean."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        out = np.empty(x.shape[0], dtype=np.float64)
        stack = [(self.root, np.arange(x.shape[0]))]
        while stack:
            node, idx = stack.pop()
            if isinstance(node, Leaf):
                out[idx] = node.node_mean
                continue
            goes_left = x[idx, node.attribute] < node.threshold
            stack.append((node.left, idx[goes_left]))
            stack.append((node.right, idx[~goes_left]))
        return out


def sample_tree_size(mean_leaves: float, rng: np.random.Generator) -> int:
    """Terminal-node count drawn from Exponential(mean_leaves), rounded, floor 2."""
    if not mean_leaves > 1:
        raise ValueError("mean_leaves must exceed 1")
    u = 1.0 - rng.random()  # uniform in (0, 1]
    return max(2, round(-mean_leaves * math.log(u)))


def _node_stats(targets: np.ndarray) -> tuple[float, int, float]:
    mean = float(targets.mean())
    sse = float(((targets - mean) ** 2).sum())
    return mean, targets.size, sse


def _scan_attrs(
    x: np.ndarray,
    row_idx: np.ndarray,
    targets: np.ndarray,
    attrs,
    config: TreeConfig,
) -> tuple[int, float, float] | None:
    """Best (attribute, threshold, child_sse_sum) over the given attributes.

    Ties resolve to the lowest attribute index (attributes are scanned in
    ascending order) and then to the lowest threshold (the kernel keeps the
    first minimum).
    """
    n = row_idx.size
    if n < 2:
        return None
    mean = targets.mean()
    node_sse = float(((targets - mean) ** 2).sum())
    if node_sse / n < config.min_impurity:
        return None
    best: tuple[float, int, float] | None = None
    for attr in sorted(int(a) for a in attrs):
        vals = x[row_idx, attr]
        order = np.argsort(vals, kind="stable")
        res = _kernels.scan_best_split(
            np.ascontiguousarray(vals[order]),
            np.ascontiguousarray(targets[order]),
            config.min_node_count,
        )
        if res is not None and (best is None or res[0] < best[0]):
            best = (res[0], attr, res[1])
    if best is None:
        return None
    return best[1], best[2], best[0]


def best_split(
    rows: IndexSubset,
    targets: np.ndarray,
    candidate_attrs,
    data: Dataset,
    config: TreeConfig,
) -> tuple[int, float, float] | None:
    """Exhaustive best split of the given rows over candidate attributes.

    Thresholds are midpoints between consecutive distinct sorted values; a
    split is valid when both children hold at least ``min_node_count`` rows.
    Returns None when the node is pure (variance below ``min_impurity``) or no
    valid split exists.
    """
    targets = np.asarray(targets, dtype=np.float64)
    if targets.shape != (len(rows),):
        raise ValueError("targets must align with rows")
    return _scan_attrs(data.observations, rows.indices, targets, candidate_attrs, config)


def _merge_constraint(
    intervals: dict[int, tuple[float, float]], attr: int, lo: float, hi: float
) -> dict[int, tuple[float, float]]:
    out = dict(intervals)
    old_lo, old_hi = out.get(attr, (NEG_INF, POS_INF))
    out[attr] = (max(old_lo, lo), min(old_hi, hi))
    return out


@dataclass
class _Frontier:
    node: Leaf
    parent: SplitNode | None
    side: str
    local_rows: np.ndarray
    intervals: dict[int, tuple[float, float]]
    sse: float
    seq: int

    def __lt__(self, other: "_Frontier") -> bool:
        # heap priority: largest count-weighted impurity first, then creation order
        return (-self.sse, self.seq) < (-other.sse, other.seq)


def grow_tree(
    rows: IndexSubset,
    targets: np.ndarray,
    t_m: int,
    data: Dataset,
    config: TreeConfig,
    rng: np.random.Generator,
) -> Tree:
    """Grow best-first until ``t_m`` terminals or no frontier node can split.

    Each split considers ceil(attr_sample_fraction * K) attributes sampled
    without replacement (globally constant attributes are never candidates).
    """
    targets = np.asarray(targets, dtype=np.float64)
    if targets.shape != (len(rows),):
        raise ValueError("targets must align with rows")
    x = data.observations
    row_idx = rows.indices

    constant = x.min(axis=0) == x.max(axis=0)
    eligible = np.flatnonzero(~constant)
    n_sampled = min(math.ceil(config.attr_sample_fraction * data.n_attrs), eligible.size)

    mean, count, sse = _node_stats(targets)
    root: SplitNode | Leaf = Leaf(mean, count, sse / count)
    rules: list[Rule] = []
    seq = 0
    frontier: list[_Frontier] = []
    if count >= 2:
        heapq.heappush(frontier, _Frontier(root, None, "", np.arange(count), {}, sse, seq))
    terminals = 1

    while terminals < t_m and frontier and n_sampled > 0:
        entry = heapq.heappop(frontier)
        attrs = np.sort(rng.choice(eligible, size=n_sampled, replace=False))
        local = entry.local_rows
        found = _scan_attrs(x, row_idx[local], targets[local], attrs, config)
        if found is None:
            continue  # stays a leaf
        attr, thr, _ = found
        vals = x[row_idx[local], attr]
        left_local = local[vals < thr]
        right_local = local[vals >= thr]

        lmean, lcount, lsse = _node_stats(targets[left_local])
        rmean, rcount, rsse = _node_stats(targets[right_local])
        left = Leaf(lmean, lcount, lsse / lcount)
        right = Leaf(rmean, rcount, rsse / rcount)
        node = SplitNode(attr, thr, left, right, entry.node.node_mean,
                         entry.node.node_count, entry.node.node_impurity)
        if entry.parent is None:
            root = node
        else:
            setattr(entry.parent, entry.side, node)

        left_iv = _merge_constraint(entry.intervals, attr, NEG_INF, thr)
        right_iv = _merge_constraint(entry.intervals, attr, thr, POS_INF)
        rules.append(Rule.from_map(left_iv))
        rules.append(Rule.from_map(right_iv))
        seq += 1
        heapq.heappush(frontier, _Frontier(left, node, "left", left_local, left_iv, lsse, seq))
        seq += 1
        heapq.heappush(frontier, _Frontier(right, node, "right", right_local, right_iv, rsse, seq))
        terminals += 1

    return Tree(root, terminals, tuple(rules))


def extract_rules(tree: Tree) -> list[Rule]:
    """One rule per non-root node, in node-creation order."""
    return list(tree.node_rules)
