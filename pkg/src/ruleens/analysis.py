"""Metrics, rule-importance ranking, voting, attribute selection, and CV."""

from __future__ import annotations

import hashlib
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .dataset import Dataset, ScalingParams, standardize, stratified_kfold
from .model import (
    EnsembleModel,
    fit_binary,
    fit_ova,
    predict_class_indices,
    predict_labels,
)
from .rulegen import (
    BoostConfig,
    Rule,
    RuleSet,
    build_feature_matrix,
    dedupe,
    generate_rules,
)
from .solvers import PRIMARY_PARAM, SolverError, solve, solver_params


@dataclass(frozen=True)
class Metrics:
    n: int
    true_positives: int
    false_positives: int
    true_negatives: int
    false_negatives: int

    @property
    def error_rate(self) -> float:
        return (self.false_positives + self.false_negatives) / self.n

    @property
    def false_positive_rate(self) -> float | None:
        """Misclassified-as-positive over all negatives; None without negatives."""
        negatives = self.true_negatives + self.false_positives
        return self.false_positives / negatives if negatives else None

    @property
    def false_negative_rate(self) -> float | None:
        positives = self.true_positives + self.false_negatives
        return self.false_negatives / positives if positives else None


def confusion_metrics(predictions, labels) -> Metrics:
    p = np.asarray(predictions)
    y = np.asarray(labels)
    if p.shape != y.shape or p.ndim != 1:
        raise ValueError(f"predictions and labels must be aligned 1-D, got {p.shape} vs {y.shape}")
    if p.size == 0:
        raise ValueError("confusion_metrics needs at least one observation")
    for name, v in (("predictions", p), ("labels", y)):
        if not set(np.unique(v).tolist()) <= {-1, 1}:
            raise ValueError(f"{name} must be in {{-1, +1}}")
    tp = int(np.sum((p == 1) & (y == 1)))
    fp = int(np.sum((p == 1) & (y == -1)))
    tn = int(np.sum((p == -1) & (y == -1)))
    fn = int(np.sum((p == -1) & (y == 1)))
    return Metrics(int(p.size), tp, fp, tn, fn)


@dataclass(frozen=True)
class RuleRanking:
    """(feature index, |coefficient|, description) by falling magnitude."""

    entries: tuple[tuple[int, float, str], ...]
    total_features: int

    def indices(self) -> tuple[int, ...]:
        return tuple(e[0] for e in self.entries)


def describe_feature(m: EnsembleModel, index: int) -> str:
    rs = m.ruleset
    if index < len(rs.rules):
        return rs.rules[index].describe(m.attribute_names)
    attr = rs.linear_attr_indices[index - len(rs.rules)]
    return f"linear({m.attribute_names[attr]})"


def rank_rules(m: EnsembleModel, top_k: int = 20) -> RuleRanking:
    """Top-k features by |coefficient|; zeros excluded, ties to lower index."""
    if top_k < 1:
        raise ValueError(f"top_k must be at least 1, got {top_k}")
    a = m.coefficients.a
    magnitudes = np.abs(a)
    nonzero = np.flatnonzero(magnitudes)
    order = nonzero[np.lexsort((nonzero, -magnitudes[nonzero]))][:top_k]
    entries = tuple(
        (int(i), float(magnitudes[i]), describe_feature(m, int(i))) for i in order
    )
    return RuleRanking(entries, total_features=len(a))


@dataclass(frozen=True)
class VoteTally:
    votes: dict[int, int]  # feature index -> number of rankings containing it
    context: int  # number of rankings polled

    def with_votes(self, minimum: int) -> tuple[int, ...]:
        return tuple(sorted(i for i, v in self.votes.items() if v >= minimum))

    def unanimous(self) -> tuple[int, ...]:
        return self.with_votes(self.context)


def vote_rules(rankings) -> VoteTally:
    """One vote per ranking for each feature it contains."""
    rankings = list(rankings)
    if not rankings:
        raise ValueError("vote_rules needs at least one ranking")
    universes = {r.total_features for r in rankings}
    if len(universes) > 1:
        raise ValueError(f"mismatched rule universes: {sorted(universes)}")
    counts: Counter[int] = Counter()
    for r in rankings:
        counts.update(r.indices())
    return VoteTally(dict(counts), len(rankings))


def select_attributes(per_repetition_rule_sets, min_votes: int = 3) -> tuple[int, ...]:
    """Attributes constrained by voted rules in at least min_votes repetitions.

    Each repetition entry is an iterable of Rule objects and/or bare attribute
    indices (for linear terms).
    """
    if min_votes < 1:
        raise ValueError(f"min_votes must be at least 1, got {min_votes}")
    counts: Counter[int] = Counter()
    for rep in per_repetition_rule_sets:
        attrs: set[int] = set()
        for item in rep:
            if isinstance(item, Rule):
                attrs.update(item.attributes())
            elif isinstance(item, (int, np.integer)):
                attrs.add(int(item))
            else:
                raise TypeError(f"expected Rule or attribute index, got {type(item).__name__}")
        counts.update(attrs)
    return tuple(sorted(a for a, c in counts.items() if c >= min_votes))


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class CvRow:
    repetition: int
    fold: int
    error_rate: float
    false_positive_rate: float | None
    false_negative_rate: float | None
    nonzero_count: int
    per_class: tuple[Metrics, ...] | None = None  # one-vs-all runs only


@dataclass(frozen=True)
class CvResult:
    rows: tuple[CvRow, ...]

    def _column(self, getter):
        values = [getter(r) for r in self.rows]
        if any(v is None for v in values):
            return None
        return np.array(values, dtype=np.float64)

    def mean_error(self) -> float:
        return float(np.mean([r.error_rate for r in self.rows]))

    def variance_error(self) -> float:
        errs = [r.error_rate for r in self.rows]
        return float(np.var(errs, ddof=1)) if len(errs) > 1 else 0.0

    def to_csv(self) -> str:
        lines = ["repetition,fold,error,fp_rate,fn_rate,nonzeros"]
        for r in self.rows:
            lines.append(
                ",".join(
                    [
                        str(r.repetition),
                        str(r.fold),
                        _fmt(r.error_rate),
                        _fmt(r.false_positive_rate),
                        _fmt(r.false_negative_rate),
                        str(r.nonzero_count),
                    ]
                )
            )
        columns = [
            self._column(lambda r: r.error_rate),
            self._column(lambda r: r.false_positive_rate),
            self._column(lambda r: r.false_negative_rate),
            self._column(lambda r: float(r.nonzero_count)),
        ]
        means = [None if c is None else float(np.mean(c)) for c in columns]
        variances = [
            None if c is None else (float(np.var(c, ddof=1)) if c.size > 1 else 0.0)
            for c in columns
        ]
        lines.append("mean," + ",".join(_fmt(v) for v in means))
        lines.append("variance," + ",".join(_fmt(v) for v in variances))
        return "\n".join(lines) + "\n"


def fold_seed(repetition_seed: int, fold: int) -> int:
    seq = np.random.SeedSequence([repetition_seed, fold])
    return int(seq.generate_state(1, np.uint64)[0])


def run_cv(
    d: Dataset,
    k: int = 2,
    repetitions: int = 5,
    base_seed: int = 0,
    boost_cfg: BoostConfig | None = None,
    solver: str = "cdnet",
    params: dict | None = None,
    include_linear: bool = False,
    linear_only: bool = False,
    standardize_data: bool = True,
    threads: int = 1,
) -> CvResult:
    """Stratified k-fold CV repeated with fresh shuffles; one row per fold.

    Repetition r shuffles with seed base_seed + r; the model fitted on fold f
    uses a seed derived from (base_seed + r, f).  Multi-class datasets run
    one-vs-all: the row reports multi-class error (FP/FN left blank) plus
    per-class binary metrics.
    """
    cfg = boost_cfg if boost_cfg is not None else BoostConfig()
    if repetitions < 1:
        raise ValueError(f"repetitions must be at least 1, got {repetitions}")
    tasks = []
    for rep in range(repetitions):
        rep_seed = base_seed + rep
        for fold, (train, test) in enumerate(stratified_kfold(d, k, rep_seed)):
            tasks.append((rep, fold, rep_seed, train, test))

    multiclass = d.n_classes > 2

    def one(task) -> CvRow:
        rep, fold, rep_seed, train, test = task
        fit_cfg = replace(cfg, seed=fold_seed(rep_seed, fold))
        common = dict(
            solver=solver,
            params=params,
            include_linear=include_linear,
            linear_only=linear_only,
            standardize_data=standardize_data,
        )
        if multiclass:
            m = fit_ova(train, fit_cfg, **common)
            pred = predict_class_indices(m, test.observations)
            truth = test.labels
            error = float(np.mean(pred != truth))
            per_class = tuple(
                confusion_metrics(
                    np.where(pred == j, 1, -1), np.where(truth == j, 1, -1)
                )
                for j in range(d.n_classes)
            )
            nnz = sum(sub.coefficients.nonzero_count for sub in m.binary_models)
            return CvRow(rep, fold, error, None, None, nnz, per_class)
        m = fit_binary(train, fit_cfg, **common)
        metrics = confusion_metrics(predict_labels(m, test.observations), test.labels)
        return CvRow(
            rep,
            fold,
            metrics.error_rate,
            metrics.false_positive_rate,
            metrics.false_negative_rate,
            m.coefficients.nonzero_count,
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, tasks))
    else:
        rows = [one(t) for t in tasks]
    return CvResult(tuple(rows))


@dataclass(frozen=True)
class SweepRow:
    parameter: float
    mean_error: float
    mean_false_positive_rate: float | None
    mean_false_negative_rate: float | None
    mean_nonzero_count: float
    variance_error: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    # For each (repetition, fold): sha256 of the solver's training input at
    # every grid point.  Shared-RuleSet mode makes these identical per fold.
    feature_digests: tuple[tuple[str, ...], ...]
    rankings: tuple[tuple[RuleRanking, ...], ...]  # per fold, per grid point
    rulesets: tuple[RuleSet, ...]  # the shared rule set of each fold

    def to_csv(self) -> str:
        lines = ["parameter,error,fp_rate,fn_rate,nonzeros,variance"]
        for r in self.rows:
            lines.append(
                ",".join(
                    [
                        _fmt(r.parameter),
                        _fmt(r.mean_error),
                        _fmt(r.mean_false_positive_rate),
                        _fmt(r.mean_false_negative_rate),
                        _fmt(r.mean_nonzero_count),
                        _fmt(r.variance_error),
                    ]
                )
            )
        return "\n".join(lines) + "\n"


def run_sweep(
    d: Dataset,
    grid,
    solver: str = "cdnet",
    k: int = 2,
    repetitions: int = 1,
    base_seed: int = 0,
    boost_cfg: BoostConfig | None = None,
    params: dict | None = None,
    include_linear: bool = False,
    linear_only: bool = False,
    standardize_data: bool = True,
    top_k: int = 20,
    threads: int = 1,
) -> SweepResult:
    """Grid over the solver's primary parameter with one shared rule set per fold.

    Rules are generated once per (repetition, fold) and the same feature matrix
    is handed to the solver at every grid point, so differences along the grid
    come from the solver alone.  Two-class datasets only.
    """
    cfg = boost_cfg if boost_cfg is not None else BoostConfig()
    grid = [float(g) for g in grid]
    if not grid:
        raise ValueError("sweep needs a non-empty parameter grid")
    if d.n_classes != 2:
        raise ValueError("sweep supports two-class datasets only")
    if solver not in PRIMARY_PARAM:
        raise SolverError(f"unknown solver '{solver}'")
    primary = PRIMARY_PARAM[solver]

    tasks = []
    for rep in range(repetitions):
        rep_seed = base_seed + rep
        for fold, (train, test) in enumerate(stratified_kfold(d, k, rep_seed)):
            tasks.append((rep, fold, rep_seed, train, test))

    def one(task):
        rep, fold, rep_seed, train, test = task
        fit_cfg = replace(cfg, seed=fold_seed(rep_seed, fold))
        if standardize_data:
            scaled, scaling = standardize(train)
        else:
            scaled = train
            scaling = ScalingParams(np.zeros(train.n_attrs), np.ones(train.n_attrs))
        if linear_only:
            rs = RuleSet(()).with_linear(train.n_attrs)
        else:
            rs = generate_rules(scaled, fit_cfg)
            rs, _ = dedupe(rs)
            if include_linear:
                rs = rs.with_linear(train.n_attrs)
        features = build_feature_matrix(rs, scaled)
        labels = scaled.labels.astype(np.float64)
        digests, point_metrics, rankings = [], [], []
        for value in grid:
            merged = solver_params(solver, dict(params or {}, **{primary: value}))
            digests.append(hashlib.sha256(features.values.tobytes()).hexdigest())
            coefficients, _ = solve(solver, features, labels, merged)
            m = EnsembleModel(
                attribute_names=train.attribute_names,
                scaling=scaling,
                ruleset=rs,
                coefficients=coefficients,
                solver_name=solver,
                solver_param=merged,
                loss=fit_cfg.loss,
                seed=fit_cfg.seed,
            )
            metrics = confusion_metrics(predict_labels(m, test.observations), test.labels)
            point_metrics.append((metrics, coefficients.nonzero_count))
            if coefficients.nonzero_count:
                rankings.append(rank_rules(m, top_k))
            else:
                rankings.append(RuleRanking((), total_features=rs.k_total))
        return digests, point_metrics, rankings, rs

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, tasks))
    else:
        results = [one(t) for t in tasks]

    rows = []
    for gi, value in enumerate(grid):
        errs = np.array([res[1][gi][0].error_rate for res in results])
        fps = [res[1][gi][0].false_positive_rate for res in results]
        fns = [res[1][gi][0].false_negative_rate for res in results]
        nnzs = np.array([float(res[1][gi][1]) for res in results])
        rows.append(
            SweepRow(
                parameter=value,
                mean_error=float(errs.mean()),
                mean_false_positive_rate=(
                    None if any(v is None for v in fps) else float(np.mean(fps))
                ),
                mean_false_negative_rate=(
                    None if any(v is None for v in fns) else float(np.mean(fns))
                ),
                mean_nonzero_count=float(nnzs.mean()),
                variance_error=float(np.var(errs, ddof=1)) if errs.size > 1 else 0.0,
            )
        )
    return SweepResult(
        tuple(rows),
        tuple(tuple(res[0]) for res in results),
        tuple(tuple(res[2]) for res in results),
        tuple(res[3] for res in results),
    )


def run_attribute_selection(
    d: Dataset,
    grid,
    solver: str = "fpc",
    repetitions: int = 5,
    base_seed: int = 0,
    boost_cfg: BoostConfig | None = None,
    params: dict | None = None,
    top_k: int = 20,
    min_votes: int = 3,
    k: int = 2,
    standardize_data: bool = True,
    threads: int = 1,
):
    """Chained voting protocol: per repetition, rank the top_k features of each
    grid solution, keep features present in every solution (unanimous votes),
    map them to the attributes they constrain, then keep attributes selected in
    at least min_votes repetitions.

    Returns (selected attribute indices, per-repetition unanimous feature indices).
    """
    per_rep_items = []
    per_rep_features = []
    for rep in range(repetitions):
        sweep = run_sweep(
            d,
            grid,
            solver=solver,
            k=k,
            repetitions=1,
            base_seed=base_seed + rep,
            boost_cfg=boost_cfg,
            params=params,
            top_k=top_k,
            standardize_data=standardize_data,
            threads=threads,
        )
        # Use the first fold's path; each repetition reshuffles the folds.
        rankings = sweep.rankings[0]
        rs = sweep.rulesets[0]
        chosen = vote_rules(rankings).unanimous()
        per_rep_features.append(chosen)
        items = []
        for idx in chosen:
            if idx < len(rs.rules):
                items.append(rs.rules[idx])
            else:
                items.append(rs.linear_attr_indices[idx - len(rs.rules)])
        per_rep_items.append(items)
    selected = select_attributes(per_rep_items, min_votes=min_votes)
    return selected, tuple(tuple(f) for f in per_rep_features)
