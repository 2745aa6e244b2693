"""Command-line front end: train, predict, evaluate, cv, rank, sweep, select-attrs.

Flag precedence is CLI > config file > built-in defaults.  The effective
configuration is echoed to stderr before work starts.  Exit codes: 0 success,
1 usage error, 2 data or model error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass

import numpy as np

from .analysis import (
    confusion_metrics,
    rank_rules,
    run_attribute_selection,
    run_cv,
    run_sweep,
)
from .dataset import DataError, load_csv
from .loss import LossKind
from .model import (
    EnsembleModel,
    ModelError,
    OvaModel,
    deserialize,
    fit_binary,
    fit_ova,
    predict_class_indices,
    predict_class_scores,
    predict_labels,
    predict_scores,
    serialize,
)
from .rulegen import BoostConfig, TreeConfig
from .solvers import DEFAULT_PARAMS, PRIMARY_PARAM, SOLVER_NAMES, SolverError


class UsageError(Exception):
    """Bad flags, bad config, or a malformed invocation."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures to exit code 1
        raise UsageError(message)


# Built-in defaults for every config field the merge layer knows about.
DEFAULTS: dict = {
    "data": None,
    "label_col": None,
    "model": None,
    "out": None,
    "seed": 0,
    "threads": 1,
    "solver": "cdnet",
    "folds": 2,
    "reps": 5,
    "top": 20,
    "min_votes": 3,
    "param_grid": None,
    # boosting
    "max_rules": 600,
    "eta": 0.25,
    "nu": 0.01,
    "mean_leaves": 20.0,
    "min_node_count": 5,
    "min_impurity": 1e-12,
    "attr_fraction": 1.0 / 3.0,
    "residual_tol": 1e-6,
    "loss": "squared_ramp",
    "include_linear": False,
    "linear_only": False,
    "standardize": True,
    # solver parameters (None = use the solver's own default)
    "tau": None,
    "delta": None,
    "solver_max_iter": None,
    "alpha": None,
    "lambda_min": None,
    "n_steps": None,
    "mu_max": None,
    "sigma": None,
}

# Which solver-parameter fields belong to which solver.
_SOLVER_FIELDS = {
    "pathbuild": {"tau", "delta", "solver_max_iter"},
    "cdnet": {"alpha", "lambda_min", "n_steps"},
    "fpc": {"mu_max", "n_steps"},
    "spgl1": {"sigma", "solver_max_iter"},
}
_ALL_SOLVER_FIELDS = set().union(*_SOLVER_FIELDS.values())

# Config-field -> solver-keyword translation.
_FIELD_TO_PARAM = {
    "tau": "tau",
    "delta": "delta",
    "solver_max_iter": "max_iter",
    "alpha": "alpha",
    "lambda_min": "lambda_min",
    "n_steps": "n_steps",
    "mu_max": "mu_max",
    "sigma": "sigma",
}


@dataclass(frozen=True)
class RunConfig:
    """The merged, validated configuration for one invocation."""

    subcommand: str
    fields: dict

    def __getitem__(self, key):
        return self.fields[key]

    def boost_config(self) -> BoostConfig:
        f = self.fields
        try:
            return BoostConfig(
                max_rules=int(f["max_rules"]),
                eta=f["eta"],
                nu=float(f["nu"]),
                residual_tolerance=float(f["residual_tol"]),
                tree=TreeConfig(
                    mean_leaves=float(f["mean_leaves"]),
                    min_node_count=int(f["min_node_count"]),
                    min_impurity=float(f["min_impurity"]),
                    attr_sample_fraction=float(f["attr_fraction"]),
                ),
                loss=LossKind(f["loss"]),
                seed=int(f["seed"]),
            )
        except ValueError as exc:
            raise UsageError(str(exc)) from exc

    def solver_overrides(self) -> dict:
        """Explicitly-set parameters for the chosen solver."""
        solver = self.fields["solver"]
        out = {}
        for field in _SOLVER_FIELDS[solver]:
            value = self.fields[field]
            if value is not None:
                out[_FIELD_TO_PARAM[field]] = value
        return out

    def fit_kwargs(self) -> dict:
        return dict(
            solver=self.fields["solver"],
            params=self.solver_overrides(),
            include_linear=bool(self.fields["include_linear"]),
            linear_only=bool(self.fields["linear_only"]),
            standardize_data=bool(self.fields["standardize"]),
        )


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config file; flags override its fields")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)


def _add_data(p: argparse.ArgumentParser):
    p.add_argument("--data", default=None, help="CSV data file")
    p.add_argument("--label-col", dest="label_col", default=None,
                   help="label column name or index")


def _add_fit(p: argparse.ArgumentParser):
    p.add_argument("--solver", choices=SOLVER_NAMES, default=None)
    p.add_argument("--max-rules", dest="max_rules", type=int, default=None)
    p.add_argument("--eta", type=float, default=None,
                   help="subsample fraction in (0,1] or absolute count")
    p.add_argument("--nu", type=float, default=None, help="shrinkage per tree")
    p.add_argument("--mean-leaves", dest="mean_leaves", type=float, default=None)
    p.add_argument("--min-node-count", dest="min_node_count", type=int, default=None)
    p.add_argument("--min-impurity", dest="min_impurity", type=float, default=None)
    p.add_argument("--attr-fraction", dest="attr_fraction", type=float, default=None)
    p.add_argument("--residual-tol", dest="residual_tol", type=float, default=None)
    p.add_argument("--loss", choices=[k.value for k in LossKind], default=None)
    p.add_argument("--include-linear", dest="include_linear",
                   action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--linear-only", dest="linear_only",
                   action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--standardize", dest="standardize",
                   action=argparse.BooleanOptionalAction, default=None)
    # solver parameters
    p.add_argument("--tau", type=float, default=None, help="pathbuild threshold")
    p.add_argument("--delta", type=float, default=None, help="pathbuild step size")
    p.add_argument("--solver-max-iter", dest="solver_max_iter", type=int, default=None,
                   help="pathbuild/spgl1 iteration cap")
    p.add_argument("--alpha", type=float, default=None, help="cdnet mix in [0,1]")
    p.add_argument("--lambda-min", dest="lambda_min", type=float, default=None,
                   help="cdnet path endpoint")
    p.add_argument("--n-steps", dest="n_steps", type=int, default=None,
                   help="cdnet/fpc path length")
    p.add_argument("--mu-max", dest="mu_max", type=float, default=None,
                   help="fpc continuation endpoint")
    p.add_argument("--sigma", type=float, default=None, help="spgl1 one-norm budget")


def build_parser() -> _Parser:
    parser = _Parser(prog="ruleens", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", metavar="COMMAND")

    p = sub.add_parser("train", help="fit a model and write it to --out")
    _add_common(p)
    _add_data(p)
    _add_fit(p)
    p.add_argument("--out", default=None, help="model file to write")

    p = sub.add_parser("predict", help="score observations with a saved model")
    _add_common(p)
    p.add_argument("--model", default=None)
    p.add_argument("--data", default=None)
    p.add_argument("--out", default=None, help="predictions CSV (default stdout)")

    p = sub.add_parser("evaluate", help="metrics of a saved model on labeled data")
    _add_common(p)
    p.add_argument("--model", default=None)
    _add_data(p)

    p = sub.add_parser("cv", help="repeated stratified k-fold cross-validation")
    _add_common(p)
    _add_data(p)
    _add_fit(p)
    p.add_argument("--folds", type=int, default=None)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--out", default=None, help="metrics CSV (default stdout)")

    p = sub.add_parser("rank", help="top rules of a saved model by |coefficient|")
    _add_common(p)
    p.add_argument("--model", default=None)
    p.add_argument("--top", type=int, default=None)

    p = sub.add_parser("sweep", help="grid over the solver's main parameter "
                                     "with one shared rule set per fold")
    _add_common(p)
    _add_data(p)
    _add_fit(p)
    p.add_argument("--param-grid", dest="param_grid", default=None,
                   help="comma-separated values, e.g. 0.1,0.2,0.5")
    p.add_argument("--folds", type=int, default=None)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--out", default=None, help="sweep CSV (default stdout)")

    p = sub.add_parser("select-attrs", help="voted attribute selection across "
                                            "repetitions of a parameter path")
    _add_common(p)
    _add_data(p)
    _add_fit(p)
    p.add_argument("--param-grid", dest="param_grid", default=None)
    p.add_argument("--top", type=int, default=None)
    p.add_argument("--min-votes", dest="min_votes", type=int, default=None)
    p.add_argument("--folds", type=int, default=None)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--out", default=None, help="selection CSV (default stdout)")

    return parser


def _load_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise UsageError("config file must hold a JSON object")
    unknown = set(doc) - set(DEFAULTS)
    if unknown:
        raise UsageError(f"unknown config fields: {', '.join(sorted(unknown))}")
    return doc


def merge_config(args: argparse.Namespace) -> RunConfig:
    """DEFAULTS, then config file, then explicitly-set CLI flags."""
    fields = dict(DEFAULTS)
    if getattr(args, "config", None):
        fields.update(_load_config_file(args.config))
    for key, value in vars(args).items():
        if key in ("subcommand", "config") or value is None:
            continue
        fields[key] = value
    cfg = RunConfig(args.subcommand, fields)
    _validate_solver_fields(cfg)
    return cfg


def _validate_solver_fields(cfg: RunConfig):
    solver = cfg.fields["solver"]
    if solver not in _SOLVER_FIELDS:
        raise UsageError(f"unknown solver '{solver}'")
    allowed = _SOLVER_FIELDS[solver]
    stray = sorted(
        f for f in _ALL_SOLVER_FIELDS - allowed if cfg.fields[f] is not None
    )
    if stray:
        raise UsageError(
            f"parameter(s) {', '.join(stray)} do not apply to solver '{solver}'"
        )


def _require(cfg: RunConfig, field: str, flag: str):
    value = cfg.fields[field]
    if value is None:
        raise UsageError(f"{flag} is required for '{cfg.subcommand}'")
    return value


def _echo_config(cfg: RunConfig):
    effective = {"subcommand": cfg.subcommand}
    effective.update(cfg.fields)
    print(json.dumps(effective, sort_keys=True), file=sys.stderr)


def _label_col(cfg: RunConfig):
    raw = _require(cfg, "label_col", "--label-col")
    if isinstance(raw, int):
        return raw
    try:
        return int(raw)
    except (TypeError, ValueError):
        return raw


def _parse_grid(value) -> list[float]:
    if value is None:
        raise UsageError("--param-grid is required")
    if isinstance(value, str):
        parts = [p.strip() for p in value.split(",") if p.strip()]
    else:
        parts = list(value)
    if not parts:
        raise UsageError("--param-grid is empty")
    try:
        return [float(p) for p in parts]
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad grid value: {exc}") from exc


def _write_text(path: str | None, text: str):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _read_matrix(path: str, attribute_names) -> np.ndarray:
    """Read the named attribute columns from a headed CSV."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open data file: {exc}") from exc
    with fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if len(rows) < 2:
        raise DataError(f"data file {path} needs a header and at least one row")
    header = rows[0]
    indices = []
    for name in attribute_names:
        if name not in header:
            raise DataError(f"data file {path} lacks attribute column '{name}'")
        indices.append(header.index(name))
    out = np.empty((len(rows) - 1, len(indices)))
    for i, row in enumerate(rows[1:]):
        for j, col in enumerate(indices):
            try:
                out[i, j] = float(row[col])
            except (ValueError, IndexError) as exc:
                raise DataError(
                    f"data row {i + 1}, column '{header[col]}': bad value"
                ) from exc
    return out


def _load_model(cfg: RunConfig):
    path = _require(cfg, "model", "--model")
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ModelError(f"cannot open model file: {exc}") from exc
    return deserialize(text)


def _fmt_float(v) -> str:
    return "" if v is None else repr(float(v))


def _cmd_train(cfg: RunConfig) -> int:
    out = _require(cfg, "out", "--out")
    d = load_csv(_require(cfg, "data", "--data"), _label_col(cfg))
    boost = cfg.boost_config()
    if d.n_classes == 2:
        m = fit_binary(d, boost, **cfg.fit_kwargs())
    else:
        m = fit_ova(d, boost, threads=int(cfg["threads"]), **cfg.fit_kwargs())
    _write_text(out, serialize(m))
    print(f"wrote model: {out}", file=sys.stderr)
    return 0


def _cmd_predict(cfg: RunConfig) -> int:
    m = _load_model(cfg)
    x = _read_matrix(_require(cfg, "data", "--data"), m.attribute_names)
    lines = []
    if isinstance(m, OvaModel):
        scores = predict_class_scores(m, x)
        picks = predict_class_indices(m, x)
        lines.append(
            "row_index,"
            + ",".join(f"score_{c}" for c in m.class_names)
            + ",predicted_label"
        )
        for i in range(len(x)):
            cells = [str(i)] + [repr(float(s)) for s in scores[i]]
            cells.append(m.class_names[int(picks[i])])
            lines.append(",".join(cells))
    else:
        scores = predict_scores(m, x)
        labels = np.where(scores >= 0.0, 1, -1)
        lines.append("row_index,score,predicted_label")
        for i in range(len(x)):
            lines.append(f"{i},{float(scores[i])!r},{int(labels[i])}")
    _write_text(cfg["out"], "\n".join(lines) + "\n")
    return 0


def _dataset_label_names(d) -> list[str]:
    code_to_name = {c: d.class_names[i] for i, c in enumerate(d.label_values())}
    return [code_to_name[int(v)] for v in d.labels]


def _cmd_evaluate(cfg: RunConfig) -> int:
    m = _load_model(cfg)
    d = load_csv(_require(cfg, "data", "--data"), _label_col(cfg))
    if isinstance(m, OvaModel):
        index_of = {name: j for j, name in enumerate(m.class_names)}
        names = _dataset_label_names(d)
        missing = sorted({n for n in names if n not in index_of})
        if missing:
            raise DataError(f"data classes not in model: {', '.join(missing)}")
        truth = np.array([index_of[n] for n in names])
        pred = predict_class_indices(m, d.observations)
        error = float(np.mean(pred != truth))
        print(f"n: {d.n}")
        print(f"error_rate: {error!r}")
        for j, cname in enumerate(m.class_names):
            pc = confusion_metrics(
                np.where(pred == j, 1, -1), np.where(truth == j, 1, -1)
            )
            print(
                f"class {cname}: error_rate={pc.error_rate!r}"
                f" fp_rate={_fmt_float(pc.false_positive_rate) or 'NA'}"
                f" fn_rate={_fmt_float(pc.false_negative_rate) or 'NA'}"
            )
        return 0
    if d.n_classes != 2:
        raise DataError("binary model but data has more than two classes")
    metrics = confusion_metrics(predict_labels(m, d.observations), d.labels)
    print(f"n: {metrics.n}")
    print(f"error_rate: {metrics.error_rate!r}")
    print(f"false_positive_rate: {_fmt_float(metrics.false_positive_rate) or 'NA'}")
    print(f"false_negative_rate: {_fmt_float(metrics.false_negative_rate) or 'NA'}")
    return 0


def _cmd_cv(cfg: RunConfig) -> int:
    d = load_csv(_require(cfg, "data", "--data"), _label_col(cfg))
    result = run_cv(
        d,
        k=int(cfg["folds"]),
        repetitions=int(cfg["reps"]),
        base_seed=int(cfg["seed"]),
        boost_cfg=cfg.boost_config(),
        threads=int(cfg["threads"]),
        **cfg.fit_kwargs(),
    )
    _write_text(cfg["out"], result.to_csv())
    print(
        f"mean_error: {result.mean_error()!r} variance: {result.variance_error()!r}",
        file=sys.stderr,
    )
    for row in result.rows:
        if row.per_class is None:
            continue
        for j, pc in enumerate(row.per_class):
            print(
                f"rep {row.repetition} fold {row.fold} class {d.class_names[j]}:"
                f" error_rate={pc.error_rate!r}"
                f" fp_rate={_fmt_float(pc.false_positive_rate) or 'NA'}"
                f" fn_rate={_fmt_float(pc.false_negative_rate) or 'NA'}",
                file=sys.stderr,
            )
    return 0


def _cmd_rank(cfg: RunConfig) -> int:
    m = _load_model(cfg)
    if isinstance(m, OvaModel):
        raise ModelError("rank works on binary models; train per class instead")
    ranking = rank_rules(m, int(cfg["top"]))
    print("importance\tdescription")
    for _, magnitude, description in ranking.entries:
        print(f"{magnitude:.6g}\t{description}")
    return 0


def _cmd_sweep(cfg: RunConfig) -> int:
    d = load_csv(_require(cfg, "data", "--data"), _label_col(cfg))
    grid = _parse_grid(cfg["param_grid"])
    try:
        result = run_sweep(
            d,
            grid,
            k=int(cfg["folds"]),
            repetitions=int(cfg["reps"]),
            base_seed=int(cfg["seed"]),
            boost_cfg=cfg.boost_config(),
            top_k=int(cfg["top"]),
            threads=int(cfg["threads"]),
            **cfg.fit_kwargs(),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _write_text(cfg["out"], result.to_csv())
    return 0


def _cmd_select_attrs(cfg: RunConfig) -> int:
    d = load_csv(_require(cfg, "data", "--data"), _label_col(cfg))
    grid = _parse_grid(cfg["param_grid"])
    fit = cfg.fit_kwargs()
    try:
        selected, per_rep = run_attribute_selection(
            d,
            grid,
            solver=fit["solver"],
            repetitions=int(cfg["reps"]),
            base_seed=int(cfg["seed"]),
            boost_cfg=cfg.boost_config(),
            params=fit["params"],
            top_k=int(cfg["top"]),
            min_votes=int(cfg["min_votes"]),
            k=int(cfg["folds"]),
            standardize_data=fit["standardize_data"],
            threads=int(cfg["threads"]),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    lines = ["attribute_index,attribute_name"]
    for a in selected:
        lines.append(f"{a},{d.attribute_names[a]}")
    _write_text(cfg["out"], "\n".join(lines) + "\n")
    print(
        f"selected {len(selected)} of {d.n_attrs} attributes"
        f" from {len(per_rep)} repetitions",
        file=sys.stderr,
    )
    return 0


_COMMANDS = {
    "train": _cmd_train,
    "predict": _cmd_predict,
    "evaluate": _cmd_evaluate,
    "cv": _cmd_cv,
    "rank": _cmd_rank,
    "sweep": _cmd_sweep,
    "select-attrs": _cmd_select_attrs,
}


def run(argv) -> int:
    """Execute one CLI invocation; returns the process exit code."""
    try:
        args = build_parser().parse_args(argv)
        if not args.subcommand:
            raise UsageError("a subcommand is required (see --help)")
        cfg = merge_config(args)
        _echo_config(cfg)
        return _COMMANDS[cfg.subcommand](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (DataError, ModelError, SolverError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


def entry():
    sys.exit(main())
