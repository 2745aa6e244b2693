"""Fitted ensembles: binary models, one-vs-all multi-class, JSON persistence.

A fitted model scores an observation as a0 + sum_k a_k f_k(x), where the
features f_k are the stored rules (0/1) followed by optional linear terms,
all evaluated on the stored standardization of x.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .dataset import Dataset, ScalingParams, standardize
from .loss import LossKind
from .rulegen import (
    BoostConfig,
    Constraint,
    Rule,
    RuleSet,
    build_feature_matrix,
    dedupe,
    generate_rules,
)
from .solvers import Coefficients, solve, solver_params

FORMAT_VERSION = 1


class ModelError(Exception):
    """Raised for malformed model documents or prediction misuse."""


@dataclass(frozen=True)
class EnsembleModel:
    attribute_names: tuple[str, ...]
    scaling: ScalingParams
    ruleset: RuleSet
    coefficients: Coefficients
    solver_name: str
    solver_param: dict
    loss: LossKind
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "attribute_names", tuple(self.attribute_names))
        object.__setattr__(self, "solver_param", dict(self.solver_param))
        if len(self.coefficients.a) != self.ruleset.k_total:
            raise ModelError(
                f"coefficient length {len(self.coefficients.a)} does not match "
                f"feature count {self.ruleset.k_total}"
            )

    @property
    def n_attrs(self) -> int:
        return len(self.attribute_names)


@dataclass(frozen=True)
class OvaModel:
    class_names: tuple[str, ...]
    binary_models: tuple[EnsembleModel, ...]

    def __post_init__(self):
        object.__setattr__(self, "class_names", tuple(self.class_names))
        object.__setattr__(self, "binary_models", tuple(self.binary_models))
        if len(self.class_names) < 2:
            raise ModelError("one-vs-all model needs at least 2 classes")
        if len(self.binary_models) != len(self.class_names):
            raise ModelError("need exactly one binary model per class")

    @property
    def attribute_names(self) -> tuple[str, ...]:
        return self.binary_models[0].attribute_names


def _identity_scaling(k: int) -> ScalingParams:
    return ScalingParams(np.zeros(k), np.ones(k))


def fit_binary(
    d: Dataset,
    boost_cfg: BoostConfig | None = None,
    solver: str = "cdnet",
    params: dict | None = None,
    include_linear: bool = False,
    linear_only: bool = False,
    standardize_data: bool = True,
) -> EnsembleModel:
    """Standardize, generate rules, and fit the sparse coefficient vector.

    With linear_only=True no rules are generated and the model is plain
    (penalized) linear regression on the standardized attributes.
    """
    if d.n_classes != 2:
        raise ModelError(f"fit_binary needs a two-class dataset, got {d.n_classes} classes")
    cfg = boost_cfg if boost_cfg is not None else BoostConfig()
    merged = solver_params(solver, params)

    if standardize_data:
        scaled, scaling = standardize(d)
    else:
        scaled, scaling = d, _identity_scaling(d.n_attrs)

    if linear_only:
        rs = RuleSet(()).with_linear(d.n_attrs)
    else:
        rs = generate_rules(scaled, cfg)
        rs, _ = dedupe(rs)
        if include_linear:
            rs = rs.with_linear(d.n_attrs)

    features = build_feature_matrix(rs, scaled)
    labels = scaled.labels.astype(np.float64)
    coefficients, _ = solve(solver, features, labels, merged)
    return EnsembleModel(
        attribute_names=d.attribute_names,
        scaling=scaling,
        ruleset=rs,
        coefficients=coefficients,
        solver_name=solver,
        solver_param=merged,
        loss=cfg.loss,
        seed=cfg.seed,
    )


def _check_batch(m: EnsembleModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != m.n_attrs:
        raise ModelError(
            f"observations must have shape (N, {m.n_attrs}), got {x.shape}"
        )
    return x


def predict_scores(m: EnsembleModel, x: np.ndarray) -> np.ndarray:
    """Scores for a batch of raw observations (stored scaling applied)."""
    x = _check_batch(m, x)
    scaled = m.scaling.transform(x)
    features = build_feature_matrix(m.ruleset, scaled)
    return m.coefficients.a0 + features.values @ m.coefficients.a


def predict_score(m: EnsembleModel, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ModelError("predict_score expects a single observation")
    return float(predict_scores(m, x[None, :])[0])


def predict_labels(m: EnsembleModel, x: np.ndarray) -> np.ndarray:
    """Label +1 where the score is >= 0, else -1."""
    scores = predict_scores(m, x)
    return np.where(scores >= 0.0, 1, -1).astype(np.int64)


def predict_label(m: EnsembleModel, x) -> int:
    return 1 if predict_score(m, x) >= 0.0 else -1


def derive_class_seed(master_seed: int, class_index: int) -> int:
    """Stable per-class seed stream for one-vs-all training."""
    seq = np.random.SeedSequence([master_seed, class_index])
    return int(seq.generate_state(1, np.uint64)[0])


def fit_ova(
    d: Dataset,
    boost_cfg: BoostConfig | None = None,
    solver: str = "cdnet",
    params: dict | None = None,
    include_linear: bool = False,
    linear_only: bool = False,
    standardize_data: bool = True,
    derive_seeds: bool = True,
    threads: int = 1,
) -> OvaModel:
    """One binary model per class: +1 for the class, -1 for the rest.

    derive_seeds=False reuses the master seed for every submodel (useful for
    controlled comparisons); the default gives each submodel its own stream.
    """
    cfg = boost_cfg if boost_cfg is not None else BoostConfig()
    if d.n_classes < 2:
        raise ModelError("one-vs-all needs at least 2 classes")
    counts = {int(v): 0 for v in d.label_values()}
    for v in d.labels.tolist():
        counts[int(v)] += 1
    rare = [d.class_names[i] for i, v in enumerate(d.label_values()) if counts[int(v)] < 2]
    if rare:
        raise ModelError(f"every class needs at least 2 members; too small: {', '.join(rare)}")

    def fit_one(j: int) -> EnsembleModel:
        code = d.label_values()[j]
        y = np.where(d.labels == code, 1, -1).astype(np.int64)
        name = d.class_names[j]
        sub = Dataset(d.observations, y, d.attribute_names, (f"not-{name}", name))
        seed_j = derive_class_seed(cfg.seed, j) if derive_seeds else cfg.seed
        return fit_binary(
            sub,
            replace(cfg, seed=seed_j),
            solver=solver,
            params=params,
            include_linear=include_linear,
            linear_only=linear_only,
            standardize_data=standardize_data,
        )

    indices = range(d.n_classes)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            models = list(pool.map(fit_one, indices))
    else:
        models = [fit_one(j) for j in indices]
    return OvaModel(d.class_names, tuple(models))


def predict_class_scores(m: OvaModel, x: np.ndarray) -> np.ndarray:
    """(N, J) matrix of per-class scores."""
    cols = [predict_scores(sub, x) for sub in m.binary_models]
    return np.column_stack(cols)


def predict_class_indices(m: OvaModel, x: np.ndarray) -> np.ndarray:
    """Argmax class index per row; ties go to the lowest index."""
    return np.argmax(predict_class_scores(m, x), axis=1)


def predict_class(m: OvaModel, x) -> str:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ModelError("predict_class expects a single observation")
    j = int(predict_class_indices(m, x[None, :])[0])
    return m.class_names[j]


def _encode_real(v: float):
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return float(v)


def _decode_real(v) -> float:
    if v == "inf":
        return math.inf
    if v == "-inf":
        return -math.inf
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return float(v)
    raise ModelError(f"malformed model document: bad numeric value {v!r}")


def _binary_doc(m: EnsembleModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "attribute_names": list(m.attribute_names),
        "scaling": {
            "means": [float(v) for v in m.scaling.means],
            "stds": [float(v) for v in m.scaling.stds],
        },
        "rules": [
            {
                "constraints": [
                    {"attr": int(c.attr), "lo": _encode_real(c.lo), "hi": _encode_real(c.hi)}
                    for c in r.constraints
                ]
            }
            for r in m.ruleset.rules
        ],
        "linear_terms": [int(i) for i in m.ruleset.linear_attr_indices],
        "a0": float(m.coefficients.a0),
        "coefficients": [float(v) for v in m.coefficients.a],
        "solver": {"name": m.solver_name, "param": dict(m.solver_param)},
        "loss": m.loss.value,
        "seed": int(m.seed),
    }


def serialize(m) -> str:
    """Model to JSON text; one-vs-all models nest their binary submodels."""
    if isinstance(m, OvaModel):
        doc = {
            "format_version": FORMAT_VERSION,
            "class_names": list(m.class_names),
            "models": [_binary_doc(sub) for sub in m.binary_models],
        }
    elif isinstance(m, EnsembleModel):
        doc = _binary_doc(m)
    else:
        raise ModelError(f"cannot serialize object of type {type(m).__name__}")
    return json.dumps(doc, indent=2) + "\n"


def _require(doc: dict, key: str):
    if key not in doc:
        raise ModelError(f"malformed model document: missing field '{key}'")
    return doc[key]


def _binary_from_doc(doc: dict) -> EnsembleModel:
    version = _require(doc, "format_version")
    if version != FORMAT_VERSION:
        raise ModelError(f"unsupported model format version {version!r}")
    try:
        rules = tuple(
            Rule(
                tuple(
                    Constraint(int(c["attr"]), _decode_real(c["lo"]), _decode_real(c["hi"]))
                    for c in entry["constraints"]
                )
            )
            for entry in _require(doc, "rules")
        )
        linear = tuple(int(i) for i in _require(doc, "linear_terms"))
        rs = RuleSet(rules, include_linear=bool(linear), linear_attr_indices=linear)
        scaling_doc = _require(doc, "scaling")
        scaling = ScalingParams(
            np.array(scaling_doc["means"], dtype=np.float64),
            np.array(scaling_doc["stds"], dtype=np.float64),
        )
        coefficients = Coefficients(
            _decode_real(_require(doc, "a0")),
            np.array([_decode_real(v) for v in _require(doc, "coefficients")]),
        )
        solver_doc = _require(doc, "solver")
        return EnsembleModel(
            attribute_names=tuple(_require(doc, "attribute_names")),
            scaling=scaling,
            ruleset=rs,
            coefficients=coefficients,
            solver_name=str(solver_doc["name"]),
            solver_param=dict(solver_doc["param"]),
            loss=LossKind(_require(doc, "loss")),
            seed=int(_require(doc, "seed")),
        )
    except ModelError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelError(f"malformed model document: {exc}") from exc


def deserialize(text: str):
    """JSON text back to an EnsembleModel or OvaModel."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"malformed model document: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelError("malformed model document: top level must be an object")
    if "models" in doc:
        version = _require(doc, "format_version")
        if version != FORMAT_VERSION:
            raise ModelError(f"unsupported model format version {version!r}")
        models = tuple(_binary_from_doc(entry) for entry in doc["models"])
        return OvaModel(tuple(_require(doc, "class_names")), models)
    return _binary_from_doc(doc)
