"""Data ingestion, standardization, and stratified partitioning.

Labels are stored as integers: binary tasks use {-1, +1}, multi-class tasks
use indices 0..J-1 into ``class_names``. Class tokens read from a file are
canonicalized by sorting (numeric sort when every token parses as a float,
else lexicographic) so the mapping is stable across separate train/test
files; binary tasks assign -1 to the first sorted class and +1 to the second.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np


class DataError(Exception):
    """Raised for malformed input files or invalid data-level requests."""


@dataclass(frozen=True)
class Dataset:
    observations: np.ndarray  # (N, K) float64
    labels: np.ndarray  # (N,) int64
    attribute_names: tuple[str, ...]
    class_names: tuple[str, ...]

    def __post_init__(self):
        x = np.ascontiguousarray(np.asarray(self.observations, dtype=np.float64))
        y = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "observations", x)
        object.__setattr__(self, "labels", y)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise ValueError(f"observations must be a non-empty 2-D matrix, got shape {x.shape}")
        if not np.isfinite(x).all():
            raise ValueError("observations contain non-finite values")
        if y.shape != (x.shape[0],):
            raise ValueError("labels length must match observation rows")
        if len(self.attribute_names) != x.shape[1]:
            raise ValueError("attribute_names length must match columns")
        if len(self.class_names) < 2:
            raise ValueError("need at least 2 classes")
        valid = self.label_values()
        if not set(np.unique(y).tolist()) <= set(valid):
            raise ValueError(f"labels must be among {valid}")

    def label_values(self) -> tuple[int, ...]:
        """The legal label codes: (-1, +1) for binary, 0..J-1 otherwise."""
        j = len(self.class_names)
        return (-1, 1) if j == 2 else tuple(range(j))

    @property
    def n(self) -> int:
        return self.observations.shape[0]

    @property
    def n_attrs(self) -> int:
        return self.observations.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def subset(self, indices: np.ndarray) -> "Dataset":
        return Dataset(
            self.observations[indices],
            self.labels[indices],
            self.attribute_names,
            self.class_names,
        )


@dataclass(frozen=True)
class ScalingParams:
    means: np.ndarray
    stds: np.ndarray  # constant columns record 1.0; never zero

    def __post_init__(self):
        m = np.asarray(self.means, dtype=np.float64)
        s = np.asarray(self.stds, dtype=np.float64)
        object.__setattr__(self, "means", m)
        object.__setattr__(self, "stds", s)
        if m.shape != s.shape or m.ndim != 1:
            raise ValueError("means/stds must be 1-D and of equal length")
        if np.any(s <= 0):
            raise ValueError("stored stds must be positive")

    def transform(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.means) / self.stds


@dataclass(frozen=True)
class IndexSubset:
    indices: np.ndarray  # sorted distinct int64 row indices

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        object.__setattr__(self, "indices", idx)
        if idx.ndim != 1:
            raise ValueError("indices must be 1-D")
        if idx.size and (np.any(np.diff(idx) <= 0) or idx[0] < 0):
            raise ValueError("indices must be sorted, distinct, and non-negative")

    def __len__(self) -> int:
        return int(self.indices.size)


def _canonical_classes(tokens: list[str]) -> list[str]:
    uniq = sorted(set(tokens))
    try:
        return sorted(uniq, key=lambda t: (float(t), t))
    except ValueError:
        return uniq


def load_csv(path: str, label_column: str | int) -> Dataset:
    """Read a comma-delimited file with one header row.

    ``label_column`` selects the class column by header name or zero-based
    index. Every other cell must parse as a finite real.
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise DataError(f"{path}: empty file (expected a header row)")
        header = [h.strip() for h in header]

        if isinstance(label_column, str) and label_column in header:
            label_idx = header.index(label_column)
        else:
            try:
                label_idx = int(label_column)
            except (TypeError, ValueError):
                raise DataError(f"unknown label column {label_column!r}; header is {header}") from None
            if not 0 <= label_idx < len(header):
                raise DataError(f"label column index {label_idx} out of range for {len(header)} columns")

        attr_names = tuple(h for i, h in enumerate(header) if i != label_idx)
        rows: list[list[float]] = []
        tokens: list[str] = []
        for row_no, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}: data row {row_no} has {len(row)} cells, expected {len(header)}")
            vals = []
            for i, cell in enumerate(row):
                if i == label_idx:
                    tokens.append(cell.strip())
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}: data row {row_no}, column {header[i]!r}: non-numeric value {cell.strip()!r}"
                    ) from None
                if not math.isfinite(v):
                    raise DataError(f"{path}: data row {row_no}, column {header[i]!r}: non-finite value")
                vals.append(v)
            rows.append(vals)

    if not rows:
        raise DataError(f"{path}: no data rows")
    classes = _canonical_classes(tokens)
    if len(classes) < 2:
        raise DataError(f"{path}: need at least 2 distinct classes, found {classes}")
    if len(classes) == 2:
        code = {classes[0]: -1, classes[1]: 1}
    else:
        code = {c: j for j, c in enumerate(classes)}
    labels = np.array([code[t] for t in tokens], dtype=np.int64)
    return Dataset(np.array(rows, dtype=np.float64), labels, attr_names, tuple(classes))


def standardize(d: Dataset) -> tuple[Dataset, ScalingParams]:
    """Shift/scale each attribute to mean 0, population std 1.

    Constant columns become all-zero and record std 1 so the stored transform
    is always well defined.
    """
    x = d.observations
    means = x.mean(axis=0)
    stds = np.sqrt(((x - means) ** 2).mean(axis=0))
    stds = np.where(stds == 0.0, 1.0, stds)
    params = ScalingParams(means, stds)
    out = Dataset(params.transform(x), d.labels, d.attribute_names, d.class_names)
    return out, params


def stratified_split(
    d: Dataset, per_class_counts: dict[int, int], seed: int
) -> tuple[Dataset, Dataset]:
    """Sample the requested count per class (without replacement) into train;
    the remainder becomes test."""
    rng = np.random.default_rng(seed)
    values = d.label_values()
    for c in per_class_counts:
        if c not in values:
            raise DataError(f"unknown class identifier {c!r}; classes are {values}")
    train_parts, test_parts = [], []
    for c in values:
        idx = np.flatnonzero(d.labels == c)
        want = int(per_class_counts.get(c, 0))
        if want < 0 or want > idx.size:
            raise DataError(f"requested {want} of class {c} but only {idx.size} available")
        perm = rng.permutation(idx)
        train_parts.append(perm[:want])
        test_parts.append(perm[want:])
    train_idx = np.sort(np.concatenate(train_parts))
    test_idx = np.sort(np.concatenate(test_parts))
    if train_idx.size == 0 or test_idx.size == 0:
        raise DataError("split leaves an empty train or test set")
    return d.subset(train_idx), d.subset(test_idx)


def stratified_kfold(d: Dataset, k: int, seed: int) -> list[tuple[Dataset, Dataset]]:
    """k folds with per-class counts even to within one; pair i holds fold i
    as test and the rest as train."""
    if k < 2:
        raise DataError("k must be at least 2")
    rng = np.random.default_rng(seed)
    members: list[list[np.ndarray]] = [[] for _ in range(k)]
    for c in d.label_values():
        idx = np.flatnonzero(d.labels == c)
        if 0 < idx.size < k:
            raise DataError(f"class {c} has {idx.size} members, fewer than k={k}")
        perm = rng.permutation(idx)
        for i, part in enumerate(np.array_split(perm, k)):
            members[i].append(part)
    fold_idx = [np.sort(np.concatenate(parts)) for parts in members]
    pairs = []
    for i in range(k):
        test = fold_idx[i]
        train = np.sort(np.concatenate([fold_idx[j] for j in range(k) if j != i]))
        pairs.append((d.subset(train), d.subset(test)))
    return pairs


def resolve_subsample_size(eta: float | int, n: int) -> int:
    # float in (0,1] is a fraction of n; integral values are absolute counts
    if isinstance(eta, bool):
        raise DataError(f"eta out of range: {eta!r}")
    if isinstance(eta, float) and 0.0 < eta <= 1.0:
        return max(1, int(math.floor(eta * n)))
    if float(eta).is_integer() and 1 <= int(eta) <= n:
        return int(eta)
    raise DataError(f"eta out of range for N={n}: {eta!r}")


def subsample(d: Dataset, eta: float | int, seed: int) -> IndexSubset:
    """Uniform random row subset without replacement; ``eta`` is a fraction
    in (0,1] or an absolute count."""
    size = resolve_subsample_size(eta, d.n)
    rng = np.random.default_rng(seed)
    return IndexSubset(np.sort(rng.choice(d.n, size=size, replace=False)))
