"""Datasets, Z-score scaling, 2:1:1 splits and mini-batch samplers.

Bundled CSVs (``golsnet/datasets/*.csv``) have a header row, numeric feature
columns and a final class-label column:

========  ====  ==  ==  ==============================================
name       M    D   K   source
========  ====  ==  ==  ==============================================
iris      150   4   3   Fisher's iris
glass     214   9   6   forensic glass (MASS ``fgl``)
wine      178   13  3   UCI wine
diabetes  532   7   2   Pima Indians diabetes (MASS ``Pima.tr`` + ``Pima.te``)
cancer    699   9   2   Wisconsin breast cancer (MASS ``biopsy``)
========  ====  ==  ==  ==============================================
"""

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, ShapeError

DATA_DIR = Path(__file__).with_name("datasets")

BUNDLED = {
    "iris": (4, 3),
    "glass": (9, 6),
    "wine": (13, 3),
    "diabetes": (7, 2),
    "cancer": (9, 2),
}


@dataclass(frozen=True)
class Dataset:
    inputs: np.ndarray
    targets: np.ndarray
    name: str = ""
    classes: tuple = ()

    def __post_init__(self):
        if self.inputs.ndim != 2 or self.targets.ndim != 2:
            raise ShapeError("inputs and targets must be 2-D")
        if self.inputs.shape[0] != self.targets.shape[0]:
            raise ShapeError("inputs and targets have different row counts")

    def __len__(self):
        return self.inputs.shape[0]

    @property
    def n_inputs(self):
        return self.inputs.shape[1]

    @property
    def n_classes(self):
        return self.targets.shape[1]

    def subset(self, idx, name=None):
        idx = np.asarray(idx, dtype=np.intp)
        return Dataset(self.inputs[idx], self.targets[idx], name or self.name, self.classes)


@dataclass(frozen=True)
class Batch:
    inputs: np.ndarray
    targets: np.ndarray
    indices: np.ndarray

    def __len__(self):
        return self.indices.size


@dataclass(frozen=True)
class SplitDataset:
    train: Dataset
    validation: Dataset
    test: Dataset
    indices: tuple  # (train_idx, val_idx, test_idx) into the source


def _is_number(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def load_csv(path, n_inputs, n_classes, name=None):
    """Read ``n_inputs`` numeric columns plus a trailing class label.

    Labels are one-hot encoded in order of first appearance. A header line
    is detected by a non-numeric first field.
    """
    path = Path(path)
    rows, labels, classes = [], [], {}
    with open(path, newline="") as f:
        for lineno, rec in enumerate(csv.reader(f), start=1):
            if not rec or all(not c.strip() for c in rec):
                continue
            if lineno == 1 and not _is_number(rec[0].strip()):
                continue
            if len(rec) != n_inputs + 1:
                raise DataError(f"expected {n_inputs + 1} fields, got {len(rec)}", lineno)
            try:
                feats = [float(c) for c in rec[:n_inputs]]
            except ValueError as exc:
                raise DataError(f"non-numeric feature ({exc})", lineno) from None
            if not all(math.isfinite(v) for v in feats):
                raise DataError("non-finite feature", lineno)
            label = rec[-1].strip()
            classes.setdefault(label, len(classes))
            rows.append(feats)
            labels.append(classes[label])
    if not rows:
        raise DataError(f"{path}: no data rows")
    if len(classes) != n_classes:
        raise DataError(f"{path}: found {len(classes)} classes, schema says {n_classes}")
    targets = np.zeros((len(rows), n_classes))
    targets[np.arange(len(rows)), labels] = 1.0
    return Dataset(np.array(rows, dtype=np.float64), targets, name or path.stem, tuple(classes))


def load_bundled(name):
    try:
        d, k = BUNDLED[name]
    except KeyError:
        raise DataError(f"no bundled dataset {name!r}; available: {sorted(BUNDLED)}") from None
    return load_csv(DATA_DIR / f"{name}.csv", d, k, name=name)


@dataclass(frozen=True)
class StandardTransform:
    means: np.ndarray
    stds: np.ndarray

    def apply(self, inputs):
        return zscore_apply(self, inputs)


def zscore_fit(train_inputs):
    """Per-column mean and population std; constant columns get std 1."""
    x = np.asarray(train_inputs, dtype=np.float64)
    means = x.mean(axis=0)
    stds = x.std(axis=0)
    stds = np.where(stds > 0, stds, 1.0)
    return StandardTransform(means, stds)


def zscore_apply(t, inputs):
    return (np.asarray(inputs, dtype=np.float64) - t.means) / t.stds


def split_sizes(m):
    n_train = math.ceil(m / 2)
    n_val = math.ceil(m / 4)
    return n_train, n_val, m - n_train - n_val


def split_2_1_1(d, seed):
    """Shuffle by ``seed`` then cut ceil(M/2) train, ceil(M/4) validation, rest test."""
    m = len(d)
    if m < 4:
        raise DataError(f"need at least 4 rows to split, got {m}")
    perm = np.random.default_rng(seed).permutation(m)
    a, b, _ = split_sizes(m)
    idx = (perm[:a], perm[a:a + b], perm[a + b:])
    return SplitDataset(d.subset(idx[0], f"{d.name}/train"),
                        d.subset(idx[1], f"{d.name}/validation"),
                        d.subset(idx[2], f"{d.name}/test"), idx)


def standardize(split):
    """Z-score all three parts with the transform fitted on the training part."""
    t = zscore_fit(split.train.inputs)

    def f(part):
        return Dataset(zscore_apply(t, part.inputs), part.targets, part.name, part.classes)

    return SplitDataset(f(split.train), f(split.validation), f(split.test), split.indices), t


def full_batch(d):
    return Batch(d.inputs, d.targets, np.arange(len(d)))


def sample_dynamic(d, size, rng):
    """A fresh batch of ``size`` distinct rows; the whole set if ``size >= M``."""
    if size < 1:
        raise ValueError("batch size must be >= 1")
    m = len(d)
    if size >= m:
        return full_batch(d)
    idx = rng.choice(m, size=size, replace=False)
    return Batch(d.inputs[idx], d.targets[idx], idx)


def prepare(name_or_dataset, split_seed=0):
    """Load (if named), split 2:1:1 and standardize. Returns a :class:`SplitDataset`."""
    d = load_bundled(name_or_dataset) if isinstance(name_or_dataset, str) else name_or_dataset
    split, _ = standardize(split_2_1_1(d, split_seed))
    return split
