"""Datasets: synthetic driver-alertness generator, yeast CSV loader, splitting."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

ALERTNESS_FEATURES = ["heart_rate", "yawning", "looks_straight", "eyes_closed"]
ALERTNESS_HEADER = "heart_rate,yawning,looks_straight,eyes_closed,alert"
YEAST_FEATURES = ["mcg", "gvh", "alm", "mit", "erl", "pox", "vac", "nuc"]

HR_FLOOR = 40
HR_CEIL = 160


class DatasetError(ValueError):
    """Malformed dataset file or invalid dataset configuration."""


@dataclass(frozen=True)
class TabularDataset:
    """A feature matrix with integer class labels.

    ``task_kind`` is "binary" (exactly two classes) or "multiclass".
    """

    feature_names: list[str]
    X: np.ndarray
    y: np.ndarray
    class_names: list[str]
    task_kind: str

    def __post_init__(self):
        object.__setattr__(self, "X", np.asarray(self.X, dtype=np.float64))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=np.int64))
        if self.X.ndim != 2:
            raise DatasetError("X must be a 2-D matrix")
        if self.X.shape[1] != len(self.feature_names):
            raise DatasetError("column count does not match feature_names")
        if not np.all(np.isfinite(self.X)):
            raise DatasetError("X contains non-finite entries")
        if self.y.shape != (self.X.shape[0],):
            raise DatasetError("y length does not match X")
        if len(self.y) and (self.y.min() < 0 or self.y.max() >= len(self.class_names)):
            raise DatasetError("y contains labels outside class_names")
        if self.task_kind not in ("binary", "multiclass"):
            raise DatasetError(f"unknown task_kind {self.task_kind!r}")
        if self.task_kind == "binary" and len(self.class_names) != 2:
            raise DatasetError("binary task requires exactly 2 class names")

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)


@dataclass(frozen=True)
class AlertnessGenConfig:
    """Configuration for the synthetic alertness generator.

    ``hr_band_low``/``hr_band_high`` bound the alert-compatible heart-rate band
    in beats per minute; the generator draws rates in [40, 160].
    """

    n: int = 20_000
    seed: int = 42
    hr_band_low: int = 60
    hr_band_high: int = 100

    def __post_init__(self):
        if self.n < 1:
            raise DatasetError("n must be >= 1")
        if not (HR_FLOOR <= self.hr_band_low < self.hr_band_high <= HR_CEIL):
            raise DatasetError(
                f"heart-rate band must satisfy {HR_FLOOR} <= low < high <= {HR_CEIL}"
            )


def alertness_label(yawning, looks_straight, eyes_closed, in_band):
    """Deterministic alert rule: 3-of-4 positive signals, or 2-of-4 with the
    heart rate in band. Vectorized over numpy arrays."""
    s = (
        np.asarray(yawning)
        + np.asarray(looks_straight)
        + np.asarray(eyes_closed)
        + np.asarray(in_band)
    )
    return ((s >= 3) | ((s == 2) & (np.asarray(in_band) == 1))).astype(np.int64)


def generate_alertness(cfg: AlertnessGenConfig) -> TabularDataset:
    """Generate the synthetic driver-alertness dataset.

    The three behavioural indicators are iid fair coin flips. The heart rate
    falls inside the alert band with probability 1/2 (uniform integer within
    the band), otherwise uniform over the out-of-band integers in [40, 160].
    The expected class balance is exactly 1/2.
    """
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n
    indicators = rng.integers(0, 2, size=(n, 3))
    in_band = rng.integers(0, 2, size=n)

    lo, hi = cfg.hr_band_low, cfg.hr_band_high
    hr_in = rng.integers(lo, hi + 1, size=n)
    # out-of-band integers: [40, lo-1] then [hi+1, 160]
    n_below = lo - HR_FLOOR
    n_above = HR_CEIL - hi
    u = rng.integers(0, n_below + n_above, size=n)
    hr_out = np.where(u < n_below, HR_FLOOR + u, hi + 1 + (u - n_below))
    heart_rate = np.where(in_band == 1, hr_in, hr_out)

    y = alertness_label(indicators[:, 0], indicators[:, 1], indicators[:, 2], in_band)
    X = np.column_stack([heart_rate, indicators]).astype(np.float64)
    return TabularDataset(
        feature_names=list(ALERTNESS_FEATURES),
        X=X,
        y=y,
        class_names=["not_alert", "alert"],
        task_kind="binary",
    )


def _is_number(tok: str) -> bool:
    try:
        float(tok)
        return True
    except ValueError:
        return False


def _read_rows(path) -> list[list[str]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        text = fh.read()
    rows = []
    for row in csv.reader(io.StringIO(text)):
        if row and any(tok.strip() for tok in row):
            rows.append([tok.strip() for tok in row])
    return rows


def load_yeast_csv(path) -> TabularDataset:
    """Load the yeast protein-localization CSV.

    Accepts 9 columns (8 features + label) or 10 columns (leading sequence
    name, dropped). An optional header row is auto-detected. Class names are
    recorded in first-appearance order.
    """
    rows = _read_rows(path)
    if not rows:
        raise DatasetError(f"{path}: empty file")

    width = len(rows[0])
    if width not in (9, 10):
        raise DatasetError(f"{path}: line 1: expected 9 or 10 columns, got {width}")
    name_col = width == 10
    feat_slice = slice(1, 9) if name_col else slice(0, 8)

    start = 0
    if not all(_is_number(tok) for tok in rows[0][feat_slice]):
        start = 1  # header row
    data_rows = rows[start:]
    if not data_rows:
        raise DatasetError(f"{path}: no data rows (header only)")

    X = np.empty((len(data_rows), 8))
    labels = []
    for i, row in enumerate(data_rows):
        lineno = start + i + 1
        if len(row) != width:
            raise DatasetError(
                f"{path}: line {lineno}: expected {width} columns, got {len(row)}"
            )
        for j, tok in enumerate(row[feat_slice]):
            if not _is_number(tok):
                raise DatasetError(
                    f"{path}: line {lineno}: non-numeric feature value {tok!r}"
                )
            X[i, j] = float(tok)
        labels.append(row[-1])

    class_names = list(dict.fromkeys(labels))
    index = {c: k for k, c in enumerate(class_names)}
    y = np.array([index[c] for c in labels], dtype=np.int64)
    return TabularDataset(
        feature_names=list(YEAST_FEATURES),
        X=X,
        y=y,
        class_names=class_names,
        task_kind="multiclass" if len(class_names) > 2 else "binary",
    )


def load_custom_csv(path, label_column) -> TabularDataset:
    """Load a generic numeric-feature CSV whose label lives in ``label_column``
    (column name from the header, or a 0-based index)."""
    rows = _read_rows(path)
    if not rows:
        raise DatasetError(f"{path}: empty file")
    width = len(rows[0])
    has_header = not all(_is_number(tok) for tok in rows[0])
    header = rows[0] if has_header else [f"col{j}" for j in range(width)]
    if isinstance(label_column, int):
        label_idx = label_column
    else:
        if label_column not in header:
            raise DatasetError(f"{path}: label column {label_column!r} not in header")
        label_idx = header.index(label_column)
    if not (0 <= label_idx < width):
        raise DatasetError(f"{path}: label column index {label_idx} out of range")

    data_rows = rows[1:] if has_header else rows
    if not data_rows:
        raise DatasetError(f"{path}: no data rows")
    feat_idx = [j for j in range(width) if j != label_idx]
    X = np.empty((len(data_rows), len(feat_idx)))
    labels = []
    for i, row in enumerate(data_rows):
        lineno = i + 1 + int(has_header)
        if len(row) != width:
            raise DatasetError(
                f"{path}: line {lineno}: expected {width} columns, got {len(row)}"
            )
        for k, j in enumerate(feat_idx):
            if not _is_number(row[j]):
                raise DatasetError(
                    f"{path}: line {lineno}: non-numeric feature value {row[j]!r}"
                )
            X[i, k] = float(row[j])
        labels.append(row[label_idx])
    class_names = list(dict.fromkeys(labels))
    index = {c: k for k, c in enumerate(class_names)}
    y = np.array([index[c] for c in labels], dtype=np.int64)
    return TabularDataset(
        feature_names=[header[j] for j in feat_idx],
        X=X,
        y=y,
        class_names=class_names,
        task_kind="binary" if len(class_names) == 2 else "multiclass",
    )


def save_csv(ds: TabularDataset, path) -> None:
    """Write a dataset as CSV with a header row; labels as class names."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ds.feature_names + [_label_header(ds)])
        for i in range(ds.n_samples):
            row = [repr(float(v)) if v != int(v) else str(int(v))
                   for v in ds.X[i]]
            w.writerow(row + [_label_token(ds, ds.y[i])])


def _label_header(ds: TabularDataset) -> str:
    return "alert" if ds.feature_names == ALERTNESS_FEATURES else "label"


def _label_token(ds: TabularDataset, yi: int) -> str:
    if ds.feature_names == ALERTNESS_FEATURES:
        return str(int(yi))  # 0/1 alert flag, matching the documented header
    return ds.class_names[yi]


def _subset(ds: TabularDataset, idx: np.ndarray) -> TabularDataset:
    return TabularDataset(
        feature_names=ds.feature_names,
        X=ds.X[idx],
        y=ds.y[idx],
        class_names=ds.class_names,
        task_kind=ds.task_kind,
    )


def train_test_split(ds: TabularDataset, test_fraction: float, seed: int):
    """Seeded uniform shuffle, then split; test size is floor(n * fraction)."""
    if not (0.0 < test_fraction < 1.0):
        raise DatasetError("test_fraction must be in (0, 1)")
    n = ds.n_samples
    n_test = int(n * test_fraction)
    if n_test < 1 or n - n_test < 1:
        raise DatasetError("split leaves an empty partition")
    perm = np.random.default_rng(seed).permutation(n)
    return _subset(ds, np.sort(perm[n_test:])), _subset(ds, np.sort(perm[:n_test]))


def feature_label_correlation(ds: TabularDataset) -> np.ndarray:
    """Pearson correlation of each feature column with the label vector.

    Zero-variance columns (or a zero-variance label) yield NaN instead of
    raising.
    """
    y = ds.y.astype(np.float64)
    out = np.full(ds.n_features, np.nan)
    sy = y.std()
    if sy == 0.0:
        return out
    yc = y - y.mean()
    for j in range(ds.n_features):
        col = ds.X[:, j]
        sx = col.std()
        if sx == 0.0:
            continue
        out[j] = float((col - col.mean()) @ yc / (ds.n_samples * sx * sy))
    return out
