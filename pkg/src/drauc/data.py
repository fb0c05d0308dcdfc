"""Dataset construction and transformation.

Features always live in the unit box [0,1]^d because the attack's feasible
set is that box; every ingestion path min-max normalizes per dimension and
keeps the (min, max) scaler so downstream evaluation can reuse it.

CSV format: UTF-8, LF line endings, no quoting.  Header row is
"y,x1,...,xd"; labels are 0 or 1; features are plain decimals.  Saving
writes 17-significant-digit decimals, which round-trip float64 exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError


@dataclass(eq=False)
class Dataset:
    """Labeled examples with features in [0,1]^d and a cached imbalance ratio."""

    features: np.ndarray     # (n, d) float64 in [0, 1]
    labels: np.ndarray       # (n,) int, values {0, 1}
    p_hat: float             # n_pos / n, cached
    scaler_min: np.ndarray   # (d,) per-dimension minimum seen at ingestion
    scaler_max: np.ndarray   # (d,) per-dimension maximum seen at ingestion

    @classmethod
    def from_arrays(cls, features, labels, scaler_min=None, scaler_max=None):
        x = np.asarray(features, dtype=float)
        y = np.asarray(labels, dtype=int)
        if x.ndim != 2:
            raise ValueError("features must be a 2-D array")
        if y.shape != (x.shape[0],):
            raise ValueError("labels must match the number of feature rows")
        if x.size and (x.min() < 0.0 or x.max() > 1.0):
            raise ValueError("features must lie in [0, 1]")
        if not np.isin(y, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        if scaler_min is None:
            scaler_min = np.zeros(x.shape[1])
        if scaler_max is None:
            scaler_max = np.ones(x.shape[1])
        p_hat = float((y == 1).sum() / y.size) if y.size else 0.0
        return cls(x, y, p_hat,
                   np.asarray(scaler_min, dtype=float),
                   np.asarray(scaler_max, dtype=float))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def n_pos(self) -> int:
        return int((self.labels == 1).sum())

    @property
    def n_neg(self) -> int:
        return int((self.labels == 0).sum())

    def pos_indices(self) -> np.ndarray:
        return np.flatnonzero(self.labels == 1)


def _minmax_normalize(raw: np.ndarray):
    """Per-dimension min-max to [0,1]; constant columns map to 0.5."""
    mn = raw.min(axis=0)
    mx = raw.max(axis=0)
    span = mx - mn
    out = np.empty_like(raw)
    const = span == 0.0
    out[:, const] = 0.5
    if (~const).any():
        out[:, ~const] = (raw[:, ~const] - mn[~const]) / span[~const]
    return out, mn, mx


def gen_synthetic(n: int, d: int, mu_pos: float = 0.65, mu_neg: float = 0.35,
                  sigma: float = 0.15, seed: int = 0) -> Dataset:
    """Two isotropic Gaussian blobs, half positive at mu_pos and half
    negative at mu_neg, min-max normalized per dimension."""
    if n < 4 or d < 1 or sigma <= 0.0:
        raise ValueError(f"invalid shape parameters n={n}, d={d}, sigma={sigma}")
    rng = np.random.default_rng(seed)
    n_pos = n // 2
    n_neg = n - n_pos
    pos = rng.normal(mu_pos, sigma, size=(n_pos, d))
    neg = rng.normal(mu_neg, sigma, size=(n_neg, d))
    raw = np.vstack([pos, neg])
    feats, mn, mx = _minmax_normalize(raw)
    labels = np.concatenate([np.ones(n_pos, dtype=int), np.zeros(n_neg, dtype=int)])
    return Dataset.from_arrays(feats, labels, mn, mx)


def make_long_tailed(dataset: Dataset, ratio: float, seed: int = 0) -> Dataset:
    """Subsample positives so the imbalance ratio becomes ``ratio``.

    Keeps floor(ratio * n_neg / (1 - ratio)) positives, chosen uniformly
    without replacement; negatives are untouched and row order is
    preserved.
    """
    if not 0.0 < ratio <= dataset.p_hat:
        raise ValueError(
            f"ratio must lie in (0, {dataset.p_hat}], got {ratio}"
        )
    # The +1e-9 guards against 10.999... from the float division when the
    # exact value is integral.
    keep = int(math.floor(ratio * dataset.n_neg / (1.0 - ratio) + 1e-9))
    keep = min(keep, dataset.n_pos)
    if keep < 1:
        raise ValueError(f"ratio {ratio} would leave zero positive examples")
    rng = np.random.default_rng(seed)
    chosen = rng.choice(dataset.pos_indices(), size=keep, replace=False)
    mask = dataset.labels == 0
    mask[chosen] = True
    return Dataset.from_arrays(dataset.features[mask], dataset.labels[mask],
                               dataset.scaler_min, dataset.scaler_max)


def corrupt(dataset: Dataset, sigma: float, seed: int = 0) -> Dataset:
    """Add seeded i.i.d. Gaussian noise to features and clip to [0,1]."""
    if sigma < 0.0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(dataset.features.shape)
    feats = np.clip(dataset.features + sigma * noise, 0.0, 1.0)
    return Dataset.from_arrays(feats, dataset.labels.copy(),
                               dataset.scaler_min, dataset.scaler_max)


def _expected_header(d: int) -> str:
    return "y," + ",".join(f"x{i}" for i in range(1, d + 1))


def load_csv(path) -> Dataset:
    """Load a CSV file, min-max normalizing features per dimension.

    The scaler stores the file's per-dimension ranges; a column that is
    constant in the file maps to 0.5 everywhere.  Loading a file whose
    columns already span [0, 1] exactly is a bitwise no-op on the values,
    so normalization is idempotent across save/load cycles.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise DataFormatError("empty file", line=1)
    header = lines[0].split(",")
    if len(header) < 2 or header[0] != "y" or any(
        header[i] != f"x{i}" for i in range(1, len(header))
    ):
        raise DataFormatError(
            f"malformed header {lines[0]!r}, expected "
            f"'{_expected_header(max(len(header) - 1, 1))}'",
            line=1,
        )
    d = len(header) - 1
    if len(lines) == 1:
        raise DataFormatError("no data rows", line=2)
    labels = np.empty(len(lines) - 1, dtype=int)
    raw = np.empty((len(lines) - 1, d))
    for i, line in enumerate(lines[1:]):
        lineno = i + 2
        parts = line.split(",")
        if len(parts) != d + 1:
            raise DataFormatError(
                f"ragged row: expected {d + 1} fields, got {len(parts)}",
                line=lineno,
            )
        try:
            label = float(parts[0])
        except ValueError:
            raise DataFormatError(f"non-numeric label {parts[0]!r}", line=lineno) from None
        if label not in (0.0, 1.0):
            raise DataFormatError(f"label value {parts[0]} is not 0 or 1", line=lineno)
        labels[i] = int(label)
        for j, field in enumerate(parts[1:]):
            try:
                raw[i, j] = float(field)
            except ValueError:
                raise DataFormatError(
                    f"non-numeric field {field!r} in column x{j + 1}", line=lineno
                ) from None
    feats, mn, mx = _minmax_normalize(raw)
    return Dataset.from_arrays(feats, labels, mn, mx)


def save_csv(dataset: Dataset, path) -> None:
    """Write the (already normalized) dataset; see the module docstring."""
    rows = [_expected_header(dataset.d)]
    for label, feat in zip(dataset.labels, dataset.features):
        rows.append(f"{int(label)}," + ",".join(format(v, ".17g") for v in feat))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(rows) + "\n")
