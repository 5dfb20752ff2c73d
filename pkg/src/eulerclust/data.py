"""Synthetic half-moon data, CSV ingestion, feature normalization and JSON persistence."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np

from .errors import DataParseError, InvalidParameterError
from .euler import RealDataset

SCHEMA_VERSION = 1
# top-level JSON key holding wall-clock and timestamp data; excluded from equality
VOLATILE_KEY = "runtime"

NormalizationMode = Literal["none", "minmax01", "zscore"]


@dataclass(frozen=True)
class HalfmoonSpec:
    n: int = 1000
    noise_sigma: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2 or self.n % 2:
            raise InvalidParameterError(f"half-moon size must be an even integer >= 2, got {self.n!r}")
        if not self.noise_sigma >= 0:
            raise InvalidParameterError(f"noise_sigma must be >= 0, got {self.noise_sigma!r}")


def gen_halfmoon(spec: HalfmoonSpec = HalfmoonSpec()) -> RealDataset:
    """Two interleaving arcs: (cos t, sin t) and (1 - cos t, 0.5 - sin t), t ~ U[0, pi]."""
    rng = np.random.default_rng(spec.seed)
    half = spec.n // 2
    t0 = rng.uniform(0.0, np.pi, half)
    t1 = rng.uniform(0.0, np.pi, half)
    upper = np.column_stack([np.cos(t0), np.sin(t0)])
    lower = np.column_stack([1.0 - np.cos(t1), 0.5 - np.sin(t1)])
    X = np.vstack([upper, lower])
    if spec.noise_sigma > 0:
        X = X + rng.normal(0.0, spec.noise_sigma, X.shape)
    labels = np.repeat([0, 1], half)
    return RealDataset(X, labels, ("x1", "x2"))


# --------------------------------------------------------------------------
# CSV
# --------------------------------------------------------------------------

def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _encode_labels(raw):
    """Dense 0..C-1 codes; numeric labels sort numerically, others as strings."""
    if all(_is_number(v) for v in raw):
        keys = sorted(set(raw), key=float)
    else:
        keys = sorted(set(raw))
    index = {k: i for i, k in enumerate(keys)}
    return np.array([index[v] for v in raw], dtype=np.int64), keys


def load_csv(path, label_column: Union[int, str, None] = None,
             delimiter: Optional[str] = ",") -> RealDataset:
    """Read a rectangular numeric table, optionally splitting off a label column.

    A header is assumed when any cell of the first row is not numeric.
    ``label_column`` is a 0-based index (negative counts from the end) or a header
    name.  ``delimiter=None`` splits on runs of whitespace.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            if delimiter is None:
                rows = [line.split() for line in fh]
            else:
                rows = [list(r) for r in csv.reader(fh, delimiter=delimiter)]
    except OSError as exc:
        raise DataParseError(f"{path}: cannot read file ({exc.strerror or exc})") from exc

    numbered = [(i + 1, [c.strip() for c in r]) for i, r in enumerate(rows)]
    numbered = [(i, r) for i, r in numbered if any(r)]
    if not numbered:
        raise DataParseError(f"{path}: file contains no data rows")

    header = None
    if not all(_is_number(c) for c in numbered[0][1]):
        header = numbered[0][1]
        numbered = numbered[1:]
        if not numbered:
            raise DataParseError(f"{path}: file has a header but no data rows")

    width = len(header) if header is not None else len(numbered[0][1])
    for lineno, r in numbered:
        if len(r) != width:
            raise DataParseError(f"{path}: row {lineno} has {len(r)} fields, expected {width}")

    label_idx = None
    if label_column is not None:
        if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
            if header is None or label_column not in header:
                raise DataParseError(f"{path}: no column named {label_column!r}")
            label_idx = header.index(label_column)
        else:
            label_idx = int(label_column)
            if not -width <= label_idx < width:
                raise DataParseError(f"{path}: label column {label_idx} out of range for {width} columns")
            label_idx %= width

    feature_cols = [c for c in range(width) if c != label_idx]
    if not feature_cols:
        raise DataParseError(f"{path}: no feature columns left after removing the label column")
    values = np.empty((len(numbered), len(feature_cols)))
    for out_row, (lineno, r) in enumerate(numbered):
        for out_col, c in enumerate(feature_cols):
            try:
                v = float(r[c])
            except ValueError:
                raise DataParseError(
                    f"{path}: row {lineno}, column {c + 1}: non-numeric value {r[c]!r}"
                ) from None
            if not math.isfinite(v):
                raise DataParseError(f"{path}: row {lineno}, column {c + 1}: non-finite value {r[c]!r}")
            values[out_row, out_col] = v

    labels = None
    if label_idx is not None:
        labels, _ = _encode_labels([r[label_idx] for _, r in numbered])
    names = None if header is None else [header[c] for c in feature_cols]
    return RealDataset(values, labels, names)


def save_csv(path, dataset: RealDataset, label_name: str = "label") -> None:
    """Write features (17 significant digits) and, if present, labels as the last column."""
    path = Path(path)
    names = list(dataset.feature_names or [f"x{j + 1}" for j in range(dataset.d)])
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(names + ([label_name] if dataset.labels is not None else []))
            for i, row in enumerate(dataset.values):
                cells = [format(v, ".17g") for v in row]
                if dataset.labels is not None:
                    cells.append(str(int(dataset.labels[i])))
                w.writerow(cells)
    except OSError as exc:
        raise OSError(f"{path}: cannot write CSV ({exc.strerror or exc})") from exc


# --------------------------------------------------------------------------
# normalization
# --------------------------------------------------------------------------

def normalize(X: RealDataset, mode: NormalizationMode = "minmax01"):
    """Per-feature transform; constant features map to 0 in both non-trivial modes.

    Returns ``(dataset, params)`` where ``params`` holds the learned statistics.
    zscore divides by the sample (ddof=1) standard deviation.
    """
    values = X.values
    if mode == "none":
        return X, {"mode": "none"}
    if mode == "minmax01":
        lo, hi = values.min(axis=0), values.max(axis=0)
        span = hi - lo
        scale = np.where(span > 0, span, 1.0)
        out = np.where(span > 0, (values - lo) / scale, 0.0)
        params = {"mode": mode, "min": lo.tolist(), "max": hi.tolist()}
    elif mode == "zscore":
        mean = values.mean(axis=0)
        std = values.std(axis=0, ddof=1) if values.shape[0] > 1 else np.zeros(values.shape[1])
        scale = np.where(std > 0, std, 1.0)
        out = np.where(std > 0, (values - mean) / scale, 0.0)
        params = {"mode": mode, "mean": mean.tolist(), "std": std.tolist()}
    else:
        raise InvalidParameterError(f"unknown normalization mode {mode!r}")
    return RealDataset(out, X.labels, X.feature_names), params


# --------------------------------------------------------------------------
# JSON results
# --------------------------------------------------------------------------

def to_json(obj) -> str:
    doc = obj.to_dict() if hasattr(obj, "to_dict") else dict(obj)
    doc = {"schema_version": SCHEMA_VERSION, **doc}
    return json.dumps(doc, indent=2, sort_keys=False, allow_nan=False) + "\n"


def save_result(path, obj) -> None:
    """Persist a ClusteringResult, ExperimentReport or sweep as versioned JSON."""
    path = Path(path)
    text = to_json(obj)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"{path}: cannot write result ({exc.strerror or exc})") from exc


def load_result(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def stable_view(doc: dict) -> dict:
    """The document without its volatile (timing/timestamp) section."""
    return {k: v for k, v in doc.items() if k != VOLATILE_KEY}
