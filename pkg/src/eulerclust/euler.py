"""
Euler kernel mathematics.

Every point x in R^d is mapped coordinate-wise to phi(x) = exp(i*theta)/sqrt(2)
with theta = alpha*pi*x.  Angles are kept unwrapped; only cos/sin of them are
ever used.  Centroid parts (a, b) are stored in unit-circle scale, i.e. the
complex centroid is m = (a + i*b)/sqrt(2).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import CapacityError, InvalidDataError, InvalidParameterError, ShapeError

DEFAULT_ORACLE_CAP = 2000
SQRT_HALF = np.sqrt(0.5)


@dataclass(frozen=True)
class RealDataset:
    """Real n x d data with optional integer ground truth."""

    values: np.ndarray
    labels: Optional[np.ndarray] = None
    feature_names: Optional[Sequence[str]] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise InvalidDataError(f"dataset must be a non-empty n x d matrix, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidDataError("dataset contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (values.shape[0],):
                raise ShapeError(f"labels must have length {values.shape[0]}, got shape {labels.shape}")
            if labels.size and (not np.issubdtype(labels.dtype, np.integer) or labels.min() < 0):
                raise InvalidDataError("labels must be non-negative integers")
            labels = labels.astype(np.int64)
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)
        if self.feature_names is not None:
            names = tuple(str(s) for s in self.feature_names)
            if len(names) != values.shape[1]:
                raise ShapeError("feature_names length does not match number of columns")
            object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @property
    def n_classes(self) -> int:
        if self.labels is None:
            return 0
        return int(self.labels.max()) + 1


@dataclass(frozen=True)
class AngleMatrix:
    """Angles theta = alpha*pi*x for every point and dimension (radians)."""

    thetas: np.ndarray
    alpha: float = field(default=1.0)

    def __post_init__(self):
        thetas = np.array(self.thetas, dtype=float)
        if thetas.ndim == 1:
            thetas = thetas[None, :]
        if thetas.ndim != 2:
            raise ShapeError(f"angle matrix must be 2-D, got shape {thetas.shape}")
        if not np.all(np.isfinite(thetas)):
            raise InvalidDataError("angle matrix contains non-finite values")
        thetas.setflags(write=False)
        object.__setattr__(self, "thetas", thetas)

    @property
    def n(self) -> int:
        return self.thetas.shape[0]

    @property
    def d(self) -> int:
        return self.thetas.shape[1]


@dataclass(frozen=True)
class MappedPoint:
    re: np.ndarray
    im: np.ndarray

    def as_complex(self) -> np.ndarray:
        return self.re + 1j * self.im


def as_thetas(theta) -> np.ndarray:
    """Return the raw angle array of an AngleMatrix or array-like."""
    if isinstance(theta, AngleMatrix):
        return theta.thetas
    arr = np.asarray(theta, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    return arr


def scale_angles(X, alpha: float) -> AngleMatrix:
    """Scale data to angles ``alpha * pi * X``."""
    if not np.isfinite(alpha) or alpha <= 0:
        raise InvalidParameterError(f"alpha must be a positive finite number, got {alpha!r}")
    values = X.values if isinstance(X, RealDataset) else np.asarray(X, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if not np.all(np.isfinite(values)):
        raise InvalidDataError("cannot scale non-finite data")
    return AngleMatrix(alpha * np.pi * values, float(alpha))


def map_point(theta_row) -> MappedPoint:
    theta_row = np.asarray(theta_row, dtype=float)
    if not np.all(np.isfinite(theta_row)):
        raise InvalidDataError("angles must be finite")
    return MappedPoint(np.cos(theta_row) * SQRT_HALF, np.sin(theta_row) * SQRT_HALF)


def map_points(theta) -> np.ndarray:
    """Complex n x d matrix of mapped points."""
    t = as_thetas(theta)
    return np.exp(1j * t) * SQRT_HALF


def _same_length(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ShapeError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return u, v


def euler_kernel_entry(theta_j, theta_q) -> complex:
    """One entry of the Euler kernel matrix."""
    tj, tq = _same_length(theta_j, theta_q)
    diff = tj - tq
    return complex(0.5 * np.sum(np.cos(diff)), -0.5 * np.sum(np.sin(diff)))


def euler_kernel_matrix(theta, cap: int = DEFAULT_ORACLE_CAP) -> np.ndarray:
    """Full n x n Euler kernel matrix; only meant for oracle use on small n."""
    t = as_thetas(theta)
    n = t.shape[0]
    if n > cap:
        raise CapacityError(f"kernel matrix requested for n={n} > cap={cap}")
    c, s = np.cos(t), np.sin(t)
    # cos(a-b) = ca*cb + sa*sb ; sin(a-b) = sa*cb - ca*sb
    re = 0.5 * (c @ c.T + s @ s.T)
    im = -0.5 * (s @ c.T - c @ s.T)
    return re + 1j * im


def dist_sphere(theta_j, u) -> float:
    tj, uu = _same_length(theta_j, u)
    return float(np.sum(2.0 * np.sin(0.5 * (tj - uu)) ** 2))


def dist_centroid(theta_j, a, b) -> float:
    """Squared distance from phi(x) to the complex centroid (a + ib)/sqrt(2)."""
    tj = np.asarray(theta_j, dtype=float)
    a, b = _same_length(a, b)
    if tj.shape != a.shape:
        raise ShapeError(f"dimension mismatch: {tj.shape} vs {a.shape}")
    return float(0.5 * np.sum((np.cos(tj) - a) ** 2 + (np.sin(tj) - b) ** 2))


def _chunks(n: int, per_row: int, budget: int = 1 << 22):
    step = max(1, budget // max(per_row, 1))
    for lo in range(0, n, step):
        yield slice(lo, min(n, lo + step))


def sphere_distance_matrix(theta, U) -> np.ndarray:
    """n x k table of dist_sphere between every point and every pre-image."""
    t = as_thetas(theta)
    U = np.atleast_2d(np.asarray(U, dtype=float))
    if U.shape[1] != t.shape[1]:
        raise ShapeError(f"dimension mismatch: {t.shape[1]} vs {U.shape[1]}")
    out = np.empty((t.shape[0], U.shape[0]))
    for sl in _chunks(t.shape[0], U.size):
        half = 0.5 * (t[sl, None, :] - U[None, :, :])
        out[sl] = np.sum(2.0 * np.sin(half) ** 2, axis=2)
    return out


def centroid_distance_matrix(theta, a, b) -> np.ndarray:
    """n x k table of dist_centroid for centroid rows of ``a`` and ``b``."""
    t = as_thetas(theta)
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape != b.shape or a.shape[1] != t.shape[1]:
        raise ShapeError(f"dimension mismatch: points {t.shape}, a {a.shape}, b {b.shape}")
    c, s = np.cos(t), np.sin(t)
    out = np.empty((t.shape[0], a.shape[0]))
    for sl in _chunks(t.shape[0], a.size):
        da = c[sl, None, :] - a[None, :, :]
        db = s[sl, None, :] - b[None, :, :]
        out[sl] = 0.5 * np.sum(da * da + db * db, axis=2)
    return out
