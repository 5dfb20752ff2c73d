"""Clustering accuracy, NMI, deviation degree and pairwise decision surfaces."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .cluster import Centroids, UNIT_TOL
from .errors import DegenerateBoundaryError, InvalidParameterError, ShapeError


@dataclass(frozen=True)
class MetricReport:
    acc: float
    nmi: float
    kappa_per_centroid: Tuple[float, ...]
    kappa_mean: Optional[float]

    def to_dict(self) -> dict:
        return {
            "acc": self.acc,
            "nmi": self.nmi,
            "kappa_per_centroid": list(self.kappa_per_centroid),
            "kappa_mean": self.kappa_mean,
        }


def _paired(pred, truth):
    pred = np.asarray(pred).ravel()
    truth = np.asarray(truth).ravel()
    if pred.shape != truth.shape:
        raise ShapeError(f"label arrays differ in length: {pred.size} vs {truth.size}")
    return pred, truth


def contingency(pred, truth) -> np.ndarray:
    """Counts table with predicted clusters as rows and true classes as columns."""
    pred, truth = _paired(pred, truth)
    _, p = np.unique(pred, return_inverse=True)
    _, t = np.unique(truth, return_inverse=True)
    table = np.zeros((p.max(initial=-1) + 1, t.max(initial=-1) + 1), dtype=np.int64)
    np.add.at(table, (p, t), 1)
    return table


def acc(pred, truth) -> float:
    """Fraction of points matched after the best one-to-one relabeling."""
    pred, truth = _paired(pred, truth)
    if pred.size == 0:
        return 0.0
    table = contingency(pred, truth)
    size = max(table.shape)
    padded = np.zeros((size, size), dtype=np.int64)
    padded[: table.shape[0], : table.shape[1]] = table
    rows, cols = linear_sum_assignment(-padded)
    return float(padded[rows, cols].sum() / pred.size)


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-np.sum(p * np.log(p)))


def nmi(pred, truth) -> float:
    """2 I(X;Y) / (H(X) + H(Y)) with natural logarithms.

    Two single-cluster partitions score 1; a single-cluster partition against
    a non-trivial one scores 0.
    """
    pred, truth = _paired(pred, truth)
    n = pred.size
    if n == 0:
        raise ShapeError("nmi needs at least one point")
    table = contingency(pred, truth).astype(float)
    h_pred = _entropy(table.sum(axis=1), n)
    h_true = _entropy(table.sum(axis=0), n)
    if h_pred == 0.0 and h_true == 0.0:
        return 1.0
    if h_pred == 0.0 or h_true == 0.0:
        return 0.0
    pxy = table / n
    px = pxy.sum(axis=1, keepdims=True)
    py = pxy.sum(axis=0, keepdims=True)
    nz = pxy > 0
    mi = float(np.sum(pxy[nz] * np.log(pxy[nz] / (px @ py)[nz])))
    return float(np.clip(2.0 * mi / (h_pred + h_true), 0.0, 1.0))


def deviation_degree(centroids: Centroids, literal: bool = False):
    """How far centroids sit inside the per-dimension unit circles.

    Default: kappa_c = 1 - mean_l |(a_cl, b_cl)|, which is 0 exactly on the
    sphere and 1 at the origin.  ``literal=True`` gives
    1 - sum_l (a_cl^2 + b_cl^2) / sqrt(d) instead; it is only in [0, 1] for
    d = 1 and is exposed for comparison purposes.

    Returns ``(per_centroid, mean)``.
    """
    if centroids.kind == "euclidean":
        raise InvalidParameterError("deviation degree is defined for Euler-space centroids only")
    a, b = np.atleast_2d(centroids.a), np.atleast_2d(centroids.b)
    if literal:
        per = 1.0 - np.sum(a * a + b * b, axis=1) / np.sqrt(a.shape[1])
    else:
        per = np.clip(1.0 - np.mean(np.hypot(a, b), axis=1), 0.0, 1.0)
    return per, float(np.mean(per))


def metric_report(pred, truth, centroids: Centroids) -> MetricReport:
    if centroids.kind == "euclidean":
        per, mean = (), None
    else:
        per_arr, mean = deviation_degree(centroids)
        per = tuple(float(v) for v in per_arr)
    return MetricReport(acc(pred, truth), nmi(pred, truth), per, mean)


# --------------------------------------------------------------------------
# decision surfaces
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryCoefficients:
    """Surface coef_a . cos(theta) + coef_b . sin(theta) + offset = 0.

    The expression is positive where a mapped point is strictly nearer the
    first centroid (p) than the second (q), and negative where it is nearer q.
    """

    coef_a: np.ndarray
    coef_b: np.ndarray
    offset: float
    variant: Literal["eulerk", "rek"]

    def evaluate(self, theta) -> np.ndarray:
        t = np.atleast_2d(np.asarray(theta, dtype=float))
        return np.cos(t) @ self.coef_a + np.sin(t) @ self.coef_b + self.offset

    def evaluate_mapped(self, a, b) -> np.ndarray:
        """Evaluate at points given by unit-circle-scale parts (a, b)."""
        a = np.atleast_2d(np.asarray(a, dtype=float))
        b = np.atleast_2d(np.asarray(b, dtype=float))
        return a @ self.coef_a + b @ self.coef_b + self.offset


def _rows(m_p, m_q):
    ap, bp = (np.asarray(v, dtype=float).ravel() for v in m_p)
    aq, bq = (np.asarray(v, dtype=float).ravel() for v in m_q)
    if not (ap.shape == bp.shape == aq.shape == bq.shape):
        raise ShapeError("centroid rows differ in dimension")
    if np.array_equal(ap, aq) and np.array_equal(bp, bq):
        raise DegenerateBoundaryError("identical centroids have no separating surface")
    return ap, bp, aq, bq


def boundary_eulerk(m_p, m_q) -> BoundaryCoefficients:
    """Equidistance surface between two free centroids, each given as (a, b)."""
    ap, bp, aq, bq = _rows(m_p, m_q)
    offset = -0.5 * (np.sum(ap * ap - aq * aq) + np.sum(bp * bp - bq * bq))
    return BoundaryCoefficients(ap - aq, bp - bq, float(offset), "eulerk")


def boundary_rek(m_p, m_q) -> BoundaryCoefficients:
    """Equidistance surface between two on-sphere centroids; the offset vanishes."""
    ap, bp, aq, bq = _rows(m_p, m_q)
    for a, b in ((ap, bp), (aq, bq)):
        if np.max(np.abs(a * a + b * b - 1.0)) > UNIT_TOL:
            raise InvalidParameterError("boundary_rek requires unit-modulus centroids")
    return BoundaryCoefficients(ap - aq, bp - bq, 0.0, "rek")


def boundaries(centroids: Centroids, variant=None) -> dict:
    """Surfaces for every centroid pair p < q, keyed by (p, q)."""
    if centroids.kind == "euclidean":
        raise InvalidParameterError("decision surfaces are defined for Euler-space centroids only")
    if variant is None:
        variant = "rek" if centroids.kind == "euler-unit" else "eulerk"
    make = boundary_rek if variant == "rek" else boundary_eulerk
    out = {}
    for p in range(centroids.k):
        for q in range(p + 1, centroids.k):
            out[(p, q)] = make((centroids.a[p], centroids.b[p]), (centroids.a[q], centroids.b[q]))
    return out
