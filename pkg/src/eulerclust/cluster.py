"""
Lloyd-style drivers for k-means, Euler k-means and the two rectified variants.

All four share one loop: update the prototypes for a fixed assignment, then
reassign every point to its nearest prototype, and stop when the assignment
is a fixed point, the relative objective decrease falls below ``rel_tol``, or
``max_iter`` is reached.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Literal, Optional

import numpy as np

from .errors import EmptyClusterError, InvalidParameterError, InvalidPartitionError, ShapeError
from .euler import (
    AngleMatrix,
    RealDataset,
    as_thetas,
    centroid_distance_matrix,
    sphere_distance_matrix,
)

CentroidKind = Literal["euclidean", "euler-free", "euler-unit"]
InitScheme = Literal["sample-points", "sphere-uniform"]
EmptyPolicy = Literal["reseed-farthest", "drop-error"]

DEGENERATE_RESULTANT = 1e-12
UNIT_TOL = 1e-9


@dataclass(frozen=True)
class Centroids:
    """Per-cluster centroid parts. For ``euclidean`` only ``a`` is used."""

    a: np.ndarray
    b: np.ndarray
    kind: CentroidKind = "euler-free"

    @property
    def k(self) -> int:
        return self.a.shape[0]

    @property
    def d(self) -> int:
        return self.a.shape[1]

    def moduli(self) -> np.ndarray:
        return np.hypot(self.a, self.b)


@dataclass(frozen=True)
class LloydConfig:
    k: int
    max_iter: int = 300
    rel_tol: float = 1e-8
    seed: int = 0
    init: InitScheme = "sample-points"
    empty_cluster: EmptyPolicy = "reseed-farthest"

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise InvalidParameterError(f"k must be a positive integer, got {self.k!r}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise InvalidParameterError(f"max_iter must be >= 1, got {self.max_iter!r}")
        if not self.rel_tol >= 0:
            raise InvalidParameterError(f"rel_tol must be >= 0, got {self.rel_tol!r}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise InvalidParameterError(f"seed must be a non-negative integer, got {self.seed!r}")
        if self.init not in ("sample-points", "sphere-uniform"):
            raise InvalidParameterError(f"unknown init scheme {self.init!r}")
        if self.empty_cluster not in ("reseed-farthest", "drop-error"):
            raise InvalidParameterError(f"unknown empty-cluster policy {self.empty_cluster!r}")


@dataclass
class ClusteringResult:
    algorithm: str
    labels: np.ndarray
    centroids: Centroids
    objective_trace: List[float]
    iterations: int
    converged: bool
    seed: int
    alpha: Optional[float]
    preimages: Optional[np.ndarray] = None
    degenerate_dims: int = 0
    reseeded_clusters: int = 0

    @property
    def objective(self) -> float:
        return self.objective_trace[-1]

    @property
    def kappa(self):
        """Per-centroid deviation degree and its mean (None for k-means)."""
        if self.centroids.kind == "euclidean":
            return None
        from .metrics import deviation_degree

        return deviation_degree(self.centroids)

    def to_dict(self) -> dict:
        kappa = self.kappa
        return {
            "algorithm": self.algorithm,
            "seed": int(self.seed),
            "alpha": None if self.alpha is None else float(self.alpha),
            "labels": [int(v) for v in self.labels],
            "centroids": {
                "kind": self.centroids.kind,
                "a": self.centroids.a.tolist(),
                "b": self.centroids.b.tolist(),
            },
            "preimages": None if self.preimages is None else self.preimages.tolist(),
            "objective_trace": [float(v) for v in self.objective_trace],
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "degenerate_dims": int(self.degenerate_dims),
            "reseeded_clusters": int(self.reseeded_clusters),
            "kappa_per_centroid": None if kappa is None else [float(v) for v in kappa[0]],
            "kappa_mean": None if kappa is None else float(kappa[1]),
        }


def one_hot(labels, k: int) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise InvalidPartitionError(f"labels out of range for k={k}")
    P = np.zeros((labels.size, k))
    P[np.arange(labels.size), labels] = 1.0
    return P


def wrap_angle(u):
    """Map angles into (-pi, pi]."""
    w = np.mod(np.asarray(u, dtype=float) + np.pi, 2 * np.pi) - np.pi
    return np.where(w <= -np.pi, w + 2 * np.pi, w)


# --------------------------------------------------------------------------
# initialization
# --------------------------------------------------------------------------

def _sample_rows(n: int, k: int, seed: int) -> np.ndarray:
    if k > n:
        raise InvalidParameterError(f"k={k} exceeds number of points n={n}")
    rng = np.random.default_rng(seed)
    return rng.choice(n, size=k, replace=False)


def init_sample_points(theta, k: int, seed: int) -> Centroids:
    """Use k distinct mapped data points as initial centroids."""
    t = as_thetas(theta)
    idx = _sample_rows(t.shape[0], k, seed)
    return Centroids(np.cos(t[idx]), np.sin(t[idx]), "euler-unit")


def init_sphere_uniform(d: int, k: int, seed: int) -> Centroids:
    """Random centroids on the sphere: one uniform angle in (-pi, pi] per dimension."""
    if d < 1 or k < 1:
        raise InvalidParameterError("d and k must be >= 1")
    rng = np.random.default_rng(seed)
    # uniform on [-pi, pi) reflected to (-pi, pi]
    psi = -rng.uniform(-np.pi, np.pi, size=(k, d))
    return Centroids(np.cos(psi), np.sin(psi), "euler-unit")


# --------------------------------------------------------------------------
# assignment and objective
# --------------------------------------------------------------------------

def distance_table(data, centroids: Centroids) -> np.ndarray:
    """n x k distances from every point to every centroid.

    ``data`` is an angle matrix for the Euler kinds and the raw feature matrix
    for the euclidean kind.
    """
    if centroids.kind == "euclidean":
        X = data.values if isinstance(data, RealDataset) else np.asarray(data, dtype=float)
        if X.shape[1] != centroids.d:
            raise ShapeError(f"dimension mismatch: {X.shape[1]} vs {centroids.d}")
        return np.sum((X[:, None, :] - centroids.a[None, :, :]) ** 2, axis=2)
    return centroid_distance_matrix(data, centroids.a, centroids.b)


def assign(data, centroids: Centroids) -> np.ndarray:
    """Nearest-centroid labels; ties go to the lowest cluster index."""
    return np.argmin(distance_table(data, centroids), axis=1)


def assign_preimages(theta, U) -> np.ndarray:
    return np.argmin(sphere_distance_matrix(theta, U), axis=1)


def objective(data, centroids: Centroids, labels, preimages=None) -> float:
    """Sum of distances from every point to its own prototype.

    Uses the squared-difference form (not the expanded one) so values near a
    fixed point do not suffer cancellation.
    """
    labels = np.asarray(labels)
    if preimages is not None:
        t = as_thetas(data)
        U = np.atleast_2d(np.asarray(preimages, dtype=float))
        return float(np.sum(2.0 * np.sin(0.5 * (t - U[labels])) ** 2))
    if centroids.kind == "euclidean":
        X = data.values if isinstance(data, RealDataset) else np.asarray(data, dtype=float)
        return float(np.sum((X - centroids.a[labels]) ** 2))
    t = as_thetas(data)
    da = np.cos(t) - centroids.a[labels]
    db = np.sin(t) - centroids.b[labels]
    return float(0.5 * np.sum(da * da + db * db))


# --------------------------------------------------------------------------
# prototype updates
# --------------------------------------------------------------------------

def _sums(t: np.ndarray, labels: np.ndarray, k: int):
    counts = np.bincount(labels, minlength=k)
    if np.any(counts == 0):
        empty = np.flatnonzero(counts == 0).tolist()
        raise EmptyClusterError(f"clusters {empty} are empty")
    P = one_hot(labels, k)
    return P.T @ np.cos(t), P.T @ np.sin(t), counts


def update_centroids_kmeans(X, labels, k: int) -> Centroids:
    X = X.values if isinstance(X, RealDataset) else np.asarray(X, dtype=float)
    labels = np.asarray(labels)
    counts = np.bincount(labels, minlength=k)
    if np.any(counts == 0):
        raise EmptyClusterError(f"clusters {np.flatnonzero(counts == 0).tolist()} are empty")
    means = (one_hot(labels, k).T @ X) / counts[:, None]
    return Centroids(means, np.zeros_like(means), "euclidean")


def update_centroids_eulerk(theta, labels, k: int) -> Centroids:
    """Mean of the mapped members, per dimension (may lie inside the circle)."""
    C, S, counts = _sums(as_thetas(theta), np.asarray(labels), k)
    return Centroids(C / counts[:, None], S / counts[:, None], "euler-free")


def update_centroids_rek1(theta, labels, k: int, previous: Optional[Centroids] = None):
    """Resultant of the mapped members divided by its modulus, per dimension.

    Returns ``(centroids, n_degenerate)``. Dimensions whose resultant modulus
    is below 1e-12 keep their previous value (angle 0 if there is none); any
    unit vector maximizes the cluster term there.
    """
    C, S, _ = _sums(as_thetas(theta), np.asarray(labels), k)
    A = np.hypot(C, S)
    degenerate = A < DEGENERATE_RESULTANT
    safe = np.where(degenerate, 1.0, A)
    a, b = C / safe, S / safe
    if degenerate.any():
        if previous is None:
            prev_a, prev_b = np.ones_like(a), np.zeros_like(b)
        else:
            prev_a, prev_b = previous.a, previous.b
        a = np.where(degenerate, prev_a, a)
        b = np.where(degenerate, prev_b, b)
    return Centroids(a, b, "euler-unit"), int(degenerate.sum())


def update_preimages_rek2(theta, labels, k: int, previous=None):
    """Pre-image angles maximizing the summed cosine similarity, per dimension.

    The maximizer is the circular mean direction atan2(sum sin, sum cos).
    Returns ``(U, n_degenerate)`` with U in (-pi, pi].
    """
    C, S, _ = _sums(as_thetas(theta), np.asarray(labels), k)
    degenerate = np.hypot(C, S) < DEGENERATE_RESULTANT
    U = wrap_angle(np.arctan2(S, C))
    if degenerate.any():
        prev = np.zeros_like(U) if previous is None else np.asarray(previous, dtype=float)
        U = np.where(degenerate, prev, U)
    return U, int(degenerate.sum())


def centroids_from_preimages(U) -> Centroids:
    U = np.atleast_2d(np.asarray(U, dtype=float))
    return Centroids(np.cos(U), np.sin(U), "euler-unit")


# --------------------------------------------------------------------------
# Lloyd driver
# --------------------------------------------------------------------------

@dataclass
class _Model:
    """Per-algorithm hooks used by the shared loop."""

    name: str
    data: object
    n: int
    update: Callable
    distances: Callable
    seed_point: Callable
    objective: Callable
    state_to_centroids: Callable


def _reseed_empty(labels, dist, k):
    """Move the farthest points of non-singleton clusters into empty clusters.

    ``dist`` holds each point's distance to its current centroid. Returns the
    new labels and the list of reseeded (cluster, point) pairs.
    """
    labels = labels.copy()
    moved = []
    counts = np.bincount(labels, minlength=k)
    order = np.lexsort((np.arange(labels.size), -dist))
    for c in np.flatnonzero(counts == 0):
        for j in order:
            if counts[labels[j]] > 1:
                break
        else:  # pragma: no cover - pigeonhole guarantees a donor
            raise EmptyClusterError(f"no donor point for empty cluster {c}")
        counts[labels[j]] -= 1
        labels[j] = c
        counts[c] += 1
        moved.append((int(c), int(j)))
        order = order[order != j]
    return labels, moved


def _lloyd(model: _Model, state, cfg: LloydConfig, callback=None):
    labels = np.argmin(model.distances(state), axis=1)
    trace = [model.objective(state, labels)]
    if callback is not None:
        callback(0, model.state_to_centroids(state), labels)
    converged = False
    reseeded = 0
    for it in range(1, cfg.max_iter + 1):
        counts = np.bincount(labels, minlength=cfg.k)
        if np.any(counts == 0):
            if cfg.empty_cluster == "drop-error":
                raise EmptyClusterError(
                    f"clusters {np.flatnonzero(counts == 0).tolist()} became empty at iteration {it}"
                )
            own = model.distances(state)[np.arange(model.n), labels]
            labels, moved = _reseed_empty(labels, own, cfg.k)
            reseeded += len(moved)
            state = model.seed_point(state, moved)
        state = model.update(labels, state)
        new_labels = np.argmin(model.distances(state), axis=1)
        value = model.objective(state, new_labels)
        prev = trace[-1]
        trace.append(value)
        if callback is not None:
            callback(it, model.state_to_centroids(state), new_labels)
        stable = np.array_equal(new_labels, labels)
        labels = new_labels
        if stable or (prev - value) <= cfg.rel_tol * max(abs(prev), np.finfo(float).tiny):
            converged = True
            break
    return state, labels, trace, converged, reseeded


def _check_k(n: int, cfg: LloydConfig):
    if cfg.k > n:
        raise InvalidParameterError(f"k={cfg.k} exceeds number of points n={n}")


def fit_kmeans(X, cfg: LloydConfig, callback=None) -> ClusteringResult:
    """Plain Lloyd k-means in the original feature space."""
    values = X.values if isinstance(X, RealDataset) else np.asarray(X, dtype=float)
    n = values.shape[0]
    _check_k(n, cfg)
    if cfg.init != "sample-points":
        raise InvalidParameterError("k-means only supports sample-points initialization")
    idx = _sample_rows(n, cfg.k, cfg.seed)
    init = Centroids(values[idx].copy(), np.zeros((cfg.k, values.shape[1])), "euclidean")

    def seed_point(state, moved):
        a = state.a.copy()
        for c, j in moved:
            a[c] = values[j]
        return Centroids(a, state.b, "euclidean")

    model = _Model(
        "kmeans", values, n,
        update=lambda labels, state: update_centroids_kmeans(values, labels, cfg.k),
        distances=lambda state: distance_table(values, state),
        seed_point=seed_point,
        objective=lambda state, labels: objective(values, state, labels),
        state_to_centroids=lambda state: state,
    )
    state, labels, trace, converged, reseeded = _lloyd(model, init, cfg, callback)
    return ClusteringResult("kmeans", labels, state, trace, len(trace) - 1, converged,
                            cfg.seed, None, reseeded_clusters=reseeded)


def _euler_init(t: np.ndarray, cfg: LloydConfig) -> Centroids:
    if cfg.init == "sample-points":
        return init_sample_points(t, cfg.k, cfg.seed)
    return init_sphere_uniform(t.shape[1], cfg.k, cfg.seed)


def _alpha_of(theta) -> Optional[float]:
    return theta.alpha if isinstance(theta, AngleMatrix) else None


def _fit_centroid_model(theta, cfg: LloydConfig, name: str, callback=None) -> ClusteringResult:
    t = as_thetas(theta)
    n = t.shape[0]
    _check_k(n, cfg)
    init = _euler_init(t, cfg)
    count = {"degenerate": 0}

    if name == "eulerk":
        def update(labels, state):
            return update_centroids_eulerk(t, labels, cfg.k)
    else:
        def update(labels, state):
            new, nd = update_centroids_rek1(t, labels, cfg.k, previous=state)
            count["degenerate"] += nd
            return new

    def seed_point(state, moved):
        a, b = state.a.copy(), state.b.copy()
        for c, j in moved:
            a[c], b[c] = np.cos(t[j]), np.sin(t[j])
        return Centroids(a, b, state.kind)

    model = _Model(
        name, t, n,
        update=update,
        distances=lambda state: centroid_distance_matrix(t, state.a, state.b),
        seed_point=seed_point,
        objective=lambda state, labels: objective(t, state, labels),
        state_to_centroids=lambda state: state,
    )
    state, labels, trace, converged, reseeded = _lloyd(model, init, cfg, callback)
    return ClusteringResult(name, labels, state, trace, len(trace) - 1, converged, cfg.seed,
                            _alpha_of(theta), degenerate_dims=count["degenerate"],
                            reseeded_clusters=reseeded)


def fit_eulerk(theta, cfg: LloydConfig, callback=None) -> ClusteringResult:
    """Euler k-means: k-means on the mapped points with free (mean) centroids."""
    return _fit_centroid_model(theta, cfg, "eulerk", callback)


def fit_rek1(theta, cfg: LloydConfig, callback=None) -> ClusteringResult:
    """Rectified Euler k-means with centroids constrained to unit modulus per dimension."""
    return _fit_centroid_model(theta, cfg, "rek1", callback)


def fit_rek2(theta, cfg: LloydConfig, callback=None) -> ClusteringResult:
    """Rectified Euler k-means that optimizes pre-image angles of the centroids."""
    t = as_thetas(theta)
    n = t.shape[0]
    _check_k(n, cfg)
    start = _euler_init(t, cfg)
    init = wrap_angle(np.arctan2(start.b, start.a))
    count = {"degenerate": 0}

    def update(labels, U):
        new, nd = update_preimages_rek2(t, labels, cfg.k, previous=U)
        count["degenerate"] += nd
        return new

    def seed_point(U, moved):
        U = U.copy()
        for c, j in moved:
            U[c] = wrap_angle(t[j])
        return U

    model = _Model(
        "rek2", t, n,
        update=update,
        distances=lambda U: sphere_distance_matrix(t, U),
        seed_point=seed_point,
        objective=lambda U, labels: objective(t, None, labels, preimages=U),
        state_to_centroids=centroids_from_preimages,
    )
    U, labels, trace, converged, reseeded = _lloyd(model, init, cfg, callback)
    return ClusteringResult("rek2", labels, centroids_from_preimages(U), trace, len(trace) - 1,
                            converged, cfg.seed, _alpha_of(theta), preimages=U,
                            degenerate_dims=count["degenerate"], reseeded_clusters=reseeded)


FITTERS = {
    "kmeans": fit_kmeans,
    "eulerk": fit_eulerk,
    "rek1": fit_rek1,
    "rek2": fit_rek2,
}
