"""
Experiment runner: seeded restarts, alpha sweeps, kappa-vs-k studies and
decision-surface grid export.

Restart r of an experiment always uses seed ``base_seed + r`` so any single
restart can be reproduced in isolation.
"""

from __future__ import annotations

import csv
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .cluster import FITTERS, ClusteringResult, LloydConfig, assign
from .data import VOLATILE_KEY, HalfmoonSpec, gen_halfmoon, load_csv, normalize
from .errors import ConfigError, InvalidParameterError
from .euler import RealDataset, scale_angles
from .metrics import acc, boundaries, deviation_degree, nmi

ALGORITHMS = tuple(FITTERS)


def default_alpha_grid() -> List[float]:
    """{1e-4, 0.001, 0.005, 0.01, 0.05, 0.1:0.1:2, 5, 10, 50, 100:1e2:900, 1e3:1e3:1e4}."""
    parts = [
        [1e-4, 1e-3, 5e-3, 1e-2, 5e-2],
        [round(0.1 * i, 10) for i in range(1, 21)],
        [5.0, 10.0, 50.0],
        [100.0 * i for i in range(1, 10)],
        [1000.0 * i for i in range(1, 11)],
    ]
    return sorted({float(v) for part in parts for v in part})


@dataclass
class ExperimentConfig:
    algorithm: str = "eulerk"
    k: int = 2
    alpha: float = 1.0
    restarts: int = 10
    base_seed: int = 0
    normalize: str = "minmax01"
    max_iter: int = 300
    rel_tol: float = 1e-8
    init: str = "sample-points"
    empty_cluster: str = "reseed-farthest"
    input_path: Optional[str] = None
    label_column: Optional[str] = None
    delimiter: Optional[str] = ","
    halfmoon: Optional[HalfmoonSpec] = None
    metrics: bool = True
    select_by: str = "nmi"

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; choose from {', '.join(ALGORITHMS)}")
        if int(self.restarts) != self.restarts or self.restarts < 1:
            raise ConfigError(f"restarts must be >= 1, got {self.restarts!r}")
        if self.normalize not in ("none", "minmax01", "zscore"):
            raise ConfigError(f"unknown normalization {self.normalize!r}")
        if self.select_by not in ("nmi", "acc"):
            raise ConfigError(f"best-alpha selection must be 'nmi' or 'acc', got {self.select_by!r}")
        if not np.isfinite(self.alpha) or self.alpha <= 0:
            raise InvalidParameterError(f"alpha must be positive, got {self.alpha!r}")

    def lloyd(self, seed: int, k: Optional[int] = None) -> LloydConfig:
        return LloydConfig(k=self.k if k is None else k, max_iter=self.max_iter, rel_tol=self.rel_tol,
                           seed=seed, init=self.init, empty_cluster=self.empty_cluster)

    def source(self) -> dict:
        if self.input_path is not None:
            return {"type": "csv", "path": str(self.input_path), "label_column": self.label_column}
        spec = self.halfmoon or HalfmoonSpec()
        return {"type": "halfmoon", **asdict(spec)}

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("halfmoon")
        d.pop("input_path")
        d.pop("label_column")
        d["source"] = self.source()
        return d


def load_dataset(config: ExperimentConfig) -> RealDataset:
    if config.input_path is not None:
        return load_csv(config.input_path, config.label_column, config.delimiter)
    return gen_halfmoon(config.halfmoon or HalfmoonSpec())


def _prepare(config: ExperimentConfig, dataset: Optional[RealDataset]):
    raw = load_dataset(config) if dataset is None else dataset
    if config.metrics and raw.labels is None:
        raise ConfigError("metrics requested but the dataset has no labels (use a label column or disable metrics)")
    if config.k > raw.n:
        raise ConfigError(f"k={config.k} exceeds the number of points ({raw.n})")
    data, params = normalize(raw, config.normalize)
    return data, params


def _fit(config: ExperimentConfig, data: RealDataset, alpha: float, seed: int,
         k: Optional[int] = None) -> ClusteringResult:
    cfg = config.lloyd(seed, k)
    fitter = FITTERS[config.algorithm]
    if config.algorithm == "kmeans":
        return fitter(data, cfg)
    return fitter(scale_angles(data, alpha), cfg)


@dataclass
class RestartEntry:
    restart: int
    seed: int
    objective: float
    iterations: int
    converged: bool
    degenerate_dims: int
    reseeded_clusters: int
    objective_trace: List[float]
    acc: Optional[float] = None
    nmi: Optional[float] = None
    kappa_per_centroid: Optional[List[float]] = None
    kappa_mean: Optional[float] = None
    wall_clock_s: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("wall_clock_s")
        return d


def _mean_std(values) -> Optional[dict]:
    vals = [v for v in values if v is not None]
    if not vals:
        return None
    arr = np.asarray(vals, dtype=float)
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return {"mean": float(arr.mean()), "std": std}


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    alpha: Optional[float]
    n: int
    d: int
    n_classes: int
    normalization: dict
    entries: List[RestartEntry]
    results: List[ClusteringResult] = field(repr=False, default_factory=list)
    created_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    @property
    def aggregate(self) -> dict:
        return {
            "acc": _mean_std(e.acc for e in self.entries),
            "nmi": _mean_std(e.nmi for e in self.entries),
            "kappa_mean": _mean_std(e.kappa_mean for e in self.entries),
            "objective": _mean_std(e.objective for e in self.entries),
        }

    @property
    def best_restart(self) -> int:
        """Restart with the lowest final objective (first one on ties)."""
        return int(np.argmin([e.objective for e in self.entries]))

    def to_dict(self) -> dict:
        return {
            "algorithm": self.config.algorithm,
            "alpha": self.alpha,
            "k": self.config.k,
            "dataset": {"n": self.n, "d": self.d, "n_classes": self.n_classes, **self.config.source()},
            "normalization": self.normalization,
            "config": self.config.to_dict(),
            "aggregate": self.aggregate,
            "best_restart": self.best_restart,
            "restarts": [e.to_dict() for e in self.entries],
            VOLATILE_KEY: {
                "created_at": self.created_at,
                "wall_clock_s": [e.wall_clock_s for e in self.entries],
            },
        }

    def table(self) -> str:
        agg = self.aggregate

        def pct(key):
            s = agg[key]
            return "   n/a        " if s is None else f"{100 * s['mean']:6.2f} +- {100 * s['std']:5.2f}"

        kap = agg["kappa_mean"]
        kap_s = "n/a" if kap is None else f"{kap['mean']:.4f} +- {kap['std']:.4f}"
        alpha = "-" if self.alpha is None else f"{self.alpha:g}"
        return (f"{self.config.algorithm:<7} alpha={alpha:<8} k={self.config.k:<3} "
                f"ACC(%) {pct('acc')}  NMI(%) {pct('nmi')}  kappa {kap_s}  restarts={len(self.entries)}")


def run_experiment(config: ExperimentConfig, dataset: Optional[RealDataset] = None,
                   alpha: Optional[float] = None) -> ExperimentReport:
    """Fit ``config.restarts`` seeded restarts and score each one."""
    data, params = _prepare(config, dataset)
    alpha = config.alpha if alpha is None else alpha
    entries, results = [], []
    for r in range(config.restarts):
        seed = config.base_seed + r
        start = time.perf_counter()
        res = _fit(config, data, alpha, seed)
        elapsed = time.perf_counter() - start
        entry = RestartEntry(r, seed, res.objective, res.iterations, res.converged,
                             res.degenerate_dims, res.reseeded_clusters,
                             [float(v) for v in res.objective_trace], wall_clock_s=elapsed)
        if config.metrics:
            entry.acc = acc(res.labels, data.labels)
            entry.nmi = nmi(res.labels, data.labels)
        kappa = res.kappa
        if kappa is not None:
            entry.kappa_per_centroid = [float(v) for v in kappa[0]]
            entry.kappa_mean = float(kappa[1])
        entries.append(entry)
        results.append(res)
    used_alpha = None if config.algorithm == "kmeans" else float(alpha)
    n_classes = 0 if data.labels is None else data.n_classes
    return ExperimentReport(config, used_alpha, data.n, data.d, n_classes, params, entries, results)


@dataclass
class AlphaSweep:
    reports: List[ExperimentReport]
    select_by: str = "nmi"

    def best(self, metric: str) -> dict:
        means = [r.aggregate[metric]["mean"] for r in self.reports]
        i = int(np.argmax(means))  # first maximum, i.e. smallest alpha on ties
        return {"alpha": self.reports[i].alpha, "mean": means[i], "std": self.reports[i].aggregate[metric]["std"]}

    @property
    def selected(self) -> ExperimentReport:
        alpha = self.best(self.select_by)["alpha"]
        return next(r for r in self.reports if r.alpha == alpha)

    def to_dict(self) -> dict:
        return {
            "sweep": [{k: v for k, v in r.to_dict().items() if k != VOLATILE_KEY} for r in self.reports],
            "best": {"selected_by": self.select_by, "nmi": self.best("nmi"), "acc": self.best("acc")},
            VOLATILE_KEY: {
                "created_at": self.reports[0].created_at if self.reports else None,
                "wall_clock_s": [[e.wall_clock_s for e in r.entries] for r in self.reports],
            },
        }


def alpha_sweep(config: ExperimentConfig, grid: Optional[Sequence[float]] = None,
                dataset: Optional[RealDataset] = None) -> AlphaSweep:
    """One experiment per alpha (ascending) plus the best alpha per metric."""
    if config.algorithm == "kmeans":
        raise ConfigError("alpha sweeps apply to the Euler-space algorithms only")
    if not config.metrics:
        raise ConfigError("an alpha sweep selects by ACC/NMI, so metrics must be enabled")
    grid = default_alpha_grid() if grid is None else [float(a) for a in grid]
    if not grid:
        raise InvalidParameterError("alpha grid is empty")
    if any(not np.isfinite(a) or a <= 0 for a in grid):
        raise InvalidParameterError("alpha grid values must be positive")
    grid = sorted(set(grid))
    raw = load_dataset(config) if dataset is None else dataset
    reports = [run_experiment(config, raw, alpha=a) for a in grid]
    return AlphaSweep(reports, config.select_by)


@dataclass
class KappaStudy:
    algorithm: str
    alpha: float
    rows: List[Tuple[int, float, float]]

    def to_dict(self) -> dict:
        return {
            "kappa_study": {
                "algorithm": self.algorithm,
                "alpha": self.alpha,
                "rows": [{"k": k, "kappa_mean": m, "kappa_std": s} for k, m, s in self.rows],
            }
        }

    def table(self) -> str:
        lines = [f"{'k':>6}  {'mean kappa':>12}  {'std':>10}"]
        lines += [f"{k:>6}  {m:>12.6f}  {s:>10.6f}" for k, m, s in self.rows]
        return "\n".join(lines)


def kappa_vs_k_study(config: ExperimentConfig, k_values: Sequence[int],
                     dataset: Optional[RealDataset] = None) -> KappaStudy:
    """Mean deviation degree over restarts for each k (EulerK unless configured otherwise)."""
    if config.algorithm == "kmeans":
        raise ConfigError("deviation degree is undefined for k-means")
    k_values = [int(k) for k in k_values]
    if len(set(k_values)) != len(k_values):
        raise ConfigError("duplicate k values in kappa study")
    if k_values != sorted(k_values):
        raise ConfigError("k values must be ascending")
    raw = load_dataset(config) if dataset is None else dataset
    if any(k < 1 or k > raw.n for k in k_values):
        raise ConfigError(f"k values must lie in [1, {raw.n}]")
    data, _ = normalize(raw, config.normalize)
    rows = []
    for k in k_values:
        kappas = []
        for r in range(config.restarts):
            res = _fit(config, data, config.alpha, config.base_seed + r, k=k)
            kappas.append(deviation_degree(res.centroids)[1])
        arr = np.asarray(kappas)
        rows.append((k, float(arr.mean()), float(arr.std(ddof=1)) if arr.size > 1 else 0.0))
    return KappaStudy(config.algorithm, float(config.alpha), rows)


# --------------------------------------------------------------------------
# decision-surface grid
# --------------------------------------------------------------------------

BOUNDARY_COLUMNS = ("p", "q", "x1", "x2", "label", "surface")


def emit_boundary_grid(result: ClusteringResult, bounds, resolution: int, path=None):
    """Evaluate labels and every pairwise surface on a uniform 2-D grid.

    ``bounds`` is ``((x1_lo, x1_hi), (x2_lo, x2_hi))`` in the feature space the
    model was fit on. Returns rows ``(p, q, x1, x2, label, surface)``: one block
    of ``resolution**2`` rows per centroid pair, x1-major within a block.
    The surface value is positive where the grid point is nearer centroid p.
    """
    if result.centroids.kind == "euclidean":
        raise InvalidParameterError("boundary grids are only defined for Euler-space results")
    if result.centroids.d != 2:
        raise InvalidParameterError(f"boundary grids need 2-D data, got d={result.centroids.d}")
    if int(resolution) != resolution or resolution < 2:
        raise InvalidParameterError("grid resolution must be an integer >= 2")
    (x1_lo, x1_hi), (x2_lo, x2_hi) = bounds
    g1 = np.linspace(x1_lo, x1_hi, resolution)
    g2 = np.linspace(x2_lo, x2_hi, resolution)
    pts = np.array([(u, v) for u in g1 for v in g2])
    theta = scale_angles(pts, result.alpha if result.alpha is not None else 1.0)
    labels = assign(theta, result.centroids)
    rows = []
    surfaces = boundaries(result.centroids)
    for (p, q), surf in surfaces.items():
        vals = surf.evaluate(theta.thetas)
        rows.extend((p, q, float(x), float(y), int(lab), float(v))
                    for (x, y), lab, v in zip(pts, labels, vals))
    if path is not None:
        path = Path(path)
        try:
            with path.open("w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh)
                w.writerow(BOUNDARY_COLUMNS)
                for p, q, x, y, lab, v in rows:
                    w.writerow([p, q, repr(x), repr(y), lab, repr(v)])
        except OSError as exc:
            raise OSError(f"{path}: cannot write boundary grid ({exc.strerror or exc})") from exc
    return rows
