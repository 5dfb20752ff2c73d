"""Euler k-means and its rectified variants REK1/REK2."""

from .cluster import (
    Centroids,
    ClusteringResult,
    LloydConfig,
    assign,
    fit_eulerk,
    fit_kmeans,
    fit_rek1,
    fit_rek2,
)
from .euler import AngleMatrix, RealDataset, scale_angles
from .metrics import acc, deviation_degree, nmi

__all__ = [
    "AngleMatrix",
    "Centroids",
    "ClusteringResult",
    "LloydConfig",
    "RealDataset",
    "acc",
    "assign",
    "deviation_degree",
    "fit_eulerk",
    "fit_kmeans",
    "fit_rek1",
    "fit_rek2",
    "nmi",
    "scale_angles",
]

__version__ = "0.1.0"
