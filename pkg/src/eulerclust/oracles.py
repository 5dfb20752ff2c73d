"""
Slow reference implementations used only to certify the fast paths.

None of these are called by the benchmark pipeline.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CapacityError, InvalidKernelError, InvalidParameterError, InvalidPartitionError


@dataclass(frozen=True)
class OracleCaps:
    max_n: int = 2000
    grid_resolution: int = 10**6
    max_k_permutation: int = 8

    def __post_init__(self):
        if min(self.max_n, self.grid_resolution, self.max_k_permutation) < 1:
            raise InvalidParameterError("oracle caps must be positive")


DEFAULT_CAPS = OracleCaps()


def kernel_objective_matrix(K, P, caps: OracleCaps = DEFAULT_CAPS) -> float:
    """Kernel k-means objective Tr(K) - Tr(L^1/2 P^T K P L^1/2), L = diag(1/n_c)."""
    K = np.asarray(K)
    P = np.asarray(P, dtype=float)
    n = K.shape[0]
    if K.shape != (n, n) or P.shape[0] != n:
        raise InvalidPartitionError(f"shape mismatch: K {K.shape}, P {P.shape}")
    if n > caps.max_n:
        raise CapacityError(f"n={n} exceeds oracle cap {caps.max_n}")
    if np.max(np.abs(K - K.conj().T), initial=0.0) > 1e-8:
        raise InvalidKernelError("kernel matrix is not Hermitian")
    if not np.all((P == 0) | (P == 1)) or not np.all(P.sum(axis=1) == 1):
        raise InvalidPartitionError("P must be one-hot by rows")
    sizes = P.sum(axis=0)
    if np.any(sizes == 0):
        raise InvalidPartitionError(f"clusters {np.flatnonzero(sizes == 0).tolist()} are empty")
    L_half = np.diag(1.0 / np.sqrt(sizes))
    inner = L_half @ P.T @ K @ P @ L_half
    value = np.trace(K) - np.trace(inner)
    if abs(value.imag) > 1e-10:
        raise InvalidKernelError(f"objective has imaginary residue {value.imag:.3g}")
    return float(value.real)


@lru_cache(maxsize=4)
def _grid(resolution: int):
    # uniform points on (-pi, pi], pi included
    u = -np.pi + 2.0 * np.pi * np.arange(1, resolution + 1) / resolution
    return u, np.cos(u), np.sin(u)


def grid_preimage(thetas, resolution: int = DEFAULT_CAPS.grid_resolution) -> float:
    """Grid point of (-pi, pi] maximizing sum_j cos(theta_j - u); ties go to the smallest u."""
    thetas = np.asarray(thetas, dtype=float).ravel()
    if thetas.size < 1:
        raise InvalidParameterError("need at least one angle")
    if resolution < 1:
        raise InvalidParameterError("resolution must be positive")
    u, cu, su = _grid(int(resolution))
    # sum_j cos(theta_j - u) expanded so the grid needs two trig evaluations per point
    score = np.sum(np.cos(thetas)) * cu + np.sum(np.sin(thetas)) * su
    return float(u[int(np.argmax(score))])


def cosine_score(thetas, u: float) -> float:
    """sum_j cos(theta_j - u), evaluated term by term."""
    thetas = np.asarray(thetas, dtype=float).ravel()
    return float(np.sum(np.cos(thetas - u)))


def exhaustive_acc(pred, truth, caps: OracleCaps = DEFAULT_CAPS) -> float:
    """Best matching fraction over every relabeling of the predicted clusters."""
    pred = np.asarray(pred).ravel()
    truth = np.asarray(truth).ravel()
    if pred.shape != truth.shape:
        raise InvalidParameterError("label arrays differ in length")
    if pred.size == 0:
        return 0.0
    _, p = np.unique(pred, return_inverse=True)
    _, t = np.unique(truth, return_inverse=True)
    size = max(p.max(), t.max()) + 1
    if size > caps.max_k_permutation:
        raise CapacityError(f"{size} labels exceed permutation cap {caps.max_k_permutation}")
    best = 0
    for perm in itertools.permutations(range(size)):
        mapped = np.asarray(perm)[p]
        best = max(best, int(np.sum(mapped == t)))
    return best / pred.size
