"""K-means over response embeddings with silhouette-based choice of k."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

__all__ = ["ClusterResult", "KMeans", "SilhouetteKMeans", "kmeans", "select_k", "silhouette"]


@dataclass(frozen=True)
class ClusterResult:
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    silhouette: float
    iterations: int
    inertia_trace: tuple[float, ...]


def _as_matrix(X) -> np.ndarray:
    return check_array(X, dtype=float, ensure_min_samples=2)


def _sq_dists(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    return np.square(X[:, None, :] - C[None, :, :]).sum(axis=2)


def _plus_plus(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(X)
    chosen = [int(rng.integers(n))]
    d2 = _sq_dists(X, X[chosen]).min(axis=1)
    while len(chosen) < k:
        total = d2.sum()
        if total > 0:
            i = int(rng.choice(n, p=d2 / total))
        else:
            # only duplicates of chosen points remain
            rest = np.setdiff1d(np.arange(n), chosen)
            i = int(rng.choice(rest))
        chosen.append(i)
        d2 = np.minimum(d2, _sq_dists(X, X[[i]])[:, 0])
    return X[chosen].copy()


def _assign(X: np.ndarray, C: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d2 = _sq_dists(X, C)
    labels = d2.argmin(axis=1)
    return labels, d2[np.arange(len(X)), labels]


def _repair_empty(X: np.ndarray, labels: np.ndarray, d2: np.ndarray, k: int) -> np.ndarray:
    """Give each empty cluster the farthest point of a cluster that can spare one."""
    labels = labels.copy()
    d2 = d2.copy()
    for j in range(k):
        counts = np.bincount(labels, minlength=k)
        if counts[j]:
            continue
        donors = counts[labels] > 1
        i = int(np.argmax(np.where(donors, d2, -1.0)))
        labels[i] = j
        d2[i] = 0.0
    return labels


def _means(X: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    return np.stack([X[labels == j].mean(axis=0) for j in range(k)])


def kmeans(X, k: int, seed=0, max_iter: int = 300, tol: float = 1e-6) -> ClusterResult:
    """Lloyd's algorithm from k-means++ seeds; deterministic in ``(X, k, seed)``.

    Stops once no centroid moves by ``tol`` or more (Euclidean) or after
    ``max_iter`` updates. ``inertia_trace`` holds the inertia after every
    assignment step, starting with the seeding.
    """
    X = _as_matrix(X)
    n = len(X)
    if not 2 <= k <= n:
        raise ValueError(f"need 2 <= k <= n ({n}), got k={k}")
    if max_iter < 1 or tol < 0:
        raise ValueError("max_iter must be >= 1 and tol >= 0")
    rng = np.random.default_rng(seed)
    centers = _plus_plus(X, k, rng)
    labels, d2 = _assign(X, centers)
    trace = [float(d2.sum())]
    iterations = 0
    for iterations in range(1, max_iter + 1):
        labels = _repair_empty(X, labels, d2, k)
        new = _means(X, labels, k)
        shift = float(np.sqrt(np.square(new - centers).sum(axis=1)).max())
        centers = new
        labels, d2 = _assign(X, centers)
        trace.append(float(d2.sum()))
        if shift < tol or shift == 0.0:
            break
    if np.bincount(labels, minlength=k).min() == 0:
        labels = _repair_empty(X, labels, d2, k)
        centers = _means(X, labels, k)
        d2 = np.square(X - centers[labels]).sum(axis=1)
        trace.append(float(d2.sum()))
    score = silhouette(X, labels) if k < n else 0.0
    return ClusterResult(labels, centers, float(d2.sum()), score, iterations, tuple(trace))


def silhouette(X, labels) -> float:
    """Mean silhouette with Euclidean distances; points in singleton clusters score 0."""
    X = _as_matrix(X)
    _, lab = np.unique(np.asarray(labels), return_inverse=True)
    if len(lab) != len(X):
        raise ValueError("labels and X disagree in length")
    k = int(lab.max()) + 1
    if k < 2:
        raise ValueError("silhouette needs at least two clusters")
    D = cdist(X, X)
    sizes = np.bincount(lab, minlength=k)
    sums = np.stack([D[:, lab == j].sum(axis=1) for j in range(k)], axis=1)
    idx = np.arange(len(X))
    own = sizes[lab]
    a = np.where(own > 1, sums[idx, lab] / np.maximum(own - 1, 1), 0.0)
    other = sums / sizes
    other[idx, lab] = np.inf
    b = other.min(axis=1)
    denom = np.maximum(a, b)
    s = np.where((own > 1) & (denom > 0), (b - a) / np.where(denom > 0, denom, 1.0), 0.0)
    return float(s.mean())


def _restart_seed(seed: int, k: int, r: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(k, r))


def _best_of(X: np.ndarray, k: int, seed: int, restarts: int, max_iter: int, tol: float) -> ClusterResult:
    best = None
    for r in range(restarts):
        res = kmeans(X, k, _restart_seed(seed, k, r), max_iter, tol)
        if best is None or res.inertia < best.inertia:
            best = res
    return best


def select_k(
    X, k_min: int, k_max: int, seed: int = 0, restarts: int = 10, max_iter: int = 300, tol: float = 1e-6
) -> int:
    """Number of clusters with the highest silhouette; the smallest k wins ties."""
    return _scan_k(_as_matrix(X), k_min, k_max, seed, restarts, max_iter, tol)[0]


def _scan_k(X, k_min, k_max, seed, restarts, max_iter, tol):
    n = len(X)
    if not 2 <= k_min <= k_max <= n - 1:
        raise ValueError(f"need 2 <= k_min <= k_max <= n-1 ({n - 1}), got {k_min}, {k_max}")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    results = {k: _best_of(X, k, seed, restarts, max_iter, tol) for k in range(k_min, k_max + 1)}
    best_k = max(results, key=lambda k: (results[k].silhouette, -k))
    return best_k, results


def _l2_normalise(X: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    return X / np.where(norms > 0, norms, 1.0)


class KMeans(ClusterMixin, TransformerMixin, BaseEstimator):
    """Estimator wrapper around :func:`kmeans` with ``n_init`` restarts."""

    def __init__(self, n_clusters: int = 2, n_init: int = 10, max_iter: int = 300, tol: float = 1e-6, random_state: int = 0):
        self.n_clusters = n_clusters
        self.n_init = n_init
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def fit(self, X, y=None):
        X = _as_matrix(X)
        res = _best_of(X, self.n_clusters, self.random_state, self.n_init, self.max_iter, self.tol)
        self.cluster_centers_ = res.centroids
        self.labels_ = res.labels
        self.inertia_ = res.inertia
        self.n_iter_ = res.iterations
        self.inertia_trace_ = res.inertia_trace
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "cluster_centers_")
        return _assign(check_array(X, dtype=float), self.cluster_centers_)[0]

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "cluster_centers_")
        return np.sqrt(_sq_dists(check_array(X, dtype=float), self.cluster_centers_))


class SilhouetteKMeans(ClusterMixin, BaseEstimator):
    """K-means whose k is picked from ``[k_min, k_max]`` by silhouette score.

    ``normalize=True`` scales each row to unit L2 norm before clustering.
    """

    def __init__(
        self,
        k_min: int = 2,
        k_max: int = 8,
        n_init: int = 10,
        max_iter: int = 300,
        tol: float = 1e-6,
        random_state: int = 0,
        normalize: bool = False,
    ):
        self.k_min = k_min
        self.k_max = k_max
        self.n_init = n_init
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state
        self.normalize = normalize

    def _prepare(self, X) -> np.ndarray:
        X = check_array(X, dtype=float)
        return _l2_normalise(X) if self.normalize else X

    def fit(self, X, y=None):
        X = self._prepare(_as_matrix(X))
        k_max = min(self.k_max, len(X) - 1)
        best_k, results = _scan_k(X, self.k_min, k_max, self.random_state, self.n_init, self.max_iter, self.tol)
        best = results[best_k]
        self.n_clusters_ = best_k
        self.silhouette_scores_ = {k: r.silhouette for k, r in results.items()}
        self.cluster_centers_ = best.centroids
        self.labels_ = best.labels
        self.inertia_ = best.inertia
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "cluster_centers_")
        return _assign(self._prepare(X), self.cluster_centers_)[0]
