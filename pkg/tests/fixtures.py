"""Shared deterministic fixtures for the clustering and pipeline tests."""

import numpy as np

TWO_CENTRES = ((0.0, 0.0), (10.0, 10.0))
THREE_CENTRES = ((0.0, 0.0), (10.0, 0.0), (5.0, 9.0))


def blobs(centres, per_blob=30, spread=0.5, seed=7, dim=None):
    rng = np.random.default_rng(seed)
    centres = np.asarray(centres, dtype=float)
    if dim is not None and dim > centres.shape[1]:
        centres = np.hstack([centres, np.zeros((len(centres), dim - centres.shape[1]))])
    return np.vstack([c + spread * rng.standard_normal((per_blob, centres.shape[1])) for c in centres])


def silhouette_reference(X, labels):
    """Textbook O(n^2) silhouette with explicit loops."""
    X = np.asarray(X, dtype=float)
    labels = list(labels)
    n = len(X)
    scores = []
    for i in range(n):
        dist = {}
        for j in range(n):
            if i != j:
                dist.setdefault(labels[j], []).append(float(np.sqrt(np.sum((X[i] - X[j]) ** 2))))
        own = dist.get(labels[i], [])
        if not own:
            scores.append(0.0)
            continue
        a = sum(own) / len(own)
        b = min(sum(v) / len(v) for k, v in dist.items() if k != labels[i])
        scores.append(0.0 if max(a, b) == 0 else (b - a) / max(a, b))
    return sum(scores) / n
