"""Small classifiers for scattering features (k-NN and nearest centroid)."""
from __future__ import annotations

import numpy as np


def stratified_split(labels, train_fraction: float, seed: int):
    """Per-class shuffled split; returns (train_idx, test_idx), both sorted."""
    if not 0 < train_fraction < 1:
        raise ValueError("train fraction must lie in (0, 1)")
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    train = []
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        rng.shuffle(idx)
        train.extend(idx[: int(round(train_fraction * idx.size))])
    train = np.sort(np.array(train, dtype=int))
    test = np.setdiff1d(np.arange(labels.size), train)
    return train, test


def zscore(train: np.ndarray, test: np.ndarray):
    mu = train.mean(axis=0)
    sd = train.std(axis=0)
    sd[sd == 0] = 1.0
    return (train - mu) / sd, (test - mu) / sd


def knn_predict(Xtr, ytr, Xte, k: int) -> np.ndarray:
    """Majority vote of the ``k`` nearest training rows; ties go to the smallest label."""
    if k < 1 or k > len(ytr):
        raise ValueError(f"k={k} is not in [1, {len(ytr)}] (training set size)")
    d2 = (
        np.sum(Xte**2, axis=1)[:, None]
        - 2 * Xte @ Xtr.T
        + np.sum(Xtr**2, axis=1)[None, :]
    )
    nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
    classes = np.unique(ytr)
    votes = (ytr[nearest][:, :, None] == classes[None, None, :]).sum(axis=1)
    return classes[np.argmax(votes, axis=1)]


def nearest_centroid_predict(Xtr, ytr, Xte) -> np.ndarray:
    classes = np.unique(ytr)
    centroids = np.stack([Xtr[ytr == c].mean(axis=0) for c in classes])
    d2 = ((Xte[:, None, :] - centroids[None]) ** 2).sum(axis=2)
    return classes[np.argmin(d2, axis=1)]


def classify(
    features,
    labels,
    method: str = "knn",
    k: int = 5,
    train_fraction: float = 0.5,
    seed: int = 0,
) -> float:
    """Test accuracy after a stratified split and z-scoring on training statistics."""
    F = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=int)
    train, test = stratified_split(y, train_fraction, seed)
    missing = set(np.unique(y)) - set(np.unique(y[train]))
    if missing:
        raise ValueError(
            f"classes {sorted(missing)} absent from the training split; use a larger train fraction"
        )
    if np.unique(y[train]).size < 2:
        raise ValueError("training split needs at least two classes")
    if test.size == 0:
        raise ValueError("test split is empty; use a smaller train fraction")
    Xtr, Xte = zscore(F[train], F[test])
    if method == "knn":
        pred = knn_predict(Xtr, y[train], Xte, k)
    elif method == "nearest_centroid":
        pred = nearest_centroid_predict(Xtr, y[train], Xte)
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(np.mean(pred == y[test]))
