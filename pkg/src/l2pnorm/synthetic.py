"""Seeded synthetic instances with a planted row support."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray


@dataclass(frozen=True)
class PlantedRegression:
    A: NDArray[np.float64]  # d x n
    B: NDArray[np.float64]  # n x c
    X_true: NDArray[np.float64]
    support: tuple[int, ...]


def planted_regression(d=40, n=30, c=2, support_size=3, noise=0.01, seed=0):
    """``B = A^T X_true + noise`` with ``X_true`` nonzero on ``support_size``
    random rows.  Support rows have norm at least 1."""
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((d, n))
    support = np.sort(rng.choice(d, size=support_size, replace=False))
    X = np.zeros((d, c))
    rows = rng.standard_normal((support_size, c))
    rows /= np.linalg.norm(rows, axis=1, keepdims=True)
    X[support] = rows * rng.uniform(1.0, 2.0, size=(support_size, 1))
    B = A.T @ X + noise * rng.standard_normal((n, c))
    return PlantedRegression(A, B, X, tuple(int(i) for i in support))


def random_constrained(rng, n_range=(2, 20), extra_range=(1, 40), c_range=(1, 3)):
    """Gaussian ``(M, B)`` with ``n`` rows and ``n + extra`` columns."""
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    m = n + int(rng.integers(extra_range[0], extra_range[1] + 1))
    c = int(rng.integers(c_range[0], c_range[1] + 1))
    return rng.standard_normal((n, m)), rng.standard_normal((n, c))


def planted_classification(n=60, d=200, classes=3, support_size=5, shift=3.0, seed=0):
    """Labelled samples whose class means differ only on the support features.

    Returns ``(features n x d, labels, support)``.
    """
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % classes
    rng.shuffle(labels)
    support = np.sort(rng.choice(d, size=support_size, replace=False))
    means = np.zeros((classes, d))
    means[:, support] = shift * rng.choice([-1.0, 1.0], size=(classes, support_size))
    features = rng.standard_normal((n, d)) + means[labels]
    return features, labels, tuple(int(i) for i in support)
