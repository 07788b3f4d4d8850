"""Class-weighted linear SVM (one-vs-rest) with per-partition standardisation.

Each binary problem minimises

    1/2 ||w~||^2 + sum_i C * weight[y_i] * max(0, 1 - s_i * w~ . x~_i)

where ``x~ = [x, 1]`` carries the bias (so the bias is regularised along
with the weights) and ``s_i`` is +1 for the positive class, -1 otherwise.
The dual is solved by cyclic coordinate descent with a fixed sample order.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np

from .errors import DimensionMismatch, EmptyMatrix, SingleClass

FORMAT_VERSION = 1
DEFAULT_TOL = 1e-6
DEFAULT_MAX_EPOCHS = 10_000


# ------------------------------------------------------------ standardiser

@dataclass(frozen=True, eq=False)
class Standardizer:
    means: np.ndarray
    stds: np.ndarray  # 0 marks a constant training column

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != len(self.means):
            raise DimensionMismatch(f"expected {len(self.means)} features, got {X.shape[-1]}")
        live = self.stds > 0
        scale = np.where(live, self.stds, 1.0)
        return np.where(live, (X - self.means) / scale, 0.0)

    @classmethod
    def identity(cls, dim: int) -> "Standardizer":
        return cls(np.zeros(dim), np.ones(dim))


def fit_standardizer(X_train) -> Standardizer:
    """Column means and population standard deviations of the training rows."""
    X = np.asarray(X_train, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyMatrix("cannot fit a standardiser on an empty matrix")
    means = X.mean(axis=0)
    stds = np.sqrt(np.mean((X - means) ** 2, axis=0))
    # columns constant up to rounding count as constant
    stds = np.where(stds > 1e-12 * np.maximum(1.0, np.abs(means)), stds, 0.0)
    return Standardizer(means, stds)


def apply_standardizer(s: Standardizer, X) -> np.ndarray:
    return s.transform(X)


# ----------------------------------------------------------- class weights

def class_weights(labels) -> dict:
    """Inverse-frequency weights ``N / (K * N_c)``; balanced data gives all 1.0."""
    counts = Counter(labels)
    if len(counts) < 2:
        raise SingleClass(f"need at least two classes, got {sorted(counts)}")
    n, k = sum(counts.values()), len(counts)
    return {c: n / (k * counts[c]) for c in sorted(counts)}


# ------------------------------------------------------------------ solver

@numba.njit(cache=True, nogil=True)
def _dual_cd(X, s, upper, tol, max_epochs, trace):
    n, d = X.shape
    w = np.zeros(d)
    alpha = np.zeros(n)
    qii = np.empty(n)
    for i in range(n):
        qii[i] = X[i] @ X[i]
    epochs = 0
    for epoch in range(max_epochs):
        pg_max = -np.inf
        pg_min = np.inf
        for i in range(n):
            g = s[i] * (w @ X[i]) - 1.0
            a = alpha[i]
            if a <= 0.0:
                pg = min(g, 0.0)
            elif a >= upper[i]:
                pg = max(g, 0.0)
            else:
                pg = g
            if pg > pg_max:
                pg_max = pg
            if pg < pg_min:
                pg_min = pg
            if pg != 0.0:
                a_new = min(max(a - g / qii[i], 0.0), upper[i])
                delta = (a_new - a) * s[i]
                if delta != 0.0:
                    w += delta * X[i]
                    alpha[i] = a_new
        epochs = epoch + 1
        if epoch < trace.shape[0]:
            trace[epoch] = 0.5 * (w @ w) - alpha.sum()
        if pg_max - pg_min < tol:
            break
    return w, alpha, epochs


@dataclass(frozen=True, eq=False)
class BinaryFit:
    w: np.ndarray        # length D + 1, bias last
    alpha: np.ndarray
    epochs: int
    dual_trace: np.ndarray


def solve_binary(X, s, upper, tol: float = DEFAULT_TOL,
                 max_epochs: int = DEFAULT_MAX_EPOCHS) -> BinaryFit:
    """Dual coordinate descent for one weighted hinge-loss problem.

    ``X`` is the raw N x D matrix (the bias column is appended here), ``s``
    the +-1 targets and ``upper`` the per-sample box ``C * weight[y_i]``.
    ``dual_trace`` holds the dual objective after each epoch; it never
    increases.
    """
    X = np.asarray(X, dtype=np.float64)
    Xa = np.ascontiguousarray(np.hstack([X, np.ones((X.shape[0], 1))]))
    trace = np.full(min(max_epochs, 100_000), np.nan)
    w, alpha, epochs = _dual_cd(Xa, np.asarray(s, dtype=np.float64),
                                np.asarray(upper, dtype=np.float64),
                                float(tol), int(max_epochs), trace)
    return BinaryFit(w, alpha, epochs, trace[:min(epochs, len(trace))])


def primal_objective(w_aug, X, s, upper) -> float:
    """Weighted hinge primal for an augmented weight vector (bias last)."""
    X = np.asarray(X, dtype=np.float64)
    margins = np.asarray(s) * (X @ w_aug[:-1] + w_aug[-1])
    return float(0.5 * w_aug @ w_aug + np.sum(np.asarray(upper) * np.maximum(0.0, 1.0 - margins)))


# ------------------------------------------------------------------- model

@dataclass(frozen=True, eq=False)
class LinearSvmModel:
    classes: tuple
    weights: np.ndarray   # K x D
    biases: np.ndarray    # K
    C: float
    task: str = ""
    feature_set: str = ""
    standardizer: Standardizer | None = None
    class_weight: dict = field(default_factory=dict)
    feature_names: tuple = ()

    @property
    def dim(self) -> int:
        return int(self.weights.shape[1])

    def decision_function(self, X) -> np.ndarray:
        """Scores for already-standardised rows; shape ``(N, K)`` or ``(K,)``."""
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.dim:
            raise DimensionMismatch(f"model expects {self.dim} features, got {X.shape[-1]}")
        return X @ self.weights.T + self.biases

    def predict(self, X):
        scores = self.decision_function(X)
        idx = np.argmax(scores, axis=-1)  # first maximum wins ties
        if np.ndim(idx) == 0:
            return self.classes[int(idx)]
        return [self.classes[int(i)] for i in idx]

    def predict_raw(self, X):
        """Standardise with the model's training statistics, then predict."""
        std = self.standardizer or Standardizer.identity(self.dim)
        return self.predict(std.transform(X))

    # serialisation
    def to_dict(self) -> dict:
        std = self.standardizer or Standardizer.identity(self.dim)
        return {
            "format_version": FORMAT_VERSION,
            "task": self.task,
            "feature_set": self.feature_set,
            "classes": list(self.classes),
            "C": float(self.C),
            "class_weight": {str(k): float(v) for k, v in self.class_weight.items()},
            "means": std.means.tolist(),
            "stds": std.stds.tolist(),
            "weights": {str(c): self.weights[k].tolist() for k, c in enumerate(self.classes)},
            "bias": {str(c): float(self.biases[k]) for k, c in enumerate(self.classes)},
            "feature_names": list(self.feature_names),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LinearSvmModel":
        if data.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported model format {data.get('format_version')!r}")
        classes = tuple(data["classes"])
        weights = np.array([data["weights"][str(c)] for c in classes], dtype=np.float64)
        biases = np.array([data["bias"][str(c)] for c in classes], dtype=np.float64)
        std = Standardizer(np.array(data["means"], dtype=np.float64),
                           np.array(data["stds"], dtype=np.float64))
        return cls(classes, weights, biases, float(data["C"]), data.get("task", ""),
                   data.get("feature_set", ""), std, dict(data.get("class_weight", {})),
                   tuple(data.get("feature_names", ())))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "LinearSvmModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def fit(X, y, C: float, weights: dict | None = None, *, task: str = "",
        feature_set: str = "", standardizer: Standardizer | None = None,
        feature_names=(), tol: float = DEFAULT_TOL,
        max_epochs: int = DEFAULT_MAX_EPOCHS) -> LinearSvmModel:
    """One-vs-rest fit on standardised ``X``.

    ``weights`` maps class -> multiplier on ``C``; missing means unweighted.
    """
    X = np.asarray(X, dtype=np.float64)
    y = list(y)
    if X.ndim != 2 or X.shape[0] != len(y):
        raise DimensionMismatch(f"X has shape {X.shape} but there are {len(y)} labels")
    if not np.all(np.isfinite(X)):
        raise ValueError("feature matrix contains NaN or Inf")
    classes = tuple(sorted(set(y)))
    if len(classes) < 2:
        raise SingleClass(f"need at least two classes, got {list(classes)}")
    if C <= 0:
        raise ValueError("C must be positive")
    weights = dict(weights) if weights is not None else {c: 1.0 for c in classes}
    upper = C * np.array([weights[c] for c in y], dtype=np.float64)
    labels = np.array([classes.index(c) for c in y])

    W = np.zeros((len(classes), X.shape[1]))
    b = np.zeros(len(classes))
    for k in range(len(classes)):
        s = np.where(labels == k, 1.0, -1.0)
        res = solve_binary(X, s, upper, tol, max_epochs)
        W[k], b[k] = res.w[:-1], res.w[-1]
    return LinearSvmModel(classes, W, b, float(C), task, feature_set,
                          standardizer or Standardizer.identity(X.shape[1]),
                          {c: float(weights[c]) for c in classes}, tuple(feature_names))


def train(X_raw, y, C: float, **kwargs) -> LinearSvmModel:
    """Fit the standardiser and class weights on ``X_raw``/``y``, then the SVM."""
    std = fit_standardizer(X_raw)
    return fit(std.transform(X_raw), y, C, class_weights(y), standardizer=std, **kwargs)


def predict(model: LinearSvmModel, x):
    """Label for one standardised feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionMismatch("predict expects a single feature vector")
    return model.predict(x)
