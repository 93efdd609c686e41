"""Minimal linear classifier over encoded sketch features.

Averaged stochastic subgradient descent on the l2-regularized hinge (or
logistic) loss, one-vs-rest for more than two classes. This is a
self-contained stand-in for external linear-SVM packages: encoded features
can always be exported as LIBSVM text instead and trained elsewhere.

The returned weights are the running average of all SGD iterates, kept
exactly with sparse bookkeeping: writing ``w_t = s_t * W`` (scalar scale,
shared table) lets both the regularization decay and the iterate average be
maintained in O(nnz) per step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from . import rng
from .encode import BitBudget, EncodedVector

_LOSSES = ("hinge", "logistic")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    lam: float
    seed: int
    loss: str = "hinge"

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if not (math.isfinite(self.lam) and self.lam > 0.0):
            raise ValueError(f"lambda must be finite and > 0, got {self.lam}")
        if self.loss not in _LOSSES:
            raise ValueError(f"loss must be one of {_LOSSES}, got {self.loss!r}")


@dataclass
class LinearModel:
    """One-vs-rest linear model over the encoded feature space."""

    k: int
    budget: BitBudget
    classes: tuple
    lam: float
    weights: np.ndarray  # (n_classes, k * budget.width)
    biases: np.ndarray   # (n_classes,)

    @property
    def dimension(self) -> int:
        return self.k * self.budget.width


def _sgd_train(features, dim, labels, classes, cfg: TrainConfig):
    """Core trainer over generic sparse rows ``features[p] = (indices, values)``.

    ``values is None`` means all-ones (the encoded-feature case). Returns
    averaged (weights, biases). Fully deterministic given ``cfg.seed``.
    """
    n = len(features)
    n_classes = len(classes)
    class_pos = {c: pos for pos, c in enumerate(classes)}
    y_rows = -np.ones((n, n_classes))
    for p, label in enumerate(labels):
        y_rows[p, class_pos[label]] = 1.0

    w_table = np.zeros((n_classes, dim))
    avg_acc = np.zeros((n_classes, dim))
    biases = np.zeros(n_classes)
    bias_sum = np.zeros(n_classes)
    scale = 1.0
    scale_sum = 0.0
    t = 0
    lam = cfg.lam

    for epoch in range(cfg.epochs):
        order = rng.permutation(n, rng.derive_seed(cfg.seed, epoch))
        for p in order:
            t += 1
            eta = 1.0 / (1.0 + lam * t)
            idx, vals = features[p]
            cols = w_table[:, idx]
            if vals is None:
                scores = scale * cols.sum(axis=1) + biases
            else:
                scores = scale * (cols @ vals) + biases
            y = y_rows[p]
            margins = y * scores
            scale *= 1.0 - eta * lam
            if cfg.loss == "hinge":
                grad = np.where(margins < 1.0, y, 0.0)
            else:
                grad = y * expit(-margins)
            delta = (eta / scale) * grad
            if np.any(delta != 0.0):
                if vals is None:
                    upd = np.broadcast_to(delta[:, None], (n_classes, len(idx)))
                else:
                    upd = delta[:, None] * vals[None, :]
                w_table[:, idx] += upd
                avg_acc[:, idx] += upd * scale_sum
            biases = biases + eta * grad
            scale_sum += scale
            bias_sum += biases

    weights = (scale_sum * w_table - avg_acc) / t
    return weights, bias_sum / t


def _check_rows(rows):
    if not rows:
        raise ValueError("training set is empty")
    k = rows[0][1].k
    budget = rows[0][1].budget
    for pos, (_, ev) in enumerate(rows):
        if ev.k != k or ev.budget != budget:
            raise ValueError(
                f"row {pos}: inconsistent encoding (k={ev.k}, {ev.budget}), "
                f"expected (k={k}, {budget})"
            )
    return k, budget


def train(rows, cfg: TrainConfig) -> LinearModel:
    """Fit a one-vs-rest linear model on (label, EncodedVector) rows."""
    k, budget = _check_rows(rows)
    classes = tuple(sorted({label for label, _ in rows}))
    if len(classes) < 2:
        raise ValueError(f"training needs >= 2 distinct labels, got {classes}")
    features = [(ev.indices, None) for _, ev in rows]
    labels = [label for label, _ in rows]
    weights, biases = _sgd_train(features, k * budget.width, labels, classes, cfg)
    return LinearModel(k=k, budget=budget, classes=classes, lam=cfg.lam,
                       weights=weights, biases=biases)


def decision_scores(model: LinearModel, x: EncodedVector):
    if x.k != model.k or x.budget != model.budget:
        raise ValueError(
            f"encoding (k={x.k}, {x.budget}) does not match model "
            f"(k={model.k}, {model.budget})"
        )
    # exactly k weight coordinates contribute, one per repetition block
    return model.weights[:, x.indices].sum(axis=1) + model.biases


def predict(model: LinearModel, x: EncodedVector):
    """Class with the highest score; ties break to the smallest label."""
    scores = decision_scores(model, x)
    return model.classes[int(np.argmax(scores))]


def evaluate(model: LinearModel, test_rows) -> float:
    """Fraction of correct predictions on (label, EncodedVector) rows."""
    test_rows = list(test_rows)
    if not test_rows:
        raise ValueError("test set is empty")
    hits = sum(1 for label, ev in test_rows if predict(model, ev) == label)
    return hits / len(test_rows)


_MODEL_MAGIC = "cws-linear-model"
_MODEL_VERSION = 1


def save_model(model: LinearModel, f):
    """Text serialization: header then one dense weight row per class."""
    f.write(f"{_MODEL_MAGIC} {_MODEL_VERSION}\n")
    f.write(f"k {model.k}\n")
    f.write(f"bi {model.budget.bi}\n")
    f.write(f"bt {model.budget.bt}\n")
    f.write(f"lambda {model.lam!r}\n")
    f.write("classes " + " ".join(str(c) for c in model.classes) + "\n")
    for pos in range(len(model.classes)):
        row = [repr(float(model.biases[pos]))]
        row.extend(repr(float(w)) for w in model.weights[pos])
        f.write(" ".join(row))
        f.write("\n")


def load_model(f) -> LinearModel:
    header = f.readline().split()
    if len(header) != 2 or header[0] != _MODEL_MAGIC:
        raise ValueError("not a model file: bad header")
    if int(header[1]) != _MODEL_VERSION:
        raise ValueError(f"unsupported model format version {header[1]}")

    def expect(key):
        parts = f.readline().split()
        if len(parts) < 2 or parts[0] != key:
            raise ValueError(f"model file: expected '{key}' line")
        return parts[1:]

    k = int(expect("k")[0])
    bi = int(expect("bi")[0])
    bt = int(expect("bt")[0])
    lam = float(expect("lambda")[0])
    classes = tuple(int(c) for c in expect("classes"))
    budget = BitBudget(bi, bt)
    dim = k * budget.width
    weights = np.empty((len(classes), dim))
    biases = np.empty(len(classes))
    for pos in range(len(classes)):
        vals = f.readline().split()
        if len(vals) != dim + 1:
            raise ValueError(f"model file: class row {pos} has {len(vals)} values, "
                             f"expected {dim + 1}")
        biases[pos] = float(vals[0])
        weights[pos] = [float(v) for v in vals[1:]]
    return LinearModel(k=k, budget=budget, classes=classes, lam=lam,
                       weights=weights, biases=biases)
