"""Sparse nonnegative vectors, the universal input type of this library."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SparseVector:
    """Immutable sparse vector with strictly positive stored weights.

    Zeros are represented by absence: ``indices`` lists the support in
    strictly increasing order and ``weights[p]`` is the value stored at
    coordinate ``indices[p]``. All stored weights are finite and > 0.
    """

    dimension: int
    indices: tuple[int, ...] = ()
    weights: tuple[float, ...] = ()

    def __post_init__(self):
        if self.dimension < 0:
            raise ValueError(f"dimension must be >= 0, got {self.dimension}")
        if len(self.indices) != len(self.weights):
            raise ValueError("indices and weights must have equal length")
        prev = -1
        for i, w in zip(self.indices, self.weights):
            if i <= prev:
                raise ValueError(f"indices must be strictly increasing, got {i} after {prev}")
            if i >= self.dimension:
                raise ValueError(f"index {i} out of range for dimension {self.dimension}")
            if not math.isfinite(w) or w <= 0.0:
                raise ValueError(f"weight at index {i} must be finite and > 0, got {w}")
            prev = i

    @classmethod
    def from_pairs(cls, dimension, pairs):
        """Build from (index, weight) pairs in any order; zero weights are dropped."""
        kept = sorted((int(i), float(w)) for i, w in pairs if float(w) != 0.0)
        return cls(dimension, tuple(i for i, _ in kept), tuple(w for _, w in kept))

    @classmethod
    def from_dense(cls, values):
        """Build from a dense sequence; the dimension is its length."""
        vals = [float(v) for v in values]
        return cls.from_pairs(len(vals), ((i, v) for i, v in enumerate(vals) if v != 0.0))

    @property
    def nnz(self):
        return len(self.indices)

    def is_empty(self):
        return not self.indices

    def weight_sum(self):
        return math.fsum(self.weights)

    def l2_norm(self):
        return math.sqrt(math.fsum(w * w for w in self.weights))

    def scaled(self, factor):
        """Copy with every stored weight multiplied by ``factor`` (> 0)."""
        if not (math.isfinite(factor) and factor > 0.0):
            raise ValueError(f"scale factor must be finite and > 0, got {factor}")
        return SparseVector(self.dimension, self.indices, tuple(w * factor for w in self.weights))

    def to_dense(self):
        out = np.zeros(self.dimension, dtype=np.float64)
        if self.indices:
            out[np.fromiter(self.indices, dtype=np.int64)] = self.weights
        return out

    def index_array(self):
        return np.fromiter(self.indices, dtype=np.int64, count=self.nnz)

    def weight_array(self):
        return np.fromiter(self.weights, dtype=np.float64, count=self.nnz)
