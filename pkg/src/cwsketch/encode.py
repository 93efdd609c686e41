"""Bit truncation of samples and expansion into sparse binary features.

A sample ``(istar, tstar)`` is truncated to the lowest ``bi`` bits of
``istar`` and ``bt`` bits of ``tstar`` (Euclidean modulo, so negative
``tstar`` keeps a well-defined parity). ``bt = 0`` discards the level
entirely; ``bt = 1`` keeps its parity. A sketch of ``k`` samples expands to
a ``k * 2**(bi+bt)``-dimensional binary vector with exactly one 1 per
repetition block, so inner products of expansions count truncated-code
collisions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cws import CwsSample, Sketch


@dataclass(frozen=True)
class BitBudget:
    """Bits kept of ``istar`` (``bi``) and of ``tstar`` (``bt``)."""

    bi: int
    bt: int

    def __post_init__(self):
        if not 0 <= self.bi <= 32:
            raise ValueError(f"bi must be in [0, 32], got {self.bi}")
        if not 0 <= self.bt <= 32:
            raise ValueError(f"bt must be in [0, 32], got {self.bt}")

    @property
    def width(self) -> int:
        """Size of one repetition block, ``2**(bi+bt)``."""
        return 1 << (self.bi + self.bt)


@dataclass
class EncodedVector:
    """Sparse binary expansion of a sketch: one index per repetition block."""

    k: int
    budget: BitBudget
    indices: np.ndarray

    @property
    def dimension(self) -> int:
        return self.k * self.budget.width

    def __eq__(self, other):
        if not isinstance(other, EncodedVector):
            return NotImplemented
        return (self.k == other.k and self.budget == other.budget
                and np.array_equal(self.indices, other.indices))


def truncate(sample: CwsSample, budget: BitBudget) -> int:
    """Truncated code: i*-bits in the high positions, t*-bits low."""
    return (sample.istar % (1 << budget.bi)) * (1 << budget.bt) \
        + sample.tstar % (1 << budget.bt)


def truncate_codes(istars, tstars, budget: BitBudget):
    """Vectorized :func:`truncate` over sample arrays (any matching shape)."""
    hi = np.asarray(istars) % (1 << budget.bi)
    lo = np.asarray(tstars) % (1 << budget.bt)  # numpy % is Euclidean, like Python's
    return hi * (1 << budget.bt) + lo


def encode(sk: Sketch, budget: BitBudget) -> EncodedVector:
    """Expand a sketch into its sparse binary feature vector."""
    if budget.bi + budget.bt < 1:
        raise ValueError("encoding requires at least one bit (bi + bt >= 1)")
    codes = truncate_codes(sk.istars, sk.tstars, budget)
    offsets = np.arange(sk.k, dtype=np.int64) * budget.width
    return EncodedVector(k=sk.k, budget=budget, indices=offsets + codes)


def inner(eu: EncodedVector, ev: EncodedVector) -> int:
    """Inner product of two expansions: repetitions whose codes collide."""
    if eu.k != ev.k or eu.budget != ev.budget:
        raise ValueError(
            f"encodings are not comparable: (k={eu.k}, {eu.budget}) "
            f"vs (k={ev.k}, {ev.budget})"
        )
    return int(np.count_nonzero(eu.indices == ev.indices))


def write_libsvm(f, rows):
    """Write (label, EncodedVector) rows as LIBSVM sparse text, 1-based indices."""
    for label, ev in rows:
        f.write(str(label))
        for idx in ev.indices:
            f.write(f" {int(idx) + 1}:1")
        f.write("\n")


def rows_from_dataset(dataset, k: int, budget: BitBudget):
    """Reconstruct (label, EncodedVector) rows from a loaded LIBSVM dataset.

    Validates the block structure: every row must hold exactly ``k``
    unit-valued entries, one inside each block ``[j*width, (j+1)*width)``.
    """
    if budget.bi + budget.bt < 1:
        raise ValueError("encoding requires at least one bit (bi + bt >= 1)")
    width = budget.width
    total = k * width
    if dataset.dimension > total:
        raise ValueError(
            f"dataset dimension {dataset.dimension} exceeds encoding "
            f"dimension {total} for k={k}, {budget}"
        )
    out = []
    for pos, (label, vec) in enumerate(dataset.rows):
        if vec.nnz != k:
            raise ValueError(f"row {pos}: expected {k} features, found {vec.nnz}")
        if any(w != 1.0 for w in vec.weights):
            raise ValueError(f"row {pos}: encoded features must all be 1")
        idx = vec.index_array()
        if not np.array_equal(idx // width, np.arange(k)):
            raise ValueError(f"row {pos}: features do not fall one per block")
        out.append((label, EncodedVector(k=k, budget=budget, indices=idx)))
    return out
