"""Dataset ingestion, validation, and normalization transforms.

Reads and writes the LIBSVM sparse text format: one row per line,
``<label> <idx>:<val> ...`` with 1-based strictly ascending indices.
Lines starting with ``#`` are ignored. Stored values must be nonnegative
(zeros are dropped); the ``shift_half`` load option accepts data pre-scaled
to [-1, 1] and maps each stored value ``z`` to ``(z + 1) / 2``. Implicit
zeros are untouched by that shift: sparse semantics keep absent entries 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .vectors import SparseVector


class NormalizeMode(Enum):
    NONE = "none"
    SUM_TO_ONE = "sum1"
    UNIT_L2 = "l2"
    BINARIZE = "binary"
    SHIFT_HALF = "shifthalf"


@dataclass
class Dataset:
    """Labeled sparse rows sharing one dimension."""

    dimension: int
    rows: list = field(default_factory=list)  # list of (label, SparseVector)

    def __len__(self):
        return len(self.rows)

    def labels(self):
        return [label for label, _ in self.rows]

    def vectors(self):
        return [vec for _, vec in self.rows]


def _parse_label(tok, lineno):
    try:
        return int(tok)
    except ValueError:
        pass
    try:
        value = float(tok)
    except ValueError:
        raise ValueError(f"line {lineno}: malformed label {tok!r}") from None
    if value != int(value):
        raise ValueError(f"line {lineno}: label {tok!r} is not an integer")
    return int(value)


def load(f, dimension: int | None = None, shift_half: bool = False) -> Dataset:
    """Parse LIBSVM sparse text into a Dataset.

    ``dimension`` overrides the inferred dimension (the maximum index
    observed); it is required when indices must stay comparable across
    files. With ``shift_half`` every stored value must lie in [-1, 1] and is
    mapped to ``(z + 1) / 2`` before the nonnegativity rules apply.
    """
    raw_rows = []
    max_index = 0
    for lineno, line in enumerate(f, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        label = _parse_label(parts[0], lineno)
        entries = []
        prev = 0
        for tok in parts[1:]:
            idx_s, sep, val_s = tok.partition(":")
            if not sep:
                raise ValueError(f"line {lineno}: malformed entry {tok!r}")
            try:
                idx = int(idx_s)
                val = float(val_s)
            except ValueError:
                raise ValueError(f"line {lineno}: malformed entry {tok!r}") from None
            if idx < 1:
                raise ValueError(f"line {lineno}: index {idx} is not 1-based")
            if idx <= prev:
                raise ValueError(f"line {lineno}: indices not strictly ascending at {idx}")
            prev = idx
            if not math.isfinite(val):
                raise ValueError(f"line {lineno}: non-finite value at index {idx}")
            if shift_half:
                if not -1.0 <= val <= 1.0:
                    raise ValueError(
                        f"line {lineno}: value {val!r} at index {idx} outside [-1, 1] "
                        "(shift_half expects data pre-scaled to [-1, 1])"
                    )
                val = (val + 1.0) / 2.0
            elif val < 0.0:
                raise ValueError(
                    f"line {lineno}: negative weight {val!r} at index {idx} "
                    "(data must be nonnegative)"
                )
            if val != 0.0:
                entries.append((idx - 1, val))
                max_index = max(max_index, idx)
        raw_rows.append((label, entries, lineno))

    dim = dimension if dimension is not None else max_index
    rows = []
    for label, entries, lineno in raw_rows:
        if entries and entries[-1][0] >= dim:
            raise ValueError(
                f"line {lineno}: index {entries[-1][0] + 1} exceeds dimension {dim}"
            )
        rows.append((label, SparseVector(dim,
                                         tuple(i for i, _ in entries),
                                         tuple(w for _, w in entries))))
    return Dataset(dimension=dim, rows=rows)


def dump(dataset: Dataset, f):
    """Write a Dataset as LIBSVM sparse text (exact float round-trip via repr)."""
    for label, vec in dataset.rows:
        f.write(str(label))
        for i, w in zip(vec.indices, vec.weights):
            f.write(f" {i + 1}:{w!r}")
        f.write("\n")


def _transform(vec: SparseVector, mode: NormalizeMode, pos: int) -> SparseVector:
    if mode is NormalizeMode.NONE:
        return vec
    if mode is NormalizeMode.BINARIZE:
        return SparseVector(vec.dimension, vec.indices, (1.0,) * vec.nnz)
    if mode is NormalizeMode.SHIFT_HALF:
        return SparseVector(vec.dimension, vec.indices,
                            tuple((w + 1.0) / 2.0 for w in vec.weights))
    if vec.is_empty():
        raise ValueError(f"row {pos}: cannot normalize an empty vector")
    if mode is NormalizeMode.SUM_TO_ONE:
        denom = vec.weight_sum()
    else:
        denom = vec.l2_norm()
    return SparseVector(vec.dimension, vec.indices,
                        tuple(w / denom for w in vec.weights))


def normalize(dataset: Dataset, mode: NormalizeMode) -> Dataset:
    """Per-row normalization; supports are preserved exactly."""
    rows = [(label, _transform(vec, mode, pos))
            for pos, (label, vec) in enumerate(dataset.rows)]
    return Dataset(dimension=dataset.dimension, rows=rows)
