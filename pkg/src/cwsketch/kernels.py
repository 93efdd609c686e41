"""Exact evaluation of the min-max kernel family and Gram matrix export.

Five kernels over nonnegative sparse vectors:

* ``min_max``      -- sum of coordinate minima over sum of coordinate maxima
* ``resemblance``  -- Jaccard similarity of the supports (binary special case)
* ``intersection`` -- sum of coordinate minima, on sum-to-one normalized input
* ``n_min_max``    -- min-max on sum-to-one normalized input
* ``linear``       -- dot product, on unit-l2 normalized input

Normalization is a precondition checked here (within ``NORM_TOL``), not an
implicit step; use :mod:`cwsketch.data` to produce compliant vectors.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .vectors import SparseVector

NORM_TOL = 1e-9

# densification budget for the fast Gram path, in float64 elements
_DENSE_BUDGET = 50_000_000
_BLOCK_BUDGET = 4_000_000


class KernelKind(Enum):
    MIN_MAX = "minmax"
    N_MIN_MAX = "nminmax"
    INTERSECTION = "intersection"
    RESEMBLANCE = "resemblance"
    LINEAR = "linear"


@dataclass
class GramMatrix:
    """Dense row-major kernel matrix ``values[a][b] = kernel(left[a], right[b])``."""

    rows: int
    cols: int
    values: np.ndarray = field(repr=False)
    kind: KernelKind = KernelKind.MIN_MAX


def _check_dimensions(u: SparseVector, v: SparseVector):
    if u.dimension != v.dimension:
        raise ValueError(
            f"dimension mismatch: {u.dimension} vs {v.dimension}"
        )


def _check_not_both_empty(u: SparseVector, v: SparseVector):
    if u.is_empty() and v.is_empty():
        raise ValueError("kernel of two empty vectors is undefined (0/0)")


def _check_sum_to_one(u: SparseVector, side: str):
    s = u.weight_sum()
    if abs(s - 1.0) > NORM_TOL:
        raise ValueError(
            f"{side} vector is not sum-to-one normalized (sum={s!r})"
        )


def _check_unit_l2(u: SparseVector, side: str):
    n = u.l2_norm()
    if abs(n - 1.0) > NORM_TOL:
        raise ValueError(
            f"{side} vector is not unit-l2 normalized (norm={n!r})"
        )


def _min_max_sums(u: SparseVector, v: SparseVector):
    """Sorted-merge over the union of supports; absent indices contribute 0."""
    mins = []
    maxs = []
    ui, uw, vi, vw = u.indices, u.weights, v.indices, v.weights
    a = b = 0
    while a < len(ui) and b < len(vi):
        if ui[a] == vi[b]:
            x, y = uw[a], vw[b]
            if x < y:
                mins.append(x)
                maxs.append(y)
            else:
                mins.append(y)
                maxs.append(x)
            a += 1
            b += 1
        elif ui[a] < vi[b]:
            maxs.append(uw[a])
            a += 1
        else:
            maxs.append(vw[b])
            b += 1
    maxs.extend(uw[a:])
    maxs.extend(vw[b:])
    return math.fsum(mins), math.fsum(maxs)


def min_max(u: SparseVector, v: SparseVector) -> float:
    """Ratio of summed coordinate minima to summed coordinate maxima, in [0, 1]."""
    _check_dimensions(u, v)
    _check_not_both_empty(u, v)
    num, den = _min_max_sums(u, v)
    return num / den


def resemblance(u: SparseVector, v: SparseVector) -> float:
    """Jaccard similarity of the two supports, in [0, 1]."""
    _check_dimensions(u, v)
    _check_not_both_empty(u, v)
    su, sv = set(u.indices), set(v.indices)
    inter = len(su & sv)
    return inter / (len(su) + len(sv) - inter)


def intersection(u: SparseVector, v: SparseVector) -> float:
    """Sum of coordinate minima; both inputs must be sum-to-one normalized."""
    _check_dimensions(u, v)
    _check_sum_to_one(u, "left")
    _check_sum_to_one(v, "right")
    num, _ = _min_max_sums(u, v)
    return num


def n_min_max(u: SparseVector, v: SparseVector) -> float:
    """Min-max kernel of sum-to-one normalized inputs, in [0, 1]."""
    _check_dimensions(u, v)
    _check_sum_to_one(u, "left")
    _check_sum_to_one(v, "right")
    num, den = _min_max_sums(u, v)
    return num / den


def linear(u: SparseVector, v: SparseVector) -> float:
    """Dot product over the intersection of supports; unit-l2 inputs, in [-1, 1]."""
    _check_dimensions(u, v)
    _check_unit_l2(u, "left")
    _check_unit_l2(v, "right")
    ui, uw, vi, vw = u.indices, u.weights, v.indices, v.weights
    prods = []
    a = b = 0
    while a < len(ui) and b < len(vi):
        if ui[a] == vi[b]:
            prods.append(uw[a] * vw[b])
            a += 1
            b += 1
        elif ui[a] < vi[b]:
            a += 1
        else:
            b += 1
    return math.fsum(prods)


_PAIR_FUNCS = {
    KernelKind.MIN_MAX: min_max,
    KernelKind.N_MIN_MAX: n_min_max,
    KernelKind.INTERSECTION: intersection,
    KernelKind.RESEMBLANCE: resemblance,
    KernelKind.LINEAR: linear,
}


def kernel_value(u: SparseVector, v: SparseVector, kind: KernelKind) -> float:
    """Evaluate one kernel pair by kind."""
    return _PAIR_FUNCS[kind](u, v)


def _validate_gram_inputs(left, right, kind):
    if not left or not right:
        raise ValueError("gram requires nonempty vector lists")
    dim = left[0].dimension
    for name, vecs in (("left", left), ("right", right)):
        for pos, vec in enumerate(vecs):
            if vec.dimension != dim:
                raise ValueError(
                    f"dimension mismatch in {name} row {pos}: "
                    f"{vec.dimension} vs {dim}"
                )
            if kind in (KernelKind.N_MIN_MAX, KernelKind.INTERSECTION):
                try:
                    _check_sum_to_one(vec, name)
                except ValueError as exc:
                    raise ValueError(f"{name} row {pos}: {exc}") from None
            elif kind is KernelKind.LINEAR:
                try:
                    _check_unit_l2(vec, name)
                except ValueError as exc:
                    raise ValueError(f"{name} row {pos}: {exc}") from None
    if kind in (KernelKind.MIN_MAX, KernelKind.RESEMBLANCE):
        empty_left = [p for p, vec in enumerate(left) if vec.is_empty()]
        empty_right = [p for p, vec in enumerate(right) if vec.is_empty()]
        if empty_left and empty_right:
            raise ValueError(
                f"kernel undefined (0/0) at row {empty_left[0]}, "
                f"col {empty_right[0]}: both vectors are empty"
            )
    return dim


def _dense_block(kind, xblk, sums_blk, ydense, sums_right, out_blk):
    if kind is KernelKind.LINEAR:
        np.matmul(xblk, ydense.T, out=out_blk)
        return
    # summed minima per pair; maxima follow from sum(u)+sum(v)-sum(min)
    smin = np.minimum(xblk[:, None, :], ydense[None, :, :]).sum(axis=2)
    if kind is KernelKind.INTERSECTION:
        out_blk[:] = smin
        return
    den = sums_blk[:, None] + sums_right[None, :] - smin
    out_blk[:] = smin / den


def _gram_dense(left, right, kind, threads):
    n_left, n_right = len(left), len(right)
    dim = left[0].dimension
    binary = kind is KernelKind.RESEMBLANCE

    def densify(vecs):
        mat = np.zeros((len(vecs), dim), dtype=np.float64)
        for p, vec in enumerate(vecs):
            if vec.indices:
                w = 1.0 if binary else vec.weight_array()
                mat[p, vec.index_array()] = w
        return mat

    x = densify(left)
    y = densify(right)
    sums_left = x.sum(axis=1)
    sums_right = y.sum(axis=1)
    values = np.empty((n_left, n_right), dtype=np.float64)

    block = max(1, _BLOCK_BUDGET // max(1, n_right * dim))
    starts = range(0, n_left, block)

    def work(start):
        stop = min(start + block, n_left)
        _dense_block(kind, x[start:stop], sums_left[start:stop],
                     y, sums_right, values[start:stop])

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, starts))
    else:
        for start in starts:
            work(start)
    return values


def _gram_pairs(left, right, kind, threads):
    fn = _PAIR_FUNCS[kind]
    values = np.empty((len(left), len(right)), dtype=np.float64)

    def work(a):
        u = left[a]
        row = values[a]
        for b, v in enumerate(right):
            try:
                row[b] = fn(u, v)
            except ValueError as exc:
                raise ValueError(f"row {a}, col {b}: {exc}") from None

    rows = range(len(left))
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, rows))
    else:
        for a in rows:
            work(a)
    return values


def gram(left, right, kind: KernelKind, threads: int | None = None) -> GramMatrix:
    """Kernel matrix between two vector lists.

    Rows may be computed in parallel (``threads``); the result is identical
    regardless of thread count. Small-dimension inputs take a vectorized
    dense path, everything else falls back to per-pair sorted merges.
    """
    dim = _validate_gram_inputs(left, right, kind)
    if dim > 0 and (len(left) + len(right)) * dim <= _DENSE_BUDGET:
        values = _gram_dense(left, right, kind, threads)
    else:
        values = _gram_pairs(left, right, kind, threads)
    return GramMatrix(rows=len(left), cols=len(right), values=values, kind=kind)


def write_precomputed(matrix: GramMatrix, labels, f):
    """Serialize a Gram matrix in the LIBSVM precomputed-kernel text format.

    One line per left vector: ``<label> 0:<serial> 1:<K(x,x1)> 2:<K(x,x2)> ...``
    with 1-based serial numbers.
    """
    labels = list(labels)
    if len(labels) != matrix.rows:
        raise ValueError(
            f"label count {len(labels)} does not match matrix rows {matrix.rows}"
        )
    for a in range(matrix.rows):
        row = matrix.values[a]
        parts = [str(labels[a]), f"0:{a + 1}"]
        parts.extend(f"{b + 1}:{float(row[b])!r}" for b in range(matrix.cols))
        f.write(" ".join(parts))
        f.write("\n")
