"""Kernel estimation from sketches and the Monte-Carlo bias/MSE harness.

The fraction of repetitions on which two sketches collide estimates the
min-max kernel. The full scheme compares whole ``(istar, tstar)`` samples;
truncated schemes compare bit-truncated codes. :func:`simulate` repeats the
estimate over many independently seeded sketch pairs and reports empirical
bias and mean square error next to the binomial variance ``K(1-K)/k``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import kernels, rng
from .cws import Sketch, sketch_batch
from .encode import BitBudget, truncate_codes
from .vectors import SparseVector

_ELEMENT_BUDGET = 4_000_000


def _wide_bi(dimension: int) -> int:
    """Smallest bit count that codes every coordinate of [0, dimension)."""
    if dimension < 1:
        raise ValueError(f"dimension must be >= 1, got {dimension}")
    return max(1, (dimension - 1).bit_length())


@dataclass(frozen=True)
class Scheme:
    """What part of a sample two sketches are matched on.

    ``budget is None`` is the full scheme: exact ``(istar, tstar)`` equality.
    Otherwise samples are matched on their truncated codes.
    """

    name: str
    budget: BitBudget | None = None

    def __post_init__(self):
        if self.budget is not None and self.budget.bi + self.budget.bt < 1:
            raise ValueError("truncated scheme requires bi + bt >= 1")

    @classmethod
    def full(cls) -> "Scheme":
        return cls("full", None)

    @classmethod
    def t_bits(cls, dimension: int, bt: int) -> "Scheme":
        """Keep ``istar`` whole (enough bits for the dimension) and ``bt`` bits of ``tstar``.

        ``bt = 0`` is the 0-bit scheme; ``bt = 1`` records the parity of ``tstar``.
        """
        return cls(f"{bt}bit", BitBudget(_wide_bi(dimension), bt))

    @classmethod
    def zero_bit(cls, dimension: int) -> "Scheme":
        return cls.t_bits(dimension, 0)

    @classmethod
    def truncated(cls, budget: BitBudget) -> "Scheme":
        return cls(f"bi{budget.bi}bt{budget.bt}", budget)


def _match_matrix(istars_u, tstars_u, istars_v, tstars_v, scheme: Scheme):
    if scheme.budget is None:
        return (istars_u == istars_v) & (tstars_u == tstars_v)
    cu = truncate_codes(istars_u, tstars_u, scheme.budget)
    cv = truncate_codes(istars_v, tstars_v, scheme.budget)
    return cu == cv


def collision_rate(su: Sketch, sv: Sketch, scheme: Scheme) -> float:
    """Fraction of repetitions whose samples agree under ``scheme``."""
    if (su.seed, su.k, su.dimension) != (sv.seed, sv.k, sv.dimension):
        raise ValueError(
            "sketches are not comparable: "
            f"(seed={su.seed}, k={su.k}, dim={su.dimension}) vs "
            f"(seed={sv.seed}, k={sv.k}, dim={sv.dimension})"
        )
    matches = _match_matrix(su.istars, su.tstars, sv.istars, sv.tstars, scheme)
    return int(np.count_nonzero(matches)) / su.k


def theoretical_variance(K: float, k: int) -> float:
    """Binomial variance ``K(1-K)/k`` of the full-scheme estimator."""
    if not 0.0 <= K <= 1.0:
        raise ValueError(f"K must be in [0, 1], got {K}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return K * (1.0 - K) / k


@dataclass(frozen=True)
class ReportRow:
    k: int
    scheme: str
    bias: float
    mse: float
    theoretical_var: float
    n_reps: int


@dataclass(frozen=True)
class SimulationReport:
    pair: str
    exact: float
    rows: tuple


def simulate(u: SparseVector, v: SparseVector, k_grid, schemes, n_reps: int,
             seed: int, pair_id: str = "pair") -> SimulationReport:
    """Empirical bias and MSE of the collision-rate estimator for one pair.

    For every replicate a fresh seed is derived from ``seed`` and both
    vectors are sketched under it at ``max(k_grid)``; smaller ``k`` reuse the
    leading repetitions (sketches are prefix-consistent in ``k``). Each
    (k, scheme) cell reports ``mean(est) - K`` and ``mean((est - K)^2)``
    against the exact kernel ``K = min_max(u, v)``, plus ``K(1-K)/k``.

    Deterministic for fixed inputs and seed; replicate chunking is an
    implementation detail and cannot change the result (sums are
    exactly-rounded).
    """
    k_grid = list(k_grid)
    schemes = list(schemes)
    if not k_grid or any(k < 1 for k in k_grid):
        raise ValueError("k_grid must be a nonempty list of positive integers")
    if not schemes:
        raise ValueError("at least one scheme is required")
    if n_reps < 1:
        raise ValueError(f"n_reps must be >= 1, got {n_reps}")

    K = kernels.min_max(u, v)
    kmax = max(k_grid)
    seeds = rng.derive_seeds(seed, n_reps)
    m = max(u.nnz, v.nnz)

    rates = {(k, s.name): np.empty(n_reps) for k in k_grid for s in schemes}
    chunk = max(1, _ELEMENT_BUDGET // max(1, m * kmax))
    for start in range(0, n_reps, chunk):
        stop = min(start + chunk, n_reps)
        batch = seeds[start:stop]
        iu, tu = sketch_batch(u, kmax, batch)
        iv, tv = sketch_batch(v, kmax, batch)
        for scheme in schemes:
            matches = _match_matrix(iu, tu, iv, tv, scheme)
            for k in k_grid:
                counts = np.count_nonzero(matches[:, :k], axis=1)
                rates[(k, scheme.name)][start:stop] = counts / k

    rows = []
    for k in k_grid:
        for scheme in schemes:
            est = rates[(k, scheme.name)]
            bias = math.fsum(est) / n_reps - K
            mse = math.fsum((e - K) ** 2 for e in est) / n_reps
            rows.append(ReportRow(k=k, scheme=scheme.name, bias=bias, mse=mse,
                                  theoretical_var=theoretical_variance(K, k),
                                  n_reps=n_reps))
    return SimulationReport(pair=pair_id, exact=K, rows=tuple(rows))


def write_csv(reports, f):
    """Emit one CSV with a row per (pair, k, scheme) cell."""
    writer = csv.writer(f, lineterminator="\n")
    writer.writerow(["pair", "k", "scheme", "bias", "mse", "theoretical_var", "n_reps"])
    for report in reports:
        for row in report.rows:
            writer.writerow([report.pair, row.k, row.scheme, repr(row.bias),
                             repr(row.mse), repr(row.theoretical_var), row.n_reps])
