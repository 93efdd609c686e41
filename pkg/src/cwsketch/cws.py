"""Consistent weighted sampling of sparse nonnegative vectors.

One sample is a pair ``(istar, tstar)``: ``istar`` indexes a support
coordinate of the input vector and ``tstar`` is the integer level drawn for
it. Two vectors sketched under the same seed collide on a repetition with
probability equal to their min-max kernel, which is what makes sample
equality a meaningful event.

Per coordinate ``i`` and repetition ``j`` the sampler draws ``r, c`` from
Gamma(2,1) and ``beta`` uniform on [0,1), then computes

    t     = floor(log(w_i) / r + beta)
    log_a = log(c) - r*t + r*beta - r

and returns the coordinate minimizing ``log_a`` together with its ``t``.
The comparison runs in log space so heavy-tailed weights cannot overflow
the literal ``a = c / (y * exp(r))`` evaluation.

Randomness is generated on demand from a counter keyed by
``(seed, repetition, coordinate)`` instead of materializing the dense
random matrices, so all vectors sketched under one seed share the same
draws while only the support of each vector is ever touched.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import rng
from .vectors import SparseVector

_GOLDEN_U = np.uint64(rng.GOLDEN)
# counter offsets for the five uniforms consumed per (seed, j, i) key
_STEPS = [np.uint64((n * rng.GOLDEN) & rng.MASK64) for n in range(1, 6)]
_ELEMENT_BUDGET = 2_000_000


class CwsDraw(NamedTuple):
    r: float
    c: float
    beta: float


class CwsSample(NamedTuple):
    istar: int
    tstar: int


@dataclass(frozen=True)
class RandomStream:
    """Key addressing the shared random draw for one (repetition, coordinate)."""

    seed: int
    repetition: int
    coordinate: int


@dataclass
class Sketch:
    """``k`` consistent weighted samples of one vector under one seed."""

    seed: int
    k: int
    dimension: int
    istars: np.ndarray
    tstars: np.ndarray

    def sample(self, j: int) -> CwsSample:
        return CwsSample(int(self.istars[j]), int(self.tstars[j]))

    @property
    def samples(self) -> tuple[CwsSample, ...]:
        return tuple(CwsSample(int(i), int(t))
                     for i, t in zip(self.istars, self.tstars))

    def __eq__(self, other):
        if not isinstance(other, Sketch):
            return NotImplemented
        return (self.seed == other.seed and self.k == other.k
                and self.dimension == other.dimension
                and np.array_equal(self.istars, other.istars)
                and np.array_equal(self.tstars, other.tstars))


def _base_states(seed, j_arr, i_arr):
    """Counter states for repetitions ``j_arr`` x coordinates ``i_arr``, shape (m, k)."""
    g = rng.mix64_array(j_arr + np.uint64(1))
    h = rng.mix64_array((i_arr + np.uint64(1)) * _GOLDEN_U)
    return rng.mix64_array(np.uint64(seed & rng.MASK64) ^ g[None, :] ^ h[:, None])


def _draw_arrays(states):
    """Five consecutive counter outputs per state -> (r, c, beta) arrays."""
    u1 = rng.unit_positive(rng.mix64_array(states + _STEPS[0]))
    u2 = rng.unit_positive(rng.mix64_array(states + _STEPS[1]))
    u3 = rng.unit_positive(rng.mix64_array(states + _STEPS[2]))
    u4 = rng.unit_positive(rng.mix64_array(states + _STEPS[3]))
    beta = rng.unit_half_open(rng.mix64_array(states + _STEPS[4]))
    r = -np.log(u1 * u2)
    c = -np.log(u3 * u4)
    return r, c, beta


def draw(stream: RandomStream) -> CwsDraw:
    """Deterministic Gamma(2,1) pair and uniform for one stream key.

    The same ``(seed, repetition, coordinate)`` always yields the identical
    draw, which is how all vectors share one set of random matrices.
    """
    states = _base_states(
        stream.seed,
        np.array([stream.repetition], dtype=np.uint64),
        np.array([stream.coordinate], dtype=np.uint64),
    )
    r, c, beta = _draw_arrays(states)
    return CwsDraw(float(r[0, 0]), float(c[0, 0]), float(beta[0, 0]))


def _argmin_samples(idx, log_w, r, c, beta):
    """Winning (istar, tstar) per repetition from per-coordinate draws."""
    t = np.floor(log_w[:, None] / r + beta)
    log_a = np.log(c) - r * t + r * beta - r
    pos = np.argmin(log_a, axis=0)  # first minimum: ties break to smallest index
    cols = np.arange(log_a.shape[1])
    return idx[pos], t[pos, cols].astype(np.int64)


def _require_support(u: SparseVector):
    if u.is_empty():
        raise ValueError("cannot sample an empty vector")


def _support_arrays(u: SparseVector):
    idx = u.index_array()
    return idx, idx.astype(np.uint64), np.log(u.weight_array())


def cws_sample(u: SparseVector, j: int, seed: int) -> CwsSample:
    """One consistent weighted sample of ``u`` for repetition ``j``."""
    _require_support(u)
    idx, idx_u, log_w = _support_arrays(u)
    states = _base_states(seed, np.array([j], dtype=np.uint64), idx_u)
    r, c, beta = _draw_arrays(states)
    istars, tstars = _argmin_samples(idx, log_w, r, c, beta)
    return CwsSample(int(istars[0]), int(tstars[0]))


def sketch(u: SparseVector, k: int, seed: int) -> Sketch:
    """``k`` independent samples of ``u``; sample ``j`` equals ``cws_sample(u, j, seed)``.

    Repetitions are keyed by ``j``, so a sketch at a smaller ``k`` under the
    same seed is a prefix of a larger one.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    _require_support(u)
    idx, idx_u, log_w = _support_arrays(u)
    m = len(idx)
    istars = np.empty(k, dtype=np.int64)
    tstars = np.empty(k, dtype=np.int64)
    step = max(1, _ELEMENT_BUDGET // max(1, m))
    for start in range(0, k, step):
        stop = min(start + step, k)
        j_arr = np.arange(start, stop, dtype=np.uint64)
        r, c, beta = _draw_arrays(_base_states(seed, j_arr, idx_u))
        istars[start:stop], tstars[start:stop] = _argmin_samples(idx, log_w, r, c, beta)
    return Sketch(seed=seed & rng.MASK64, k=k, dimension=u.dimension,
                  istars=istars, tstars=tstars)


def sketch_batch(u: SparseVector, k: int, seeds) -> tuple[np.ndarray, np.ndarray]:
    """Sketch ``u`` once per seed; returns (istars, tstars) of shape (len(seeds), k).

    Row ``s`` matches ``sketch(u, k, seeds[s])`` exactly; the batch form just
    amortizes the vectorized draw across many seeds (simulation replicates).
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    _require_support(u)
    seeds = np.asarray(seeds, dtype=np.uint64)
    idx, idx_u, log_w = _support_arrays(u)
    m = len(idx)
    n = len(seeds)
    istars = np.empty((n, k), dtype=np.int64)
    tstars = np.empty((n, k), dtype=np.int64)

    g = rng.mix64_array(np.arange(k, dtype=np.uint64) + np.uint64(1))
    h = rng.mix64_array((idx_u + np.uint64(1)) * _GOLDEN_U)
    t_cols = np.arange(k)
    step = max(1, _ELEMENT_BUDGET // max(1, m * k))
    for start in range(0, n, step):
        stop = min(start + step, n)
        # states shape (chunk, m, k)
        states = rng.mix64_array(
            seeds[start:stop, None, None] ^ h[None, :, None] ^ g[None, None, :]
        )
        r, c, beta = _draw_arrays(states)
        t = np.floor(log_w[None, :, None] / r + beta)
        log_a = np.log(c) - r * t + r * beta - r
        pos = np.argmin(log_a, axis=1)
        rows = np.arange(stop - start)[:, None]
        istars[start:stop] = idx[pos]
        tstars[start:stop] = t[rows, pos, t_cols[None, :]].astype(np.int64)
    return istars, tstars


_SKETCH_MAGIC = "cws-sketch"
_SKETCH_VERSION = 1


def write_sketches(f, sketches):
    """Write sketches sharing (seed, k, dimension) as a text container.

    Header line ``cws-sketch <version> <seed> <k> <dimension>``, then one
    line per vector holding ``k`` space-separated ``istar:tstar`` pairs.
    Output bytes are a pure function of the sketches.
    """
    sketches = list(sketches)
    if not sketches:
        raise ValueError("no sketches to write")
    seed, k, dim = sketches[0].seed, sketches[0].k, sketches[0].dimension
    for pos, sk in enumerate(sketches):
        if (sk.seed, sk.k, sk.dimension) != (seed, k, dim):
            raise ValueError(f"sketch {pos} does not share the file header (seed, k, dimension)")
    f.write(f"{_SKETCH_MAGIC} {_SKETCH_VERSION} {seed} {k} {dim}\n")
    for sk in sketches:
        f.write(" ".join(f"{int(i)}:{int(t)}" for i, t in zip(sk.istars, sk.tstars)))
        f.write("\n")


def read_sketches(f) -> list[Sketch]:
    """Parse the text container written by :func:`write_sketches`."""
    header = f.readline().split()
    if len(header) != 5 or header[0] != _SKETCH_MAGIC:
        raise ValueError("not a sketch file: bad header")
    if int(header[1]) != _SKETCH_VERSION:
        raise ValueError(f"unsupported sketch format version {header[1]}")
    seed, k, dim = int(header[2]), int(header[3]), int(header[4])
    out = []
    for lineno, line in enumerate(f, start=2):
        line = line.strip()
        if not line:
            continue
        pairs = line.split()
        if len(pairs) != k:
            raise ValueError(f"line {lineno}: expected {k} samples, found {len(pairs)}")
        istars = np.empty(k, dtype=np.int64)
        tstars = np.empty(k, dtype=np.int64)
        for j, tok in enumerate(pairs):
            i_s, _, t_s = tok.partition(":")
            try:
                istars[j] = int(i_s)
                tstars[j] = int(t_s)
            except ValueError:
                raise ValueError(f"line {lineno}: malformed sample {tok!r}") from None
        out.append(Sketch(seed=seed, k=k, dimension=dim, istars=istars, tstars=tstars))
    return out
