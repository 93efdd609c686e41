"""Counter-based deterministic randomness built on the SplitMix64 finalizer.

Every random quantity in this library is a pure function of explicit integer
keys. Nothing here carries mutable state, so independently scheduled work
reproduces bit-identical results.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

_GOLDEN_U = np.uint64(GOLDEN)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_INV53 = 2.0 ** -53


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a 64-bit integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix64_array(z):
    """Vectorized :func:`mix64` over a uint64 ndarray (input is not mutated)."""
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def derive_seed(seed: int, index: int) -> int:
    """Output ``index`` of the SplitMix64 stream started at ``seed``.

    Used to spawn independent sub-seeds (simulation replicates, shuffle
    epochs) from one master seed.
    """
    return mix64((seed + (index + 1) * GOLDEN) & MASK64)


def derive_seeds(seed: int, count: int):
    """First ``count`` outputs of the SplitMix64 stream at ``seed``, as uint64."""
    steps = (np.arange(1, count + 1, dtype=np.uint64)) * _GOLDEN_U
    return mix64_array(np.uint64(seed & MASK64) + steps)


def unit_positive(bits):
    """Map uint64 words to floats in (0, 1] using the top 53 bits.

    The +1 offset excludes 0.0 so logarithms of these uniforms are finite.
    """
    return ((bits >> _S11) + _ONE) * _INV53


def unit_half_open(bits):
    """Map uint64 words to floats in [0, 1) using the top 53 bits."""
    return (bits >> _S11) * _INV53


def permutation(n: int, seed: int):
    """Deterministic Fisher-Yates permutation of range(n) keyed by ``seed``."""
    out = np.arange(n, dtype=np.int64)
    for pos in range(n - 1, 0, -1):
        # modulo bias is negligible for any realistic n and irrelevant here:
        # only determinism matters
        j = mix64(seed ^ mix64(pos)) % (pos + 1)
        out[pos], out[j] = out[j], out[pos]
    return out
