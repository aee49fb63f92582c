"""Deterministic seeding and counter-based random streams.

Results must not depend on how work is split across workers, so every
random number is addressed by a counter rather than drawn from a shared
sequential stream.
"""

from __future__ import annotations

import ctypes

import numba
import numpy as np
from numba.extending import get_cython_function_address
from numpy.random import Philox, SeedSequence

_WORDS_PER_BLOCK = 4  # Philox4x64 emits four 64-bit words per counter value
_MASK64 = (1 << 64) - 1


def derive_seed(seed: int, *indices: int) -> int:
    """Child seed for ``(seed, indices)``; independent of call order."""
    ss = SeedSequence(entropy=int(seed) & _MASK64, spawn_key=tuple(int(i) for i in indices))
    lo, hi = ss.generate_state(2, np.uint64)
    return (int(hi) << 64 | int(lo)) & _MASK64


def philox_key(seed: int, stream: int = 0) -> int:
    return derive_seed(seed, 0x5EED, stream)


def raw_words(key: int, start: int, count: int) -> np.ndarray:
    """64-bit words ``start .. start+count-1`` of the Philox stream for ``key``."""
    if count <= 0:
        return np.empty(0, dtype=np.uint64)
    block, offset = divmod(int(start), _WORDS_PER_BLOCK)
    counter = [(block >> (64 * j)) & _MASK64 for j in range(4)]
    bg = Philox(key=key, counter=counter)
    return bg.random_raw(offset + count)[offset:]


def counter_uniforms(key: int, start: int, count: int) -> np.ndarray:
    """Uniforms on the open interval (0, 1), addressed by word index."""
    words = raw_words(key, start, count)
    return ((words >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


# scipy's ndtri called from compiled code; same values as scipy.special.ndtri
_ndtri = ctypes.CFUNCTYPE(ctypes.c_double, ctypes.c_double)(
    get_cython_function_address("scipy.special.cython_special", "ndtri")
)


@numba.njit
def _words_to_normals(words: np.ndarray) -> np.ndarray:
    out = np.empty(len(words))
    for i in range(len(words)):
        u = (float(words[i] >> np.uint64(11)) + 0.5) * 2.0**-53
        out[i] = _ndtri(u)
    return out


def counter_normals(key: int, start: int, count: int) -> np.ndarray:
    """Standard normals by inverse CDF; one word per variate."""
    return _words_to_normals(raw_words(key, start, count))

