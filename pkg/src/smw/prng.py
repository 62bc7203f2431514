"""Deterministic pseudo-random generation with a fixed, documented algorithm.

Every random choice in this package (synthetic graphs, sampled mask edges,
benchmark volumes) flows through the generators below so that a seed fully
determines the output, independent of Python's hash randomization, numpy's
generator defaults, or platform. The algorithms are spelled out precisely so
that a reimplementation in another language can reproduce golden files:

* ``splitmix64``: the 64-bit mixing function
  ``z = (x + 0x9E3779B97F4A7C15); z = (z ^ z>>30) * 0xBF58476D1CE4E5B9;
  z = (z ^ z>>27) * 0x94D049BB133111EB; return z ^ z>>31`` (all mod 2^64).
  Because its state advances by a fixed constant, the k-th output is a pure
  function of ``seed + k`` and can be evaluated in bulk (`splitmix64_array`).

* ``Xoshiro256StarStar``: 256-bit state seeded with four successive
  splitmix64 outputs; each step returns ``rotl(s1 * 5, 7) * 9`` and updates
  the state with the standard xoshiro256** transition.

Floats are drawn as ``(u64 >> 11) * 2^-53`` (uniform on [0, 1)); bounded
integers as ``u64 % n``. The modulo bias is negligible for the small ranges
used here and keeps the mapping trivial to reproduce.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def splitmix64(state):
    """Advance a splitmix64 state; returns ``(new_state, output)``."""
    state = (state + _GOLDEN) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return state, z ^ (z >> 31)


def splitmix64_array(seed, count, start=0):
    """Outputs ``start .. start+count-1`` of the splitmix64 stream for `seed`.

    Vectorized counter-mode evaluation: element k equals the (start+k+1)-th
    scalar output of ``splitmix64`` seeded with `seed`.
    """
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    z = np.uint64(seed & _MASK64) + idx * np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def float_array(seed, count, start=0):
    """`count` uniform floats in [0, 1) from the splitmix64 counter stream."""
    bits = splitmix64_array(seed, count, start)
    return ((bits >> np.uint64(11)).astype(np.float64)) * 2.0**-53


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256StarStar:
    """Sequential generator for edge sampling and graph synthesis."""

    def __init__(self, seed):
        state = seed & _MASK64
        s = []
        for _ in range(4):
            state, out = splitmix64(state)
            s.append(out)
        self._s = s

    def u64(self):
        s = self._s
        result = (_rotl((s[1] * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s[1] << 17) & _MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def random(self):
        """Uniform float in [0, 1)."""
        return (self.u64() >> 11) * 2.0**-53

    def below(self, n):
        """Uniform integer in [0, n)."""
        if n <= 0:
            raise ValueError("below() needs a positive bound")
        return self.u64() % n

    def uniform(self, lo, hi):
        return lo + (hi - lo) * self.random()
