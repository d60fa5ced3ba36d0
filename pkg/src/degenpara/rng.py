"""Seeded 64-bit linear congruential generator for reproducible probe sets.

The recurrence is ``s <- (6364136223846793005 * s + 1442695040888963407) mod 2**64``
starting from ``s = seed``.  Each step yields the uniform ``(s >> 11) * 2**-53``
in [0, 1).  Normals come from Box-Muller on consecutive pairs ``(u1, u2)``:
``sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`` followed by the matching ``sin`` term.
Any implementation following these three rules reproduces the same streams.
"""

from __future__ import annotations

import numpy as np

MULTIPLIER = 6364136223846793005
INCREMENT = 1442695040888963407
_MASK = (1 << 64) - 1
_BLOCK = 4096


def _jump_tables(block: int):
    mult = np.empty(block, dtype=np.uint64)
    inc = np.empty(block, dtype=np.uint64)
    m, c = 1, 0
    for k in range(block):
        m = (m * MULTIPLIER) & _MASK
        c = (c * MULTIPLIER + INCREMENT) & _MASK
        mult[k] = m
        inc[k] = c
    return mult, inc


_MULT, _INC = _jump_tables(_BLOCK)


class Lcg64:
    def __init__(self, seed: int = 0):
        self.state = int(seed) & _MASK

    def next_raw(self) -> int:
        self.state = (self.state * MULTIPLIER + INCREMENT) & _MASK
        return self.state

    def raw(self, size: int) -> np.ndarray:
        """The next ``size`` states, computed blockwise by jumping ahead."""
        out = np.empty(size, dtype=np.uint64)
        pos = 0
        with np.errstate(over="ignore"):
            while pos < size:
                k = min(_BLOCK, size - pos)
                s = np.uint64(self.state)
                out[pos : pos + k] = _MULT[:k] * s + _INC[:k]
                self.state = int(out[pos + k - 1])
                pos += k
        return out

    def uniform(self, size) -> np.ndarray:
        shape = (size,) if np.isscalar(size) else tuple(size)
        n = int(np.prod(shape))
        return ((self.raw(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53).reshape(shape)

    def normal(self, size) -> np.ndarray:
        shape = (size,) if np.isscalar(size) else tuple(size)
        n = int(np.prod(shape))
        pairs = (n + 1) // 2
        u = self.uniform(2 * pairs).reshape(pairs, 2)
        r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
        ang = 2.0 * np.pi * u[:, 1]
        z = np.column_stack([r * np.cos(ang), r * np.sin(ang)]).ravel()
        return z[:n].reshape(shape)
