"""Minimal dense linear algebra, activations, and a deterministic RNG.

Vectors are 1-D float64 numpy arrays and matrices are 2-D row-major (C-order)
float64 numpy arrays throughout the package.  numpy supplies the storage and
the arithmetic; the contracts (shape checks, value ranges) live here.

The RNG is a fully specified 64-bit mixer rather than the platform default so
that runs are reproducible bit-for-bit, and so that a reimplementation in any
other language can reproduce the exact integer stream.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["matvec", "sigmoid", "Rng"]

_MASK64 = (1 << 64) - 1


def matvec(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Matrix-vector product; `m` is (rows, cols), `v` has length cols."""
    m = np.asarray(m, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"matvec: expected a 2-D matrix, got ndim={m.ndim}")
    if v.ndim != 1:
        raise ValueError(f"matvec: expected a 1-D vector, got ndim={v.ndim}")
    if m.shape[1] != v.shape[0]:
        raise ValueError(
            f"matvec: dimension mismatch, matrix is {m.shape[0]}x{m.shape[1]} "
            f"but vector has length {v.shape[0]}"
        )
    return m @ v


def sigmoid(x: float, lam: float = 1.0) -> float:
    """Logistic function 1 / (1 + exp(-lam * x)); `lam` sets the steepness.

    Numerically stable: saturates to 0.0 / 1.0 for large |x| instead of
    overflowing.
    """
    if lam <= 0.0:
        raise ValueError(f"sigmoid: steepness must be positive, got {lam}")
    z = lam * x
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


class Rng:
    """Deterministic 64-bit PRNG (SplitMix64).

    State update and output mixing, exactly:

        state  <- (state + 0x9E3779B97F4A7C15) mod 2^64
        z = state
        z <- (z XOR (z >> 30)) * 0xBF58476D1CE4E5B9   mod 2^64
        z <- (z XOR (z >> 27)) * 0x94D049BB133111EB   mod 2^64
        output = z XOR (z >> 31)

    Derived draws are defined on top of that integer stream:

    - ``uniform(lo, hi)``: take the top 53 bits (``u64 >> 11``), scale by
      2^-53 to get u in [0, 1), return ``lo + u * (hi - lo)``.
    - ``below(n)``: multiply-high reduction ``(u64 * n) >> 64``.
    - ``normal(mu, sigma)``: Box-Muller; consumes exactly two uniforms,
      u1 = 1 - uniform() in (0, 1] and u2 = uniform(), and returns
      ``mu + sigma * sqrt(-2 ln u1) * cos(2 pi u2)``.
    - ``shuffle(items)``: Fisher-Yates from the top; for i = n-1 down to 1
      swap position i with ``j = (u64 * (i + 1)) >> 64``.

    Since the state after k draws is ``seed + k * gamma``, blocks of outputs
    can be produced vectorised; the block path emits the identical stream.

    An instance is single-owner: never share one across concurrent tasks.
    """

    _GAMMA = 0x9E3779B97F4A7C15
    _MUL1 = 0xBF58476D1CE4E5B9
    _MUL2 = 0x94D049BB133111EB

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + self._GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * self._MUL1) & _MASK64
        z = ((z ^ (z >> 27)) * self._MUL2) & _MASK64
        return z ^ (z >> 31)

    def _u64_block(self, count: int) -> np.ndarray:
        """`count` outputs as a uint64 array; same stream as next_u64()."""
        steps = np.arange(1, count + 1, dtype=np.uint64) * np.uint64(self._GAMMA)
        z = np.uint64(self._state) + steps
        self._state = (self._state + count * self._GAMMA) & _MASK64
        z = (z ^ (z >> np.uint64(30))) * np.uint64(self._MUL1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(self._MUL2)
        return z ^ (z >> np.uint64(31))

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        """One draw in [lo, hi)."""
        if not lo < hi:
            raise ValueError(f"uniform: need lo < hi, got [{lo}, {hi})")
        u = (self.next_u64() >> 11) * 2.0**-53
        return lo + u * (hi - lo)

    def uniform_block(self, count: int, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
        """`count` uniform draws; bitwise identical to repeated uniform()."""
        if not lo < hi:
            raise ValueError(f"uniform: need lo < hi, got [{lo}, {hi})")
        u = (self._u64_block(count) >> np.uint64(11)).astype(np.float64) * 2.0**-53
        return lo + u * (hi - lo)

    def uniform_matrix(self, rows: int, cols: int, lo: float, hi: float) -> np.ndarray:
        """(rows, cols) matrix of uniforms, drawn in row-major order."""
        return self.uniform_block(rows * cols, lo, hi).reshape(rows, cols)

    def normal(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        """One Box-Muller normal draw (consumes two uniforms)."""
        u1 = 1.0 - self.uniform()
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(u1))
        return mu + sigma * r * math.cos(2.0 * math.pi * u2)

    def below(self, n: int) -> int:
        """Integer in [0, n) via multiply-high reduction."""
        if n < 1:
            raise ValueError(f"below: need n >= 1, got {n}")
        return (self.next_u64() * n) >> 64

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle; consumes len(items) - 1 draws."""
        n = len(items)
        if n < 2:
            return
        draws = self._u64_block(n - 1).tolist()
        pos = 0
        for i in range(n - 1, 0, -1):
            j = (draws[pos] * (i + 1)) >> 64
            pos += 1
            items[i], items[j] = items[j], items[i]
