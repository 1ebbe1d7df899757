"""Word-level semantics of the exact and imprecise adders.

These closed forms mirror the generated netlists bit for bit and are what the
image pipeline uses for speed.  The imprecise adder of width ``N`` with an
approximate lower part of ``L`` bits produces:

* ``SUM[L-5..0]``   constant 1
* ``SUM[L-1..L-4]`` ``A_i | B_i`` (``OR_BITS`` strategy only)
* carry into the upper part ``A[L-1] & B[L-1]``
* ``SUM[N..L]``     exact sum of the upper ``N-L`` bits plus that carry
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

MAX_WIDTH = 64
REDUCED_BITS = 4


class Strategy(enum.Enum):
    OR_BITS = "or-bits"
    CONSTANT_ONE = "constant-one"

    @property
    def code(self) -> int:
        return 1 if self is Strategy.OR_BITS else 2


@dataclass(frozen=True)
class AdderSpec:
    N: int
    L: int
    strategy: Strategy = Strategy.OR_BITS

    def __post_init__(self):
        if not isinstance(self.strategy, Strategy):
            object.__setattr__(self, "strategy", Strategy(self.strategy))
        if not (1 <= self.N <= MAX_WIDTH):
            raise ValueError(f"N must be in 1..{MAX_WIDTH}, got {self.N}")
        if not (0 < self.L < self.N):
            raise ValueError(f"L must satisfy 0 < L < N, got L={self.L}, N={self.N}")
        if self.strategy is Strategy.OR_BITS and self.L < REDUCED_BITS + 1:
            raise ValueError(f"the or-bits strategy needs L >= {REDUCED_BITS + 1}, got {self.L}")

    @property
    def constant_bits(self) -> int:
        """Number of low sum bits tied to 1."""
        return self.L - REDUCED_BITS if self.strategy is Strategy.OR_BITS else self.L


@dataclass(frozen=True)
class Word:
    value: int
    width: int

    def __post_init__(self):
        if not (1 <= self.width <= MAX_WIDTH + 1):
            raise ValueError(f"width must be in 1..{MAX_WIDTH + 1}")
        if not (0 <= self.value < (1 << self.width)):
            raise ValueError(f"value {self.value} does not fit in {self.width} bits")

    def __int__(self) -> int:
        return self.value


def _same_width(a: Word, b: Word) -> int:
    if a.width != b.width:
        raise ValueError(f"operand widths differ: {a.width} vs {b.width}")
    return a.width


def exact_add(a: Word, b: Word) -> Word:
    w = _same_width(a, b)
    return Word(a.value + b.value, w + 1)


def imprecise_value(a: int, b: int, spec: AdderSpec) -> int:
    L = spec.L
    carry = (a >> (L - 1)) & (b >> (L - 1)) & 1
    upper = (a >> L) + (b >> L) + carry
    k = spec.constant_bits
    low = (1 << k) - 1
    if spec.strategy is Strategy.OR_BITS:
        low |= (((a | b) >> k) & 0xF) << k
    return (upper << L) | low


def imprecise_add(a: Word, b: Word, spec: AdderSpec) -> Word:
    w = _same_width(a, b)
    if w != spec.N:
        raise ValueError(f"operands are {w} bits but the adder is {spec.N} bits")
    return Word(imprecise_value(a.value, b.value, spec), w + 1)


def imprecise_add_array(a: np.ndarray, b: np.ndarray, spec: AdderSpec) -> np.ndarray:
    """Vectorised :func:`imprecise_value` on uint64 arrays (N <= 63)."""
    if spec.N > 63:
        raise ValueError("array form supports N <= 63")
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    L = np.uint64(spec.L)
    one = np.uint64(1)
    carry = (a >> (L - one)) & (b >> (L - one)) & one
    upper = (a >> L) + (b >> L) + carry
    k = np.uint64(spec.constant_bits)
    low = np.uint64((1 << spec.constant_bits) - 1)
    if spec.strategy is Strategy.OR_BITS:
        low = low | ((((a | b) >> k) & np.uint64(0xF)) << k)
    return (upper << L) | low


@dataclass(frozen=True)
class ErrorStats:
    max_error: int
    mean_error: float
    error_rate: float
    samples: int
    mode: str


def error_stats(spec: AdderSpec, mode: str = "exhaustive", n: int | None = None, seed: int | None = None) -> ErrorStats:
    """Statistics of ``|imprecise - exact|``.

    ``mode="exhaustive"`` scans every pair of operands confined to the low ``L``
    bits (upper bits zero: the upper part is exact, so the error depends only on
    the low bits and the carry boundary).  ``mode="sampled"`` draws ``n``
    full-width pairs from ``numpy.random.default_rng(seed)``.
    """
    if mode == "exhaustive":
        if spec.L > 12:
            raise ValueError(f"exhaustive scan needs L <= 12, got {spec.L}")
        side = np.arange(1 << spec.L, dtype=np.uint64)
        a = np.repeat(side, side.size)
        b = np.tile(side, side.size)
    elif mode == "sampled":
        if not n or n <= 0:
            raise ValueError("sampled mode needs a positive sample size")
        if seed is None:
            raise ValueError("sampled mode needs a seed")
        rng = np.random.default_rng(seed)
        a = rng.integers(0, 1 << spec.N, size=n, dtype=np.uint64)
        b = rng.integers(0, 1 << spec.N, size=n, dtype=np.uint64)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    if spec.N <= 61:
        approx = imprecise_add_array(a, b, spec).astype(np.int64)
        exact = (a + b).astype(np.int64)
    else:
        approx = np.array([imprecise_value(int(x), int(y), spec) for x, y in zip(a, b)], dtype=object)
        exact = a.astype(object) + b.astype(object)
    err = np.abs(approx - exact)
    total = int(err.sum())
    count = int(err.size)
    return ErrorStats(
        max_error=int(err.max()),
        mean_error=total / count,
        error_rate=int(np.count_nonzero(err)) / count,
        samples=count,
        mode=mode,
    )
