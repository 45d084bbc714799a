"""Seeded constructions of every game family used in the experiments and proofs.

Random draws use numpy's PCG64 bit generator (``np.random.default_rng``), so
the same seed reproduces the same instance across runs of this package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .game import Game


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def gen_random_zero_sum(n: int, m: int, seed, low: float = 10.0, high: float = 100.0) -> Game:
    """Zero-sum game with Player 1 payoffs i.i.d. uniform on ``[low, high]``."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    a = _rng(seed).uniform(low, high, size=(n, m))
    return Game.from_zero_sum(a)


def gen_random_general_sum_opposite(n: int, m: int, seed, half_width: float = 50.0) -> Game:
    """Entries uniform on ``[-50, 50]`` with every cell's two payoffs of opposite sign.

    Cells whose product is not strictly negative are redrawn.
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    rng = _rng(seed)
    a = rng.uniform(-half_width, half_width, size=(n, m))
    b = rng.uniform(-half_width, half_width, size=(n, m))
    bad = a * b >= 0
    while bad.any():
        cnt = int(bad.sum())
        a[bad] = rng.uniform(-half_width, half_width, size=cnt)
        b[bad] = rng.uniform(-half_width, half_width, size=cnt)
        bad = a * b >= 0
    return Game(a, b)


def gen_random_general_sum_correlated(n: int, m: int, c: float, seed, noise_halfwidth: float = 85.0,
                                      half_width: float = 50.0) -> Game:
    """``A ~ U[-50, 50]`` and ``B = c * A + N`` with ``N ~ U[-noise, noise]``."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    rng = _rng(seed)
    a = rng.uniform(-half_width, half_width, size=(n, m))
    noise = rng.uniform(-noise_halfwidth, noise_halfwidth, size=(n, m)) if noise_halfwidth > 0 else 0.0
    return Game(a, c * a + noise)


@dataclass(frozen=True)
class CounterexampleParams:
    N: int
    r: float

    def __post_init__(self):
        if self.N < 3:
            raise ValueError("N must be >= 3")
        if not self.r > self.N ** 2:
            raise ValueError(f"stakes r must exceed N^2 = {self.N ** 2}")

    @property
    def size(self) -> int:
        return self.N * (self.N + 1) // 2 - 1


def counterexample_blocks(N: int) -> dict[int, list[int]]:
    """Action indices of each block; block ``i`` (2..N) holds ``i`` actions in order."""
    blocks, start = {}, 0
    for i in range(2, N + 1):
        blocks[i] = list(range(start, start + i))
        start += i
    return blocks


def counterexample_action(N: int, i: int, alpha: int) -> int:
    """Index of action ``alpha`` in block ``i``."""
    if not (2 <= i <= N and 0 <= alpha < i):
        raise ValueError(f"no action ({i}, {alpha}) for N={N}")
    return counterexample_blocks(N)[i][alpha]


def gen_counterexample(params: CounterexampleParams) -> Game:
    """Blocks of i-th order matching pennies plus a block-dependent base payoff.

    Player 1 gets ``2^(i-1-N)`` for playing in block ``i``; if both players
    pick the same block, matching costs ``r (i - 1)`` and mismatching pays
    ``r``. Uniform play inside a block is therefore fair for the fight part.
    """
    N, r = params.N, float(params.r)
    blocks = counterexample_blocks(N)
    n = params.size
    block_of = np.empty(n, dtype=int)
    for i, idx in blocks.items():
        block_of[idx] = i
    base = 2.0 ** (block_of - 1 - N)
    a = np.repeat(base[:, None], n, axis=1)
    for i, idx in blocks.items():
        sub = np.full((i, i), r)
        np.fill_diagonal(sub, -r * (i - 1))
        a[np.ix_(idx, idx)] += sub
    return Game.from_zero_sum(a)


@dataclass(frozen=True)
class BiasedMpParams:
    a: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("bias a must be positive")

    @property
    def nash_row_heads(self) -> float:
        return 2.0 / (self.a + 3.0)

    @property
    def nash_col_heads(self) -> float:
        return (self.a + 1.0) / (self.a + 3.0)

    @property
    def value(self) -> float:
        return (1.0 - self.a) / (self.a * (self.a + 3.0))


def gen_biased_matching_pennies(params: BiasedMpParams) -> Game:
    a = params.a
    return Game.from_zero_sum([[1.0 / a, -1.0], [-1.0 / a, 1.0 / a]])


def matching_pennies() -> Game:
    return Game.from_zero_sum([[1.0, -1.0], [-1.0, 1.0]])
