"""Integer partitions, hook lengths and particle coordinates."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cache
from typing import Iterator


@dataclass(frozen=True, order=True)
class Partition:
    """A weakly decreasing tuple of positive integers.

    Ordering is the lexicographic order of ``parts``; trailing zeros are
    stripped on construction so ``Partition((2, 1, 0)) == Partition((2, 1))``.
    """

    parts: tuple[int, ...] = ()

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        while parts and parts[-1] == 0:
            parts = parts[:-1]
        for p in parts:
            if p < 0:
                raise ValueError(f"negative part in {parts}")
        for a, b in zip(parts, parts[1:]):
            if a < b:
                raise ValueError(f"parts must be weakly decreasing: {parts}")
        object.__setattr__(self, "parts", parts)

    @classmethod
    def parse(cls, text: str) -> "Partition":
        """Parse ``"3,1"``; the empty string is the empty partition."""
        text = text.strip()
        if not text:
            return cls(())
        return cls(tuple(int(s) for s in text.split(",")))

    def __str__(self) -> str:
        return ",".join(map(str, self.parts))

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def __getitem__(self, i: int) -> int:
        """1-based part access with ``lambda_i = 0`` beyond the length."""
        if i < 1:
            raise IndexError("partition rows are 1-based")
        return self.parts[i - 1] if i <= len(self.parts) else 0

    @property
    def weight(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    def transpose(self) -> "Partition":
        return _transpose(self.parts)

    def boxes(self) -> Iterator[tuple[int, int]]:
        """Yield the 1-based cells (i, j) with j <= lambda_i, row by row."""
        for i, row in enumerate(self.parts, start=1):
            for j in range(1, row + 1):
                yield i, j

    def __contains__(self, cell) -> bool:
        i, j = cell
        return i >= 1 and j >= 1 and j <= self[i]


@cache
def _transpose(parts: tuple[int, ...]) -> Partition:
    if not parts:
        return Partition(())
    return Partition(tuple(sum(1 for p in parts if p >= j) for j in range(1, parts[0] + 1)))


EMPTY = Partition(())


def hook(lam: Partition, i: int, j: int) -> int:
    """Hook length ``lambda_i - i + lambda'_j - j + 1`` of the cell (i, j)."""
    if (i, j) not in lam:
        raise ValueError(f"cell ({i}, {j}) is not in the Young diagram of {lam.parts}")
    return lam[i] - i + lam.transpose()[j] - j + 1


@cache
def hook_product(lam: Partition) -> int:
    return math.prod(hook(lam, i, j) for i, j in lam.boxes())


@dataclass(frozen=True)
class ParticleCoords:
    """Particle locations ``l_i = lambda_i - i`` and their shift ``L_i = l_i + K``."""

    l: tuple[int, ...]
    L: tuple[int, ...]
    K: int


@cache
def particle_coords(lam: Partition, K: int) -> ParticleCoords:
    if K < 1:
        raise ValueError("K must be a positive integer")
    if lam.length > K:
        raise ValueError(f"partition {lam.parts} has more than K={K} parts")
    l = tuple(lam[i] - i for i in range(1, K + 1))
    return ParticleCoords(l=l, L=tuple(x + K for x in l), K=K)


def from_shifted_coords(L: tuple[int, ...]) -> Partition:
    """Inverse of ``particle_coords(...).L`` (K is ``len(L)``)."""
    K = len(L)
    return Partition(tuple(L[i - 1] + i - K for i in range(1, K + 1)))


def vandermonde(xs) -> int | complex:
    """``prod_{i<j} (x_i - x_j)``."""
    out = 1
    for a in range(len(xs)):
        for b in range(a + 1, len(xs)):
            out *= xs[a] - xs[b]
    return out


def hook_product_identity_check(lam: Partition, K: int) -> tuple[Fraction, Fraction]:
    """Both sides of ``1/prod(hooks) = Delta(L) / prod(L_i!)`` as exact rationals."""
    L = particle_coords(lam, K).L
    lhs = Fraction(1, hook_product(lam))
    rhs = Fraction(vandermonde(L), math.prod(math.factorial(x) for x in L))
    return lhs, rhs


@cache
def partitions_of(n: int, max_length: int | None = None, max_part: int | None = None) -> tuple[Partition, ...]:
    """All partitions of ``n`` with at most ``max_length`` parts, in ascending lexicographic order."""
    if max_part is None:
        max_part = n
    if max_length is None:
        max_length = n
    return tuple(Partition(p) for p in sorted(_gen(n, max_length, max_part)))


def _gen(n: int, k: int, m: int):
    if n == 0:
        yield ()
        return
    if k == 0:
        return
    for first in range(min(n, m), 0, -1):
        for rest in _gen(n - first, k - 1, first):
            yield (first,) + rest


def partitions_up_to(K: int, max_weight: int) -> list[Partition]:
    """Partitions of length <= K and weight <= max_weight, weight-ascending then lexicographic."""
    return [lam for n in range(max_weight + 1) for lam in partitions_of(n, K)]


def enumerate_pairs(K: int, max_weight: int) -> Iterator[tuple[Partition, Partition]]:
    """Every pair (lambda, mu) with lengths <= K and |lambda| + |mu| <= max_weight.

    Pairs come in ascending total weight; within a weight shell they are
    sorted lexicographically on ``(lambda.parts, mu.parts)``.
    """
    if K < 1:
        raise ValueError("K must be a positive integer")
    if max_weight < 0:
        raise ValueError("max_weight must be nonnegative")
    for n in range(max_weight + 1):
        yield from shell_pairs(K, n)


def shell_pairs(K: int, n: int) -> list[tuple[Partition, Partition]]:
    """The pairs of total weight exactly ``n`` (one shell of :func:`enumerate_pairs`)."""
    shell = [
        (lam, mu)
        for a in range(n + 1)
        for lam in partitions_of(a, K)
        for mu in partitions_of(n - a, K)
    ]
    shell.sort(key=lambda pair: (pair[0].parts, pair[1].parts))
    return shell
