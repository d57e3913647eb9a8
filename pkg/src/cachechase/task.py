"""Pointer-chasing instances: permutations, chains and window plans.

Elements are named 1..n as in the task definition; position 0 is the query
token and never lies in a permutation's domain.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .errors import InvalidParameter
from .rng import as_rng


@dataclass(frozen=True)
class Permutation:
    """A bijection on {1..n}; ``map[i - 1]`` is the image of ``i``."""

    map: tuple[int, ...]
    table: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        values = tuple(int(v) for v in self.map)
        n = len(values)
        if n < 1:
            raise InvalidParameter("permutation needs n >= 1")
        if sorted(values) != list(range(1, n + 1)):
            raise InvalidParameter(f"not a bijection on [1, {n}]: {values}")
        object.__setattr__(self, "map", values)
        object.__setattr__(self, "table", (0,) + values)

    @property
    def n(self) -> int:
        return len(self.map)

    def __call__(self, i: int) -> int:
        if not 1 <= i <= len(self.map):
            raise InvalidParameter(f"index {i} outside [1, {self.n}]")
        return self.table[i]

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, v in enumerate(self.map, start=1):
            inv[v - 1] = i
        return Permutation(tuple(inv))

    def to_json(self) -> str:
        return json.dumps(list(self.map))

    @classmethod
    def from_json(cls, text: str) -> "Permutation":
        return cls(tuple(json.loads(text)))

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def shift(cls, n: int) -> "Permutation":
        """The single n-cycle i -> i + 1 (n -> 1)."""
        return cls(tuple(list(range(2, n + 1)) + [1]))

    @classmethod
    def from_cycles(cls, n: int, cycles: Sequence[Sequence[int]]) -> "Permutation":
        img = list(range(1, n + 1))
        for cyc in cycles:
            for a, b in zip(cyc, list(cyc[1:]) + [cyc[0]]):
                img[a - 1] = b
        return cls(tuple(img))


@dataclass(frozen=True)
class Chain:
    values: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.values) - 1

    @property
    def answer(self) -> int:
        return self.values[-1]

    def __getitem__(self, t: int) -> int:
        return self.values[t]

    def to_json(self) -> str:
        return json.dumps(list(self.values))


@dataclass(frozen=True)
class WindowPlan:
    W: int
    boundaries: tuple[int, ...]

    def lengths(self) -> list[int]:
        prev = (0,) + self.boundaries[:-1]
        return [b - a for a, b in zip(prev, self.boundaries)]


def random_permutation(n: int, seed) -> Permutation:
    """Uniform permutation of [n] by seeded Fisher-Yates.

    ``seed`` is an integer or a live ``SplitMix64`` (which is advanced).
    """
    if n < 1:
        raise InvalidParameter("n must be >= 1")
    rng = as_rng(seed)
    items = list(range(1, n + 1))
    rng.shuffle(items)
    return Permutation(tuple(items))


def all_permutations(n: int) -> Iterator[Permutation]:
    for p in itertools.permutations(range(1, n + 1)):
        yield Permutation(p)


def chain(pi: Permutation, k: int, start: int = 1) -> Chain:
    if k < 0:
        raise InvalidParameter("k must be >= 0")
    table = pi.table
    z = [start]
    for _ in range(k):
        z.append(table[z[-1]])
    return Chain(tuple(z))


def windows(k: int, s: int) -> WindowPlan:
    if k < 1 or s < 1:
        raise InvalidParameter("windows need k >= 1 and s >= 1")
    W = -(-k // s)
    return WindowPlan(W, tuple(min(j * s, k) for j in range(1, W + 1)))


def cycles(pi: Permutation) -> list[tuple[int, ...]]:
    seen = set()
    out = []
    for start in range(1, pi.n + 1):
        if start in seen:
            continue
        cyc = [start]
        seen.add(start)
        x = pi.table[start]
        while x != start:
            cyc.append(x)
            seen.add(x)
            x = pi.table[x]
        out.append(tuple(cyc))
    return out


def cycle_of_one(pi: Permutation) -> int:
    length, x = 1, pi.table[1]
    while x != 1:
        length += 1
        x = pi.table[x]
    return length


def has_short_nonprincipal_cycle(pi: Permutation, s: int) -> bool:
    if s < 1:
        raise InvalidParameter("threshold must be >= 1")
    return any(len(c) <= s for c in cycles(pi) if 1 not in c)


def good_chain(pi: Permutation, T_stages: int) -> bool:
    """True iff z_1..z_T are pairwise distinct and none equals 1."""
    if T_stages < 1:
        raise InvalidParameter("need at least one stage")
    if pi.n < T_stages + 1:
        raise InvalidParameter("need n >= T + 1")
    # all distinct and != 1  <=>  the cycle through 1 is longer than T
    return cycle_of_one(pi) > T_stages
