"""Cyclic shifts acting on multi-indices, and the word-sum identities.

A multi-index assigns one of m symbols to each of N slots.  The cyclic group
of order N acts on the slots from the right; orbits of that action organise
the averaging identity that makes the block dilation work: summing a word's
cyclic shifts with the shared orbit weight reproduces N times the plain word.

Multi-index slots are 0-based internally.  Symbol values run over 1..m so a
word over the alphabet reads exactly like a subscript string.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .linalg import as_fraction


@dataclass(frozen=True)
class MultiIndex:
    """An assignment of symbols 1..m to slots 0..N-1."""

    values: tuple[int, ...]
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("need at least one symbol")
        if len(self.values) < 1:
            raise ValueError("need at least one slot")
        if any(not (1 <= v <= self.m) for v in self.values):
            raise ValueError(f"values out of range 1..{self.m}: {self.values}")

    @property
    def N(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class CyclicPermutation:
    """A power of the N-cycle on slot positions, k -> (k + power) mod n."""

    n: int
    power: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("cycle length must be positive")
        object.__setattr__(self, "power", self.power % self.n)

    @classmethod
    def identity(cls, n: int) -> "CyclicPermutation":
        return cls(n, 0)

    @classmethod
    def shift(cls, n: int) -> "CyclicPermutation":
        """The generator: slot k reads from slot k+1 (cyclically)."""
        return cls(n, 1)

    def apply(self, k: int) -> int:
        return (k + self.power) % self.n

    def compose(self, other: "CyclicPermutation") -> "CyclicPermutation":
        if self.n != other.n:
            raise ValueError("cycle lengths differ")
        return CyclicPermutation(self.n, self.power + other.power)

    def __mul__(self, other: "CyclicPermutation") -> "CyclicPermutation":
        return self.compose(other)


def enumerate_indices(m: int, N: int) -> list[MultiIndex]:
    """All m^N multi-indices in lexicographic order of their value tuples."""
    return [MultiIndex(vals, m) for vals in itertools.product(range(1, m + 1), repeat=N)]


def act(alpha: MultiIndex, tau: CyclicPermutation) -> MultiIndex:
    """Right action: slot k of the result holds alpha at slot tau(k)."""
    if tau.n != alpha.N:
        raise ValueError("permutation length does not match the index")
    return MultiIndex(tuple(alpha.values[tau.apply(k)] for k in range(alpha.N)), alpha.m)


@dataclass(frozen=True)
class Orbit:
    members: tuple[MultiIndex, ...]   # sorted lexicographically
    stabilizer_size: int

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class OrbitPartition:
    m: int
    N: int
    orbits: tuple[Orbit, ...]

    @property
    def total(self) -> int:
        return sum(o.size for o in self.orbits)


def orbit_partition(m: int, N: int) -> OrbitPartition:
    """Partition all multi-indices into cyclic-shift orbits.

    Orbit sizes divide N; the stabilizer size is the complementary factor,
    so size * stabilizer_size == N for every orbit.
    """
    seen: set[tuple[int, ...]] = set()
    orbits = []
    for alpha in enumerate_indices(m, N):
        if alpha.values in seen:
            continue
        shifts = {tuple(alpha.values[(k + r) % N] for k in range(N)) for r in range(N)}
        seen |= shifts
        members = tuple(MultiIndex(v, m) for v in sorted(shifts))
        size = len(members)
        if N % size != 0:
            raise AssertionError("orbit size must divide the cycle order")
        orbits.append(Orbit(members, N // size))
    return OrbitPartition(m, N, tuple(orbits))


def weight_of(alpha: MultiIndex, weights: Sequence[Fraction]) -> Fraction:
    """Product of the weights selected by alpha, one factor per slot."""
    if len(weights) != alpha.m:
        raise ValueError("weight vector length must equal the symbol count")
    total = Fraction(1)
    for v in alpha.values:
        total *= as_fraction(weights[v - 1])
    return total


class WordSum:
    """A finite formal sum of words over symbols 1..m with Fraction coefficients.

    Words are tuples of symbols; the empty tuple is the empty word.  Zero
    coefficients are dropped on construction so equality is plain dict
    equality.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple[int, ...], Fraction] | None = None):
        self._terms = {}
        if terms:
            for word, coeff in terms.items():
                c = as_fraction(coeff)
                if c != 0:
                    self._terms[tuple(word)] = c

    @classmethod
    def accumulate(cls, pairs: Iterable[tuple[tuple[int, ...], Fraction]]) -> "WordSum":
        acc: dict[tuple[int, ...], Fraction] = {}
        for word, coeff in pairs:
            key = tuple(word)
            cur = acc.get(key)
            acc[key] = coeff if cur is None else cur + coeff
        return cls(acc)

    def coefficient(self, word: Sequence[int]) -> Fraction:
        return self._terms.get(tuple(word), Fraction(0))

    def terms(self) -> dict[tuple[int, ...], Fraction]:
        return dict(self._terms)

    def scale(self, c) -> "WordSum":
        c = as_fraction(c)
        return WordSum({w: c * x for w, x in self._terms.items()})

    def __add__(self, other: "WordSum") -> "WordSum":
        acc = dict(self._terms)
        for w, c in other._terms.items():
            acc[w] = acc.get(w, Fraction(0)) + c
        return WordSum(acc)

    def __sub__(self, other: "WordSum") -> "WordSum":
        return self + other.scale(-1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, WordSum):
            return NotImplemented
        return self._terms == other._terms

    __hash__ = None

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __repr__(self) -> str:
        inner = ", ".join(f"{w}: {c}" for w, c in sorted(self._terms.items()))
        return f"WordSum({{{inner}}})"


def _check_weights(m: int, weights: Sequence[Fraction]) -> list[Fraction]:
    ws = [as_fraction(w) for w in weights]
    if len(ws) != m:
        raise ValueError("need one weight per symbol")
    if any(w < 0 for w in ws):
        raise ValueError("weights must be nonnegative")
    if sum(ws) != 1:
        raise ValueError("weights must sum to 1 exactly")
    return ws


def lhs_word_sum(m: int, N: int, n: int, weights: Sequence[Fraction]) -> WordSum:
    """Average of cyclically shifted length-n prefixes over all multi-indices.

    For each multi-index alpha and each shift k, contributes the word read
    from alpha at slots k, k+1, ..., k+n-1 (cyclically) with coefficient
    weight(alpha)/N.
    """
    if not (0 <= n <= N):
        raise ValueError("need 0 <= n <= N")
    ws = _check_weights(m, weights)
    pairs = []
    for alpha in enumerate_indices(m, N):
        w = weight_of(alpha, ws) / N
        vals = alpha.values
        for k in range(N):
            word = tuple(vals[(j + k) % N] for j in range(n))
            pairs.append((word, w))
    return WordSum.accumulate(pairs)


def rhs_word_sum(m: int, N: int, n: int, weights: Sequence[Fraction]) -> WordSum:
    """Plain weighted sum of length-n prefixes over all multi-indices."""
    if not (0 <= n <= N):
        raise ValueError("need 0 <= n <= N")
    ws = _check_weights(m, weights)
    pairs = []
    for alpha in enumerate_indices(m, N):
        pairs.append((alpha.values[:n], weight_of(alpha, ws)))
    return WordSum.accumulate(pairs)


def check_orbit_identity(orbit: Orbit, n: int) -> bool:
    """Shift-sum identity restricted to one orbit, with unit coefficients.

    Sum over orbit members of all N shifted length-n prefixes equals N times
    the sum of the members' plain prefixes.  Weights play no role here, which
    is exactly why the weighted identity follows orbit by orbit.
    """
    members = orbit.members
    N = members[0].N
    if not (0 <= n <= N):
        raise ValueError("need 0 <= n <= N")
    lhs_pairs = []
    rhs_pairs = []
    for alpha in members:
        vals = alpha.values
        for k in range(N):
            lhs_pairs.append((tuple(vals[(j + k) % N] for j in range(n)), Fraction(1)))
        rhs_pairs.append((vals[:n], Fraction(N)))
    return WordSum.accumulate(lhs_pairs) == WordSum.accumulate(rhs_pairs)


@dataclass(frozen=True)
class ProductFibreReport:
    """Preimage sizes of the multiplication map on a cyclic group."""

    n: int
    counts: tuple[int, ...]   # counts[g] = #{(a, b): a + b = g mod n}

    @property
    def uniform(self) -> bool:
        return all(c == self.n for c in self.counts)


def double_coset_count(N: int) -> ProductFibreReport:
    """Count preimages of each element under (a, b) -> a * b on the N-cycle.

    For an abelian group every fibre of the multiplication map has exactly
    |G| elements; this enumerates the cyclic case directly.
    """
    if N < 1:
        raise ValueError("group order must be positive")
    counts = [0] * N
    for a in range(N):
        for b in range(N):
            counts[(a + b) % N] += 1
    return ProductFibreReport(N, tuple(counts))
