"""Ordered set partitions, Hsiao's monoid of ordered G-partitions, and the
finite abelian group / character machinery used over F_p.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import cached_property, lru_cache
from math import comb, prod

import numpy as np

from . import fp
from .errors import BadPrime, GroundSetMismatch, SearchExhausted, SizeLimit
from .monoid import EXHAUSTIVE_LIMIT, FiniteMonoid

MAX_BUILD = 5000


# -- ordered set partitions ---------------------------------------------------


@dataclass(frozen=True)
class OrderedSetPartition:
    """Blocks are tuples of points in 1..n, each sorted ascending."""

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(sorted(b)) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        pts = [x for b in blocks for x in b]
        if any(len(b) == 0 for b in blocks):
            raise ValueError("empty block")
        if len(set(pts)) != len(pts):
            raise ValueError("blocks overlap")
        if sorted(pts) != list(range(1, len(pts) + 1)):
            raise ValueError("blocks must cover 1..n")

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def underlying(self) -> frozenset:
        return frozenset(frozenset(b) for b in self.blocks)

    def block_index(self) -> tuple[int, ...]:
        """Position i (0-based) -> index of the block containing i+1."""
        out = [0] * self.n
        for j, b in enumerate(self.blocks):
            for x in b:
                out[x - 1] = j
        return tuple(out)

    @classmethod
    def from_block_index(cls, idx) -> "OrderedSetPartition":
        k = max(idx) + 1 if len(idx) else 0
        return cls(tuple(tuple(i + 1 for i, j in enumerate(idx) if j == b) for b in range(k)))

    @classmethod
    def parse(cls, text: str) -> "OrderedSetPartition":
        blocks = re.findall(r"\{([^}]*)\}", text)
        return cls(tuple(tuple(int(t) for t in b.replace(",", " ").split()) for b in blocks))

    def __str__(self) -> str:
        return "(" + ",".join("{" + ",".join(map(str, b)) + "}" for b in self.blocks) + ")"


def tits_product(p: OrderedSetPartition, q: OrderedSetPartition) -> OrderedSetPartition:
    if p.n != q.n:
        raise GroundSetMismatch(f"ground sets of size {p.n} and {q.n}")
    out = []
    for P in p.blocks:
        for Q in q.blocks:
            meet = set(P) & set(Q)
            if meet:
                out.append(tuple(sorted(meet)))
    return OrderedSetPartition(tuple(out))


def set_partitions(n: int):
    """All set partitions of 1..n as tuples of sorted blocks."""
    if n == 0:
        yield ()
        return
    for part in set_partitions(n - 1):
        for i in range(len(part)):
            yield part[:i] + (part[i] + (n,),) + part[i + 1:]
        yield part + ((n,),)


def ordered_set_partitions(n: int) -> list[OrderedSetPartition]:
    """Every ordered set partition of 1..n, sorted by block tuple."""
    out = {perm for part in set_partitions(n) for perm in itertools.permutations(part)}
    return [OrderedSetPartition(b) for b in sorted(out)]


@lru_cache(maxsize=None)
def fubini(n: int) -> int:
    if n == 0:
        return 1
    return sum(comb(n, k) * fubini(n - k) for k in range(1, n + 1))


def _sigma_product_indices(B: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Block-index vectors of pi*tau for pi in ``rows`` and every tau."""
    m, n = B.shape
    key = B[rows][:, None, :] * n + B[None, :, :]          # (r, m, n)
    bits = np.left_shift(np.int64(1), key.astype(np.int64))
    mask = np.bitwise_or.reduce(bits, axis=2)
    below = mask[..., None] & (bits - 1)
    return np.bitwise_count(below.astype(np.uint64)).astype(np.int64)


def _code(B: np.ndarray, n: int) -> np.ndarray:
    return B @ (n ** np.arange(B.shape[-1], dtype=np.int64))


@lru_cache(maxsize=None)
def _sigma_data(n: int):
    osps = ordered_set_partitions(n)
    B = np.array([o.block_index() for o in osps], dtype=np.int64).reshape(len(osps), n)
    lookup = -np.ones(max(n, 1) ** n, dtype=np.int64)
    lookup[_code(B, n)] = np.arange(len(osps))
    m = len(osps)
    table = np.empty((m, m), dtype=np.uint16)
    step = max(1, 2_000_000 // max(m * n, 1))
    for s in range(0, m, step):
        rows = np.arange(s, min(m, s + step))
        prodB = _sigma_product_indices(B, rows)
        table[rows] = lookup[_code(prodB, n)]
    identity = int(np.flatnonzero(B.max(axis=1, initial=0) == 0)[0])
    return osps, B, table, identity


def build_sigma_n(n: int) -> FiniteMonoid:
    if not 1 <= n <= 6:
        raise SizeLimit(f"sigma_n is built for 1 <= n <= 6, got {n}")
    osps, _, table, identity = _sigma_data(n)
    return FiniteMonoid(
        table, identity,
        names=[str(o) for o in osps],
        meta=tuple((o, ((),) * n) for o in osps),
        kind="sigma_n", params={"n": n},
        trusted=len(osps) > EXHAUSTIVE_LIMIT,
    )


# -- finite abelian groups and characters --------------------------------------


class FiniteAbelianGroup:
    """Z/m_1 x ... x Z/m_k with m_1 | m_2 | ... ; elements are residue tuples
    listed lexicographically (first coordinate most significant)."""

    def __init__(self, invariant_factors=()):
        fac = tuple(int(m) for m in invariant_factors if int(m) != 1)
        if any(m < 1 for m in fac):
            raise ValueError("invariant factors must be positive")
        if any(b % a for a, b in zip(fac, fac[1:])):
            raise ValueError(f"invariant factors {fac} do not form a divisibility chain")
        self.invariant_factors = fac

    @classmethod
    def parse(cls, text: str | None) -> "FiniteAbelianGroup":
        text = (text or "").strip().lower()
        if text in ("", "1", "trivial"):
            return cls(())
        return cls(int(t) for t in text.split("x"))

    def __repr__(self) -> str:
        return f"FiniteAbelianGroup({self.invariant_factors})"

    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteAbelianGroup) and self.invariant_factors == other.invariant_factors

    def __hash__(self) -> int:
        return hash(self.invariant_factors)

    @property
    def label(self) -> str:
        return "x".join(map(str, self.invariant_factors)) or "1"

    @property
    def order(self) -> int:
        return prod(self.invariant_factors)

    @property
    def exponent(self) -> int:
        return self.invariant_factors[-1] if self.invariant_factors else 1

    @cached_property
    def elements(self) -> list[tuple[int, ...]]:
        return list(itertools.product(*(range(m) for m in self.invariant_factors)))

    def index(self, g) -> int:
        out = 0
        for x, m in zip(g, self.invariant_factors):
            out = out * m + x % m
        return out

    def add(self, g, h) -> tuple[int, ...]:
        return tuple((a + b) % m for a, b, m in zip(g, h, self.invariant_factors))

    def neg(self, g) -> tuple[int, ...]:
        return tuple(-a % m for a, m in zip(g, self.invariant_factors))

    @property
    def zero(self) -> tuple[int, ...]:
        return (0,) * len(self.invariant_factors)

    @cached_property
    def add_table(self) -> np.ndarray:
        E = self.elements
        return np.array([[self.index(self.add(g, h)) for h in E] for g in E], dtype=np.int64).reshape(
            self.order, self.order)


def primitive_root(p: int) -> int:
    if not fp.is_prime(p):
        raise BadPrime(f"{p} is not prime")
    if p == 2:
        return 1
    phi = p - 1
    factors = {q for q in range(2, phi + 1) if phi % q == 0 and fp.is_prime(q)}
    for r in range(2, p):
        if all(pow(r, phi // q, p) != 1 for q in factors):
            return r
    raise AssertionError("no primitive root")


def splitting_prime(G: FiniteAbelianGroup, min: int = 2, cap: int = 10**6) -> int:
    """Smallest prime p >= min with p = 1 mod exp(G) and p not dividing |G|."""
    if min < 2:
        raise ValueError("min must be at least 2")
    e = G.exponent
    for p in range(min, min + cap):
        if (p - 1) % e == 0 and G.order % p != 0 and fp.is_prime(p):
            return p
    raise SearchExhausted(f"no splitting prime in [{min}, {min + cap})")


@dataclass(frozen=True)
class Character:
    """chi(g) = w^(sum a_i g_i exp/m_i), w the fixed root of unity of order exp(G)."""

    group: FiniteAbelianGroup
    p: int
    exponents: tuple[int, ...]

    @property
    def root(self) -> int:
        return _root_of_unity(self.group.exponent, self.p)

    def log(self, g) -> int:
        """Discrete log of chi(g) to base w, in Z/exp."""
        e = self.group.exponent
        return sum(a * x * (e // m) for a, x, m in zip(self.exponents, g, self.group.invariant_factors)) % e

    def __call__(self, g) -> int:
        return pow(self.root, self.log(g), self.p)

    def __mul__(self, other: "Character") -> "Character":
        return Character(self.group, self.p, self.group.add(self.exponents, other.exponents))

    def inverse(self) -> "Character":
        return Character(self.group, self.p, self.group.neg(self.exponents))

    @property
    def is_trivial(self) -> bool:
        return not any(self.exponents)

    def __str__(self) -> str:
        return "chi(" + ",".join(map(str, self.exponents)) + ")"


@lru_cache(maxsize=None)
def _root_of_unity(e: int, p: int) -> int:
    if (p - 1) % e:
        raise BadPrime(f"F_{p} has no primitive {e}-th root of unity")
    return pow(primitive_root(p), (p - 1) // e, p)


def dual_group(G: FiniteAbelianGroup, p: int) -> list[Character]:
    if not fp.is_prime(p) or (p - 1) % G.exponent or G.order % p == 0:
        raise BadPrime(f"p = {p} does not split {G!r}")
    return [Character(G, p, a) for a in G.elements]


# -- Hsiao's monoid -------------------------------------------------------------


def hsiao_size(n: int, G: FiniteAbelianGroup) -> int:
    return sum(G.order ** len(o) for o in ordered_set_partitions(n))


def build_hsiao(n: int, G: FiniteAbelianGroup) -> FiniteMonoid:
    """Pairs (pi, g) with g in G^n constant on the blocks of pi."""
    if not 1 <= n <= 6:
        raise SizeLimit(f"hsiao is built for 1 <= n <= 6, got {n}")
    total = hsiao_size(n, G)
    if total > MAX_BUILD:
        raise SizeLimit(f"{total} elements exceed the builder limit {MAX_BUILD}")
    osps, B, stable, identity_p = _sigma_data(n)
    g = G.order
    # elements: (partition, per-block label indices), sorted by (partition, per-position labels)
    part_of, labels = [], []
    for i, o in enumerate(osps):
        k = len(o)
        rows = []
        for blk in itertools.product(range(g), repeat=k):
            rows.append(tuple(blk[b] for b in B[i]))
        for pos in sorted(rows, key=lambda r: tuple(G.elements[x] for x in r)):
            part_of.append(i)
            labels.append(pos)
    part_of = np.array(part_of, dtype=np.int64)
    labels = np.array(labels, dtype=np.int64).reshape(total, n)
    weights = g ** np.arange(n - 1, -1, -1, dtype=np.int64)
    key = part_of * g**n + labels @ weights
    assert np.all(np.diff(key) > 0)
    add = G.add_table
    table = np.empty((total, total), dtype=np.uint16)
    for a in range(total):
        lab = add[labels[a][None, :], labels]
        k = stable[part_of[a], part_of].astype(np.int64) * g**n + lab @ weights
        table[a] = np.searchsorted(key, k)
    identity = int(np.searchsorted(key, identity_p * g**n))
    meta = tuple((osps[part_of[i]], tuple(G.elements[x] for x in labels[i])) for i in range(total))
    names = [_hsiao_name(o, lab, G) for o, lab in meta]
    return FiniteMonoid(
        table, identity, names=names, meta=meta,
        kind="hsiao", params={"n": n, "group": G.invariant_factors},
        trusted=total > EXHAUSTIVE_LIMIT,
    )


def _hsiao_name(o: OrderedSetPartition, lab, G: FiniteAbelianGroup) -> str:
    if G.order == 1:
        return str(o)
    parts = []
    for b in o.blocks:
        x = lab[b[0] - 1]
        parts.append("{" + ",".join(map(str, b)) + "}" + "^" + ".".join(map(str, x)))
    return "(" + ",".join(parts) + ")"


def hsiao_element(M: FiniteMonoid, o: OrderedSetPartition, block_labels) -> int:
    """Index of (o, g) where g takes block_labels[j] on block j."""
    lab = [None] * o.n
    for b, x in zip(o.blocks, block_labels):
        for i in b:
            lab[i - 1] = tuple(x)
    target = (o, tuple(lab))
    for i, m in enumerate(M.meta):
        if m[0] == o and (M.kind != "hsiao" or m[1] == target[1]):
            return i
    raise KeyError(f"no element {o} with labels {block_labels}")


def build_group_zmod(m: int) -> FiniteMonoid:
    """The cyclic group Z/m as a monoid (element k is the residue k)."""
    if m < 1:
        raise ValueError("m must be positive")
    if m > MAX_BUILD:
        raise SizeLimit(f"Z/{m} exceeds the builder limit")
    ar = np.arange(m)
    return FiniteMonoid((ar[:, None] + ar[None, :]) % m, 0, kind="group_zmod", params={"m": m},
                        trusted=m > EXHAUSTIVE_LIMIT)


def hsiao_group(M: FiniteMonoid) -> FiniteAbelianGroup:
    if M.kind == "hsiao":
        return FiniteAbelianGroup(M.params["group"])
    if M.kind == "sigma_n":
        return FiniteAbelianGroup(())
    raise ValueError(f"{M!r} is not a Hsiao instance")
