"""Finite monoids given by a multiplication table, and their structural layer:
Green's relations, idempotents, omega powers, daggers, maximal subgroups,
the support lattice, contractions and the conjugation action on idempotents.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .errors import (
    NotAssociative,
    NotIdempotent,
    NotRegularLeftDuo,
    NotRightSemicentral,
    SizeLimit,
)

EXHAUSTIVE_LIMIT = 512
MAX_ELEMENTS = 2**16 - 1
_SAMPLE_TRIPLES = 200_000


def _closure_generators(T: np.ndarray, identity: int) -> list[int]:
    """Greedy generating set: add the first element not yet reachable from
    the identity by right multiplication with the chosen generators."""
    n = T.shape[0]
    reached = np.zeros(n, dtype=bool)
    reached[identity] = True
    gens: list[int] = []
    for m in range(n):
        if reached[m]:
            continue
        gens.append(m)
        frontier = np.flatnonzero(reached)
        while frontier.size:
            new = np.unique(T[np.ix_(frontier, gens)])
            new = new[~reached[new]]
            reached[new] = True
            frontier = new
    return gens


class FiniteMonoid:
    """A monoid on ``range(size)``; ``table[a, b]`` is the product ``a*b``.

    Tables of at most 512 elements are checked for associativity
    exhaustively.  Larger tables must be passed with ``trusted=True`` and
    are then checked on a fixed random sample of triples.
    """

    def __init__(
        self,
        table,
        identity: int,
        *,
        names: list[str] | None = None,
        meta: tuple | None = None,
        kind: str | None = None,
        params: dict | None = None,
        parent_index=None,
        trusted: bool = False,
    ):
        T = np.asarray(table)
        if T.ndim != 2 or T.shape[0] != T.shape[1] or T.shape[0] == 0:
            raise ValueError("multiplication table must be a nonempty square array")
        n = T.shape[0]
        if n > MAX_ELEMENTS:
            raise SizeLimit(f"{n} elements exceed the 16-bit table encoding")
        if T.min() < 0 or T.max() >= n:
            raise ValueError("table entries must be element indices")
        if not 0 <= identity < n:
            raise ValueError("identity index out of range")
        self.table = T.astype(np.uint16)
        self.table.setflags(write=False)
        self.size = n
        self.identity = int(identity)
        self.names = list(names) if names is not None else [str(i) for i in range(n)]
        self.meta = meta
        self.kind = kind
        self.params = dict(params or {})
        self.parent_index = None if parent_index is None else np.asarray(parent_index, dtype=np.int64)
        self._cache: dict = {}

        idx = self._T
        e = self.identity
        if not (np.array_equal(idx[e], np.arange(n)) and np.array_equal(idx[:, e], np.arange(n))):
            raise ValueError("identity law fails")
        if n <= EXHAUSTIVE_LIMIT and not trusted:
            self._check_associative_exhaustive()
        elif not trusted:
            raise SizeLimit(f"{n} elements: pass trusted=True for tables above {EXHAUSTIVE_LIMIT}")
        else:
            self._check_associative_sampled()

    @cached_property
    def _T(self) -> np.ndarray:
        return self.table.astype(np.intp)

    def _check_associative_exhaustive(self) -> None:
        # Light's test: (xg)y = x(gy) for g in a generating set suffices
        T = self._T
        for g in _closure_generators(T, self.identity):
            lhs, rhs = T[T[:, g]], T[:, T[g]]
            if not np.array_equal(lhs, rhs):
                x, y = np.argwhere(lhs != rhs)[0]
                raise NotAssociative(f"({x}*{g})*{y} != {x}*({g}*{y})")

    def _check_associative_sampled(self) -> None:
        T = self._T
        rng = np.random.default_rng(0)
        a, b, c = rng.integers(0, self.size, size=(3, _SAMPLE_TRIPLES))
        if not np.array_equal(T[T[a, b], c], T[a, T[b, c]]):
            raise NotAssociative("sampled associativity check failed")

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def product(self, *elements: int) -> int:
        out = self.identity
        for m in elements:
            out = int(self.table[out, m])
        return out

    def cached(self, key, build: Callable[[], Any]):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def __len__(self) -> int:
        return self.size

    def __repr__(self) -> str:
        tag = f" {self.kind}{self.params}" if self.kind else ""
        return f"<FiniteMonoid{tag} size={self.size}>"

    @cached_property
    def omega(self) -> np.ndarray:
        """``omega[m]`` is the idempotent positive power of m."""
        T = self._T
        out = np.empty(self.size, dtype=np.intp)
        for m in range(self.size):
            seen = {}
            x, k = m, 1
            while x not in seen:
                seen[x] = k
                x, k = T[x, m], k + 1
            start = seen[x]
            period = k - start
            target = period * -(-start // period)
            y = m
            for _ in range(target - 1):
                y = T[y, m]
            out[m] = y
        out.setflags(write=False)
        return out

    @cached_property
    def idempotent_mask(self) -> np.ndarray:
        T = self._T
        ar = np.arange(self.size)
        return T[ar, ar] == ar

    @cached_property
    def idempotents(self) -> np.ndarray:
        return np.flatnonzero(self.idempotent_mask)

    @cached_property
    def generators(self) -> list[int]:
        """A small generating set, found greedily from the units downward."""
        lat_rank = None
        try:
            lat = support_lattice(self)
            lat_rank = lat.rank[lat.sigma]
        except NotRightSemicentral:
            pass
        order = list(range(self.size))
        if lat_rank is not None:
            order.sort(key=lambda m: (-int(lat_rank[m]), m))
        T = self._T
        gens: list[int] = []
        closed = np.zeros(self.size, dtype=bool)
        closed[self.identity] = True
        for m in order:
            if closed[m]:
                continue
            gens.append(m)
            frontier = np.flatnonzero(closed)
            while frontier.size:
                new = np.unique(T[np.ix_(frontier, gens)].ravel())
                new = new[~closed[new]]
                closed[new] = True
                frontier = new
        return gens


# -- Green's relations --------------------------------------------------------


@dataclass(frozen=True)
class GreenStructure:
    r_class: np.ndarray
    l_class: np.ndarray
    j_class: np.ndarray
    regular_j: frozenset
    j_order: np.ndarray  # j_order[a, b]: J_a <= J_b

    def same_r(self, a: int, b: int) -> bool:
        return self.r_class[a] == self.r_class[b]


def _classes(masks: np.ndarray) -> np.ndarray:
    ids: dict[bytes, int] = {}
    out = np.empty(masks.shape[0], dtype=np.intp)
    for i, row in enumerate(masks):
        out[i] = ids.setdefault(np.packbits(row).tobytes(), len(ids))
    return out


def principal_right_ideals(M: FiniteMonoid) -> np.ndarray:
    def build():
        out = np.zeros((M.size, M.size), dtype=bool)
        out[np.arange(M.size)[:, None], M._T] = True
        return out
    return M.cached("right_ideals", build)


def principal_left_ideals(M: FiniteMonoid) -> np.ndarray:
    def build():
        out = np.zeros((M.size, M.size), dtype=bool)
        out[np.arange(M.size)[:, None], M._T.T] = True
        return out
    return M.cached("left_ideals", build)


def green_structure(M: FiniteMonoid) -> GreenStructure:
    def build():
        T = M._T
        n = M.size
        right = principal_right_ideals(M)
        left = principal_left_ideals(M)
        two = np.zeros((n, n), dtype=bool)
        for a in range(n):
            two[a, T[:, T[a]].ravel()] = True
        r = _classes(right)
        l = _classes(left)
        j = _classes(two)
        nj = int(j.max()) + 1
        reps = [int(np.flatnonzero(j == c)[0]) for c in range(nj)]
        # containment of principal two-sided ideals
        order = np.array([[not np.any(two[reps[a]] & ~two[reps[b]]) for b in range(nj)]
                          for a in range(nj)])
        regular = frozenset(int(j[e]) for e in M.idempotents)
        return GreenStructure(r, l, j, regular, order)
    return M.cached("green", build)


# -- axioms -------------------------------------------------------------------


@dataclass(frozen=True)
class AxiomReport:
    right_semicentral: bool
    left_duo: bool
    regular: bool
    lrb_of_groups: bool

    def as_dict(self) -> dict:
        return {
            "right_semicentral": self.right_semicentral,
            "left_duo": self.left_duo,
            "regular": self.regular,
            "lrb_of_groups": self.lrb_of_groups,
        }


def _is_right_semicentral(M: FiniteMonoid) -> bool:
    T = M._T
    for e in M.idempotents:
        em = T[e]
        if not np.array_equal(T[em, e], em):
            return False
    return True


def _is_left_duo(M: FiniteMonoid) -> bool:
    right = principal_right_ideals(M)
    left = principal_left_ideals(M)
    return not np.any(right & ~left)


def _is_regular(M: FiniteMonoid) -> bool:
    T = M._T
    ar = np.arange(M.size)
    # m x m for every x, one row per m
    mxm = T[T, ar[:, None]]
    return bool(np.all(np.any(mxm == ar[:, None], axis=1)))


def _omega_multiplicative(M: FiniteMonoid) -> bool:
    w = M.omega
    T = M._T
    return bool(np.array_equal(w[T], T[np.ix_(w, w)]))


def check_axioms(M: FiniteMonoid) -> AxiomReport:
    def build():
        rs = _is_right_semicentral(M)
        ld = _is_left_duo(M)
        reg = _is_regular(M)
        lrbg = reg and ld and _omega_multiplicative(M)
        return AxiomReport(rs, ld, reg, lrbg)
    return M.cached("axioms", build)


def _require_regular_left_duo(M: FiniteMonoid) -> None:
    ax = check_axioms(M)
    if not (ax.regular and ax.left_duo):
        raise NotRegularLeftDuo(f"{M!r} is not a regular left duo monoid")


def _require_idempotent(M: FiniteMonoid, e: int) -> None:
    if not M.idempotent_mask[e]:
        raise NotIdempotent(f"element {e} ({M.names[e]}) is not idempotent")


# -- omega powers, maximal subgroups, daggers ----------------------------------


def omega_power(M: FiniteMonoid, m: int) -> int:
    return int(M.omega[m])


@dataclass(frozen=True)
class MaximalSubgroup:
    host: FiniteMonoid = field(repr=False)
    idempotent: int
    members: tuple[int, ...]
    inverse: dict = field(repr=False)

    @property
    def order(self) -> int:
        return len(self.members)

    def rho(self, m: int) -> int:
        """The retraction m -> e*m into eMe."""
        return self.host.mul(self.idempotent, m)

    def exponent(self) -> int:
        from math import lcm
        out = 1
        for g in self.members:
            k, x = 1, g
            while x != self.idempotent:
                x, k = self.host.mul(x, g), k + 1
            out = lcm(out, k)
        return out

    def is_abelian(self) -> bool:
        T = self.host._T
        mem = np.array(self.members)
        sub = T[np.ix_(mem, mem)]
        return bool(np.array_equal(sub, sub.T))


def maximal_subgroup(M: FiniteMonoid, e: int) -> MaximalSubgroup:
    _require_idempotent(M, e)

    def build():
        T = M._T
        eMe = np.unique(T[T[e], e])
        sub = T[np.ix_(eMe, eMe)]
        two_sided = (sub == e) & (sub.T == e)
        members = [int(u) for u, row in zip(eMe, two_sided) if row.any()]
        inverse = {}
        for i, u in enumerate(eMe):
            hits = np.flatnonzero(two_sided[i])
            if hits.size:
                inverse[int(u)] = int(eMe[hits[0]])
        return MaximalSubgroup(M, int(e), tuple(members), inverse)
    return M.cached(("maxsub", int(e)), build)


def dagger(M: FiniteMonoid, m: int) -> int:
    """Inverse of m inside the maximal subgroup at its omega power."""
    _require_regular_left_duo(M)
    G = maximal_subgroup(M, int(M.omega[m]))
    return G.inverse[int(m)]


def conjugate_idempotent(M: FiniteMonoid, m: int, e: int) -> int:
    """The action (m, e) -> m e m-dagger of M on its idempotents."""
    _require_regular_left_duo(M)
    _require_idempotent(M, e)
    return M.product(m, e, dagger(M, m))


# -- support lattice ----------------------------------------------------------


@dataclass(frozen=True)
class SupportLattice:
    """Idempotent-generated principal left ideals, ordered by inclusion.

    Nodes are numbered by (rank, representative); ``rank`` is the length of
    the longest chain down to the bottom node.
    """

    size: int
    meet: np.ndarray
    leq: np.ndarray
    sigma: np.ndarray
    representative: np.ndarray
    rank: np.ndarray
    top: int
    bottom: int

    @property
    def elements(self) -> list[int]:
        return list(range(self.size))

    def lt(self, x: int, y: int) -> bool:
        return x != y and bool(self.leq[x, y])

    def up_mask(self, x: int) -> np.ndarray:
        """Nodes y with y >= x."""
        return self.leq[x]

    def interval_rank(self, x: int, y: int) -> int:
        return int(self.rank[y] - self.rank[x])

    def is_graded(self) -> bool:
        for x in range(self.size):
            for y in range(self.size):
                if self.leq[x, y] and x != y and self._covers(x, y) and self.rank[y] != self.rank[x] + 1:
                    return False
        return True

    def _covers(self, x: int, y: int) -> bool:
        between = self.leq[x] & self.leq[:, y]
        return int(between.sum()) == 2

    def covers(self) -> list[tuple[int, int]]:
        return [(x, y) for x in range(self.size) for y in range(self.size)
                if x != y and self.leq[x, y] and self._covers(x, y)]


def support_lattice(M: FiniteMonoid) -> SupportLattice:
    def build():
        if not _is_right_semicentral(M):
            raise NotRightSemicentral(f"{M!r} is not right semicentral")
        left = principal_left_ideals(M)
        E = M.idempotents
        key_of: dict[bytes, int] = {}
        raw_rep: list[int] = []
        node_of_idem = {}
        for e in E:
            k = np.packbits(left[e]).tobytes()
            if k not in key_of:
                key_of[k] = len(raw_rep)
                raw_rep.append(int(e))
            node_of_idem[int(e)] = key_of[k]
        k = len(raw_rep)
        masks = np.array([left[r] for r in raw_rep])
        leq = np.array([[not np.any(masks[a] & ~masks[b]) for b in range(k)] for a in range(k)])
        rank = np.zeros(k, dtype=np.intp)
        # longest chain from below; nodes sorted by ideal size form a linear extension
        for a in sorted(range(k), key=lambda a: masks[a].sum()):
            below = [b for b in range(k) if b != a and leq[b, a]]
            rank[a] = 1 + max(rank[b] for b in below) if below else 0
        order = sorted(range(k), key=lambda a: (rank[a], raw_rep[a]))
        new_id = {old: i for i, old in enumerate(order)}
        reps = np.array([raw_rep[a] for a in order], dtype=np.intp)
        leq = leq[np.ix_(order, order)]
        rank = rank[order]
        sigma = np.array([new_id[node_of_idem[int(M.omega[m])]] for m in range(M.size)], dtype=np.intp)
        T = M._T
        meet = np.array([[sigma[T[reps[a], reps[b]]] for b in range(k)] for a in range(k)], dtype=np.intp)
        top = int(sigma[M.identity])
        bottoms = [a for a in range(k) if leq[a].all()]
        for arr in (leq, rank, sigma, meet, reps):
            arr.setflags(write=False)
        return SupportLattice(k, meet, leq, sigma, reps, rank, top, bottoms[0])
    return M.cached("lattice", build)


def contraction(M: FiniteMonoid, X: int) -> FiniteMonoid:
    """The submonoid {m : sigma(m) >= X}, re-indexed, with ``parent_index``."""
    lat = support_lattice(M)
    keep = np.flatnonzero(lat.leq[X][lat.sigma])
    pos = -np.ones(M.size, dtype=np.intp)
    pos[keep] = np.arange(keep.size)
    sub = pos[M._T[np.ix_(keep, keep)]]
    if np.any(sub < 0):
        raise AssertionError("contraction is not closed under multiplication")
    parent = keep if M.parent_index is None else M.parent_index[keep]
    return FiniteMonoid(
        sub,
        int(pos[M.identity]),
        names=[M.names[i] for i in keep],
        meta=None if M.meta is None else tuple(M.meta[i] for i in keep),
        kind=M.kind,
        params=M.params,
        parent_index=parent,
        trusted=keep.size > EXHAUSTIVE_LIMIT,
    )


def natural_leq(M: FiniteMonoid, e: int, f: int) -> bool:
    """e <= f in the band of idempotents, i.e. f e = e."""
    return M.mul(f, e) == e


# -- table file format --------------------------------------------------------


def read_table(path: str | Path) -> FiniteMonoid:
    lines = [ln for ln in Path(path).read_text().splitlines() 
             if ln.strip() and not ln.lstrip().startswith("#")]
    n, identity = (int(t) for t in lines[0].split())
    rows = [[int(t) for t in ln.split()] for ln in lines[1:1 + n]]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError(f"{path}: expected {n} rows of {n} entries")
    return FiniteMonoid(np.array(rows), identity, trusted=n > EXHAUSTIVE_LIMIT)


def format_table(M: FiniteMonoid) -> str:
    out = [f"{M.size} {M.identity}"]
    out.extend(" ".join(str(int(x)) for x in row) for row in M.table)
    return "\n".join(out) + "\n"


def write_table(M: FiniteMonoid, path: str | Path) -> None:
    Path(path).write_text(format_table(M))
