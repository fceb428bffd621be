"""Simple modules, the poset of simple labels, and the primitive idempotents
of KM for M a regular left duo monoid with abelian maximal subgroups.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from math import gcd, lcm

import numpy as np

from . import fp
from .errors import BadCharacteristic, BadPrime, NonAbelianFiber, NotApplicable
from .hsiao import Character, FiniteAbelianGroup, OrderedSetPartition, _root_of_unity, hsiao_group
from .monoid import (
    FiniteMonoid,
    MaximalSubgroup,
    check_axioms,
    maximal_subgroup,
    support_lattice,
)

_FLOAT_EXACT = 2**52


class AlgebraElement:
    """An element of the monoid algebra F_p M, stored as a dense coefficient vector."""

    __slots__ = ("M", "p", "vec")

    def __init__(self, M: FiniteMonoid, p: int, vec):
        self.M = M
        self.p = p
        self.vec = np.mod(np.asarray(vec, dtype=np.int64), p)

    @classmethod
    def zero(cls, M, p):
        return cls(M, p, np.zeros(M.size, dtype=np.int64))

    @classmethod
    def basis(cls, M, p, m: int, c: int = 1):
        v = np.zeros(M.size, dtype=np.int64)
        v[m] = c
        return cls(M, p, v)

    @classmethod
    def one(cls, M, p):
        return cls.basis(M, p, M.identity)

    @classmethod
    def from_dict(cls, M, p, coeffs: dict):
        v = np.zeros(M.size, dtype=np.int64)
        for m, c in coeffs.items():
            v[m] += c
        return cls(M, p, v)

    def to_dict(self) -> dict[int, int]:
        return {int(m): int(self.vec[m]) for m in np.flatnonzero(self.vec)}

    def support(self) -> list[int]:
        return np.flatnonzero(self.vec).tolist()

    def __getitem__(self, m: int) -> int:
        return int(self.vec[m])

    def _wrap(self, v):
        return AlgebraElement(self.M, self.p, v)

    def _check(self, other) -> None:
        if other.M is not self.M or other.p != self.p:
            raise ValueError("algebra elements live in different algebras")

    def __add__(self, other):
        self._check(other)
        return self._wrap(self.vec + other.vec)

    def __sub__(self, other):
        self._check(other)
        return self._wrap(self.vec - other.vec)

    def __neg__(self):
        return self._wrap(-self.vec)

    def scale(self, c: int):
        return self._wrap(self.vec * (c % self.p))

    def __rmul__(self, c: int):
        return self.scale(c)

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            return self.scale(int(other))
        self._check(other)
        return self._wrap(convolve(self.M, self.p, self.vec, other.vec))

    def __eq__(self, other) -> bool:
        return (isinstance(other, AlgebraElement) and other.p == self.p
                and np.array_equal(self.vec, other.vec))

    def __hash__(self):
        return hash(self.vec.tobytes())

    def is_zero(self) -> bool:
        return not self.vec.any()

    def is_idempotent(self) -> bool:
        return self * self == self

    def __repr__(self) -> str:
        terms = " + ".join(f"{c}*{self.M.names[m]}" for m, c in self.to_dict().items())
        return f"AlgebraElement({terms or '0'})"


def convolve(M: FiniteMonoid, p: int, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    a = np.flatnonzero(x)
    b = np.flatnonzero(y)
    if a.size == 0 or b.size == 0:
        return np.zeros(M.size, dtype=np.int64)
    idx = M._T[np.ix_(a, b)].ravel()
    w = np.outer(x[a], y[b]).ravel()
    if (p - 1) ** 2 * a.size * b.size < _FLOAT_EXACT:
        out = np.rint(np.bincount(idx, weights=w.astype(np.float64), minlength=M.size)).astype(np.int64)
    else:
        out = np.zeros(M.size, dtype=np.int64)
        np.add.at(out, idx, w % p)
    return out % p


def left_matrix(M: FiniteMonoid, p: int, x: np.ndarray) -> np.ndarray:
    """L with L @ y = x * y."""
    n = M.size
    a = np.flatnonzero(x)
    cols = np.broadcast_to(np.arange(n), (a.size, n))
    flat = (M._T[a] * n + cols).ravel()
    w = np.repeat(x[a].astype(np.float64), n)
    return np.mod(np.rint(np.bincount(flat, weights=w, minlength=n * n)).astype(np.int64), p).reshape(n, n)


def right_matrix(M: FiniteMonoid, p: int, y: np.ndarray) -> np.ndarray:
    """R with R @ x = x * y."""
    n = M.size
    b = np.flatnonzero(y)
    rows = np.broadcast_to(np.arange(n)[:, None], (n, b.size))
    flat = (M._T[:, b] * n + rows).ravel()
    w = np.tile(y[b].astype(np.float64), n)
    return np.mod(np.rint(np.bincount(flat, weights=w, minlength=n * n)).astype(np.int64), p).reshape(n, n)


# -- characters of maximal subgroups --------------------------------------------


def _element_order(G: MaximalSubgroup, g: int) -> int:
    k, x = 1, g
    while x != G.idempotent:
        x, k = G.host.mul(x, g), k + 1
    return k


def _roots_of_unity(d: int, p: int) -> list[int]:
    return sorted(x for x in range(1, p) if pow(x, d, p) == 1)


def subgroup_characters(G: MaximalSubgroup, p: int) -> list[dict[int, int]]:
    """All homomorphisms G -> F_p^x as dicts member -> value.

    Ordered with the trivial character first, then lexicographically by the
    value vector over ``G.members``.
    """
    if not G.is_abelian():
        raise NonAbelianFiber(f"maximal subgroup at {G.idempotent} is not abelian")
    if G.order % p == 0:
        raise BadCharacteristic(f"p = {p} divides |G| = {G.order}")
    M = G.host
    gens: list[int] = []
    span = {G.idempotent}
    for g in G.members:
        if g in span:
            continue
        gens.append(g)
        frontier = list(span)
        while frontier:
            new = []
            for x in frontier:
                for h in gens:
                    y = M.mul(x, h)
                    if y not in span:
                        span.add(y)
                        new.append(y)
            frontier = new
    choices = [_roots_of_unity(_element_order(G, g), p) for g in gens]
    out = []
    for assign in _product(choices):
        chi = {G.idempotent: 1}
        ok = True
        queue = deque([G.idempotent])
        while queue and ok:
            x = queue.popleft()
            for h, v in zip(gens, assign):
                y = M.mul(x, h)
                val = chi[x] * v % p
                if y not in chi:
                    chi[y] = val
                    queue.append(y)
                elif chi[y] != val:
                    ok = False
                    break
        if ok:
            out.append(chi)
    if len(out) != G.order:
        raise BadPrime(f"F_{p} does not split the maximal subgroup at {G.idempotent}")
    out.sort(key=lambda c: (any(v != 1 for v in c.values()), [c[g] for g in G.members]))
    return out


def _product(choices):
    if not choices:
        yield ()
        return
    for v in choices[0]:
        for rest in _product(choices[1:]):
            yield (v,) + rest


def auto_prime(M: FiniteMonoid, min: int = 2) -> int:
    """Smallest prime >= min that splits every maximal subgroup at a lattice node."""
    lat = support_lattice(M)
    e, orders = 1, 1
    for r in lat.representative:
        G = maximal_subgroup(M, int(r))
        e = lcm(e, G.exponent())
        orders = lcm(orders, G.order)
    p = max(min, 2)
    while True:
        if (p - 1) % e == 0 and orders % p and fp.is_prime(p):
            return p
        p += 1


# -- simple labels --------------------------------------------------------------


@dataclass(frozen=True)
class SimpleLabel:
    """A simple module: lattice node ``apex`` and a character of G at e_X.

    ``values`` lists the character on the members of the maximal subgroup.
    For Hsiao instances ``blocks`` is the set partition of the apex and
    ``f`` assigns a character of G to each block.
    """

    apex: int
    index: int
    values: tuple[int, ...]
    apex_name: str
    blocks: tuple[tuple[int, ...], ...] | None = None
    f: tuple[Character, ...] | None = None

    @property
    def char_name(self) -> str:
        if self.f is not None:
            return ",".join(".".join(map(str, c.exponents)) or "0" for c in self.f)
        return f"c{self.index}"

    def __str__(self) -> str:
        return f"{self.apex_name}|{self.char_name}"


def _apex_name(M: FiniteMonoid, X: int, e: int) -> tuple[str, tuple | None]:
    if M.kind in ("hsiao", "sigma_n") and M.meta is not None:
        o: OrderedSetPartition = M.meta[e][0]
        blocks = tuple(sorted(o.blocks))
        return "/".join("".join(map(str, b)) for b in blocks), blocks
    return f"X{X}", None


def _discrete_log(base: int, value: int, order: int, p: int) -> int:
    x = 1
    for k in range(order):
        if x == value:
            return k
        x = x * base % p
    raise ValueError("value is not a power of the base")


def _hsiao_f(M: FiniteMonoid, e: int, blocks, chi: dict, p: int) -> tuple[Character, ...]:
    G = hsiao_group(M)
    o = M.meta[e][0]
    w = _root_of_unity(G.exponent, p)
    index = {m[0:2]: i for i, m in enumerate(M.meta) if m[0] == o}
    out = []
    for B in blocks:
        a = []
        for j, m in enumerate(G.invariant_factors):
            u = tuple(1 if k == j else 0 for k in range(len(G.invariant_factors)))
            lab = tuple(u if (i + 1) in B else G.zero for i in range(o.n))
            val = chi[index[(o, lab)]]
            k = _discrete_log(w, val, G.exponent, p)
            a.append(k // (G.exponent // m))
        out.append(Character(G, p, tuple(a)))
    return tuple(out)


def _require_setting(M: FiniteMonoid, p: int) -> None:
    ax = check_axioms(M)
    if not (ax.regular and ax.left_duo):
        raise NotApplicable(f"{M!r} is not a regular left duo monoid")
    if not fp.is_prime(p):
        raise BadPrime(f"{p} is not prime")


def simple_labels(M: FiniteMonoid, p: int) -> list[SimpleLabel]:
    def build():
        _require_setting(M, p)
        lat = support_lattice(M)
        out = []
        for X in range(lat.size):
            e = int(lat.representative[X])
            G = maximal_subgroup(M, e)
            name, blocks = _apex_name(M, X, e)
            chars = subgroup_characters(G, p)
            fs: list = [None] * len(chars)
            if M.kind == "hsiao":
                fs = [_hsiao_f(M, e, blocks, chi, p) for chi in chars]
                order = sorted(range(len(chars)), key=lambda i: [c.exponents for c in fs[i]])
                chars, fs = [chars[i] for i in order], [fs[i] for i in order]
            elif M.kind == "sigma_n":
                fs = [tuple(Character(FiniteAbelianGroup(()), p, ()) for _ in blocks)] * len(chars)
            for i, (chi, f) in enumerate(zip(chars, fs)):
                out.append(SimpleLabel(X, i, tuple(chi[g] for g in G.members), name, blocks, f))
        return out
    return M.cached(("labels", p), build)


def find_label(M: FiniteMonoid, p: int, key) -> SimpleLabel:
    labels = simple_labels(M, p)
    if isinstance(key, SimpleLabel):
        return key
    if isinstance(key, (int, np.integer)) or (isinstance(key, str) and key.strip().isdigit()):
        return labels[int(key)]
    for L in labels:
        if str(L) == key:
            return L
    raise KeyError(f"no simple label {key!r}")


def character_values(M: FiniteMonoid, L: SimpleLabel) -> dict[int, int]:
    lat = support_lattice(M)
    G = maximal_subgroup(M, int(lat.representative[L.apex]))
    return dict(zip(G.members, L.values))


def simple_rep(M: FiniteMonoid, L: SimpleLabel, p: int) -> np.ndarray:
    """lambda(m) = chi(e_X m) when sigma(m) >= X, else 0."""
    lat = support_lattice(M)
    e = int(lat.representative[L.apex])
    chi = character_values(M, L)
    out = np.zeros(M.size, dtype=np.int64)
    above = lat.leq[L.apex][lat.sigma]
    for m in np.flatnonzero(above):
        out[m] = chi.get(int(M._T[e, m]), 0)
    return out


def lambda_matrix(M: FiniteMonoid, p: int) -> np.ndarray:
    """Rows are the simple-module functionals, one per label."""
    return M.cached(("lambda", p), lambda: np.array(
        [simple_rep(M, L, p) for L in simple_labels(M, p)], dtype=np.int64).reshape(-1, M.size))


# -- the label poset --------------------------------------------------------------


class LabelPoset:
    def __init__(self, M: FiniteMonoid, p: int):
        self.M = M
        self.p = p
        self.labels = simple_labels(M, p)
        lat = support_lattice(M)
        Lam = lambda_matrix(M, p)
        k = len(self.labels)
        leq = np.zeros((k, k), dtype=bool)
        members = {}
        for j, W in enumerate(self.labels):
            if W.apex not in members:
                members[W.apex] = list(maximal_subgroup(M, int(lat.representative[W.apex])).members)
        for i, V in enumerate(self.labels):
            for j, W in enumerate(self.labels):
                if lat.leq[V.apex, W.apex]:
                    leq[i, j] = tuple(Lam[i, members[W.apex]]) == W.values
        self.leq = leq
        self.rank = np.array([lat.rank[L.apex] for L in self.labels], dtype=np.intp)

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, L: SimpleLabel) -> int:
        return self.labels.index(L)

    @cached_property
    def poset(self):
        from .topology import FinitePoset
        return FinitePoset(self.leq, names=[str(L) for L in self.labels])

    def covers(self) -> list[tuple[int, int]]:
        return self.poset.covers()

    def is_graded(self) -> bool:
        a, b = np.nonzero(self.poset.cover)
        return bool(np.all(self.rank[b] == self.rank[a] + 1))

    def interval_count(self) -> int:
        return int(self.leq.sum())

    def rank_distance(self, i: int, j: int) -> int:
        return int(self.rank[j] - self.rank[i])


def label_poset(M: FiniteMonoid, p: int) -> LabelPoset:
    return M.cached(("label_poset", p), lambda: LabelPoset(M, p))


# -- idempotents ---------------------------------------------------------------


def eta_idempotents(M: FiniteMonoid, p: int) -> dict[int, AlgebraElement]:
    """eta_X = e_X - sum_{Y < X} e_X eta_Y, by rank then node index."""
    def build():
        lat = support_lattice(M)
        out: dict[int, AlgebraElement] = {}
        order = sorted(range(lat.size), key=lambda X: (lat.rank[X], X))
        for X in order:
            eX = AlgebraElement.basis(M, p, int(lat.representative[X]))
            acc = eX
            for Y in order:
                if Y in out and lat.lt(Y, X):
                    acc = acc - eX * out[Y]
            out[X] = acc
        return out
    return M.cached(("eta", p), build)


def character_idempotent(G: MaximalSubgroup, chi: dict, p: int) -> AlgebraElement:
    """|G|^-1 sum_g chi(g)^-1 g."""
    if G.order % p == 0:
        raise BadCharacteristic(f"p = {p} divides |G| = {G.order}")
    c = fp.inv(G.order, p)
    coeffs = {g: c * fp.inv(chi[g], p) % p for g in G.members}
    return AlgebraElement.from_dict(G.host, p, coeffs)


def theta_idempotents(M: FiniteMonoid, p: int) -> list[AlgebraElement]:
    lat = support_lattice(M)
    out = []
    for L in simple_labels(M, p):
        G = maximal_subgroup(M, int(lat.representative[L.apex]))
        out.append(character_idempotent(G, character_values(M, L), p))
    return out


def gamma_idempotents(M: FiniteMonoid, p: int) -> dict[SimpleLabel, AlgebraElement]:
    """gamma_L = eta_X theta_L eta_X; for LRBs of groups this is asserted to
    equal the shorter eta_X theta_L."""
    def build():
        try:
            _require_setting(M, p)
            labels = simple_labels(M, p)
        except (NonAbelianFiber, BadCharacteristic, BadPrime) as exc:
            raise NotApplicable(str(exc)) from exc
        eta = eta_idempotents(M, p)
        lrbg = check_axioms(M).lrb_of_groups
        out = {}
        for L, th in zip(labels, theta_idempotents(M, p)):
            short = eta[L.apex] * th
            g = short * eta[L.apex]
            if lrbg and g != short:
                raise AssertionError(f"eta theta eta != eta theta at {L}")
            out[L] = g
        return out
    return M.cached(("gamma", p), build)


def gamma_matrix(M: FiniteMonoid, p: int) -> np.ndarray:
    """Columns are the gamma idempotents in label order."""
    return M.cached(("gamma_matrix", p), lambda: np.array(
        [g.vec for g in gamma_idempotents(M, p).values()], dtype=np.int64).reshape(-1, M.size).T)


def check_idempotent_suite(M: FiniteMonoid, p: int) -> dict:
    """Completeness, orthogonality, count and primitivity of the gammas."""
    gam = gamma_idempotents(M, p)
    labels = simple_labels(M, p)
    Gm = gamma_matrix(M, p)
    one = AlgebraElement.one(M, p).vec
    complete = bool(np.array_equal(Gm.sum(axis=1) % p, one))
    orth = True
    for i, g in enumerate(gam.values()):
        prods = fp.matmul(left_matrix(M, p, g.vec), Gm, p)
        expect = np.zeros_like(prods)
        expect[:, i] = g.vec
        if not np.array_equal(prods, expect):
            orth = False
            break
    Lam = lambda_matrix(M, p)
    prim = True
    for g in gam.values():
        LR = fp.matmul(left_matrix(M, p, g.vec), right_matrix(M, p, g.vec), p)
        if fp.rank(fp.matmul(Lam, LR, p), p) != 1:
            prim = False
            break
    return {
        "complete": complete,
        "orthogonal": orth,
        "count_matches": len(gam) == len(labels),
        "primitive": prim,
        "count": len(gam),
    }
