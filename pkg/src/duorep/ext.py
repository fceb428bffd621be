"""Ext between simple modules from topology, the quiver with its quadratic
relations, component counts and Koszulity diagnostics.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import NotApplicable, NotGraded
from .idempotents import SimpleLabel, label_poset, simple_labels
from .monoid import FiniteMonoid, check_axioms, support_lattice
from .topology import betti_at, boundary_subposet, order_complex, reduced_betti


def boundary_betti(M: FiniteMonoid, X: int, Y: int, p: int) -> list[int]:
    """Reduced Betti numbers of the order complex of the boundary of e_Y B_{>=X}."""
    def build():
        lat = support_lattice(M)
        P = boundary_subposet(M, int(lat.representative[Y]), X)
        return reduced_betti(order_complex(P), p)
    return M.cached(("boundary_betti", X, Y, p), build)


def _require_lrbg(M: FiniteMonoid) -> None:
    if not check_axioms(M).lrb_of_groups:
        raise NotApplicable(f"{M!r} is not a left regular band of groups")


def ext_dim_topological(M: FiniteMonoid, V: SimpleLabel, W: SimpleLabel, q: int, p: int) -> int:
    _require_lrbg(M)
    labels = simple_labels(M, p)
    lat = support_lattice(M)
    X, Y = V.apex, W.apex
    if not lat.leq[X, Y]:
        return 0
    if X == Y:
        return int(q == 0 and V == W)
    LP = label_poset(M, p)
    if not LP.leq[labels.index(V), labels.index(W)]:
        return 0
    return betti_at(boundary_betti(M, X, Y, p), q - 1)


def _refines(X, Y) -> bool:
    return all(any(set(B) <= set(P) for P in Y) for B in X)


def ext_dim_hsiao(X, f, Y, h, q: int, group=None) -> int:
    """Closed form for Hsiao's monoid with abelian G.

    X, Y are set partitions (tuples of blocks); f, h map blocks to
    characters of G (as exponent tuples or Character objects, listed in
    block order).  Plain exponent tuples are reduced modulo ``group``'s
    invariant factors when it is given and compared exactly otherwise.
    """
    if not _refines(X, Y) or q != len(X) - len(Y):
        return 0
    fx = {frozenset(B): _exps(c) for B, c in zip(X, f)}
    for P, hp in zip(Y, h):
        acc = None
        for B, a in fx.items():
            if B <= set(P):
                acc = a if acc is None else tuple(x + y for x, y in zip(acc, a))
        if not _same_char(acc, _exps(hp), f, h, group):
            return 0
    return 1


def _exps(c):
    return tuple(c.exponents) if hasattr(c, "exponents") else tuple(c)


def _same_char(a, b, f, h, group=None) -> bool:
    if group is None:
        ref = next((c for c in list(f) + list(h) if hasattr(c, "group")), None)
        if ref is None:
            return a == b
        group = ref.group
    mods = group.invariant_factors
    return all((x - y) % m == 0 for x, y, m in zip(a, b, mods))


def ext_dim_hsiao_labels(V: SimpleLabel, W: SimpleLabel, q: int) -> int:
    if V.f is None or W.f is None:
        raise NotApplicable("labels do not come from a Hsiao instance")
    return ext_dim_hsiao(V.blocks, V.f, W.blocks, W.f, q)


@dataclass
class ExtTable:
    labels: list[SimpleLabel]
    max_degree: int
    entries: dict[tuple[int, int, int], int] = field(default_factory=dict)

    def get(self, i: int, j: int, q: int) -> int:
        return self.entries.get((i, j, q), 0)

    def nonzero(self) -> dict[tuple[int, int, int], int]:
        return {k: v for k, v in self.entries.items() if v}

    def total(self) -> int:
        return sum(self.entries.values())

    def to_json(self) -> dict:
        return {
            "labels": [str(L) for L in self.labels],
            "max_degree": self.max_degree,
            "nonzero": [[i, j, q, v] for (i, j, q), v in sorted(self.nonzero().items())],
        }


def lattice_rank(M: FiniteMonoid) -> int:
    return int(support_lattice(M).rank.max())


def ext_table(M: FiniteMonoid, p: int, method: str = "topological", max_degree: int | None = None) -> ExtTable:
    labels = simple_labels(M, p)
    qmax = lattice_rank(M) if max_degree is None else max_degree
    T = ExtTable(list(labels), qmax)
    for i, V in enumerate(labels):
        for j, W in enumerate(labels):
            for q in range(qmax + 1):
                if method == "topological":
                    v = ext_dim_topological(M, V, W, q, p)
                elif method == "hsiao":
                    v = ext_dim_hsiao_labels(V, W, q)
                else:
                    raise ValueError(f"unknown method {method!r}")
                T.entries[(i, j, q)] = v
    return T


# -- quiver ---------------------------------------------------------------------


@dataclass
class Quiver:
    vertices: list[SimpleLabel]
    arrows: list[tuple[int, int]]
    relations: list[list[tuple[int, int, int]]] = field(default_factory=list)
    rank: list[int] = field(default_factory=list)

    def arrow_counts(self) -> dict[tuple[int, int], int]:
        out: dict[tuple[int, int], int] = {}
        for a in self.arrows:
            out[a] = out.get(a, 0) + 1
        return out

    def to_dot(self) -> str:
        lines = ["digraph quiver {"]
        for i, L in enumerate(self.vertices):
            lines.append(f'  v{i} [label="{L}"];')
        for a, b in self.arrows:
            lines.append(f"  v{a} -> v{b};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def relations_json(self) -> dict:
        return {
            "schema": 1,
            "vertices": [str(L) for L in self.vertices],
            "relations": [
                {"source": r[0][0], "target": r[0][2],
                 "paths": [[a, z, b] for a, z, b in r]}
                for r in self.relations
            ],
        }


def _betti_arrows(M: FiniteMonoid, p: int) -> list[tuple[int, int]]:
    labels = simple_labels(M, p)
    LP = label_poset(M, p)
    out = []
    for i, V in enumerate(labels):
        for j, W in enumerate(labels):
            if i != j and LP.leq[i, j] and V.apex != W.apex:
                out.extend([(i, j)] * betti_at(boundary_betti(M, V.apex, W.apex, p), 0))
    return out


def build_quiver(M: FiniteMonoid, p: int, rule: str = "hasse", check: bool = True) -> Quiver:
    """Arrows are the Hasse covers of the label poset (``rule='hasse'``) or
    come from the zeroth Betti numbers of boundary posets (``rule='betti'``).
    With ``check`` both rules are computed and must agree."""
    _require_lrbg(M)
    LP = label_poset(M, p)
    hasse = sorted(LP.covers())
    if rule == "hasse":
        arrows = hasse
        if check and sorted(_betti_arrows(M, p)) != hasse:
            raise AssertionError("Hasse and Betti arrow rules disagree")
    elif rule == "betti":
        arrows = sorted(_betti_arrows(M, p))
    else:
        raise ValueError(f"unknown quiver rule {rule!r}")
    Q = Quiver(list(LP.labels), arrows, rank=LP.rank.tolist())
    if LP.is_graded():
        Q.relations = quiver_relations(Q)
    return Q


def quiver_relations(Q: Quiver) -> list[list[tuple[int, int, int]]]:
    """One relation per rank-2 interval: the sum of its length-2 paths."""
    out_edges: dict[int, list[int]] = {}
    for a, b in Q.arrows:
        out_edges.setdefault(a, []).append(b)
    rank = Q.rank
    for a, b in Q.arrows:
        if rank and rank[b] != rank[a] + 1:
            raise NotGraded(f"arrow {a}->{b} skips a rank")
    rels: dict[tuple[int, int], list] = {}
    for a in range(len(Q.vertices)):
        for z in out_edges.get(a, []):
            for b in out_edges.get(z, []):
                rels.setdefault((a, b), []).append((a, z, b))
    return [rels[k] for k in sorted(rels)]


def components(Q: Quiver) -> list[int]:
    parent = list(range(len(Q.vertices)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in Q.arrows:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    return [find(x) for x in range(len(Q.vertices))]


def component_count(Q: Quiver) -> int:
    return len(set(components(Q)))


def component_witness(L: SimpleLabel) -> tuple[int, ...]:
    """Product over blocks of the block characters (Hsiao instances)."""
    if L.f is None:
        raise NotApplicable("component witness needs a Hsiao label")
    if not L.f:
        return ()
    G = L.f[0].group
    acc = G.zero
    for c in L.f:
        acc = G.add(acc, c.exponents)
    return acc


# -- Koszul diagnostics -------------------------------------------------------------


@dataclass
class KoszulReport:
    concentrated: bool
    ext_algebra_dim: int
    interval_count: int
    offending: list = field(default_factory=list)

    @property
    def dims_equal(self) -> bool:
        return self.ext_algebra_dim == self.interval_count

    def as_dict(self) -> dict:
        return {
            "concentrated": self.concentrated,
            "ext_algebra_dim": self.ext_algebra_dim,
            "interval_count": self.interval_count,
            "dims_equal": self.dims_equal,
        }


def koszul_diagnostics(M: FiniteMonoid, p: int, table: ExtTable | None = None) -> KoszulReport:
    T = table if table is not None else ext_table(M, p)
    LP = label_poset(M, p)
    bad = []
    for (i, j, q), v in T.entries.items():
        expect = bool(LP.leq[i, j]) and q == LP.rank_distance(i, j)
        if bool(v) != expect:
            bad.append((i, j, q))
    return KoszulReport(not bad, T.total(), LP.interval_count(), bad)


def dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)
