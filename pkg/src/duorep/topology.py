"""Finite posets, order complexes, reduced homology over F_p, CW-poset
recognition, incidence numbers and cellular chain complexes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import fp
from .errors import ApexMismatch, DiamondViolation, NoConsistentSigns, NotGraded
from .monoid import FiniteMonoid, _require_regular_left_duo, support_lattice


class FinitePoset:
    """A partial order on ``range(size)``; ``leq[a, b]`` means a <= b.

    ``elements`` optionally records what each node stands for (for instance
    a monoid element index).
    """

    def __init__(self, leq, elements=None, names=None, check: bool = True):
        L = np.array(leq, dtype=bool)
        n = L.shape[0]
        if L.shape != (n, n):
            raise ValueError("leq must be square")
        if check and n:
            if not L.diagonal().all():
                raise ValueError("leq is not reflexive")
            if np.any(L & L.T & ~np.eye(n, dtype=bool)):
                raise ValueError("leq is not antisymmetric")
            Li = L.astype(np.int64)
            if np.any((Li @ Li > 0) & ~L):
                raise ValueError("leq is not transitive")
        L.setflags(write=False)
        self.leq = L
        self.size = n
        self.elements = list(range(n)) if elements is None else list(elements)
        self.names = names

    @classmethod
    def from_covers(cls, n: int, covers, **kw) -> "FinitePoset":
        R = np.eye(n, dtype=bool)
        for a, b in covers:
            R[a, b] = True
        while True:
            nxt = (R.astype(np.int64) @ R.astype(np.int64)) > 0
            if np.array_equal(nxt, R):
                break
            R = nxt
        return cls(R, **kw)

    def __len__(self) -> int:
        return self.size

    def __repr__(self) -> str:
        return f"<FinitePoset size={self.size}>"

    @cached_property
    def lt(self) -> np.ndarray:
        return self.leq & ~np.eye(self.size, dtype=bool)

    @cached_property
    def cover(self) -> np.ndarray:
        lt = self.lt.astype(np.int64)
        return self.lt & ~((lt @ lt) > 0)

    def covers(self) -> list[tuple[int, int]]:
        """Pairs (a, b) with b covering a."""
        return [(int(a), int(b)) for a, b in np.argwhere(self.cover)]

    @cached_property
    def rank(self) -> np.ndarray:
        """Length of the longest chain from a minimal element up to each node."""
        r = np.zeros(self.size, dtype=np.intp)
        order = np.argsort(self.lt.sum(axis=0), kind="stable")
        for b in order:
            below = np.flatnonzero(self.lt[:, b])
            r[b] = r[below].max() + 1 if below.size else 0
        r.setflags(write=False)
        return r

    def is_graded(self) -> bool:
        a, b = np.nonzero(self.cover)
        return bool(np.all(self.rank[b] == self.rank[a] + 1))

    def require_graded(self) -> None:
        if not self.is_graded():
            raise NotGraded("poset has covers that skip a rank")

    def subposet(self, mask) -> "FinitePoset":
        idx = np.flatnonzero(np.asarray(mask, dtype=bool))
        names = None if self.names is None else [self.names[i] for i in idx]
        return FinitePoset(self.leq[np.ix_(idx, idx)], elements=[self.elements[i] for i in idx],
                           names=names, check=False)

    def below(self, x: int) -> "FinitePoset":
        return self.subposet(self.lt[:, x])

    def above(self, x: int) -> "FinitePoset":
        return self.subposet(self.lt[x])

    def open_interval(self, x: int, y: int) -> "FinitePoset":
        return self.subposet(self.lt[x] & self.lt[:, y])

    def maximal(self) -> list[int]:
        return [int(a) for a in np.flatnonzero(~self.lt.any(axis=1))]

    def minimal(self) -> list[int]:
        return [int(a) for a in np.flatnonzero(~self.lt.any(axis=0))]


# -- simplicial complexes and homology ---------------------------------------


@dataclass(frozen=True)
class SimplicialComplex:
    """``faces[d]`` is an int array of shape (count, d+1), rows sorted ascending."""

    n_vertices: int
    faces: tuple[np.ndarray, ...]

    @property
    def dim(self) -> int:
        return len(self.faces) - 1

    def f_vector(self) -> list[int]:
        return [len(F) for F in self.faces]

    def facets(self) -> list[tuple[int, ...]]:
        out = []
        faces = [set(map(tuple, F.tolist())) for F in self.faces]
        for d, F in enumerate(faces):
            up = faces[d + 1] if d + 1 < len(faces) else set()
            covered = {tuple(s[:i] + s[i + 1:]) for s in up for i in range(len(s))}
            out.extend(sorted(F - covered))
        return out

    @classmethod
    def from_facets(cls, n_vertices: int, facets) -> "SimplicialComplex":
        from itertools import combinations
        seen: dict[int, set] = {}
        for f in facets:
            f = tuple(sorted(f))
            for k in range(1, len(f) + 1):
                seen.setdefault(k - 1, set()).update(combinations(f, k))
        top = max(seen) if seen else -1
        faces = tuple(np.array(sorted(seen[d]), dtype=np.int64).reshape(-1, d + 1) for d in range(top + 1))
        return cls(n_vertices, faces)

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * len(F) for d, F in enumerate(self.faces))


def order_complex(P: FinitePoset) -> SimplicialComplex:
    """Chains of P; each chain listed as its sorted node indices."""
    lt = P.lt
    chains = [[(int(a),) for a in range(P.size)]] if P.size else []
    # chains grown upward from their top element
    tops = [np.arange(P.size)] if P.size else []
    while chains and chains[-1]:
        nxt, nxt_top = [], []
        for ch, t in zip(chains[-1], tops[-1]):
            for b in np.flatnonzero(lt[t]):
                nxt.append(ch + (int(b),))
                nxt_top.append(b)
        if not nxt:
            break
        chains.append(nxt)
        tops.append(np.array(nxt_top))
    faces = tuple(
        np.array(sorted(tuple(sorted(c)) for c in level), dtype=np.int64).reshape(len(level), d + 1)
        for d, level in enumerate(chains)
    )
    return SimplicialComplex(P.size, faces)


def _face_index(F: np.ndarray) -> dict:
    return {tuple(r): i for i, r in enumerate(F.tolist())}


def simplicial_boundary(C: SimplicialComplex, d: int, p: int) -> np.ndarray:
    """Matrix of the boundary C_d -> C_{d-1} (d = 0 is the augmentation)."""
    S = C.faces[d]
    if d == 0:
        return np.ones((1, len(S)), dtype=np.int64) % p
    lower = _face_index(C.faces[d - 1])
    D = np.zeros((len(C.faces[d - 1]), len(S)), dtype=np.int64)
    rows = S.tolist()
    for j, s in enumerate(rows):
        for i in range(len(s)):
            D[lower[tuple(s[:i] + s[i + 1:])], j] = 1 if i % 2 == 0 else p - 1
    return D


def reduced_betti(C: SimplicialComplex, p: int) -> list[int]:
    """Reduced Betti numbers over F_p, indexed from degree -1.

    ``reduced_betti(C, p)[q + 1]`` is the q-th reduced Betti number; the
    empty complex gives ``[1]``.
    """
    dims = [1] + C.f_vector()
    ranks = [0] + [fp.rank(simplicial_boundary(C, d, p), p) for d in range(len(C.faces))] + [0]
    # ranks[i] is the rank of the boundary out of augmented degree i-1
    return [dims[i] - ranks[i] - ranks[i + 1] for i in range(len(dims))]


def betti_at(betti: list[int], q: int) -> int:
    i = q + 1
    return betti[i] if 0 <= i < len(betti) else 0


def sphere_betti(d: int) -> list[int]:
    """Reduced Betti vector of a d-sphere (d = -1 is the empty complex)."""
    out = [0] * (d + 2)
    out[d + 1] = 1
    return out


def is_sphere_pattern(betti: list[int], d: int) -> bool:
    return all(betti_at(betti, q) == (1 if q == d else 0) for q in range(-1, max(len(betti), d + 2)))


# -- boundary posets of a monoid ----------------------------------------------


def band_poset(M: FiniteMonoid, idempotents) -> FinitePoset:
    """Idempotents under e <= e' iff e'e = e."""
    E = np.asarray(list(idempotents), dtype=np.intp)
    T = M._T
    leq = T[np.ix_(E, E)].T == E[:, None]
    return FinitePoset(leq, elements=E.tolist(), names=[M.names[e] for e in E], check=False)


def contraction_band(M: FiniteMonoid, X: int) -> FinitePoset:
    """The band B_{>=X} as a poset."""
    lat = support_lattice(M)
    E = [int(e) for e in M.idempotents if lat.leq[X, lat.sigma[e]]]
    return band_poset(M, E)


def boundary_subposet(M: FiniteMonoid, f: int, X: int) -> FinitePoset:
    """Idempotents e != f with fe = e and sigma(e) >= X."""
    _require_regular_left_duo(M)
    lat = support_lattice(M)
    if not M.idempotent_mask[f]:
        from .errors import NotIdempotent
        raise NotIdempotent(f"element {f} is not idempotent")
    if not lat.leq[X, lat.sigma[f]]:
        raise ApexMismatch(f"sigma({M.names[f]}) is not above node {X}")
    T = M._T
    E = [int(e) for e in M.idempotents
         if e != f and T[f, e] == e and lat.leq[X, lat.sigma[e]]]
    return band_poset(M, E)


# -- CW posets ----------------------------------------------------------------


@dataclass
class CWReport:
    graded: bool = True
    spheres: bool = True
    euler: bool = True
    diamonds: bool = True
    failures: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.graded and self.spheres and self.euler and self.diamonds


def cw_report(P: FinitePoset, primes=(2, 3)) -> CWReport:
    rep = CWReport()
    if not P.is_graded():
        rep.graded = False
        rep.failures.append("not graded")
        return rep
    for x in range(P.size):
        r = int(P.rank[x])
        if r == 0:
            continue
        C = order_complex(P.below(x))
        for p in primes:
            if not is_sphere_pattern(reduced_betti(C, p), r - 1):
                rep.spheres = False
                rep.failures.append(f"node {x}: lower interval not a {r - 1}-sphere over F_{p}")
                break
        if C.euler_characteristic() - 1 != (-1) ** (r - 1):
            rep.euler = False
            rep.failures.append(f"node {x}: Euler characteristic mismatch")
    try:
        _diamonds(P)
    except DiamondViolation as exc:
        rep.diamonds = False
        rep.failures.append(str(exc))
    return rep


def is_cw_poset(P: FinitePoset) -> bool:
    """Necessary conditions for P to be the face poset of a regular CW complex."""
    return bool(cw_report(P))


def _diamonds(P: FinitePoset) -> list[tuple[int, int, int, int | None]]:
    """(bottom, z1, z2, top) for every rank-2 interval; bottom is None for the
    virtual minimum under a rank-1 node."""
    out = []
    cov = P.cover
    rank = P.rank
    for q in range(P.size):
        if rank[q] == 1:
            zs = np.flatnonzero(cov[:, q])
            if len(zs) != 2:
                raise DiamondViolation(f"rank-1 node {q} covers {len(zs)} nodes, expected 2")
            out.append((None, int(zs[0]), int(zs[1]), q))
        elif rank[q] >= 2:
            for b in np.flatnonzero(P.lt[:, q] & (rank == rank[q] - 2)):
                zs = np.flatnonzero(cov[b] & cov[:, q])
                if len(zs) != 2:
                    raise DiamondViolation(
                        f"interval [{b},{q}] has {len(zs)} intermediate nodes, expected 2")
                out.append((int(b), int(zs[0]), int(zs[1]), q))
    return out


def _solve_gf2(equations: list[tuple[int, int]], nvars: int) -> list[int]:
    """Solve XOR equations (bitmask, rhs); free variables are set to 0."""
    pivots: dict[int, tuple[int, int]] = {}
    for mask, rhs in equations:
        while mask:
            top = mask.bit_length() - 1
            if top not in pivots:
                pivots[top] = (mask, rhs)
                break
            pm, pr = pivots[top]
            mask ^= pm
            rhs ^= pr
        else:
            if rhs:
                raise NoConsistentSigns("diamond sign constraints are inconsistent")
    x = [0] * nvars
    for top in sorted(pivots):
        mask, rhs = pivots[top]
        val = rhs
        rest = mask & ~(1 << top)
        while rest:
            b = rest.bit_length() - 1
            val ^= x[b]
            rest &= ~(1 << b)
        x[top] = val
    return x


def incidence_numbers(P: FinitePoset) -> dict[tuple[int, int], int]:
    """Signs eps[(upper, lower)] on covers so that every diamond sums to zero.

    Rank-1 nodes are treated as intervals over a virtual bottom, which
    forces their two vertices to receive opposite signs.
    """
    P.require_graded()
    covers = [(b, a) for a, b in P.covers()]
    var = {c: i for i, c in enumerate(covers)}
    eqs = []
    for b, z1, z2, q in _diamonds(P):
        mask = (1 << var[(q, z1)]) ^ (1 << var[(q, z2)])
        if b is not None:
            mask ^= (1 << var[(z1, b)]) ^ (1 << var[(z2, b)])
        eqs.append((mask, 1))
    x = _solve_gf2(eqs, len(covers))
    return {c: -1 if x[i] else 1 for c, i in var.items()}


@dataclass(frozen=True)
class ChainComplex:
    """``boundary[d]`` maps degree d to degree d-1 (a dims[d-1] x dims[d] matrix);
    ``boundary[0]`` is the zero map to the zero module."""

    p: int
    dims: tuple[int, ...]
    boundary: tuple[np.ndarray, ...]

    def __post_init__(self):
        for d in range(1, len(self.dims)):
            B = self.boundary[d]
            if B.shape != (self.dims[d - 1], self.dims[d]):
                raise ValueError(f"boundary {d} has shape {B.shape}")
        for d in range(1, len(self.dims) - 1):
            if np.any(fp.matmul(self.boundary[d], self.boundary[d + 1], self.p)):
                raise AssertionError(f"boundary squares to a nonzero map at degree {d}")

    def homology(self) -> list[int]:
        ranks = [fp.rank(self.boundary[d], self.p) if d < len(self.dims) and d > 0 else 0
                 for d in range(len(self.dims) + 1)]
        return [self.dims[d] - ranks[d] - ranks[d + 1] for d in range(len(self.dims))]


def cellular_chain_complex(P: FinitePoset, p: int, eps=None) -> ChainComplex:
    """Cells are the nodes of P graded by rank, ordered by node index."""
    if eps is None:
        eps = incidence_numbers(P)
    rank = P.rank
    top = int(rank.max()) if P.size else -1
    cells = [np.flatnonzero(rank == d) for d in range(top + 1)]
    pos = {int(c): i for lev in cells for i, c in enumerate(lev)}
    bds = [np.zeros((0, len(cells[0]) if cells else 0), dtype=np.int64)]
    for d in range(1, top + 1):
        D = np.zeros((len(cells[d - 1]), len(cells[d])), dtype=np.int64)
        for j, q in enumerate(cells[d]):
            for a in np.flatnonzero(P.cover[:, q]):
                D[pos[int(a)], j] = eps[(int(q), int(a))] % p
        bds.append(D)
    return ChainComplex(p, tuple(len(c) for c in cells), tuple(bds))


# -- poset dump format ---------------------------------------------------------


def format_poset(P: FinitePoset) -> str:
    lines = [str(P.size)]
    lines.extend(f"{a} {b}" for a, b in P.covers())
    return "\n".join(lines) + "\n"


def write_poset(P: FinitePoset, path: str | Path) -> None:
    Path(path).write_text(format_poset(P))


def read_poset(path: str | Path) -> FinitePoset:
    lines = [ln for ln in Path(path).read_text().splitlines() 
             if ln.strip() and not ln.lstrip().startswith("#")]
    n = int(lines[0])
    covers = [tuple(int(t) for t in ln.split()) for ln in lines[1:]]
    return FinitePoset.from_covers(n, covers)
