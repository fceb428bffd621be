"""Linear-algebra ground truth over F_p: modules given by action matrices,
the radical, projective covers, minimal resolutions, the order-complex and
cellular resolutions, and the numeric check of the quiver presentation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import fp
from .errors import (
    ApexMismatch,
    LengthExceeded,
    MinimalityViolation,
    NonAbelianFiber,
    NonSplitBasic,
    NotCW,
    SizeLimit,
)
from .ext import build_quiver, lattice_rank
from .idempotents import (
    SimpleLabel,
    gamma_idempotents,
    gamma_matrix,
    lambda_matrix,
    left_matrix,
    right_matrix,
    simple_labels,
)
from .monoid import FiniteMonoid, check_axioms, dagger
from .topology import (
    contraction_band,
    incidence_numbers,
    is_cw_poset,
    order_complex,
    simplicial_boundary,
)

MAX_ACTION_ENTRIES = 60_000_000
ORACLE_LIMIT = 256


class Module:
    """A left F_p M-module; ``mats[m]`` is the action of element m."""

    def __init__(self, M: FiniteMonoid, p: int, mats, check: bool = False):
        mats = np.asarray(mats, dtype=np.int64)
        if mats.ndim != 3 or mats.shape[0] != M.size or mats.shape[1] != mats.shape[2]:
            raise ValueError("action must have shape (|M|, dim, dim)")
        self.M = M
        self.p = p
        self.mats = np.mod(mats, p)
        self.dim = mats.shape[1]
        if check:
            self.check()

    @classmethod
    def allocate(cls, M: FiniteMonoid, d: int) -> np.ndarray:
        if M.size * d * d > MAX_ACTION_ENTRIES:
            raise SizeLimit(f"action matrices of a {d}-dimensional module over {M.size} elements")
        return np.zeros((M.size, d, d), dtype=np.int64)

    def check(self) -> None:
        n, d = self.M.size, self.dim
        if not np.array_equal(self.mats[self.M.identity], np.eye(d, dtype=np.int64)):
            raise AssertionError("identity does not act as the identity")
        gens = self.M.generators
        T = self.M._T
        prods = fp.matmul(self.mats[gens][:, None], self.mats[None, :], self.p)
        if not np.array_equal(prods, self.mats[T[gens]]):
            raise AssertionError("action is not multiplicative")

    def hom_to_simple(self, lam: np.ndarray) -> np.ndarray:
        """Rows span Hom(C, S) for the 1-dimensional simple with character lam."""
        if self.dim == 0:
            return np.zeros((0, 0), dtype=np.int64)
        gens = self.M.generators
        eye = np.eye(self.dim, dtype=np.int64)
        blocks = [(self.mats[g] - lam[g] * eye) % self.p for g in gens]
        return fp.left_nullspace(np.hstack(blocks), self.p)

    def top(self) -> list[int]:
        """Multiplicity of every simple in the top, in label order."""
        return [self.hom_to_simple(lam).shape[0] for lam in lambda_matrix(self.M, self.p)]

    def submodule(self, basis: np.ndarray) -> "Module":
        """Restrict to the invariant subspace spanned by the columns of basis."""
        k = basis.shape[1]
        mats = Module.allocate(self.M, k)
        if k:
            rows = fp.independent_columns(basis.T, self.p)
            Binv = fp.inverse(basis[rows], self.p)
            img = fp.matmul(self.mats, basis, self.p)
            mats[:] = fp.matmul(Binv, img[:, rows, :], self.p)
            if not np.array_equal(fp.matmul(basis, mats, self.p), img):
                raise AssertionError("subspace is not a submodule")
        return Module(self.M, self.p, mats)

    def is_equivariant(self, other: "Module", f: np.ndarray, elements=None) -> bool:
        """f: self -> other, shape (other.dim, self.dim)."""
        idx = self.M.generators if elements is None else elements
        left = fp.matmul(other.mats[idx], f, self.p)
        right = fp.matmul(f, self.mats[idx], self.p)
        return bool(np.array_equal(left, right))


def direct_sum(mods: list[Module], M: FiniteMonoid, p: int) -> Module:
    d = sum(m.dim for m in mods)
    mats = Module.allocate(M, d)
    o = 0
    for m in mods:
        mats[:, o:o + m.dim, o:o + m.dim] = m.mats
        o += m.dim
    return Module(M, p, mats)


def simple_module(M: FiniteMonoid, p: int, L: SimpleLabel) -> Module:
    i = simple_labels(M, p).index(L)
    lam = lambda_matrix(M, p)[i]
    return Module(M, p, lam.reshape(M.size, 1, 1))


def _oracle_guard(M: FiniteMonoid) -> None:
    if M.size > ORACLE_LIMIT:
        raise SizeLimit(f"oracle computations are limited to {ORACLE_LIMIT} elements")


def regular_action(M: FiniteMonoid, p: int) -> np.ndarray:
    """Left multiplication matrices of KM: out[m] e_b = e_{mb}."""
    def build():
        _oracle_guard(M)
        n = M.size
        mats = Module.allocate(M, n)
        m_idx = np.repeat(np.arange(n), n)
        b_idx = np.tile(np.arange(n), n)
        mats[m_idx, M._T[m_idx, b_idx], b_idx] = 1
        return mats
    return M.cached(("regular_action", p), build)


@dataclass
class Projective:
    label: SimpleLabel
    basis: np.ndarray  # columns in KM
    module: Module


def projective(M: FiniteMonoid, p: int, L: SimpleLabel) -> Projective:
    """KM gamma_L with basis the independent vectors m * gamma_L."""
    def build():
        g = gamma_idempotents(M, p)[L]
        B = fp.column_basis(right_matrix(M, p, g.vec), p)
        reg = Module(M, p, regular_action(M, p))
        return Projective(L, B, reg.submodule(B))
    return M.cached(("projective", p, L), build)


# -- radical -------------------------------------------------------------------------


def radical(M: FiniteMonoid, p: int, verify: bool = True) -> np.ndarray:
    """Basis (columns) of rad KM, the joint kernel of the simple functionals."""
    def build():
        try:
            Lam = lambda_matrix(M, p)
        except NonAbelianFiber as exc:
            raise NonSplitBasic(str(exc)) from exc
        R = fp.nullspace(Lam, p)
        if verify:
            _check_radical(M, p, R)
        return R
    return M.cached(("radical", p), build)


def _check_radical(M: FiniteMonoid, p: int, R: np.ndarray) -> None:
    if R.shape[1] != M.size - len(simple_labels(M, p)):
        raise AssertionError("radical has the wrong codimension")
    for g in M.generators:
        e = np.zeros(M.size, dtype=np.int64)
        e[g] = 1
        for side in (left_matrix, right_matrix):
            img = fp.matmul(side(M, p, e), R, p)
            if img.size and fp.rank(np.hstack([R, img]), p) != R.shape[1]:
                raise AssertionError("radical is not a two-sided ideal")
    if M.size <= ORACLE_LIMIT and R.shape[1]:
        power = R
        for _ in range(lattice_rank(M) + 1):
            power = _ideal_product(M, p, R, power)
            if power.shape[1] == 0:
                return
        raise AssertionError("radical is not nilpotent within the rank bound")


def _ideal_product(M: FiniteMonoid, p: int, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    if A.shape[1] == 0 or B.shape[1] == 0:
        return np.zeros((M.size, 0), dtype=np.int64)
    cols = [fp.matmul(left_matrix(M, p, a), B, p) for a in A.T]
    return fp.column_basis(np.hstack(cols), p)


def radical_square(M: FiniteMonoid, p: int) -> np.ndarray:
    return M.cached(("radical2", p), lambda: _ideal_product(M, p, radical(M, p), radical(M, p)))


def corner_dim(M: FiniteMonoid, p: int, W: SimpleLabel, V: SimpleLabel, space=None) -> int:
    """dim gamma_W * S * gamma_V for S = KM or a subspace given by columns."""
    gam = gamma_idempotents(M, p)
    op = fp.matmul(left_matrix(M, p, gam[W].vec), right_matrix(M, p, gam[V].vec), p)
    if space is not None:
        op = fp.matmul(op, space, p)
    return fp.rank(op, p)


def ext1_oracle(M: FiniteMonoid, p: int, V: SimpleLabel, W: SimpleLabel) -> int:
    """dim gamma_W (rad / rad^2) gamma_V."""
    return corner_dim(M, p, W, V, radical(M, p)) - corner_dim(M, p, W, V, radical_square(M, p))


def cartan_matrix(M: FiniteMonoid, p: int) -> np.ndarray:
    """C[i, j] = dim gamma_j KM gamma_i (paths from label i to label j)."""
    labels = simple_labels(M, p)
    gm = gamma_matrix(M, p)
    Ls = [left_matrix(M, p, gm[:, j]) for j in range(len(labels))]
    Rs = [right_matrix(M, p, gm[:, i]) for i in range(len(labels))]
    C = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for i in range(len(labels)):
        for j in range(len(labels)):
            C[i, j] = fp.rank(fp.matmul(Ls[j], Rs[i], p), p)
    return C


# -- projective covers and resolutions ----------------------------------------------------


@dataclass
class Cover:
    module: Module
    map: np.ndarray            # module -> target
    summands: list[SimpleLabel]


def projective_cover(C: Module) -> Cover:
    M, p = C.M, C.p
    labels = simple_labels(M, p)
    Lam = lambda_matrix(M, p)
    parts, cols, summands = [], [], []
    for L, lam in zip(labels, Lam):
        H = C.hom_to_simple(lam)
        if H.shape[0] == 0:
            continue
        piv = fp.independent_columns(H, p)
        K = np.zeros((C.dim, H.shape[0]), dtype=np.int64)
        K[piv] = fp.inverse(H[:, piv], p)
        P = projective(M, p, L)
        for k in K.T:
            ev = fp.matmul(C.mats, k, p).T          # column m is m . k
            cols.append(fp.matmul(ev, P.basis, p))
            parts.append(P.module)
            summands.append(L)
    if not parts:
        return Cover(Module(M, p, np.zeros((M.size, 0, 0))), np.zeros((C.dim, 0), dtype=np.int64), [])
    return Cover(direct_sum(parts, M, p), np.hstack(cols) % p, summands)


def is_projective(C: Module) -> bool:
    """C is projective iff its projective cover is an isomorphism."""
    cov = projective_cover(C)
    return cov.module.dim == C.dim and fp.rank(cov.map, C.p) == C.dim


@dataclass
class Resolution:
    """``maps[q]`` sends modules[q] to modules[q-1]; ``maps[0]`` is the
    augmentation onto ``target``."""

    target: Module
    modules: list[Module]
    maps: list[np.ndarray]
    summands: list[list[SimpleLabel]] = field(default_factory=list)

    @property
    def p(self) -> int:
        return self.target.p

    def dims(self) -> list[int]:
        return [m.dim for m in self.modules]

    def length(self) -> int:
        return len(self.modules) - 1

    def is_exact(self) -> bool:
        p = self.p
        if fp.rank(self.maps[0], p) != self.target.dim:
            return False
        for q, P in enumerate(self.modules):
            kernel = P.dim - fp.rank(self.maps[q], p)
            image = fp.rank(self.maps[q + 1], p) if q + 1 < len(self.maps) else 0
            if kernel != image:
                return False
        for q in range(1, len(self.maps)):
            if np.any(fp.matmul(self.maps[q - 1], self.maps[q], p)):
                return False
        return True

    def is_equivariant(self, elements=None) -> bool:
        chain = [self.target] + self.modules
        return all(chain[q + 1].is_equivariant(chain[q], self.maps[q], elements)
                   for q in range(len(self.maps)))

    def top_multiplicities(self) -> list[list[int]]:
        return [P.top() for P in self.modules]

    def coboundaries_vanish(self) -> bool:
        """Every map Hom(P_{q-1}, S) -> Hom(P_q, S) is zero."""
        Lam = lambda_matrix(self.target.M, self.p)
        for q in range(1, len(self.modules)):
            for lam in Lam:
                H = self.modules[q - 1].hom_to_simple(lam)
                if H.size and np.any(fp.matmul(H, self.maps[q], self.p)):
                    return False
        return True

    def all_projective(self) -> bool:
        return all(is_projective(P) for P in self.modules)


def minimal_resolution(M: FiniteMonoid, p: int, V: Module | SimpleLabel, max_len: int | None = None) -> Resolution:
    if isinstance(V, SimpleLabel):
        V = simple_module(M, p, V)
    limit = lattice_rank(M) + 1 if max_len is None else max_len
    mods, maps, summands = [], [], []
    current, incl = V, np.eye(V.dim, dtype=np.int64)
    while current.dim:
        if len(mods) > limit:
            raise LengthExceeded(f"no termination within length {limit}")
        cov = projective_cover(current)
        mods.append(cov.module)
        summands.append(cov.summands)
        maps.append(fp.matmul(incl, cov.map, p))
        N = fp.nullspace(cov.map, p)
        current = cov.module.submodule(N)
        incl = N
    res = Resolution(V, mods, maps, summands)
    for q in range(1, len(maps)):
        H = [mods[q - 1].hom_to_simple(lam) for lam in lambda_matrix(M, p)]
        if any(h.size and np.any(fp.matmul(h, maps[q], p)) for h in H):
            raise MinimalityViolation(f"image of d_{q} is not inside the radical")
    return res


def ext_from_resolution(res: Resolution) -> dict[tuple[int, int], int]:
    """(q, label index) -> dim Ext^q(V, S), computed by Hom-cohomology."""
    M, p = res.target.M, res.p
    out = {}
    for j, lam in enumerate(lambda_matrix(M, p)):
        homs = [P.hom_to_simple(lam) for P in res.modules]
        dims = [h.shape[0] for h in homs]
        # coboundary Hom(P_{q-1}, S) -> Hom(P_q, S): phi -> phi d_q
        ranks = [0]
        for q in range(1, len(res.modules)):
            if dims[q - 1] == 0 or dims[q] == 0:
                ranks.append(0)
                continue
            img = fp.matmul(homs[q - 1], res.maps[q], p)
            coords = fp.solve(homs[q].T, img.T, p)
            if coords is None:
                raise AssertionError("coboundary leaves the Hom space")
            ranks.append(fp.rank(coords, p))
        ranks.append(0)
        for q in range(len(res.modules)):
            out[(q, j)] = dims[q] - ranks[q] - ranks[q + 1]
    return out


def oracle_ext_table(M: FiniteMonoid, p: int):
    from .ext import ExtTable
    labels = simple_labels(M, p)
    qmax = lattice_rank(M)
    T = ExtTable(list(labels), qmax)
    for i, V in enumerate(labels):
        res = minimal_resolution(M, p, V)
        tops = res.top_multiplicities()
        for j in range(len(labels)):
            for q in range(qmax + 1):
                T.entries[(i, j, q)] = tops[q][j] if q < len(tops) else 0
    return T


# -- the order-complex resolution -------------------------------------------------------------


def _require_apex(V: SimpleLabel, X: int) -> None:
    if V.apex != X:
        raise ApexMismatch(f"simple {V} has apex {V.apex}, not {X}")


def _act_on_idempotent(M: FiniteMonoid, m: int, e: int, lrbg: bool) -> int:
    if lrbg:
        return int(M._T[M.omega[m], e])
    return M.product(m, e, dagger(M, m))


def order_complex_resolution(M: FiniteMonoid, p: int, X: int, V: SimpleLabel) -> Resolution:
    """Chains of the order complex of B_{>=X} tensored with V."""
    ax = check_axioms(M)
    if not (ax.regular and ax.left_duo):
        from .errors import NotRegularLeftDuo
        raise NotRegularLeftDuo(f"{M!r} is not a regular left duo monoid")
    _require_apex(V, X)
    target = simple_module(M, p, V)
    lam = target.mats[:, 0, 0]
    B = contraction_band(M, X)
    C = order_complex(B)
    node = {e: i for i, e in enumerate(B.elements)}
    lrbg = ax.lrb_of_groups
    active = np.flatnonzero(lam)
    # image of each band node under each acting element
    image = np.full((M.size, B.size), -1, dtype=np.intp)
    for m in active:
        for i, e in enumerate(B.elements):
            image[m, i] = node[_act_on_idempotent(M, int(m), e, lrbg)]
    mods, maps = [], []
    for d, F in enumerate(C.faces):
        index = {tuple(r): k for k, r in enumerate(F.tolist())}
        mats = Module.allocate(M, len(F))
        for m in active:
            img = image[m][F]
            for k, row in enumerate(img.tolist()):
                if len(set(row)) < len(row):
                    continue
                order = np.argsort(row)
                sign = _perm_sign(order)
                mats[m, index[tuple(sorted(row))], k] = lam[m] * sign % p
        mods.append(Module(M, p, mats))
        D = simplicial_boundary(C, d, p)
        maps.append(D if d else D.reshape(1, -1))
    return Resolution(target, mods, maps)


def _perm_sign(order) -> int:
    order = list(order)
    sign = 1
    seen = [False] * len(order)
    for i in range(len(order)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = order[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


# -- the minimal cellular resolution -----------------------------------------------------


def minimal_cellular_resolution(M: FiniteMonoid, p: int, X: int, V: SimpleLabel,
                                verify: bool = True) -> Resolution:
    """Cells are the idempotents of B_{>=X} graded by rank; m acts on the
    cell e through psi(m) e = m^omega e, and by zero when the rank drops."""
    if not check_axioms(M).lrb_of_groups:
        raise NotCW(f"{M!r} is not a left regular band of groups")
    _require_apex(V, X)
    B = contraction_band(M, X)
    if not is_cw_poset(B):
        raise NotCW(f"B_{{>={X}}} is not a CW poset")
    eps = incidence_numbers(B)
    target = simple_module(M, p, V)
    lam = target.mats[:, 0, 0]
    rank = B.rank
    top = int(rank.max())
    cells = [np.flatnonzero(rank == d) for d in range(top + 1)]
    pos = {int(c): i for lev in cells for i, c in enumerate(lev)}
    node = {e: i for i, e in enumerate(B.elements)}
    # integer boundary: cell -> {lower cell: sign}
    bd = {int(q): {int(a): eps[(int(q), int(a))] for a in np.flatnonzero(B.cover[:, q])}
          for q in range(B.size)}

    # sign of the band element b on each cell, decided degree by degree
    signs: dict[int, dict[int, int]] = {}

    def band_signs(b: int) -> dict[int, int]:
        if b in signs:
            return signs[b]
        s: dict[int, int] = {}
        img = {c: node[int(M._T[b, B.elements[c]])] for c in range(B.size)}
        for d in range(top + 1):
            for c in cells[d]:
                c = int(c)
                t = img[c]
                if rank[t] != d:
                    continue
                if d == 0:
                    s[c] = 1
                    continue
                pushed: dict[int, int] = {}
                for a, v in bd[c].items():
                    if a in s:
                        ta = img[a]
                        pushed[ta] = pushed.get(ta, 0) + v * s[a]
                pushed = {k: v for k, v in pushed.items() if v}
                target_bd = bd[t]
                if pushed == target_bd:
                    s[c] = 1
                elif pushed == {k: -v for k, v in target_bd.items()}:
                    s[c] = -1
                else:
                    raise MinimalityViolation(f"no consistent sign for cell {c} under {b}")
        signs[b] = s
        return s

    mods = []
    for d in range(top + 1):
        mats = Module.allocate(M, len(cells[d]))
        for m in np.flatnonzero(lam):
            b = int(M.omega[m])
            s = band_signs(b)
            for k, c in enumerate(cells[d]):
                c = int(c)
                if c in s:
                    t = node[int(M._T[b, B.elements[c]])]
                    mats[m, pos[t], k] = lam[m] * s[c] % p
        mods.append(Module(M, p, mats))
    maps = [np.ones((1, len(cells[0])), dtype=np.int64)]
    for d in range(1, top + 1):
        D = np.zeros((len(cells[d - 1]), len(cells[d])), dtype=np.int64)
        for k, c in enumerate(cells[d]):
            for a, v in bd[int(c)].items():
                D[pos[a], k] = v % p
        maps.append(D)
    res = Resolution(target, mods, maps)
    if verify:
        if not res.is_equivariant():
            raise MinimalityViolation("cellular boundary is not equivariant")
        if not res.is_exact():
            raise MinimalityViolation("cellular complex is not exact")
        if not res.coboundaries_vanish():
            raise MinimalityViolation("coboundary into some simple is nonzero")
    return res


# -- quiver presentation ----------------------------------------------------------------


@dataclass
class PresentationReport:
    quotient_dims: list[int]
    algebra_dim: int
    cartan_equal: bool
    quotient_cartan: np.ndarray = field(repr=False)
    oracle_cartan: np.ndarray = field(repr=False)

    @property
    def quotient_dim(self) -> int:
        return sum(self.quotient_dims)

    @property
    def dims_equal(self) -> bool:
        return self.quotient_dim == self.algebra_dim

    def as_dict(self) -> dict:
        return {
            "quotient_dims_by_degree": self.quotient_dims,
            "quotient_dim": self.quotient_dim,
            "algebra_dim": self.algebra_dim,
            "dims_equal": self.dims_equal,
            "cartan_equal": self.cartan_equal,
        }


def quotient_path_algebra(n_vertices: int, arrows, relations, p: int):
    """Degreewise dimensions of KQ/I for an acyclic quiver and homogeneous
    quadratic relations, split by (source, target)."""
    out_edges: dict[int, list[int]] = {}
    for a, b in arrows:
        out_edges.setdefault(a, []).append(b)
    # paths as vertex tuples (arrows are simple in a Hasse quiver)
    levels = [[(v,) for v in range(n_vertices)]]
    while True:
        nxt = [path + (b,) for path in levels[-1] for b in out_edges.get(path[-1], [])]
        if not nxt:
            break
        levels.append(nxt)
    cartan = np.zeros((n_vertices, n_vertices), dtype=np.int64)
    dims = []
    rel_by_source: dict[int, list] = {}
    for r in relations:
        rel_by_source.setdefault(r[0][0], []).append(r)
    for k, paths in enumerate(levels):
        index = {path: i for i, path in enumerate(paths)}
        gens = []
        if k >= 2:
            # u r w with |u| + 2 + |w| = k, |u| = i
            for i in range(k - 1):
                for path in paths:
                    a = path[i]
                    for r in rel_by_source.get(a, []):
                        if r[0][2] != path[i + 2]:
                            continue
                        if (path[i], path[i + 1], path[i + 2]) not in r:
                            continue
                        v = {}
                        for (x, z, y) in r:
                            alt = path[:i] + (x, z, y) + path[i + 3:]
                            if alt in index:
                                v[index[alt]] = 1
                        gens.append(tuple(sorted(v.items())))
        gens = sorted(set(gens))
        by_ends: dict[tuple[int, int], list[int]] = {}
        for j, path in enumerate(paths):
            by_ends.setdefault((path[0], path[-1]), []).append(j)
        total = 0
        for (s, t), idx in by_ends.items():
            local = {j: c for c, j in enumerate(idx)}
            rows = [g for g in gens if g and paths[g[0][0]][0] == s and paths[g[0][0]][-1] == t]
            if rows:
                A = np.zeros((len(rows), len(idx)), dtype=np.int64)
                for r_i, g in enumerate(rows):
                    for j, c in g:
                        A[r_i, local[j]] = c
                rk = fp.rank(A, p)
            else:
                rk = 0
            cartan[s, t] += len(idx) - rk
            total += len(idx) - rk
        dims.append(total)
    return dims, cartan


def presentation_dimension_check(M: FiniteMonoid, p: int) -> PresentationReport:
    Q = build_quiver(M, p)
    dims, qc = quotient_path_algebra(len(Q.vertices), Q.arrows, Q.relations, p)
    oc = cartan_matrix(M, p)
    return PresentationReport(dims, M.size, bool(np.array_equal(qc, oc)), qc, oc)
