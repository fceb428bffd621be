import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import hsiao, sigma
from duorep.errors import (
    NotAssociative,
    NotIdempotent,
    NotRegularLeftDuo,
    NotRightSemicentral,
    SizeLimit,
)
from duorep.hsiao import OrderedSetPartition, hsiao_element
from duorep.monoid import (
    FiniteMonoid,
    check_axioms,
    conjugate_idempotent,
    contraction,
    dagger,
    green_structure,
    maximal_subgroup,
    omega_power,
    principal_left_ideals,
    principal_right_ideals,
    read_table,
    support_lattice,
    write_table,
)
from duorep.registry import build, build_t2

OSP = OrderedSetPartition.parse


def right_zero_adjoined():
    # {1, a, b} with xy = y for x, y in {a, b}
    return FiniteMonoid([[0, 1, 2], [1, 1, 2], [2, 1, 2]], 0)


def zmod(m):
    return build("group_zmod", n=m)


def all_instances():
    return [sigma(2), sigma(3), sigma(4), hsiao(2, "2"), hsiao(3, "2"), hsiao(2, "3"), zmod(2), zmod(3), build_t2()]


def test_constructor_rejects_bad_tables():
    with pytest.raises(ValueError):
        FiniteMonoid([[0, 1], [1, 1], [0, 0]], 0)
    with pytest.raises(ValueError):
        FiniteMonoid([[0, 1], [1, 0]], 1)
    # x*y = x+1 capped is not associative with identity 0 forced
    with pytest.raises(NotAssociative):
        FiniteMonoid([[0, 1, 2], [1, 2, 1], [2, 1, 1]], 0)
    ar = np.arange(600)
    with pytest.raises(SizeLimit):
        FiniteMonoid((ar[:, None] + ar) % 600, 0)
    assert FiniteMonoid((ar[:, None] + ar) % 600, 0, trusted=True).size == 600


def test_check_axioms_examples():
    ax = check_axioms(sigma(2))
    assert ax.right_semicentral and ax.left_duo and ax.regular and ax.lrb_of_groups
    ax = check_axioms(zmod(2))
    assert ax.right_semicentral and ax.left_duo and ax.regular and ax.lrb_of_groups
    assert not check_axioms(right_zero_adjoined()).left_duo


def test_lrbg_implies_regular_left_duo():
    for M in all_instances():
        ax = check_axioms(M)
        if ax.lrb_of_groups:
            assert ax.regular and ax.left_duo


def test_axioms_brute_force_agree():
    for M in all_instances() + [right_zero_adjoined()]:
        n = M.size
        T = M.table
        E = [e for e in range(n) if T[e, e] == e]
        rs = all(T[T[e, m], e] == T[e, m] for e in E for m in range(n))
        ld = all({int(T[m, x]) for x in range(n)} <= {int(T[x, m]) for x in range(n)} for m in range(n))
        reg = all(any(T[T[m, x], m] == m for x in range(n)) for m in range(n))
        ax = check_axioms(M)
        assert (ax.right_semicentral, ax.left_duo, ax.regular) == (rs, ld, reg)


def test_omega_power_examples():
    M = sigma(3)
    for e in M.idempotents:
        assert omega_power(M, e) == e
    G = zmod(5)
    assert all(omega_power(G, g) == G.identity for g in range(5))
    H = hsiao(2, "2")
    m = hsiao_element(H, OSP("({1},{2})"), [(1,), (1,)])
    assert omega_power(H, m) == hsiao_element(H, OSP("({1},{2})"), [(0,), (0,)])


def test_omega_power_is_idempotent_positive_power():
    for M in all_instances():
        for m in range(M.size):
            w = omega_power(M, m)
            assert M.mul(w, w) == w
            x, powers = m, {m}
            for _ in range(M.size):
                x = M.mul(x, m)
                powers.add(x)
            assert w in powers


def test_dagger_examples():
    M = sigma(3)
    for e in M.idempotents:
        assert dagger(M, e) == e
    G = zmod(5)
    assert all((g + dagger(G, g)) % 5 == 0 for g in range(5))
    H = hsiao(2, "3")
    m = hsiao_element(H, OSP("({1},{2})"), [(1,), (2,)])
    assert dagger(H, m) == hsiao_element(H, OSP("({1},{2})"), [(2,), (1,)])


def test_dagger_properties_and_error():
    for M in all_instances():
        if not (check_axioms(M).regular and check_axioms(M).left_duo):
            continue
        for m in range(M.size):
            d = dagger(M, m)
            w = omega_power(M, m)
            assert M.mul(m, d) == w == M.mul(d, m)
            assert d in maximal_subgroup(M, w).members
    with pytest.raises(NotRegularLeftDuo):
        dagger(right_zero_adjoined(), 1)


def test_green_classes_match_ideals():
    for M in all_instances():
        g = green_structure(M)
        R = principal_right_ideals(M)
        L = principal_left_ideals(M)
        for a in range(M.size):
            for b in range(M.size):
                assert (g.r_class[a] == g.r_class[b]) == np.array_equal(R[a], R[b])
                assert (g.l_class[a] == g.l_class[b]) == np.array_equal(L[a], L[b])


def test_l_classes_of_regular_j_classes_contain_idempotents():
    for M in all_instances():
        g = green_structure(M)
        for m in range(M.size):
            if g.j_class[m] in g.regular_j:
                same_l = [x for x in range(M.size) if g.l_class[x] == g.l_class[m]]
                assert any(M.idempotent_mask[x] for x in same_l)


def test_j_order_is_partial_order():
    for M in all_instances():
        J = green_structure(M).j_order
        k = J.shape[0]
        assert J.diagonal().all()
        assert not np.any(J & J.T & ~np.eye(k, dtype=bool))
        Ji = J.astype(int)
        assert not np.any((Ji @ Ji > 0) & ~J)


def test_support_lattice_examples():
    L = support_lattice(sigma(2))
    assert L.size == 2 and L.rank.tolist() == [0, 1]
    M = sigma(2)
    rank2 = [m for m in range(3) if len(M.meta[m][0]) == 2]
    assert all(L.sigma[m] == L.bottom for m in rank2)
    assert support_lattice(zmod(4)).size == 1


def test_sigma3_lattice_is_partition_lattice():
    M = sigma(3)
    L = support_lattice(M)
    parts = [M.meta[int(r)][0].underlying() for r in L.representative]
    assert len(set(parts)) == 5

    def refines(a, b):
        return all(any(x <= y for y in b) for x in a)

    for i in range(5):
        for j in range(5):
            assert bool(L.leq[i, j]) == refines(parts[i], parts[j])


def test_support_lattice_invariants():
    for M in all_instances():
        L = support_lattice(M)
        k = L.size
        mt = L.meet
        assert np.array_equal(mt, mt.T)
        assert all(mt[x, x] == x for x in range(k))
        assert all(mt[mt[a, b], c] == mt[a, mt[b, c]] for a in range(k) for b in range(k) for c in range(k))
        assert all(bool(L.leq[a, b]) == (mt[a, b] == a) for a in range(k) for b in range(k))
        sig = L.sigma
        T = M.table
        assert np.array_equal(sig[T], mt[np.ix_(sig, sig)])
        assert all(sig[r] == X for X, r in enumerate(L.representative))
        # representative is the lowest-index idempotent of its node
        for X, r in enumerate(L.representative):
            assert r == min(e for e in M.idempotents if sig[e] == X)


def test_right_semicentral_consequences():
    for M in all_instances():
        if not check_axioms(M).right_semicentral:
            continue
        E = M.idempotents
        T = M.table
        Lid = principal_left_ideals(M)
        for e in E:
            for f in E:
                assert T[T[e, f], e] == T[e, f]
                assert np.array_equal(Lid[e] & Lid[f], Lid[T[e, f]])


def test_idempotents_distinguished_by_right_ideals():
    for M in all_instances():
        R = principal_right_ideals(M)
        E = M.idempotents
        for e in E:
            for f in E:
                if e != f:
                    assert not np.array_equal(R[e], R[f])


def test_conjugation_equivariant_with_right_ideals():
    # e -> eM is an isomorphism of B onto M/R, equivariant for m.(aM) = maM
    for M in all_instances():
        ax = check_axioms(M)
        if not (ax.regular and ax.left_duo):
            continue
        g = green_structure(M)
        for m in range(M.size):
            for e in M.idempotents:
                c = conjugate_idempotent(M, m, e)
                assert M.mul(c, c) == c
                assert g.r_class[c] == g.r_class[M.mul(m, e)]


def test_conjugation_is_an_action():
    for M in [sigma(3), hsiao(2, "2"), hsiao(2, "3"), zmod(3), build_t2()]:
        ax = check_axioms(M)
        if not (ax.regular and ax.left_duo):
            continue
        for m in range(M.size):
            for n in range(M.size):
                for e in M.idempotents:
                    assert conjugate_idempotent(M, M.mul(m, n), e) == \
                        conjugate_idempotent(M, m, conjugate_idempotent(M, n, e))


def test_conjugation_examples():
    M = sigma(3)
    e = int(M.idempotents[3])
    assert conjugate_idempotent(M, M.identity, e) == e
    H = hsiao(2, "2")
    for m in range(H.size):
        for e in H.idempotents:
            assert conjugate_idempotent(H, m, e) == H.mul(omega_power(H, m), e)
    unit = hsiao_element(H, OSP("({1,2})"), [(1,)])
    e = hsiao_element(H, OSP("({1},{2})"), [(0,), (0,)])
    assert conjugate_idempotent(H, unit, e) == e
    with pytest.raises(NotIdempotent):
        conjugate_idempotent(H, unit, unit)


def test_t2_conjugation_is_nontrivial():
    M = build_t2()
    ax = check_axioms(M)
    assert ax.regular and ax.left_duo and not ax.lrb_of_groups
    swap, c0, c1 = 1, 2, 3
    assert conjugate_idempotent(M, swap, c0) == c1
    assert M.mul(omega_power(M, swap), c0) == c0


def test_lrbg_omega_multiplicative():
    for M in all_instances():
        if check_axioms(M).lrb_of_groups:
            w = M.omega
            T = M.table
            assert np.array_equal(w[T], T[np.ix_(w, w)])
            assert set(w.tolist()) == set(M.idempotents.tolist())


def test_contraction_examples():
    M = sigma(3)
    L = support_lattice(M)
    assert contraction(M, L.bottom).size == M.size
    top = contraction(M, L.top)
    assert top.size == 1
    X = next(X for X in range(L.size)
             if M.meta[int(L.representative[X])][0].underlying() == frozenset({frozenset({1, 2}), frozenset({3})}))
    C = contraction(M, X)
    assert sorted(str(M.meta[i][0]) for i in C.parent_index) == sorted(
        ["({1,2,3})", "({1,2},{3})", "({3},{1,2})"])
    assert check_axioms(C).right_semicentral
    H = hsiao(2, "2")
    units = contraction(H, support_lattice(H).top)
    assert units.size == 2


def test_maximal_subgroup_examples():
    G = maximal_subgroup(zmod(3), 0)
    assert G.order == 3
    H = hsiao(2, "2")
    e = hsiao_element(H, OSP("({1},{2})"), [(0,), (0,)])
    Ge = maximal_subgroup(H, e)
    assert Ge.order == 4 and Ge.is_abelian() and Ge.exponent() == 2
    assert all(H.meta[g][0] == OSP("({1},{2})") for g in Ge.members)
    M = sigma(3)
    assert maximal_subgroup(M, M.identity).order == 1
    with pytest.raises(NotIdempotent):
        maximal_subgroup(H, hsiao_element(H, OSP("({1},{2})"), [(1,), (0,)]))


def test_maximal_subgroup_closure_and_retraction():
    H = hsiao(3, "2")
    for e in H.idempotents:
        G = maximal_subgroup(H, e)
        mem = set(G.members)
        assert e in mem
        for a in mem:
            assert H.mul(a, G.inverse[a]) == e == H.mul(G.inverse[a], a)
            for b in mem:
                assert H.mul(a, b) in mem
        for m in range(H.size):
            # eM = eMe
            assert H.mul(H.mul(e, m), e) == G.rho(m)


def test_not_right_semicentral():
    maps = [(0, 1), (1, 0), (0, 0), (1, 1)]
    T = np.array([[maps.index(tuple(g[f[x]] for x in (0, 1))) for g in maps] for f in maps])
    M = FiniteMonoid(T, 0)
    with pytest.raises(NotRightSemicentral):
        support_lattice(M)


def test_table_roundtrip(tmp_path):
    M = hsiao(2, "2")
    path = tmp_path / "m.txt"
    write_table(M, path)
    N = read_table(path)
    assert np.array_equal(N.table, M.table) and N.identity == M.identity
    first = path.read_text().splitlines()[0]
    assert first == f"{M.size} {M.identity}"
    path.write_text("# Z/2\n2 0\n0 1\n# second row\n1 0\n")
    assert read_table(path).size == 2


def test_generators_generate():
    for M in all_instances():
        closed = {M.identity}
        frontier = [M.identity]
        while frontier:
            nxt = []
            for x in frontier:
                for g in M.generators:
                    y = M.mul(x, g)
                    if y not in closed:
                        closed.add(y)
                        nxt.append(y)
            frontier = nxt
        assert len(closed) == M.size


def brute_associative(T):
    n = len(T)
    return all(T[T[a][b]][c] == T[a][T[b][c]] for a in range(n) for b in range(n) for c in range(n))


@settings(max_examples=150, deadline=None)
@given(st.integers(2, 4), st.data())
def test_associativity_check_matches_brute_force(n, data):
    # identity 0; the remaining entries are arbitrary
    T = [[0] * n for _ in range(n)]
    for a in range(n):
        for b in range(n):
            T[a][b] = b if a == 0 else a if b == 0 else data.draw(st.integers(0, n - 1))
    if brute_associative(T):
        FiniteMonoid(np.array(T), 0)
    else:
        with pytest.raises(NotAssociative):
            FiniteMonoid(np.array(T), 0)
