import json

import pytest

from conftest import hsiao, sigma
from duorep.errors import NotApplicable, NotGraded
from duorep.ext import (
    Quiver,
    build_quiver,
    component_count,
    component_witness,
    components,
    ext_dim_hsiao,
    ext_dim_topological,
    ext_table,
    koszul_diagnostics,
    quiver_relations,
)
from duorep.hsiao import FiniteAbelianGroup
from duorep.idempotents import find_label, label_poset, simple_labels
from duorep.monoid import support_lattice
from duorep.registry import build_t2

Z2 = FiniteAbelianGroup((2,))


def test_ext_topological_examples():
    M = hsiao(2, "2")
    for f, h in [("0,0", "0"), ("0,1", "1"), ("1,0", "1"), ("1,1", "0")]:
        V = find_label(M, 3, f"1/2|{f}")
        W = find_label(M, 3, f"12|{h}")
        assert ext_dim_topological(M, V, W, 1, 3) == 1
        assert ext_dim_topological(M, V, W, 0, 3) == 0
        assert ext_dim_topological(M, W, V, 1, 3) == 0
        assert ext_dim_topological(M, V, V, 0, 3) == 1
        assert ext_dim_topological(M, V, V, 1, 3) == 0
    V = find_label(M, 3, "1/2|0,1")
    assert ext_dim_topological(M, V, find_label(M, 3, "12|0"), 1, 3) == 0
    N = hsiao(3, "2")
    V = find_label(N, 3, "1/2/3|1,0,1")
    W = find_label(N, 3, "123|0")
    assert [ext_dim_topological(N, V, W, q, 3) for q in range(4)] == [0, 0, 1, 0]


def test_ext_topological_requires_lrbg():
    T = build_t2()
    L = simple_labels(T, 3)
    with pytest.raises(NotApplicable):
        ext_dim_topological(T, L[0], L[-1], 1, 3)


def test_ext_hsiao_closed_form_examples():
    bot = ((1,), (2,), (3,))
    mid = ((1, 2), (3,))
    f = [(1,), (0,), (1,)]
    assert ext_dim_hsiao(bot, f, bot, f, 0) == 1
    assert ext_dim_hsiao(bot, f, mid, [(1,), (1,)], 1) == 1
    assert ext_dim_hsiao(bot, f, mid, [(1,), (1,)], 2) == 0
    assert ext_dim_hsiao(bot, f, mid, [(0,), (1,)], 1) == 0
    assert ext_dim_hsiao(mid, [(1,), (1,)], bot, f, 1) == 0
    # sums of exponents reduce modulo the group
    g = [(1,), (1,), (0,)]
    assert ext_dim_hsiao(bot, g, mid, [(0,), (0,)], 1, group=Z2) == 1
    assert ext_dim_hsiao(bot, g, mid, [(2,), (0,)], 1) == 1


@pytest.mark.parametrize("make,p", [(lambda: hsiao(2, "2"), 3), (lambda: hsiao(3, "2"), 3),
                                    (lambda: hsiao(2, "3"), 7), (lambda: hsiao(3, "3"), 7),
                                    (lambda: hsiao(2, "2x2"), 3), (lambda: hsiao(3, ""), 2)])
def test_topological_matches_closed_form(make, p):
    M = make()
    a = ext_table(M, p)
    b = ext_table(M, p, method="hsiao")
    assert a.entries == b.entries


@pytest.mark.parametrize("make,p", [(lambda: sigma(3), 2), (lambda: sigma(4), 2), (lambda: hsiao(3, "2"), 3)])
def test_ext_vanishing_and_diagonal(make, p):
    M = make()
    lat = support_lattice(M)
    T = ext_table(M, p)
    for (i, j, q), v in T.entries.items():
        X, Y = T.labels[i].apex, T.labels[j].apex
        if not lat.leq[X, Y]:
            assert v == 0
        if i == j:
            assert v == int(q == 0)


def test_ext_table_json_and_bad_method():
    T = ext_table(sigma(2), 2)
    js = T.to_json()
    assert js["labels"] == ["1/2|0,0", "12|0"]
    assert sorted(tuple(x) for x in js["nonzero"]) == [(0, 0, 0, 1), (0, 1, 1, 1), (1, 1, 0, 1)]
    with pytest.raises(ValueError):
        ext_table(sigma(2), 2, method="nope")


def test_quiver_examples():
    Q = build_quiver(hsiao(2, "2"), 3)
    assert len(Q.vertices) == 6 and len(Q.arrows) == 4 and Q.relations == []
    names = [str(L) for L in Q.vertices]
    assert sorted((names[a], names[b]) for a, b in Q.arrows) == [
        ("1/2|0,0", "12|0"), ("1/2|0,1", "12|1"), ("1/2|1,0", "12|1"), ("1/2|1,1", "12|0")]
    S = build_quiver(sigma(2), 2)
    assert len(S.vertices) == 2 and S.arrows == [(0, 1)]
    Q3 = build_quiver(hsiao(3, "2"), 3)
    assert len(Q3.vertices) == 22 and len(Q3.arrows) == 36
    counts = {}
    for a, _ in Q3.arrows:
        counts[a] = counts.get(a, 0) + 1
    assert all(counts[i] == (3 if Q3.rank[i] == 0 else 1) for i in counts)
    assert not any(Q3.rank[i] == 2 for i in counts)


def test_quiver_relations_examples():
    Q = build_quiver(hsiao(3, "2"), 3)
    assert len(Q.relations) == 8
    for r in Q.relations:
        assert len(r) == 3
        assert len({(a, b) for a, _, b in r}) == 1
        assert Q.rank[r[0][2]] - Q.rank[r[0][0]] == 2
    # a diamond with two middle vertices gives a two-term relation
    D = Quiver(list(range(4)), [(0, 1), (0, 2), (1, 3), (2, 3)], rank=[0, 1, 1, 2])
    assert quiver_relations(D) == [[(0, 1, 3), (0, 2, 3)]]
    bad = Quiver(list(range(2)), [(0, 1)], rank=[0, 2])
    with pytest.raises(NotGraded):
        quiver_relations(bad)


def test_quiver_rules_agree():
    for M, p in [(sigma(4), 2), (hsiao(3, "3"), 7)]:
        assert build_quiver(M, p, rule="betti").arrows == build_quiver(M, p, rule="hasse", check=False).arrows
    with pytest.raises(ValueError):
        build_quiver(sigma(2), 2, rule="nope")


@pytest.mark.parametrize("n,g,p,expected", [(2, "2", 3, 2), (3, "2", 3, 2), (4, "2", 3, 2),
                                            (2, "", 2, 1), (3, "", 2, 1), (2, "3", 7, 3),
                                            (2, "2x2", 3, 4), (2, "4", 5, 4)])
def test_component_counts(n, g, p, expected):
    M = hsiao(n, g)
    Q = build_quiver(M, p)
    assert component_count(Q) == expected
    comp = components(Q)
    # the witness is constant on components and separates them
    witness = {}
    for v, c in enumerate(comp):
        witness.setdefault(c, set()).add(component_witness(Q.vertices[v]))
    assert all(len(s) == 1 for s in witness.values())
    assert len({next(iter(s)) for s in witness.values()}) == expected


def test_component_witness_needs_hsiao_label():
    from duorep.registry import build
    M = build("group_zmod", m=2)
    with pytest.raises(NotApplicable):
        component_witness(simple_labels(M, 3)[0])


@pytest.mark.parametrize("make,p,expected", [(lambda: hsiao(2, "2"), 3, 10), (lambda: sigma(2), 2, 3),
                                             (lambda: hsiao(3, "2"), 3, 66), (lambda: sigma(3), 2, 5 + 6 + 1)])
def test_koszul_examples(make, p, expected):
    rep = koszul_diagnostics(make(), p)
    assert rep.concentrated and rep.dims_equal
    assert rep.ext_algebra_dim == rep.interval_count == expected
    assert rep.as_dict()["dims_equal"] is True


def test_koszul_interval_count_is_label_poset_size():
    M = hsiao(3, "2")
    LP = label_poset(M, 3)
    assert LP.interval_count() == 22 + 36 + 8


def test_dot_is_deterministic_and_relations_json():
    a = build_quiver(hsiao(3, "2"), 3)
    hsiao.cache_clear()
    b = build_quiver(hsiao(3, "2"), 3)
    assert a.to_dot() == b.to_dot()
    dot = a.to_dot()
    assert dot.startswith("digraph quiver {") and dot.count("->") == 36
    assert '[label="1/2/3|0,0,0"]' in dot
    js = a.relations_json()
    assert len(js["relations"]) == 8 and js["schema"] == 1
    assert json.loads(json.dumps(js)) == js
