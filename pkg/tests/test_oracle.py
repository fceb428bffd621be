import itertools

import numpy as np
import pytest

from conftest import hsiao, sigma
from duorep import fp
from duorep.errors import ApexMismatch, LengthExceeded, NotCW, SizeLimit
from duorep.hsiao import build_group_zmod
from duorep.idempotents import find_label, simple_labels
from duorep.monoid import support_lattice
from duorep.oracle import (
    Module,
    cartan_matrix,
    direct_sum,
    ext1_oracle,
    ext_from_resolution,
    is_projective,
    minimal_cellular_resolution,
    minimal_resolution,
    oracle_ext_table,
    order_complex_resolution,
    presentation_dimension_check,
    projective,
    projective_cover,
    quotient_path_algebra,
    radical,
    radical_square,
    regular_action,
    simple_module,
)
from duorep.registry import build_t2


def test_regular_action_is_a_module():
    for M, p in [(sigma(3), 2), (hsiao(2, "2"), 3), (build_t2(), 3)]:
        Module(M, p, regular_action(M, p), check=True)


def test_module_rejects_bad_shapes_and_actions():
    M = sigma(2)
    with pytest.raises(ValueError):
        Module(M, 2, np.zeros((2, 1, 1)))
    with pytest.raises(AssertionError):
        Module(M, 2, np.zeros((3, 1, 1)), check=True)


def test_radical_examples():
    Z2 = build_group_zmod(2)
    assert radical(Z2, 3).shape[1] == 0
    S = sigma(2)
    R = radical(S, 3)
    assert R.shape[1] == 1
    v = R[:, 0] * fp.inv(int(R[0, 0]), 3) % 3
    assert v.tolist() == [1, 0, 2]
    assert radical(hsiao(2, "2"), 3).shape[1] == 4
    assert radical(hsiao(3, "2"), 3).shape[1] == 74 - 22


@pytest.mark.parametrize("make,p", [(lambda: sigma(3), 2), (lambda: hsiao(3, "2"), 3), (lambda: sigma(4), 2)])
def test_radical_nilpotent_within_rank(make, p):
    from duorep.oracle import _ideal_product
    M = make()
    R = radical(M, p)
    power = R
    r = int(support_lattice(M).rank.max())
    for _ in range(r):
        power = _ideal_product(M, p, R, power)
    assert power.shape[1] == 0
    assert radical_square(M, p).shape[1] < R.shape[1]


def test_ext1_examples():
    M = hsiao(2, "2")
    V = find_label(M, 3, "1/2|1,0")
    assert ext1_oracle(M, 3, V, V) == 0
    assert ext1_oracle(M, 3, V, find_label(M, 3, "12|1")) == 1
    assert ext1_oracle(M, 3, V, find_label(M, 3, "12|0")) == 0
    assert ext1_oracle(M, 3, find_label(M, 3, "12|1"), V) == 0


def test_projectives():
    M = hsiao(2, "2")
    dims = [projective(M, 3, L).module.dim for L in simple_labels(M, 3)]
    # KM gamma for a bottom label also reaches the top label above it
    assert dims == [2, 2, 2, 2, 1, 1]
    assert sum(dims) == M.size
    for L in simple_labels(M, 3):
        P = projective(M, 3, L).module
        P.check()
        assert is_projective(P)
        assert P.top() == [int(K == L) for K in simple_labels(M, 3)]
    assert not is_projective(simple_module(M, 3, find_label(M, 3, "1/2|0,0")))
    assert is_projective(simple_module(M, 3, find_label(M, 3, "12|0")))


def test_projective_cover_is_surjective():
    M = sigma(3)
    for L in simple_labels(M, 2):
        S = simple_module(M, 2, L)
        cov = projective_cover(S)
        assert fp.rank(cov.map, 2) == 1 and cov.summands == [L]


def test_minimal_resolution_examples():
    S = sigma(2)
    lat = support_lattice(S)
    bot = next(L for L in simple_labels(S, 2) if L.apex == lat.bottom)
    top = next(L for L in simple_labels(S, 2) if L.apex == lat.top)
    assert minimal_resolution(S, 2, top).dims() == [1]
    R = minimal_resolution(S, 2, bot)
    assert R.dims() == [2, 1] and R.is_exact() and R.is_equivariant()
    Z = build_group_zmod(3)
    for L in simple_labels(Z, 7):
        R = minimal_resolution(Z, 7, L)
        assert R.dims() == [1] and R.length() == 0
    with pytest.raises(LengthExceeded):
        minimal_resolution(sigma(3), 2, simple_labels(sigma(3), 2)[0], max_len=0)


def test_minimal_resolution_sigma3_z2_tops():
    M = hsiao(3, "2")
    V = find_label(M, 3, "1/2/3|1,0,1")
    R = minimal_resolution(M, 3, V)
    tops = R.top_multiplicities()
    names = [str(L) for L in simple_labels(M, 3)]
    assert R.dims() == [6, 6, 1]
    assert [names[j] for j, v in enumerate(tops[2]) if v] == ["123|0"]
    assert tops[2][names.index("123|0")] == 1
    assert [names[j] for j, v in enumerate(tops[1]) if v] == ["1/23|1,1", "12/3|1,1", "13/2|0,0"]


def test_oracle_table_matches_hom_cohomology():
    M = hsiao(2, "2")
    T = oracle_ext_table(M, 3)
    for i, L in enumerate(simple_labels(M, 3)):
        ext = ext_from_resolution(minimal_resolution(M, 3, L))
        for (q, j), v in ext.items():
            assert T.get(i, j, q) == v


def brute_chain_counts(M):
    E = [int(e) for e in M.idempotents]
    le = lambda a, b: M.mul(b, a) == a
    counts = []
    for k in range(1, len(E) + 1):
        c = sum(1 for s in itertools.permutations(E, k)
                if all(le(s[i], s[i + 1]) and s[i] != s[i + 1] for i in range(k - 1)))
        if not c:
            break
        counts.append(c)
    return counts


def test_order_complex_resolution_dims():
    S2 = sigma(2)
    lat = support_lattice(S2)
    bot = next(L for L in simple_labels(S2, 3) if L.apex == lat.bottom)
    R = order_complex_resolution(S2, 3, lat.bottom, bot)
    assert R.dims() == [3, 2] and R.is_exact()
    S3 = sigma(3)
    lat = support_lattice(S3)
    L = next(L for L in simple_labels(S3, 3) if L.apex == lat.bottom)
    R = order_complex_resolution(S3, 3, lat.bottom, L)
    assert R.dims() == brute_chain_counts(S3) == [13, 24, 12]
    assert R.is_exact() and R.is_equivariant() and R.all_projective()


def test_order_complex_resolution_top_is_trivial():
    M = hsiao(2, "2")
    lat = support_lattice(M)
    for L in simple_labels(M, 3):
        if L.apex == lat.top:
            R = order_complex_resolution(M, 3, lat.top, L)
            assert R.dims() == [1] and R.is_exact()
    with pytest.raises(ApexMismatch):
        order_complex_resolution(M, 3, lat.bottom, simple_labels(M, 3)[-1])


@pytest.mark.parametrize("make,p", [(lambda: sigma(3), 2), (lambda: hsiao(2, "3"), 7), (build_t2, 3)])
def test_order_complex_ext_matches_minimal(make, p):
    M = make()
    for L in simple_labels(M, p):
        R = order_complex_resolution(M, p, L.apex, L)
        assert R.is_exact() and R.is_equivariant(list(range(M.size))) and R.all_projective()
        a = ext_from_resolution(R)
        b = ext_from_resolution(minimal_resolution(M, p, L))
        for j in range(len(simple_labels(M, p))):
            for q in range(4):
                assert a.get((q, j), 0) == b.get((q, j), 0)


def test_cellular_sigma2():
    S = sigma(2)
    lat = support_lattice(S)
    bot = next(L for L in simple_labels(S, 3) if L.apex == lat.bottom)
    C = minimal_cellular_resolution(S, 3, lat.bottom, bot)
    assert C.dims() == [2, 1]
    assert sorted(C.maps[1][:, 0].tolist()) == [1, 2]


def test_cellular_sigma3_z2_bottom_character():
    M = hsiao(3, "2")
    lat = support_lattice(M)
    L = find_label(M, 3, "1/2/3|0,1,1")
    C = minimal_cellular_resolution(M, 3, lat.bottom, L)
    assert C.dims() == [6, 6, 1]
    T = oracle_ext_table(M, 3)
    i = simple_labels(M, 3).index(L)
    tops = C.top_multiplicities()
    for j in range(len(simple_labels(M, 3))):
        for q in range(3):
            assert tops[q][j] == T.get(i, j, q)


def test_cellular_requires_lrbg():
    T = build_t2()
    L = simple_labels(T, 3)[0]
    with pytest.raises(NotCW):
        minimal_cellular_resolution(T, 3, L.apex, L)
    M = sigma(2)
    with pytest.raises(ApexMismatch):
        minimal_cellular_resolution(M, 2, support_lattice(M).top, simple_labels(M, 2)[0])


def test_cartan_matrix_sigma2():
    C = cartan_matrix(sigma(2), 2)
    assert C.tolist() == [[1, 1], [0, 1]]


def test_presentation_examples():
    rep = presentation_dimension_check(hsiao(2, "2"), 3)
    assert rep.quotient_dims == [6, 4] and rep.dims_equal and rep.cartan_equal
    rep = presentation_dimension_check(sigma(2), 2)
    assert rep.quotient_dim == 3 and rep.cartan_equal
    rep = presentation_dimension_check(hsiao(3, "2"), 3)
    assert rep.quotient_dims == [22, 36, 16] and rep.dims_equal and rep.cartan_equal
    rep = presentation_dimension_check(sigma(4), 2)
    assert rep.dims_equal and rep.cartan_equal
    assert rep.as_dict()["algebra_dim"] == 75


def test_quotient_path_algebra_diamond():
    arrows = [(0, 1), (0, 2), (1, 3), (2, 3)]
    dims, cartan = quotient_path_algebra(4, arrows, [[(0, 1, 3), (0, 2, 3)]], 5)
    assert dims == [4, 4, 1] and cartan[0, 3] == 1
    dims, _ = quotient_path_algebra(4, arrows, [], 5)
    assert dims == [4, 4, 2]


def test_direct_sum_and_size_guard():
    M = sigma(2)
    S = [simple_module(M, 2, L) for L in simple_labels(M, 2)]
    D = direct_sum(S, M, 2)
    D.check()
    assert D.top() == [1, 1]
    big = hsiao(4, "2")
    with pytest.raises(SizeLimit):
        regular_action(big, 3)
