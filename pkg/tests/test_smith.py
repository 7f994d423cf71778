import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_form

from wittk.smith import (
    AbelianPGroup,
    Lattice,
    Presentation,
    cokernel,
    direct_sum,
    generate_group,
    hnf_mod,
    image,
    integer_kernel,
    invariant_factors,
    is_well_defined,
    kernel,
    matmul,
    smith_form,
    smith_form_mod,
)

matrices = st.integers(1, 5).flatmap(
    lambda m: st.integers(1, 5).flatmap(
        lambda n: st.lists(st.lists(st.integers(-30, 30), min_size=n, max_size=n), min_size=m, max_size=m)
    )
)


def sympy_invariants(A):
    D = smith_normal_form(Matrix(A), domain=ZZ)
    return sorted(abs(D[i, i]) for i in range(min(D.shape)) if D[i, i] != 0)


@given(matrices)
@settings(max_examples=200)
def test_smith_form_matches_sympy(A):
    S = smith_form(A)
    diag = S.diag
    assert sorted(abs(d) for d in diag if d) == sympy_invariants(A)
    nz = [d for d in diag if d]
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    assert matmul(matmul(S.U, A), S.V) == [[diag[i] if i == j and i < len(diag) else 0 for j in range(len(A[0]))] for i in range(len(A))]
    n = len(A[0])
    assert matmul(S.V, S.Vinv) == [[int(i == j) for j in range(n)] for i in range(n)]


@given(matrices)
def test_integer_kernel(A):
    n = len(A[0])
    K = integer_kernel(A, n)
    for v in K:
        assert all(sum(a * x for a, x in zip(row, v)) == 0 for row in A)
    assert len(K) == n - Matrix(A).rank()


@given(st.lists(st.lists(st.integers(-20, 20), min_size=3, max_size=3), min_size=0, max_size=5), st.sampled_from([4, 8, 9, 27]))
def test_hnf_mod_spans_the_same_lattice(rows, d):
    H = hnf_mod(rows, 3, d)
    L = Lattice.span(rows + [[d if i == j else 0 for i in range(3)] for j in range(3)], 3)
    for r in H:
        L.coordinates(r)
    T = Lattice.span(rows, 3, d)
    for r in rows:
        T.coordinates(r)
    assert abs(Matrix(H).det()) == abs(math.prod(L._d))


def brute_group(orders):
    return list(itertools.product(*[range(o) for o in orders]))


@st.composite
def finite_map(draw, p=None):
    p = p or draw(st.sampled_from([2, 3]))
    src = draw(st.lists(st.integers(1, 3), min_size=1, max_size=3))
    tgt = draw(st.lists(st.integers(1, 3), min_size=1, max_size=3))
    M = []
    for i in range(len(tgt)):
        row = []
        for j in range(len(src)):
            # well defined: p^src_j * M[i][j] = 0 mod p^tgt_i
            step = p ** max(0, tgt[i] - src[j])
            row.append(step * draw(st.integers(0, p**3)))
        M.append(row)
    return p, [p**a for a in src], [p**a for a in tgt], M


@given(finite_map())
@settings(max_examples=120)
def test_kernel_image_cokernel_by_enumeration(data):
    p, so, to, M = data
    S, T = Presentation.cyclic(so), Presentation.cyclic(to)
    assert is_well_defined(M, S, T)
    elements = brute_group(so)
    img = {tuple(sum(M[i][j] * x[j] for j in range(len(so))) % to[i] for i in range(len(to))) for x in elements}
    ker_size = sum(1 for x in elements if all(sum(M[i][j] * x[j] for j in range(len(so))) % to[i] == 0 for i in range(len(to))))
    K, _ = kernel(M, S, T)
    assert K.order() == ker_size
    assert image(M, S, T).order() == len(img)
    assert cokernel(M, S, T).order() == math.prod(to) // len(img)
    assert K.order() * image(M, S, T).order() == math.prod(so)


def test_not_well_defined():
    assert not is_well_defined([[1]], Presentation.cyclic([4]), Presentation.cyclic([8]))


def test_free_parts():
    P = Presentation(3, ((2, 0, 0),))
    assert P.invariants() == [2, 0, 0]
    assert P.order() is None
    G = AbelianPGroup.from_presentation(2, P)
    assert G.free_rank == 2 and G.exponents == (1,)


def test_abelian_p_group_canonical_form():
    G = AbelianPGroup(2, (1, 3, 0, 2))
    assert G.exponents == (3, 2, 1)
    assert G.order == 2**6
    assert str(AbelianPGroup(2, (2, 1))) == "Z/2^2 + Z/2"
    assert str(AbelianPGroup(3)) == "0"
    assert AbelianPGroup.from_json(G.to_json()) == G
    assert AbelianPGroup(2, (1,)).to_json() == {"p": 2, "exponents": [1], "free_rank": 0}
    assert direct_sum([AbelianPGroup(2, (1,)), AbelianPGroup(2, (2,))], 2) == AbelianPGroup(2, (2, 1))
    with pytest.raises(ValueError):
        AbelianPGroup.from_invariants(2, [6])


@given(st.lists(st.integers(1, 6), min_size=1, max_size=4), st.sampled_from([2, 3, 5]))
def test_invariants_of_cyclic_sum(exps, p):
    P = Presentation.cyclic([p**a for a in exps])
    assert AbelianPGroup.from_presentation(p, P) == AbelianPGroup(p, tuple(exps))


@pytest.mark.parametrize("orders", [(4,), (2, 4), (3, 9), (2, 2, 8)])
def test_generate_group_presents_the_closure(orders):
    def add(a, b):
        return tuple((x + y) % o for x, y, o in zip(a, b, orders))

    zero = (0,) * len(orders)
    gens = [tuple(int(i == j) for i in range(len(orders))) for j in range(len(orders))]
    gens.append(tuple(1 for _ in orders))
    G = generate_group(gens, add, zero)
    assert G.size == math.prod(orders)
    p = min(q for q in (2, 3) if orders[0] % q == 0)
    assert AbelianPGroup.from_presentation(p, G.presentation()) == AbelianPGroup.from_invariants(p, orders)
    for x, c in G.coords.items():
        acc = zero
        for g, k in zip(gens, c):
            for _ in range(k % math.prod(orders)):
                acc = add(acc, g)
        assert acc == x


@given(matrices, st.sampled_from([(2, 3), (3, 2), (5, 2), (2, 6)]))
@settings(max_examples=150)
def test_smith_form_mod_matches_integer_invariants(A, pk):
    p, k = pk
    d = p**k
    n = len(A[0])
    diag, V = smith_form_mod(A, n, d)
    # invariants of Z^n / (rows of A + d Z^n), computed both ways
    rows = [list(r) for r in A] + [[d * int(i == j) for i in range(n)] for j in range(n)]
    inv = sympy_invariants(rows)
    want = AbelianPGroup.from_invariants(p, inv + [1] * (n - len(inv)))
    padded = diag + [d] * (n - len(diag))
    assert AbelianPGroup.from_invariants(p, padded) == want
    assert Matrix(V).det() % p != 0
    assert AbelianPGroup.from_presentation(p, Presentation(n, tuple(tuple(r) for r in A) + tuple(tuple(r) for r in rows[len(A):])), d) == want


def test_smith_form_entry_growth_regression():
    # this matrix used to grow to 10^4-bit entries before global re-pivoting
    rows = [[28, 5, 8, 18, -30], [26, -28, 1, -10, -11], [23, -1, -27, 21, 22], [26, 21, -4, -18, 5]]
    rows += [[64 * int(i == j) for i in range(5)] for j in range(5)]
    S = smith_form(rows)
    assert [x for x in S.diag if x != 1] == [64]
    assert max(abs(x) for r in S.U for x in r).bit_length() < 200
