import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wittk import tr
from wittk.rings import FiniteField, PrimeField
from wittk.selfcheck import random_surjective_tower
from wittk.smith import AbelianPGroup, Presentation, identity
from wittk.tr import NoStabilization, Tower, lim_tower, precision_label, theta_infty, tr_groups


def free_tower(p, M, mats):
    g = len(mats[0])
    return Tower(p, M, [Presentation.cyclic([p**M] * g)] * (len(mats) + 1), mats)


def test_constant_tower():
    T = free_tower(2, 6, [identity(1)] * 40)
    d = lim_tower(T, window=8)
    assert d.lim == AbelianPGroup(2, (6,)) and d.lim1.is_trivial()


def test_reduction_tower():
    p, M = 3, 5
    X = [Presentation.cyclic([p ** min(n, M)]) for n in range(1, 40)]
    T = Tower(p, M, X, [identity(1)] * 38)
    d = lim_tower(T, window=10)
    assert d.lim == AbelianPGroup(3, (5,)) and d.lim1.is_trivial()
    assert precision_label(d.lim, M) == "Z_3"


def test_multiplication_by_p_tower():
    T = free_tower(2, 4, [[[2]]] * 40)
    d = lim_tower(T, window=8)
    assert d.lim.is_trivial() and d.lim1.is_trivial()


def test_no_stabilization_reported():
    with pytest.raises(NoStabilization):
        lim_tower(free_tower(2, 4, [[[1]]] * 5), window=8)


@given(st.integers(0, 10**6), st.sampled_from([2, 3, 5]), st.integers(1, 6))
@settings(max_examples=25)
def test_lim1_vanishes_on_mittag_leffler_towers(seed, p, g):
    rng = random.Random(seed)
    T = random_surjective_tower(rng, p, M=3, gens=g, stages=18)
    d = lim_tower(T, window=6)
    assert d.lim1.is_trivial()
    assert d.lim == AbelianPGroup(p, (3,) * g)


def _random_matrix(rng, rows, cols, p):
    return [[rng.choice([0, 1, p, rng.randint(0, p**2)]) for _ in range(cols)] for _ in range(rows)]


def _eventually(rng, g, p, kind):
    if kind == "iso":
        return identity(g)
    if kind == "p":
        return [[p * int(i == j) for j in range(g)] for i in range(g)]
    return _random_matrix(rng, g, g, p)


@pytest.mark.parametrize("seed", range(8))
def test_milnor_sequence_on_extensions(seed):
    rng = random.Random(seed)
    p, M, N, W = rng.choice([2, 3]), 3, 26, 8
    a, c = rng.randint(1, 3), rng.randint(1, 3)
    ka, kc = rng.choice(["iso", "p", "rand"]), rng.choice(["iso", "p", "rand"])
    fa = _eventually(rng, a, p, ka)
    fc = _eventually(rng, c, p, kc)
    A = free_tower(p, M, [fa] * (N - 1))
    C = free_tower(p, M, [fc] * (N - 1))
    maps = []
    for _ in range(N - 1):
        g = _random_matrix(rng, a, c, p)
        top = [fa[i] + g[i] for i in range(a)]
        bottom = [[0] * a + fc[i] for i in range(c)]
        maps.append(top + bottom)
    B = free_tower(p, M, maps)
    la, lb, lc = (lim_tower(T, window=W) for T in (A, B, C))
    # 0 -> lim A -> lim B -> lim C -> lim1 A -> lim1 B -> lim1 C -> 0
    assert la.lim1.is_trivial() and lb.lim1.is_trivial() and lc.lim1.is_trivial()
    assert lb.lim.order == la.lim.order * lc.lim.order


def test_tower_json_round_trip():
    T = free_tower(2, 3, [[[1, 2], [0, 1]]] * 3)
    U = Tower.from_json(T.to_json())
    assert U.to_json() == T.to_json()
    with pytest.raises(ValueError):
        Tower(2, 3, [Presentation(1)] * 2, [[[1, 1]]])


@pytest.mark.parametrize("k", [PrimeField(2), FiniteField(2, 2), PrimeField(3)], ids=str)
@pytest.mark.parametrize("M", [6, 8, 16])
def test_theta(k, M):
    f = 1 if isinstance(k, PrimeField) else k.f
    for i in range(0, 6):
        th = theta_infty(k, i, M)
        if i == 0:
            assert th.H0 == AbelianPGroup(k.p, (M,) * f)
            assert precision_label(th.H0, M) == " + ".join([f"Z_{k.p}"] * f)
        else:
            assert th.is_zero()
        assert th.H1.is_trivial() and th.H2.is_trivial()


def test_theta_examples():
    assert theta_infty(PrimeField(2), 0, 8).H0 == AbelianPGroup(2, (8,))
    assert theta_infty(FiniteField(2, 2), 1, 8).is_zero()
    assert theta_infty(PrimeField(2), 3, 8).is_zero()


def test_tr_examples():
    groups = tr_groups(PrimeField(2), 10, 8)
    assert [j for j, _ in groups] == list(range(11))
    assert groups[0][1] == AbelianPGroup(2, (8,))
    assert all(g.is_trivial() for _, g in groups[1:])
    groups = tr_groups(FiniteField(2, 2), 6, 6)
    assert groups[0][1] == AbelianPGroup(2, (6, 6))
    assert all(g.is_trivial() for _, g in groups[1:])


@pytest.mark.parametrize("k", [PrimeField(2), PrimeField(3), FiniteField(2, 2)], ids=str)
def test_precision_doubling(k):
    for M in (4, 8):
        lo = [precision_label(g, M) for _, g in tr_groups(k, 6, M)]
        hi = [precision_label(g, 2 * M) for _, g in tr_groups(k, 6, 2 * M)]
        assert lo == hi


def test_precision_label():
    assert precision_label(AbelianPGroup(2, (8, 3, 1)), 8) == "Z_2 + Z/2^3 + Z/2"
    assert precision_label(AbelianPGroup(5), 8) == "0"


def test_bad_inputs():
    with pytest.raises(ValueError):
        theta_infty(PrimeField(2), -1, 8)
    with pytest.raises(TypeError):
        theta_infty(5, 0, 8)
    with pytest.raises(ValueError):
        tr_groups(PrimeField(2), -1, 8)
