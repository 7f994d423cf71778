"""Oracle suites run by ``wittk selfcheck``.

Each suite returns a list of Check records; randomness comes only from the
seed, and nothing time-dependent is recorded, so reports are reproducible.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from typing import Callable, Dict, List

from . import decomp, kgroups, tr, witt
from .rings import FiniteField, Integers, IntegersMod, PrimeField
from .smith import AbelianPGroup, Presentation, identity

SUITES = ("ghost", "decomp", "tworoute", "cdvr", "tr")


@dataclass
class Check:
    suite: str
    name: str
    passed: bool
    cases: int
    detail: str = ""

    def to_json(self):
        return {"suite": self.suite, "name": self.name, "passed": self.passed, "cases": self.cases, "detail": self.detail}


def _run(suite, name, cases_fn) -> Check:
    """cases_fn yields (label, ok); stops at the first failure."""
    n = 0
    try:
        for label, ok in cases_fn():
            n += 1
            if not ok:
                return Check(suite, name, False, n, f"failed at {label}")
    except Exception as exc:  # reported, not raised: the report is the product
        return Check(suite, name, False, n, f"{type(exc).__name__}: {exc}")
    return Check(suite, name, True, n)


def _random_z(T, rng, bound=20):
    return witt.WittVector(T, Integers(), tuple(rng.randint(-bound, bound) for _ in T))


def suite_ghost(rng: random.Random) -> List[Check]:
    Z = Integers()

    def z_homomorphism():
        for m in range(1, 9):
            T = witt.full(m)
            for _ in range(12):
                a, b = _random_z(T, rng), _random_z(T, rng)
                ok = witt.ghost(a + b) == witt.ghost(a) + witt.ghost(b) and witt.ghost(a * b) == witt.ghost(a) * witt.ghost(b)
                yield (m, a.coeffs, b.coeffs), ok

    def lifted_homomorphism():
        for R, m in ((PrimeField(2), 4), (PrimeField(3), 3), (IntegersMod(4), 3)):
            T = witt.full(m)
            vecs = list(witt.enumerate_witt(T, R))
            for a in vecs:
                b = vecs[rng.randrange(len(vecs))]
                la, lb = witt.lift_to_integers(a), witt.lift_to_integers(b)
                ok = witt.reduce_from_integers(la + lb, R) == a + b and witt.reduce_from_integers(la * lb, R) == a * b
                yield (str(R), a.coeffs, b.coeffs), ok

    def round_trip():
        T = witt.full(8)
        for _ in range(30):
            a = _random_z(T, rng)
            yield a.coeffs, witt.from_ghost(witt.ghost(a)) == a

    def operators():
        T = witt.full(12)
        for _ in range(10):
            x, y = _random_z(T, rng, 5), _random_z(witt.full(6), rng, 5)
            yield "FV", witt.frobenius(2, witt.verschiebung(2, y, T)) == y.scale(2)
            yield "FV3", witt.frobenius(3, witt.verschiebung(3, witt.restriction(y, witt.full(4)), T)) == witt.restriction(y, witt.full(4)).scale(3)
            lhs = x * witt.verschiebung(2, y, T)
            rhs = witt.verschiebung(2, witt.frobenius(2, x) * y, T)
            yield "projection", lhs == rhs
            yield "F2F3", witt.frobenius(2, witt.frobenius(3, x)) == witt.frobenius(3, witt.frobenius(2, x))

    return [
        _run("ghost", "ghost is a ring map over Z", z_homomorphism),
        _run("ghost", "integral lifts commute with arithmetic", lifted_homomorphism),
        _run("ghost", "from_ghost inverts ghost", round_trip),
        _run("ghost", "F_n V_n = n and projection formula", operators),
    ]


def suite_decomp(rng: random.Random) -> List[Check]:
    def bijective_additive():
        for p in (2, 3):
            for R in (PrimeField(p), IntegersMod(p * p)):
                for m in range(2, 6):
                    if R.cardinality**m > 2**12:
                        continue
                    fwd = decomp.decompose_payload(m, p, R)
                    add = witt._compiled(witt.full(m).indices, "sum", R)
                    comp_adds = [
                        witt._compiled(witt.p_typical(p, decomp.s_fn(p, m, u)).indices, "sum", R) for u in decomp.j_p(p, m)
                    ]
                    elems = list(itertools.product(list(R.elements()), repeat=m))
                    images = {fwd(x) for x in elems}
                    yield (p, str(R), m, "bijective"), len(images) == len(elems)
                    for _ in range(50):
                        a, b = rng.choice(elems), rng.choice(elems)
                        da, db = fwd(a), fwd(b)
                        summed = tuple(f(x, y) for f, x, y in zip(comp_adds, da, db))
                        yield (p, str(R), m, a, b), fwd(add(a, b)) == summed

    def s_sum():
        for p in (2, 3, 5):
            for m in range(1, 65):
                yield (p, m), sum(decomp.s_fn(p, m, u) for u in decomp.j_p(p, m)) == m

    def cardinality():
        for q, R in ((2, PrimeField(2)), (3, PrimeField(3)), (4, FiniteField(2, 2)), (5, PrimeField(5))):
            for m in range(1, 5):
                T = witt.full(m)
                G = decomp.big_witt_group(m, R) if q**m <= 2**10 else None
                if G is not None:
                    yield (q, m), G.size == q**m

    return [
        _run("decomp", "decompose is an additive bijection", bijective_additive),
        _run("decomp", "sum of s(p,m,u) over u is m", s_sum),
        _run("decomp", "|W_m(F_q)| = q^m", cardinality),
    ]


FIELDS = {2: (PrimeField(2), FiniteField(2, 2)), 3: (PrimeField(3),)}


def suite_tworoute(rng: random.Random) -> List[Check]:
    def routes():
        for p, ks in FIELDS.items():
            for k in ks:
                f = 1 if isinstance(k, PrimeField) else k.f
                for e in range(1, 7):
                    for r in range(1, 7 // e + 1):
                        if r * e > 6:
                            continue
                        formula = decomp.quotient_formula(p, e, r, k)
                        oracle = decomp.quotient_oracle(p, e, r, k)
                        graded = kgroups.assemble_factors(p, kgroups.enumerate_gr_factors(p, e, r - 1, f))
                        ok = formula == oracle == graded and formula.order_valuation == f * (r * e - r)
                        yield (p, str(k), e, r), ok

    def boundary():
        got = [(fd.u, fd.case) for fd in kgroups.enumerate_gr_factors(2, 3, 0)]
        yield "p=2,e=3,i=0", got == [(1, "generic"), (3, "absent")]
        got = [(fd.u, fd.case, fd.group.exponents) for fd in kgroups.enumerate_gr_factors(2, 2, 2)]
        yield "p=2,e=2,i=2", got == [(1, "phi_pullback", (1,)), (3, "phi_pullback", (1,)), (5, "generic", (1,))]

    def units():
        for k in (PrimeField(2), PrimeField(3)):
            for e in range(1, 5):
                yield (str(k), e), kgroups.unit_group(e, k) == kgroups.k_odd_perfectoid(k.p, e, 1, k).torsion

    return [
        _run("tworoute", "formula = oracle = graded factors", routes),
        _run("tworoute", "strict boundary of the case split", boundary),
        _run("tworoute", "K_1 equals the unit group", units),
    ]


CDVR_POINTS = [
    kgroups.CdvrData(2, 1, 2, 3),
    kgroups.CdvrData(3, 1, 2, 1),
    kgroups.CdvrData(2, 1, 1, 0),
    kgroups.CdvrData(5, 2, 3, 2),
]


def suite_cdvr(rng: random.Random) -> List[Check]:
    def recurrence():
        for d in CDVR_POINTS:
            for n in range(1, 9):
                for i in range(0, 9):
                    yield (d.to_json(), n, i), kgroups.cdvr_even_recursive(d, n, i) == kgroups.closed_form_valuation(d, n, i)

    def ranks():
        for p in (2, 3, 5):
            for n in range(1, 9):
                for r in range(0, 9):
                    yield (p, n, r), kgroups.rank_count(n, r, p) == n - 1

    def agh():
        for n in range(1, 7):
            for i in range(0, 7):
                res = kgroups.integral_agh(n, i)
                yield (n, i), res.order == kgroups.agh_order(n, i) and res.rank == n - 1

    def hsum():
        for p in (2, 3, 5):
            for n in range(1, 7):
                for i in range(0, 7):
                    total = sum(kgroups.h_fn(p, i + 1, n, u) for u in decomp.j_p(p, n * (i + 1)))
                    yield (p, n, i), total == n * (i + 1) - (i + 1)

    def polys():
        cases = [(2, [-2, 1], 0), (2, [-2, 0, 1], 3), (3, [-3, 0, 1], 1), (2, [2, 2, 0, 1], 2)]
        for p, E, want in cases:
            d = kgroups.cdvr_from_polynomial(p, 1, E)
            deriv = [j * E[j] for j in range(1, len(E))]
            yield (p, E), d.dE == want == kgroups.norm_valuation(deriv, E, p)

    def legendre():
        for p in (2, 3, 5, 7):
            fact = 1
            for N in range(0, 400):
                if N:
                    fact *= N
                v = 0
                x = fact
                while x % p == 0:
                    x //= p
                    v += 1
                yield (p, N), kgroups.legendre(N, p) == v

    return [
        _run("cdvr", "recurrence equals closed form", recurrence),
        _run("cdvr", "rank count is n - 1", ranks),
        _run("cdvr", "AGH orders over Z", agh),
        _run("cdvr", "h-sum identity", hsum),
        _run("cdvr", "v_pi(E'(pi)) from polynomials", polys),
        _run("cdvr", "Legendre formula", legendre),
    ]


def suite_tr(rng: random.Random) -> List[Check]:
    def thetas():
        for k in (PrimeField(2), FiniteField(2, 2), PrimeField(3)):
            p = k.p
            f = 1 if isinstance(k, PrimeField) else k.f
            for M in (6, 8):
                for i in range(0, 4):
                    th = tr.theta_infty(k, i, M)
                    want0 = AbelianPGroup(p, (M,) * f) if i == 0 else AbelianPGroup(p)
                    yield (str(k), M, i), th.H0 == want0 and th.H1.is_trivial() and th.H2.is_trivial()

    def tr_vanishing():
        for k in (PrimeField(2), FiniteField(2, 2)):
            f = 1 if isinstance(k, PrimeField) else k.f
            groups = tr.tr_groups(k, 6, 6)
            yield str(k), groups[0][1] == AbelianPGroup(k.p, (6,) * f) and all(g.is_trivial() for _, g in groups[1:])

    def mittag_leffler():
        for trial in range(8):
            T = random_surjective_tower(rng, p=rng.choice((2, 3)), M=4, gens=rng.randint(1, 4), stages=24)
            data = tr.lim_tower(T, window=8)
            yield trial, data.lim1.is_trivial()

    return [
        _run("tr", "theta(0) = W(k), theta(i) = 0", thetas),
        _run("tr", "TR of a perfect field", tr_vanishing),
        _run("tr", "lim^1 vanishes on Mittag-Leffler towers", mittag_leffler),
    ]


def random_surjective_tower(rng: random.Random, p: int, M: int, gens: int, stages: int) -> tr.Tower:
    """Stages (Z/p^M)^g with random unimodular transition matrices."""
    X = [Presentation.cyclic([p**M] * gens)] * stages
    maps = []
    for _ in range(stages - 1):
        A = identity(gens)
        for _ in range(3 * gens):
            i, j = rng.randrange(gens), rng.randrange(gens)
            if i != j:
                c = rng.randint(-3, 3)
                A = [row[:] for row in A]
                for row in A:
                    row[i] += c * row[j]
        maps.append(A)
    return tr.Tower(p, M, X, maps)


SUITE_FUNCS: Dict[str, Callable] = {
    "ghost": suite_ghost,
    "decomp": suite_decomp,
    "tworoute": suite_tworoute,
    "cdvr": suite_cdvr,
    "tr": suite_tr,
}


def run_suites(suite: str = "all", seed: int = 0) -> List[Check]:
    names = SUITES if suite == "all" else (suite,)
    out = []
    for name in names:
        if name not in SUITE_FUNCS:
            raise ValueError(f"unknown suite {name!r}")
        out.extend(SUITE_FUNCS[name](random.Random(f"{seed}:{name}")))
    return out
