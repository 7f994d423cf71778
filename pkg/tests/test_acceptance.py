"""Acceptance criteria 1-10.

Each test prints exactly one line ``criterion N: PASS|FAIL  <detail>`` and
then asserts.  Tolerances are pinned below; every comparison is exact except
the wall-clock budgets.  Run as a script to print the ten lines alone.
"""

import csv
import io
import itertools
import math
import random
import subprocess
import sys
import time

from wittk import decomp, kgroups, tr, witt
from wittk.cli import run as cli_run
from wittk.rings import FiniteField, Integers, IntegersMod, PrimeField
from wittk.selfcheck import random_surjective_tower
from wittk.smith import AbelianPGroup
from wittk.witt import WittVector, enumerate_witt, frobenius, full, ghost, restriction, verschiebung

# pinned budgets (seconds) and sample sizes
BUDGET_GHOST = 60.0
BUDGET_AGH = 10.0
BUDGET_TR = 30.0
SEED = 20240601
Z_SAMPLES = 500
Z_MAX_M = 10
PARTNERS_PER_VECTOR = 8

Z = Integers()


def report(n, ok, detail, capsys=None):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line)
    else:
        print(line)
    return ok


def _partners(vecs, rng):
    """All pairs when small, otherwise a seeded set of partners per vector."""
    if len(vecs) ** 2 <= 2**13:
        return [(a, b) for a in vecs for b in vecs]
    return [(a, rng.choice(vecs)) for a in vecs for _ in range(PARTNERS_PER_VECTOR)]


def _finite_samples(rng):
    for R in (PrimeField(2), PrimeField(3)):
        for m in range(1, 7):
            vecs = list(enumerate_witt(full(m), R))
            yield R, m, vecs, _partners(vecs, rng)


def _z_samples(rng):
    for _ in range(Z_SAMPLES):
        m = rng.randint(1, Z_MAX_M)
        T = full(m)
        a = WittVector(T, Z, tuple(rng.randint(-30, 30) for _ in T))
        b = WittVector(T, Z, tuple(rng.randint(-30, 30) for _ in T))
        yield a, b


# ---------------------------------------------------------------- 1


def check_ghost():
    rng = random.Random(SEED)
    t0 = time.perf_counter()
    bad, count = [], 0
    for R, m, vecs, pairs in _finite_samples(rng):
        for a, b in pairs:
            la, lb = witt.lift_to_integers(a), witt.lift_to_integers(b)
            s, p = la + lb, la * lb
            ok = ghost(s) == ghost(la) + ghost(lb) and ghost(p) == ghost(la) * ghost(lb)
            ok = ok and witt.reduce_from_integers(s, R) == a + b and witt.reduce_from_integers(p, R) == a * b
            count += 1
            if not ok:
                bad.append((str(R), a.coeffs, b.coeffs))
    for a, b in _z_samples(rng):
        count += 1
        if not (ghost(a + b) == ghost(a) + ghost(b) and ghost(a * b) == ghost(a) * ghost(b)):
            bad.append(("Z", a.coeffs, b.coeffs))
    dt = time.perf_counter() - t0
    ok = not bad and dt < BUDGET_GHOST
    return ok, f"{count} pairs, {len(bad)} failures, {dt:.1f}s (budget {BUDGET_GHOST:.0f}s)"


def test_criterion_01_ghost_homomorphism(capsys):
    ok, detail = check_ghost()
    assert report(1, ok, detail, capsys), detail


# ---------------------------------------------------------------- 2


def _identities(x, big, T, n, m):
    """Yield (name, ok) for the operator identities at indices n (and m coprime to n)."""
    N = len(T)
    y = restriction(x, full(N // n))
    y2 = restriction(big, full(N // n))
    Vy = verschiebung(n, y, T)
    yield "FnVn", frobenius(n, Vy) == y.scale(n)
    yield "projection", x * Vy == verschiebung(n, frobenius(n, x) * y, T)
    yield "V additive", verschiebung(n, y + y2, T) == Vy + verschiebung(n, y2, T)
    yield "F multiplicative", frobenius(n, x * big) == frobenius(n, x) * frobenius(n, big)
    yield "F additive", frobenius(n, x + big) == frobenius(n, x) + frobenius(n, big)
    if m and math.gcd(m, n) == 1 and m * n <= N:
        yield "FmVn = VnFm", frobenius(m, Vy) == verschiebung(n, frobenius(m, y), full(N // m))


def check_operators():
    rng = random.Random(SEED + 1)
    fails, count = {}, 0
    for R, N, vecs, pairs in _finite_samples(rng):
        if N < 2:
            continue
        T = full(N)
        for x, big in pairs[:: max(1, len(pairs) // 600)]:
            for n in (2, 3):
                if n > N:
                    continue
                for name, ok in _identities(x, big, T, n, 5 - n):
                    count += 1
                    if not ok:
                        fails.setdefault(name, 0)
                        fails[name] += 1
    for a, b in _z_samples(rng):
        N = len(a.trunc)
        if N < 2:
            continue
        for n in range(2, min(N, 5) + 1):
            m = next((k for k in range(2, N + 1) if math.gcd(k, n) == 1 and k * n <= N), None)
            for name, ok in _identities(a, b, a.trunc, n, m):
                count += 1
                if not ok:
                    fails.setdefault(name, 0)
                    fails[name] += 1
    return not fails, f"{count} identity checks, failures {fails or 0}"


def test_criterion_02_operator_identities(capsys):
    ok, detail = check_operators()
    assert report(2, ok, detail, capsys), detail


# ---------------------------------------------------------------- 3


def check_decomposition():
    rng = random.Random(SEED + 2)
    problems = []
    cases = 0
    for p in (2, 3):
        for R in (PrimeField(p), IntegersMod(p * p)):
            for m in range(2, 7):
                fwd = decomp.decompose_payload(m, p, R)
                add = witt._compiled(full(m).indices, "sum", R)
                comp_adds = [
                    witt._compiled(witt.p_typical(p, decomp.s_fn(p, m, u)).indices, "sum", R) for u in decomp.j_p(p, m)
                ]
                elems = list(itertools.product(list(R.elements()), repeat=m))
                if len({fwd(x) for x in elems}) != len(elems):
                    problems.append(("not bijective", p, str(R), m))
                for _ in range(200):
                    a, b = rng.choice(elems), rng.choice(elems)
                    if fwd(add(a, b)) != tuple(f(x, y) for f, x, y in zip(comp_adds, fwd(a), fwd(b))):
                        problems.append(("not additive", p, str(R), m))
                        break
                cases += 1
    for q, R in ((2, PrimeField(2)), (3, PrimeField(3)), (4, FiniteField(2, 2)), (5, PrimeField(5))):
        for m in range(1, 9):
            if decomp.big_witt_group(m, R).size != q**m:
                problems.append(("cardinality", q, m))
            cases += 1
    return not problems, f"{cases} cases, problems {problems or 0}"


def test_criterion_03_decomposition(capsys):
    ok, detail = check_decomposition()
    assert report(3, ok, detail, capsys), detail


# ---------------------------------------------------------------- 4, 5

FIELDS = [(2, PrimeField(2), 1), (2, FiniteField(2, 2), 2), (3, PrimeField(3), 1)]


def _grid():
    for p, k, f in FIELDS:
        for e in range(1, 9):
            for r in range(1, 8 // e + 1):
                yield p, k, f, e, r


def check_perfectoid():
    problems, count = [], 0
    for p, k, f, e, r in _grid():
        formula = decomp.quotient_formula(p, e, r, k)
        oracle = decomp.quotient_oracle(p, e, r, k)
        odd, even = kgroups.k_perfectoid(p, e, r, k)
        count += 1
        if not (formula == oracle == odd.torsion and formula.order == p ** (f * (r * e - r)) and even.torsion.is_trivial()):
            problems.append((p, str(k), e, r))
    F2 = PrimeField(2)
    pinned = [
        ((2, 3, 1), AbelianPGroup(2, (2,))),
        ((2, 2, 2), AbelianPGroup(2, (1, 1))),
        ((2, 2, 3), AbelianPGroup(2, (1, 1, 1))),
    ]
    for (p, e, r), want in pinned:
        if kgroups.k_odd_perfectoid(p, e, r, F2).torsion != want:
            problems.append(("pinned", p, e, r))
    return not problems, f"{count} grid points + {len(pinned)} pinned values, mismatches {problems or 0}"


def test_criterion_04_perfectoid(capsys):
    ok, detail = check_perfectoid()
    assert report(4, ok, detail, capsys), detail


def check_factors():
    problems, count = [], 0
    for p, k, f, e, r in _grid():
        assembled = kgroups.assemble_factors(p, kgroups.enumerate_gr_factors(p, e, r - 1, f))
        count += 1
        if assembled != decomp.quotient_oracle(p, e, r, k):
            problems.append((p, str(k), e, r))

    def shape(p, e, i):
        return [(fd.u, fd.case, fd.group.exponents) for fd in kgroups.enumerate_gr_factors(p, e, i)]

    if shape(2, 3, 0) != [(1, "generic", (2,)), (3, "absent", ())]:
        problems.append("boundary (2,3,0)")
    if shape(2, 2, 2) != [(1, "phi_pullback", (1,)), (3, "phi_pullback", (1,)), (5, "generic", (1,))]:
        problems.append("boundary (2,2,2)")
    return not problems, f"{count} grid points + 2 boundary locks, mismatches {problems or 0}"


def test_criterion_05_factor_enumeration(capsys):
    ok, detail = check_factors()
    assert report(5, ok, detail, capsys), detail


# ---------------------------------------------------------------- 6


def check_agh():
    t0 = time.perf_counter()
    out, err = io.StringIO(), io.StringIO()
    code = cli_run(["table", "agh", "--n-max", "6", "--i-max", "6", "--format", "csv"], out, err)
    rows = list(csv.DictReader(io.StringIO(out.getvalue())))
    problems = []
    if code != 0 or len(rows) != 42:  # n = 1..6, i = 0..6
        problems.append(("cli", code, len(rows)))
    for row in rows:
        n, i = int(row["n"]), int(row["i"])
        want = math.factorial(n * i) * math.factorial(i) ** (n - 2) if n >= 2 else 1
        if int(row["order"]) != want or int(row["rank"]) != n - 1:
            problems.append((n, i))
        # reassemble from per-prime CDVR valuations with e = f = 1, dE = 0
        prod = 1
        for p in range(2, n * i + 1):
            if all(p % q for q in range(2, int(p**0.5) + 1)):
                prod *= p ** kgroups.cdvr_k_groups(kgroups.CdvrData(p, 1, 1, 0), n, i)[1].order_valuation
        if prod != want:
            problems.append(("local", n, i))
    cell = next((r for r in rows if r["n"] == "2" and r["i"] == "2"), {})
    if cell.get("order") != "24":
        problems.append("n=2,i=2")
    dt = time.perf_counter() - t0
    return not problems and dt < BUDGET_AGH, f"{len(rows)} cells, mismatches {problems or 0}, {dt:.2f}s (budget {BUDGET_AGH:.0f}s)"


def test_criterion_06_agh_table(capsys):
    ok, detail = check_agh()
    assert report(6, ok, detail, capsys), detail


# ---------------------------------------------------------------- 7

CDVR_SET = [
    (2, 1, 1, 0), (2, 1, 2, 3), (2, 1, 2, 2), (2, 2, 2, 3), (2, 1, 3, 2),
    (2, 1, 4, 5), (2, 1, 4, 11), (2, 3, 1, 0), (3, 1, 2, 1), (3, 1, 3, 3),
    (3, 1, 3, 4), (3, 2, 1, 0), (3, 1, 4, 3), (3, 1, 6, 7), (5, 1, 1, 0),
    (5, 1, 2, 1), (5, 1, 5, 5), (5, 2, 3, 2), (7, 1, 1, 0), (7, 1, 6, 5),
]


def check_cdvr():
    assert len(CDVR_SET) == 20
    problems, count = [], 0
    for pt in CDVR_SET:
        d = kgroups.CdvrData(*pt)
        for n in range(1, 13):
            for i in range(0, 13):
                count += 1
                if kgroups.cdvr_even_recursive(d, n, i) != kgroups.closed_form_valuation(d, n, i):
                    problems.append((pt, n, i))
    for p in (2, 3, 5):
        for n in range(1, 11):
            for r in range(0, 11):
                count += 1
                if kgroups.rank_count(n, r, p) != n - 1:
                    problems.append(("rank", p, n, r))
    return not problems, f"{count} checks over 20 (p,f,e,dE) points, mismatches {problems[:5] or 0}"


def test_criterion_07_cdvr(capsys):
    ok, detail = check_cdvr()
    assert report(7, ok, detail, capsys), detail


# ---------------------------------------------------------------- 8


def check_hsum():
    problems, count, oracle_runs = [], 0, 0
    for p in (2, 3, 5):
        for n in range(1, 11):
            for i in range(0, 11):
                total = sum(kgroups.h_fn(p, i + 1, n, u) for u in decomp.j_p(p, n * (i + 1)))
                use_oracle = p ** (n * (i + 1)) <= 2**14
                q = decomp.quotient_structure(p, n, i + 1, PrimeField(p), oracle=use_oracle)
                oracle_runs += use_oracle
                count += 1
                if total != n * (i + 1) - (i + 1) or q.group.order_valuation != total:
                    problems.append((p, n, i))
    return not problems, f"{count} (p,n,i), {oracle_runs} with enumeration oracle, mismatches {problems or 0}"


def test_criterion_08_h_sum(capsys):
    ok, detail = check_hsum()
    assert report(8, ok, detail, capsys), detail


# ---------------------------------------------------------------- 9


def check_tr():
    t0 = time.perf_counter()
    problems = []
    for k in (PrimeField(2), PrimeField(3), FiniteField(2, 2)):
        p = k.p
        f = 1 if isinstance(k, PrimeField) else k.f
        for M in (6, 8, 16):
            for i in range(0, 6):
                th = tr.theta_infty(k, i, M)
                want = AbelianPGroup(p, (M,) * f) if i == 0 else AbelianPGroup(p)
                if not (th.H0 == want and th.H1.is_trivial() and th.H2.is_trivial()):
                    problems.append(("theta", str(k), M, i))
        groups = tr.tr_groups(k, 10, 8)
        if groups[0][1] != AbelianPGroup(p, (8,) * f) or not all(g.is_trivial() for _, g in groups[1:]):
            problems.append(("TR", str(k)))
        for M in (4, 8):
            lo = [tr.precision_label(g, M) for _, g in tr.tr_groups(k, 10, M)]
            hi = [tr.precision_label(g, 2 * M) for _, g in tr.tr_groups(k, 10, 2 * M)]
            if lo != hi:
                problems.append(("doubling", str(k), M))
    rng = random.Random(SEED + 9)
    for trial in range(12):
        T = random_surjective_tower(rng, rng.choice((2, 3, 5)), M=4, gens=rng.randint(1, 6), stages=24)
        if not tr.lim_tower(T, window=8).lim1.is_trivial():
            problems.append(("lim1", trial))
    dt = time.perf_counter() - t0
    return not problems and dt < BUDGET_TR, f"theta/TR/doubling/lim1, problems {problems or 0}, {dt:.1f}s (budget {BUDGET_TR:.0f}s)"


def test_criterion_09_tr(capsys):
    ok, detail = check_tr()
    assert report(9, ok, detail, capsys), detail


# ---------------------------------------------------------------- 10


def check_determinism():
    cmd = [sys.executable, "-m", "wittk.cli", "selfcheck", "--suite", "all", "--seed", "7"]
    a = subprocess.run(cmd, capture_output=True)
    b = subprocess.run(cmd, capture_output=True)
    ok = a.returncode == b.returncode == 0 and a.stdout == b.stdout and len(a.stdout) > 0
    return ok, f"two runs: exit {a.returncode}/{b.returncode}, {len(a.stdout)} bytes, identical={a.stdout == b.stdout}"


def test_criterion_10_determinism(capsys):
    ok, detail = check_determinism()
    assert report(10, ok, detail, capsys), detail


CHECKS = [check_ghost, check_operators, check_decomposition, check_perfectoid, check_factors, check_agh, check_cdvr, check_hsum, check_tr, check_determinism]


if __name__ == "__main__":
    results = [report(n, *fn()) for n, fn in enumerate(CHECKS, start=1)]
    sys.exit(0 if all(results) else 1)
