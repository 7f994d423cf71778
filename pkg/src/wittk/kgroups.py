"""Relative K-groups of truncated polynomial algebras R[x]/x^e.

Three families are covered:

* perfect fields k of characteristic p (the perfectoid case with A_inf = W(k)
  and orientation d = p), with full group structure;
* complete discrete valuation rings of mixed characteristic, where only
  ranks and p-adic valuations of orders are produced;
* rings of integers, assembled prime by prime from local data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .decomp import e_prime, j_p, quotient_lengths, quotient_structure, s_fn
from .rings import CapExceeded, FiniteField, PrimeField, is_prime, vp_int
from .smith import AbelianPGroup, Presentation, cokernel, direct_sum, generate_group, kernel

RECURSIVE_GRID = 12


def j_p_enumerate(p: int, bound: int) -> List[int]:
    return j_p(p, bound)


def t_fn(u: int, p: int, s: int, e: int) -> int:
    """floor((u p^{s-1} - 1) / e)."""
    if s < 1:
        raise ValueError("t is defined for s >= 1")
    return (u * p ** (s - 1) - 1) // e


def _vp(n: int, p: int) -> int:
    v = vp_int(n, p)
    if v == math.inf:
        raise ValueError("valuation of zero")
    return int(v)


def _field_data(k) -> Tuple[int, int]:
    if isinstance(k, PrimeField):
        return k.p, 1
    if isinstance(k, FiniteField):
        return k.p, k.f
    raise TypeError(f"{k} is not a finite field")


# --------------------------------------------------------------------------
# graded factors over a perfect field


@dataclass(frozen=True)
class TowerLevel:
    m: int
    weight: int
    kind: str  # "n" (weight prime to e), "k" (weight e*k, k <= i) or "none"
    a: int
    source_len: int
    target_len: int


@dataclass
class FactorDescriptor:
    u: int
    s: int
    t: int
    case: str
    twist: int
    group: AbelianPGroup
    boundary: bool = False
    tower_h0: Optional[AbelianPGroup] = None
    tower_h1: Optional[AbelianPGroup] = None

    def to_json(self):
        return {
            "u": self.u,
            "s": self.s,
            "t": self.t,
            "case": self.case,
            "twist": self.twist,
            "group": self.group.to_json(),
            "boundary": self.boundary,
        }


def tower_levels(p: int, e: int, i: int, u: int) -> List[TowerLevel]:
    """Levels m = 0..s-1 of the u-tower, weight u p^m, with i the Nygaard index.

    A weight prime to e contributes a level with source W_{m+1} (the quotient
    p^a W / p^{a+1+m} W, a = i - floor((w-1)/e)) and target W_m; a weight
    e*k with k <= i contributes a Frobenius level with source and target
    W_{v_p(e)}; the weight e(i+1) contributes nothing.
    """
    v = _vp(e, p)
    s = s_fn(p, e * (i + 1), u)
    out = []
    for m in range(s):
        w = u * p**m
        a = i - (w - 1) // e
        if w % e:
            out.append(TowerLevel(m, w, "n", a, m + 1, m))
        elif w // e <= i:
            out.append(TowerLevel(m, w, "k", a, v, v))
        else:
            out.append(TowerLevel(m, w, "none", a, 0, 0))
    return out


def tower_equalizer(p: int, levels: Sequence[TowerLevel]) -> Tuple[AbelianPGroup, AbelianPGroup]:
    """(ker, coker) of can - phi on the level modules of one u-tower.

    can is multiplication by p^a from each source to the target of the same
    level; phi identifies the source of level m-1 with the target of level m.
    """
    src = [lv for lv in levels if lv.source_len]
    tgt = [lv for lv in levels if lv.target_len]
    if not src:
        return AbelianPGroup(p), AbelianPGroup(p)
    tpos = {lv.m: j for j, lv in enumerate(tgt)}
    M = [[0] * len(src) for _ in tgt]
    for c, lv in enumerate(src):
        if lv.m in tpos:
            M[tpos[lv.m]][c] += p**lv.a
        if lv.m + 1 in tpos:
            M[tpos[lv.m + 1]][c] -= 1
    S = Presentation.cyclic([p**lv.source_len for lv in src])
    T = Presentation.cyclic([p**lv.target_len for lv in tgt])
    ker, _ = kernel(M, S, T)
    return AbelianPGroup.from_presentation(p, ker), AbelianPGroup.from_presentation(p, cokernel(M, S, T))


def enumerate_gr_factors(p: int, e: int, i: int, f: int = 1, check_tower: bool = True) -> List[FactorDescriptor]:
    """Graded factors of the filtration on relative TC at Nygaard index i.

    The case split: generic (W_s) when u is not in e'J_p or u p^{v_p(e)} > e(i+1)
    strictly, otherwise the Frobenius pullback W_{v_p(e)} (absent if v_p(e) = 0).
    Each factor is recomputed from its tower; disagreement raises.
    """
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if e < 1 or i < 0:
        raise ValueError("need e >= 1 and i >= 0")
    v = _vp(e, p)
    ep = e_prime(e, p)
    top = e * (i + 1)
    out = []
    for u in j_p(p, top):
        s = s_fn(p, top, u)
        if s < 1:
            continue
        in_ej = u % ep == 0
        boundary = in_ej and u * p**v == top
        if not in_ej or u * p**v > top:
            case, length = "generic", s
        elif v == 0:
            case, length = "absent", 0
        else:
            case, length = "phi_pullback", v
        t = t_fn(u, p, s, e)
        desc = FactorDescriptor(u, s, t, case, t // p, AbelianPGroup(p, (length,) * f if length else ()), boundary)
        if check_tower:
            h0, h1 = tower_equalizer(p, tower_levels(p, e, i, u))
            desc.tower_h0, desc.tower_h1 = h0.power(f), h1.power(f)
            if desc.tower_h0 != desc.group or not h1.is_trivial():
                raise AssertionError(f"tower analysis disagrees at p={p}, e={e}, i={i}, u={u}: {h0}, {h1}")
        out.append(desc)
    return out


def assemble_factors(p: int, factors: Sequence[FactorDescriptor]) -> AbelianPGroup:
    return direct_sum((fd.group for fd in factors), p)


# --------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class ValuationRecord:
    """Order known only through its p-adic valuation."""

    p: int
    valuation: int

    def to_json(self):
        return {"p": self.p, "order_valuation": self.valuation}


@dataclass
class KGroupResult:
    degree: int
    free_rank: int
    torsion: Union[AbelianPGroup, ValuationRecord]
    provenance: List[str] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def order_valuation(self):
        if isinstance(self.torsion, ValuationRecord):
            return self.torsion.valuation
        return self.torsion.order_valuation

    def to_json(self):
        if isinstance(self.torsion, ValuationRecord):
            tors, ov = None, self.torsion.valuation
        else:
            # torsion given explicitly; the valuation field is reserved for order-only results
            tors, ov = self.torsion.to_json(), None
        return {
            "degree": self.degree,
            "free_rank": self.free_rank,
            "torsion": tors,
            "order_valuation": ov,
            "provenance": list(self.provenance),
            "notes": list(self.notes),
        }


def k_perfectoid(p: int, e: int, r: int, k, cap: int = 2**22) -> Tuple[KGroupResult, KGroupResult]:
    """K_{2r-1} and K_{2r} of (k[x]/x^e, (x)) for a finite field k of characteristic p."""
    kp, f = _field_data(k)
    if kp != p:
        raise ValueError(f"{k} does not have characteristic {p}")
    if r < 1 or e < 1:
        raise ValueError("need r >= 1 and e >= 1")
    q = quotient_structure(p, e, r, k, cap=cap)
    prov = list(q.routes)
    notes = []
    factors = enumerate_gr_factors(p, e, r - 1, f)
    assembled = assemble_factors(p, factors)
    if assembled != q.group:
        raise AssertionError(f"graded factors give {assembled}, quotient gives {q.group}")
    prov.append("graded_factors")
    for fd in factors:
        if fd.boundary:
            notes.append(f"u={fd.u}: u*p^v_p(e) = e*r, the non-strict reading would give W_{fd.s} instead of W_{_vp(e, p)}")
    odd = KGroupResult(2 * r - 1, 0, q.group, prov, notes)
    even = KGroupResult(2 * r, 0, AbelianPGroup(p), ["graded_factors"], [])
    return odd, even


def k_odd_perfectoid(p: int, e: int, r: int, k, cap: int = 2**22) -> KGroupResult:
    return k_perfectoid(p, e, r, k, cap)[0]


def unit_group(e: int, k) -> AbelianPGroup:
    """(1 + x k[x]/x^e)^x by enumeration and Smith normal form."""
    p, _ = _field_data(k)
    q = k.cardinality
    if q ** (e - 1) > 2**20:
        raise CapExceeded("unit group too large to enumerate")
    if e <= 1:
        return AbelianPGroup(p)

    def mul(a, b):
        out = [0] * (e - 1)
        # a, b hold coefficients of x^1..x^{e-1}; the constant term is 1
        for i in range(e - 1):
            out[i] = k.add(a[i], b[i])
        for i in range(e - 1):
            if a[i]:
                for j in range(e - 2 - i):
                    if b[j]:
                        out[i + j + 1] = k.add(out[i + j + 1], k.mul(a[i], b[j]))
        return tuple(out)

    one = (0,) * (e - 1)
    gens = [tuple(a if j == d else 0 for j in range(e - 1)) for d in range(e - 1) for a in range(1, q)]
    G = generate_group(gens, mul, one)
    if G.size != q ** (e - 1):
        raise AssertionError("generators failed to span the unit group")
    return AbelianPGroup.from_presentation(p, G.presentation())


def h_fn(p: int, r: int, e: int, u: int) -> int:
    """p-typical length of the u-component of W_{re}(F_p)/V_e W_r(F_p)."""
    if u % p == 0:
        raise ValueError(f"u = {u} is divisible by {p}")
    return quotient_lengths(p, e, r).get(u, 0)


def rank_count(n: int, r: int, p: int) -> int:
    """#{m = u p^{s-1} : floor((m-1)/n) = r+1, n does not divide m}."""
    if n < 1 or r < 0:
        raise ValueError("need n >= 1 and r >= 0")
    bound = n * (r + 2)
    count = 0
    for u in j_p(p, bound):
        m = u
        while m <= bound:
            if (m - 1) // n == r + 1 and m % n:
                count += 1
            m *= p
    return count


# --------------------------------------------------------------------------
# complete discrete valuation rings


@dataclass(frozen=True)
class CdvrData:
    p: int
    f: int
    e: int
    dE: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.f < 1 or self.e < 1 or self.dE < 0:
            raise ValueError("need f >= 1, e >= 1, dE >= 0")

    @property
    def tame(self) -> bool:
        return self.e % self.p != 0

    def to_json(self):
        return {"p": self.p, "f": self.f, "e": self.e, "dE": self.dE}


def legendre(N: int, p: int) -> int:
    """v_p(N!) = sum_j floor(N / p^j)."""
    if N < 0:
        raise ValueError("factorial of a negative number")
    total, q = 0, p
    while q <= N:
        total += N // q
        q *= p
    return total


def closed_form_valuation(data: CdvrData, n: int, i: int) -> int:
    """e f v_p((ni)! (i!)^{n-2}) + f dE (ni - i)."""
    p = data.p
    fact = legendre(n * i, p) + (n - 2) * legendre(i, p)
    return data.e * data.f * fact + data.f * data.dE * (n * i - i)


def cdvr_k_groups(data: CdvrData, n: int, i: int) -> Tuple[KGroupResult, KGroupResult]:
    """(K_{2i+1}, K_{2i}) of (A[x]/x^n, (x)) for the CDVR A."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if i < 0:
        raise ValueError("i must be >= 0")
    rank = rank_count(n, i, data.p)
    if rank != n - 1:
        raise AssertionError(f"rank count {rank} != n - 1")
    odd = KGroupResult(2 * i + 1, n - 1, AbelianPGroup(data.p), ["rank_count"])
    even = KGroupResult(2 * i, 0, ValuationRecord(data.p, closed_form_valuation(data, n, i)), ["closed_form"])
    return odd, even


def recursive_terms(data: CdvrData, n: int, i: int):
    """Per (u, level) contributions to v_p|K_{2i}| and to the rank.

    Yields (u, level, torsion valuation, rank contribution).  For each u with
    s = s(p, n(i+1), u) >= 1 the levels k = s-1, ..., 0 have Nygaard offset
    a = i - floor((u p^k - 1)/n).  A level with a >= 1 and weight prime to n
    contributes f(dE + e k + e v_p(a)); a Frobenius level (u in n'J_p,
    u p^{v_p(n)} <= n(i+1), k >= v_p(n)) contributes f e v_p(n); a level with
    a = 0 is the rank boundary and contributes one free generator.
    """
    p, f, e, dE = data.p, data.f, data.e, data.dE
    top = n * (i + 1)
    v = _vp(n, p)
    npr = e_prime(n, p)
    for u in j_p(p, top):
        s = s_fn(p, top, u)
        phi = u % npr == 0 and u * p**v <= top
        if phi and v == 0:
            continue
        for k in range(s - 1, -1, -1):
            a = i - (u * p**k - 1) // n
            if phi and k >= v:
                yield u, k, (f * e * v if a >= 1 else 0), 0
            elif a >= 1:
                yield u, k, f * (dE + e * k + e * _vp(a, p)), 0
            else:
                yield u, k, 0, 1


def cdvr_even_recursive(data: CdvrData, n: int, i: int) -> int:
    """v_p |K_{2i}(A[x]/x^n, (x))| by aggregating tower contributions."""
    if n < 1 or i < 0:
        raise ValueError("need n >= 1 and i >= 0")
    if n > RECURSIVE_GRID or i > RECURSIVE_GRID:
        raise CapExceeded(f"recursive aggregation is validated for n, i <= {RECURSIVE_GRID}")
    total = rank = 0
    for _, _, t, r in recursive_terms(data, n, i):
        total += t
        rank += r
    if rank != n - 1:
        raise AssertionError(f"boundary levels give rank {rank}, expected {n - 1}")
    return total


class PrecisionError(ValueError):
    pass


def _pi_valuation(coeffs: Sequence[int], p: int, e: int, M: int):
    """v_pi of sum c_j pi^j (j < e) when p = pi^e * unit; None if below precision."""
    best = None
    for j, c in enumerate(coeffs):
        c %= p**M
        if c == 0:
            continue
        val = e * _vp(c, p) + j
        best = val if best is None else min(best, val)
    if best is None or best >= e * M:
        return None
    return best


def norm_valuation(y: Sequence[int], E: Sequence[int], p: int) -> int:
    """v_p of the determinant of multiplication by y on Z[x]/E (monic E, low to high)."""
    e = len(E) - 1
    cols = []
    for j in range(e):
        # y * x^j reduced mod E
        prod = [0] * (e + j) + [0] * len(y)
        for a, c in enumerate(y):
            prod[a + j] += c
        for d in range(len(prod) - 1, e - 1, -1):
            c = prod[d]
            if c:
                for t in range(e + 1):
                    prod[d - e + t] -= c * E[t]
        cols.append(prod[:e])
    det = _int_det([[cols[j][i] for j in range(e)] for i in range(e)])
    return _vp(det, p)


def _int_det(A):
    from fractions import Fraction

    n = len(A)
    M = [[Fraction(x) for x in row] for row in A]
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            det = -det
        det *= M[c][c]
        for r in range(c + 1, n):
            k = M[r][c] / M[c][c]
            if k:
                M[r] = [x - k * y for x, y in zip(M[r], M[c])]
    return int(det)


def cdvr_from_polynomial(p: int, f: int, E: Sequence[int], M: int = 8) -> CdvrData:
    """CdvrData from an Eisenstein polynomial E (coefficients low to high, monic).

    dE = v_pi(E'(pi)) is read off the pi-adic expansion: with p = pi^e * unit,
    v_pi(sum c_j pi^j) = min_j (e v_p(c_j) + j) for j < e.  The value is
    recomputed at precision M + 4 and must not move.
    """
    E = [int(c) for c in E]
    e = len(E) - 1
    if e < 1 or E[-1] != 1:
        raise ValueError("E must be monic of degree >= 1")
    if vp_int(E[0], p) != 1:
        raise ValueError("Eisenstein: constant term must have valuation exactly 1")
    if any(vp_int(c, p) < 1 for c in E[1:-1]):
        raise ValueError("Eisenstein: interior coefficients must be divisible by p")
    deriv = [j * E[j] for j in range(1, e + 1)]
    vals = [_pi_valuation(deriv, p, e, m) for m in (M, M + 4)]
    if vals[0] is None or vals[0] != vals[1]:
        raise PrecisionError(f"v_pi(E'(pi)) is not determined at precision {M}")
    dE = vals[0]
    if e % p and dE != e - 1:
        raise ValueError(f"tame polynomial with v_pi(E'(pi)) = {dE} != e - 1")
    return CdvrData(p, f, e, dE)


# --------------------------------------------------------------------------
# rings of integers


@dataclass
class IntegralResult:
    n: int
    i: int
    order: int
    rank: int
    valuations: Dict[int, int]

    def to_json(self):
        return {"order": self.order, "rank": self.rank}


def _primes_upto(N: int) -> List[int]:
    return [q for q in range(2, N + 1) if is_prime(q)]


def integral_agh(n: int, i: int, local: Sequence[CdvrData] = (), degree: int = 1) -> IntegralResult:
    """|K_{2i}| and rank K_{2i+1} for O_K[x]/x^n, assembled from local data.

    ``local`` lists CdvrData for the primes of O_K above each rational prime
    that is supplied; the e_j f_j above a supplied prime must sum to
    ``degree``.  Primes without data are treated as unramified.
    """
    if n < 1 or i < 0:
        raise ValueError("need n >= 1 and i >= 0")
    if degree < 1:
        raise ValueError("degree must be >= 1")
    by_prime: Dict[int, List[CdvrData]] = {}
    for d in local:
        by_prime.setdefault(d.p, []).append(d)
    for p, ds in by_prime.items():
        if sum(d.e * d.f for d in ds) != degree:
            raise ValueError(f"local degrees above {p} sum to {sum(d.e * d.f for d in ds)}, not {degree}")
    primes = sorted(set(_primes_upto(n * i)) | set(by_prime))
    vals = {}
    order = 1
    for p in primes:
        ds = by_prime.get(p, [CdvrData(p, degree, 1, 0)])
        v = sum(cdvr_k_groups(d, n, i)[1].order_valuation for d in ds)
        if v:
            vals[p] = v
            order *= p**v
    return IntegralResult(n, i, order, (n - 1) * degree, vals)


def agh_order(n: int, i: int) -> int:
    """(ni)! (i!)^{n-2} as an exact integer (n >= 1)."""
    num = math.factorial(n * i)
    if n >= 2:
        return num * math.factorial(i) ** (n - 2)
    return num // math.factorial(i)
