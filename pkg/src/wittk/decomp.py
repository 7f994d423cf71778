"""p-typical decomposition of big Witt vectors and the quotients W_{re}/V_e W_r."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Tuple

from .rings import CapExceeded, FiniteField, IntegersMod, PrimeField, RingElement, vp_int
from .smith import AbelianPGroup, GeneratedGroup, direct_sum, generate_group
from .witt import (
    DEFAULT_WITT_ENUM_CAP,
    TruncationSet,
    WittVector,
    _compiled,
    frobenius,
    full,
    p_typical,
)


def j_p(p: int, bound: int) -> List[int]:
    """Integers in [1, bound] prime to p."""
    return [u for u in range(1, bound + 1) if u % p]


def s_fn(p: int, r: int, u: int) -> int:
    """Unique s >= 1 with u p^{s-1} <= r < u p^s, or 0 when u > r."""
    if u % p == 0:
        raise ValueError(f"u = {u} is divisible by p = {p}")
    if u < 1:
        raise ValueError("u must be positive")
    if u > r:
        return 0
    s, top = 1, u * p
    while top <= r:
        top *= p
        s += 1
    return s


def _check_p_local(R, p: int):
    if isinstance(R, FiniteField):
        ok = R.p == p
    elif isinstance(R, IntegersMod):
        m = R.m
        while m % p == 0:
            m //= p
        ok = m == 1
    else:
        ok = False
    if not ok:
        raise ValueError(f"{R} is not a ring in which all integers prime to {p} are units")


@dataclass
class DecompositionReport:
    p: int
    m: int
    components: List[Tuple[int, int, WittVector]]

    def key(self) -> tuple:
        return tuple(c.coeffs for _, _, c in self.components)

    def to_json(self):
        return {
            "p": self.p,
            "m": self.m,
            "components": [{"u": u, "length": s, "vector": w.to_json()} for u, s, w in self.components],
        }


def decompose(w: WittVector, p: int) -> DecompositionReport:
    """Send w in W_{full(m)}(R) to (F_u w restricted to lengths s(p,m,u))_u."""
    m = len(w.trunc)
    if w.trunc != full(m):
        raise ValueError("decompose expects a big Witt vector over full(m)")
    _check_p_local(w.ring, p)
    comps = []
    for u in j_p(p, m):
        s = s_fn(p, m, u)
        comps.append((u, s, frobenius(u, w, p_typical(p, s))))
    return DecompositionReport(p, m, comps)


def decompose_payload(m: int, p: int, R):
    """Fast path: function from coefficient tuples to the tuple of component tuples."""
    _check_p_local(R, p)
    T = full(m)
    fs = [_compiled(T.indices, "frob", R, u, p_typical(p, s_fn(p, m, u)).indices) for u in j_p(p, m)]
    return lambda coeffs: tuple(f(coeffs, ()) for f in fs)


@dataclass
class DecompositionInverse:
    """Inverse of decompose on a finite ring, from a stored forward table."""

    p: int
    m: int
    ring: object
    table: Dict[tuple, tuple] = field(repr=False)

    @classmethod
    def build(cls, m: int, p: int, R, cap: int = DEFAULT_WITT_ENUM_CAP):
        size = R.cardinality ** m
        if size > cap:
            raise CapExceeded(f"|W| = {size} exceeds cap {cap}")
        fwd = decompose_payload(m, p, R)
        table = {}
        for coeffs in itertools.product(list(R.elements()), repeat=m):
            table[fwd(coeffs)] = coeffs
        if len(table) != size:
            raise ValueError("decomposition is not injective")
        return cls(p, m, R, table)

    def __call__(self, report: DecompositionReport) -> WittVector:
        return WittVector(full(self.m), self.ring, self.table[report.key()])


# --------------------------------------------------------------------------
# W_{re}(k) / V_e W_r(k)


def e_prime(e: int, p: int) -> int:
    while e % p == 0:
        e //= p
    return e


def quotient_lengths(p: int, e: int, r: int) -> Dict[int, int]:
    """u -> p-typical length of the u-component of W_{re}/V_e W_r over a perfect field.

    With e = e' p^v, V_e = V_{e'} V_p^v carries the u/e'-component of W_r
    onto V_p^v of the u-component of W_{re}.  Over a perfect field V_p^v is
    injective, so the cokernel has length s(p,re,u) - s(p,r,u/e') when
    e' | u and s(p,re,u) otherwise.
    """
    if e < 1 or r < 1:
        raise ValueError("e and r must be positive")
    ep = e_prime(e, p)
    out = {}
    for u in j_p(p, r * e):
        top = s_fn(p, r * e, u)
        bottom = s_fn(p, r, u // ep) if u % ep == 0 else 0
        out[u] = top - bottom
    return out


def _field_degree(k) -> int:
    if isinstance(k, FiniteField):
        return k.f
    if isinstance(k, PrimeField):
        return 1
    raise TypeError(f"{k} is not a finite field")


def _field_char(k) -> int:
    return k.p


def quotient_formula(p: int, e: int, r: int, k) -> AbelianPGroup:
    f = _field_degree(k)
    if _field_char(k) != p:
        raise ValueError(f"{k} does not have characteristic {p}")
    return direct_sum((AbelianPGroup(p, (h,) * f) for h in quotient_lengths(p, e, r).values() if h), p)


@lru_cache(maxsize=64)
def big_witt_group(m: int, k) -> GeneratedGroup:
    """W_{full(m)}(k) presented on the generators V_d[a], d <= m, a in k^x."""
    T = full(m)
    add = _compiled(T.indices, "sum", k)
    zero = (k.zero(),) * m
    gens = [tuple(a if i == d - 1 else 0 for i in range(m)) for d in T for a in range(1, k.cardinality)]
    G = generate_group(gens, add, zero)
    if G.size != k.cardinality**m:
        raise AssertionError("V_d[a] failed to generate the Witt group")
    return G


def quotient_oracle(p: int, e: int, r: int, k, cap: int = DEFAULT_WITT_ENUM_CAP) -> AbelianPGroup:
    """Enumerate W_{re}(k), present it, kill the image of V_e, take the Smith form."""
    if _field_char(k) != p:
        raise ValueError(f"{k} does not have characteristic {p}")
    m = r * e
    if k.cardinality**m > cap:
        raise CapExceeded(f"|W_{m}({k})| = {k.cardinality ** m} exceeds cap {cap}")
    G = big_witt_group(m, k)
    # V_e is additive, so the images V_e V_d[a] = V_{ed}[a] of generators of W_r suffice
    image = [tuple(a if i == e * d - 1 else 0 for i in range(m)) for d in range(1, r + 1) for a in range(1, k.cardinality)]
    return AbelianPGroup.from_presentation(p, G.quotient(image))


@dataclass
class QuotientResult:
    group: AbelianPGroup
    routes: Tuple[str, ...]
    lengths: Dict[int, int]


def quotient_structure(p: int, e: int, r: int, k, cap: int = DEFAULT_WITT_ENUM_CAP, oracle: bool = True) -> QuotientResult:
    """W_{re}(k)/V_e W_r(k) by the formula route and, when within cap, the oracle.

    A disagreement between the routes raises AssertionError.
    """
    lengths = quotient_lengths(p, e, r)
    formula = quotient_formula(p, e, r, k)
    routes = ("formula",)
    if oracle and k.cardinality ** (r * e) <= cap:
        brute = quotient_oracle(p, e, r, k, cap)
        if brute != formula:
            raise AssertionError(f"formula {formula} != oracle {brute} at p={p}, e={e}, r={r}, k={k}")
        routes = ("formula", "oracle")
    return QuotientResult(formula, routes, lengths)
