"""Big and p-typical Witt vectors over a divisor-closed truncation set.

Arithmetic over every ring goes through universal integer polynomials,
obtained once by ghost inversion and memoised per (operation, index).  The
ghost route (``ghost`` / ``from_ghost``) is kept for torsion-free rings and as
an independent oracle.
"""

from __future__ import annotations

import itertools
import json
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, Iterator, Sequence, Tuple

from . import polys
from .polys import NonIntegral
from .rings import (
    CapExceeded,
    DescriptorMismatch,
    FiniteField,
    Integers,
    IntegersMod,
    MultivarPoly,
    RingElement,
    ring_from_json,
)
from .rings import _gf_tables

MAX_FULL = 24
MAX_PTYPICAL = 8
DEFAULT_WITT_ENUM_CAP = 2**22
CACHE_VERSION = 1


def divisors(n: int) -> Tuple[int, ...]:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return tuple(small + large[::-1])


# --------------------------------------------------------------------------
# truncation sets


@dataclass(frozen=True)
class TruncationSet:
    indices: Tuple[int, ...]

    def __post_init__(self):
        idx = tuple(sorted(set(int(i) for i in self.indices)))
        if idx and idx[0] < 1:
            raise ValueError("truncation indices must be positive")
        s = set(idx)
        for n in idx:
            for d in divisors(n):
                if d not in s:
                    raise ValueError(f"truncation set not divisor-closed: {d} | {n}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def full(cls, m: int) -> "TruncationSet":
        return cls(tuple(range(1, m + 1)))

    @classmethod
    def p_typical(cls, p: int, length: int) -> "TruncationSet":
        return cls(tuple(p**j for j in range(length)))

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, n):
        return n in self._set

    @property
    def _set(self):
        return _index_set(self.indices)

    def position(self, n: int) -> int:
        return _positions(self.indices)[n]

    def divide(self, n: int) -> "TruncationSet":
        """{d : n*d in T}, the domain of F_n's target."""
        return TruncationSet(tuple(i // n for i in self.indices if i % n == 0))

    def dilate(self, n: int) -> Tuple[int, ...]:
        return tuple(n * i for i in self.indices)

    def issubset(self, other: "TruncationSet") -> bool:
        return self._set <= other._set

    def within_caps(self) -> bool:
        if not self.indices:
            return True
        if self.indices[-1] <= MAX_FULL:
            return True
        top = self.indices[-1]
        for p in _prime_factors(top):
            if all(_is_power_of(i, p) for i in self.indices) and len(self.indices) <= MAX_PTYPICAL:
                return True
        return False

    def check_caps(self):
        if not self.within_caps():
            raise CapExceeded(
                f"truncation set {list(self.indices)} exceeds caps "
                f"(full(m) with m <= {MAX_FULL}, p-typical length <= {MAX_PTYPICAL})"
            )

    def __repr__(self):
        return f"TruncationSet({list(self.indices)})"


@lru_cache(maxsize=None)
def _index_set(indices):
    return frozenset(indices)


@lru_cache(maxsize=None)
def _positions(indices):
    return {n: k for k, n in enumerate(indices)}


def _prime_factors(n):
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _is_power_of(n, p):
    while n % p == 0:
        n //= p
    return n == 1


def full(m: int) -> TruncationSet:
    return TruncationSet.full(m)


def p_typical(p: int, length: int) -> TruncationSet:
    return TruncationSet.p_typical(p, length)


# --------------------------------------------------------------------------
# universal polynomials
#
# Keys: ("sum", n) and ("prod", n) live in variables X_d, Y_d for d | n;
# ("neg", n) in X_d for d | n; ("frob", k, m) in X_d for d | k*m.

_MEMO: Dict[tuple, dict] = {}
_MEMO_LOCK = threading.Lock()


def poly_variables(key) -> Tuple[str, ...]:
    if key[0] in ("sum", "prod"):
        ds = divisors(key[1])
        return tuple(f"X{d}" for d in ds) + tuple(f"Y{d}" for d in ds)
    if key[0] == "neg":
        return tuple(f"X{d}" for d in divisors(key[1]))
    if key[0] == "frob":
        return tuple(f"X{d}" for d in divisors(key[1] * key[2]))
    raise KeyError(key)


def _ghost_poly(n: int, ds: Sequence[int], offset: int, nvars: int) -> dict:
    """sum_{d|n} d * V_d^{n/d} where V_d is variable offset + index of d in ds."""
    out = {}
    for j, d in enumerate(ds):
        if n % d == 0:
            mono = [0] * nvars
            mono[offset + j] = n // d
            out[tuple(mono)] = d
    return out


def _invert(n: int, target: dict, lower, nvars: int) -> dict:
    """Solve  sum_{d|n} d * y_d^{n/d} = target  for y_n, given y_d (d<n)."""
    acc = dict(target)
    for d in divisors(n)[:-1]:
        acc = polys.sub(acc, polys.scale(polys.power(lower(d), n // d, nvars), d))
    return polys.divide_exact(acc, n)


def universal_poly(key) -> dict:
    """Integer polynomial for one Witt coordinate; memoised."""
    key = tuple(key)
    hit = _MEMO.get(key)
    if hit is not None:
        return hit
    kind = key[0]
    if kind in ("sum", "prod", "neg"):
        n = key[1]
        if n > MAX_FULL and not any(_is_power_of(n, p) and _plen(n, p) <= MAX_PTYPICAL for p in _prime_factors(n)):
            raise CapExceeded(f"index {n} exceeds universal polynomial caps")
        ds = divisors(n)
        k = len(ds)
        nvars = 2 * k if kind != "neg" else k
        gx = _ghost_poly(n, ds, 0, nvars)
        if kind == "sum":
            target = polys.add(gx, _ghost_poly(n, ds, k, nvars))
        elif kind == "prod":
            target = polys.mul(gx, _ghost_poly(n, ds, k, nvars))
        else:
            target = polys.scale(gx, -1)

        def lower(d):
            sub = universal_poly((kind, d))
            sds = divisors(d)
            pos = [ds.index(e) for e in sds]
            if kind != "neg":
                pos = pos + [k + ds.index(e) for e in sds]
            return polys.remap(sub, pos, nvars)

        result = _invert(n, target, lower, nvars)
    elif kind == "frob":
        k, m = key[1], key[2]
        ds = divisors(k * m)
        nvars = len(ds)
        target = _ghost_poly(k * m, ds, 0, nvars)

        def lower(d):
            sub = universal_poly(("frob", k, d))
            return polys.remap(sub, [ds.index(e) for e in divisors(k * d)], nvars)

        result = _invert(m, target, lower, nvars)
    else:
        raise KeyError(key)
    with _MEMO_LOCK:
        _MEMO.setdefault(key, result)
    return _MEMO[key]


def _plen(n, p):
    k = 0
    while n > 1:
        n //= p
        k += 1
    return k + 1


def universal_polys(trunc: TruncationSet, op: str) -> Dict[int, dict]:
    """n -> integer polynomial for ``op`` in {"sum", "product"} over ``trunc``."""
    trunc.check_caps()
    kind = {"sum": "sum", "product": "prod", "prod": "prod", "neg": "neg"}[op]
    return {n: universal_poly((kind, n)) for n in trunc}


def save_cache(path) -> None:
    """Write the memo to a versioned JSON file."""
    entries = {
        json.dumps(list(k)): [[list(m), c] for m, c in polys.sorted_terms(v)]
        for k, v in sorted(_MEMO.items(), key=lambda kv: repr(kv[0]))
    }
    with open(path, "w") as fh:
        json.dump({"version": CACHE_VERSION, "entries": entries}, fh)


def load_cache(path) -> int:
    """Merge a cache file into the memo; returns the number of entries read.

    Files with a different version are ignored.
    """
    with open(path) as fh:
        data = json.load(fh)
    if data.get("version") != CACHE_VERSION:
        return 0
    count = 0
    for k, terms in data["entries"].items():
        key = tuple(json.loads(k))
        with _MEMO_LOCK:
            _MEMO.setdefault(key, {tuple(m): int(c) for m, c in terms})
        count += 1
    return count


def clear_cache() -> None:
    with _MEMO_LOCK:
        _MEMO.clear()
    _compiled.cache_clear()


# --------------------------------------------------------------------------
# compiled evaluation of universal polynomials on payload tuples


def _int_ring_modulus(R):
    if isinstance(R, Integers):
        return 0
    if isinstance(R, IntegersMod):
        return R.m
    return None


def _term_source(mono, names):
    parts = []
    for name, e in zip(names, mono):
        if e == 1:
            parts.append(name)
        elif e:
            parts.append(f"{name}**{e}")
    return "*".join(parts) if parts else "1"


def _compile_int(outputs, M):
    """outputs: list of (poly, variable source names).  Builds a lambda."""
    exprs = []
    for poly, names in outputs:
        if M:
            poly = polys.reduce_mod(poly, M)
        terms = []
        for mono, c in polys.sorted_terms(poly):
            body = _term_source(mono, names)
            terms.append(f"{c}*{body}" if c != 1 else body)
        expr = " + ".join(terms) if terms else "0"
        exprs.append(f"({expr}) % {M}" if M else f"({expr})")
    src = "lambda a, b: (" + "".join(e + ", " for e in exprs) + ")"
    return eval(compile(src, "<witt-universal>", "eval"))


def _compile_generic(outputs, R):
    """Evaluate term by term with the ring's own arithmetic."""
    char = R.characteristic
    prepared = []
    for poly, names in outputs:
        if char:
            poly = polys.reduce_mod(poly, char)
        terms = []
        for mono, c in poly.items():
            factors = [(names[j], e) for j, e in enumerate(mono) if e]
            terms.append((c, factors))
        prepared.append(terms)

    add, mul, pw, scalar, zero, one = R.add, R.mul, R.pow, R.scalar, R.zero(), R.one()

    def fetch(src, a, b):
        which, pos = src
        return a[pos] if which == "a" else b[pos]

    def run(a, b):
        out = []
        for terms in prepared:
            acc = zero
            for c, factors in terms:
                t = one
                for src, e in factors:
                    x = fetch(src, a, b)
                    t = mul(t, pw(x, e) if e > 1 else x)
                    if R.is_zero(t):
                        break
                else:
                    acc = add(acc, scalar(c, t))
            out.append(acc)
        return tuple(out)

    return run


def _compile_gf(outputs, F):
    """Log/antilog code generation for F_q with tables available.

    A term c * prod x_i^e_i becomes EXP[(LOG[c] + sum e_i LOG[x_i]) % (q-1)],
    guarded by the nonvanishing of its variables.
    """
    T = _gf_tables(F)
    if T.log is None:
        return None
    q1 = F.q - 1
    slots = {}
    lines = ["def _f(a, b):"]
    for poly, names in outputs:
        for name in names:
            if name not in slots:
                k = len(slots)
                slots[name] = k
                lines.append(f"    x{k} = {name}")
                lines.append(f"    l{k} = LOG[x{k}]")
    outs = []
    for j, (poly, names) in enumerate(outputs):
        poly = polys.reduce_mod(poly, F.p)
        lines.append(f"    o{j} = 0")
        for mono, c in polys.sorted_terms(poly):
            used = [(slots[names[i]], e) for i, e in enumerate(mono) if e]
            expo = " + ".join(([str(T.log[c])] if T.log[c] else []) + [f"{e}*l{k}" if e > 1 else f"l{k}" for k, e in used]) or "0"
            val = f"EXP[({expo}) % {q1}]"
            upd = f"o{j} ^= {val}" if F.p == 2 else f"o{j} = ADD(o{j}, {val})"
            guard = " and ".join(f"x{k}" for k, _ in used)
            lines.append(f"    if {guard}: {upd}" if guard else f"    {upd}")
        outs.append(f"o{j}")
    lines.append("    return (" + "".join(o + ", " for o in outs) + ")")
    env = {"LOG": T.log, "EXP": T.exp, "ADD": T.add}
    exec(compile("\n".join(lines), "<witt-gf>", "exec"), env)
    return env["_f"]


@lru_cache(maxsize=None)
def _compiled(indices: Tuple[int, ...], op: str, R, arg=None, targets=None):
    """Evaluator for op over truncation ``indices``.

    ``op`` is "sum"/"prod" (a, b -> T), "neg" (a -> T), or "frob" with
    ``arg = k`` (a over indices -> ``targets``, default T/k).
    """
    pos = _positions(indices)
    outputs = []
    if op in ("sum", "prod", "neg"):
        targets = indices
    elif targets is None:
        targets = tuple(i // arg for i in indices if i % arg == 0)
    for n in targets:
        if op == "frob":
            key = ("frob", arg, n)
            ds = divisors(arg * n)
            srcs = [("a", pos[d]) for d in ds]
        else:
            key = (op, n)
            ds = divisors(n)
            srcs = [("a", pos[d]) for d in ds]
            if op != "neg":
                srcs += [("b", pos[d]) for d in ds]
        outputs.append((universal_poly(key), srcs))
    M = _int_ring_modulus(R)
    if M is not None:
        named = [(poly, [f"{w}[{p}]" for w, p in srcs]) for poly, srcs in outputs]
        return _compile_int(named, M)
    if isinstance(R, FiniteField):
        named = [(poly, [f"{w}[{p}]" for w, p in srcs]) for poly, srcs in outputs]
        fast = _compile_gf(named, R)
        if fast is not None:
            return fast
    return _compile_generic(outputs, R)


# --------------------------------------------------------------------------
# vectors


@dataclass(frozen=True)
class WittVector:
    """Coefficients x_n (n in trunc) stored as ring payloads in index order."""

    trunc: TruncationSet
    ring: object
    coeffs: Tuple

    def __post_init__(self):
        if len(self.coeffs) != len(self.trunc):
            raise ValueError("one coefficient per truncation index is required")

    @classmethod
    def from_values(cls, trunc, ring, values):
        return cls(trunc, ring, tuple(ring.coerce(v) for v in values))

    @classmethod
    def zero(cls, trunc, ring):
        return cls(trunc, ring, (ring.zero(),) * len(trunc))

    @classmethod
    def one(cls, trunc, ring):
        return teichmuller(RingElement(ring, ring.one()), trunc)

    def coeff(self, n: int) -> RingElement:
        return RingElement(self.ring, self.coeffs[self.trunc.position(n)])

    def items(self):
        return [(n, RingElement(self.ring, c)) for n, c in zip(self.trunc, self.coeffs)]

    def _check(self, other):
        if not isinstance(other, WittVector):
            raise TypeError("expected a WittVector")
        if other.trunc != self.trunc or other.ring != self.ring:
            raise DescriptorMismatch("Witt vectors over different truncations or rings")

    def __add__(self, other):
        return witt_add(self, other)

    def __mul__(self, other):
        return witt_mul(self, other)

    def __neg__(self):
        return witt_neg(self)

    def __sub__(self, other):
        return witt_add(self, witt_neg(other))

    def scale(self, n: int) -> "WittVector":
        """n * w by double-and-add (negative n allowed)."""
        if n < 0:
            return witt_neg(self).scale(-n)
        result = WittVector.zero(self.trunc, self.ring)
        base = self
        while n:
            if n & 1:
                result = witt_add(result, base)
            n >>= 1
            if n:
                base = witt_add(base, base)
        return result

    def is_zero(self) -> bool:
        return all(self.ring.is_zero(c) for c in self.coeffs)

    def to_json(self):
        return {
            "trunc": list(self.trunc.indices),
            "ring": self.ring.to_json(),
            "coeffs": {str(n): self.ring.payload_to_json(c) for n, c in zip(self.trunc, self.coeffs)},
        }

    @classmethod
    def from_json(cls, d):
        trunc = TruncationSet(tuple(d["trunc"]))
        R = ring_from_json(d["ring"])
        raw = d["coeffs"]
        if isinstance(raw, list):
            vals = raw
        else:
            vals = [raw.get(str(n), 0) for n in trunc]
        return cls(trunc, R, tuple(R.payload_from_json(v) for v in vals))

    def __repr__(self):
        vals = [self.ring.payload_to_json(c) for c in self.coeffs]
        return f"W{list(self.trunc.indices)}({self.ring})[{', '.join(map(str, vals))}]"


@dataclass(frozen=True)
class GhostVector:
    trunc: TruncationSet
    ring: object
    components: Tuple

    def component(self, n: int) -> RingElement:
        return RingElement(self.ring, self.components[self.trunc.position(n)])

    def __add__(self, other):
        R = self.ring
        return GhostVector(self.trunc, R, tuple(R.add(a, b) for a, b in zip(self.components, other.components)))

    def __mul__(self, other):
        R = self.ring
        return GhostVector(self.trunc, R, tuple(R.mul(a, b) for a, b in zip(self.components, other.components)))

    def to_json(self):
        return {
            "trunc": list(self.trunc.indices),
            "ring": self.ring.to_json(),
            "components": {str(n): self.ring.payload_to_json(c) for n, c in zip(self.trunc, self.components)},
        }

    @classmethod
    def from_json(cls, d):
        trunc = TruncationSet(tuple(d["trunc"]))
        R = ring_from_json(d["ring"])
        raw = d["components"]
        vals = raw if isinstance(raw, list) else [raw.get(str(n), 0) for n in trunc]
        return cls(trunc, R, tuple(R.payload_from_json(v) for v in vals))


def ghost(w: WittVector) -> GhostVector:
    R = w.ring
    out = []
    for n in w.trunc:
        acc = R.zero()
        for d in divisors(n):
            acc = R.add(acc, R.scalar(d, R.pow(w.coeffs[w.trunc.position(d)], n // d)))
        out.append(acc)
    return GhostVector(w.trunc, R, tuple(out))


def _divide_payload(R, a, n):
    if isinstance(R, Integers):
        q, r = divmod(a, n)
        if r:
            raise NonIntegral(f"{a} is not divisible by {n}")
        return q
    if isinstance(R, MultivarPoly) and isinstance(R.base, Integers):
        return R._canon(polys.divide_exact(dict(a), n))
    raise TypeError(f"ghost inversion needs Z or Z[vars], got {R}")


def from_ghost(g: GhostVector) -> WittVector:
    """Recover the Witt vector with ghost ``g``, index by index in divisor order."""
    R = g.ring
    T = g.trunc
    xs: Dict[int, object] = {}
    for n in T:
        acc = g.components[T.position(n)]
        for d in divisors(n)[:-1]:
            acc = R.sub(acc, R.scalar(d, R.pow(xs[d], n // d)))
        xs[n] = _divide_payload(R, acc, n)
    return WittVector(T, R, tuple(xs[n] for n in T))


def witt_add(a: WittVector, b: WittVector) -> WittVector:
    a._check(b)
    a.trunc.check_caps()
    f = _compiled(a.trunc.indices, "sum", a.ring)
    return WittVector(a.trunc, a.ring, f(a.coeffs, b.coeffs))


def witt_mul(a: WittVector, b: WittVector) -> WittVector:
    a._check(b)
    a.trunc.check_caps()
    f = _compiled(a.trunc.indices, "prod", a.ring)
    return WittVector(a.trunc, a.ring, f(a.coeffs, b.coeffs))


def witt_neg(a: WittVector) -> WittVector:
    a.trunc.check_caps()
    f = _compiled(a.trunc.indices, "neg", a.ring)
    return WittVector(a.trunc, a.ring, f(a.coeffs, ()))


def witt_add_ghost(a: WittVector, b: WittVector) -> WittVector:
    """Ghost-route sum; torsion-free rings only."""
    a._check(b)
    return from_ghost(ghost(a) + ghost(b))


def witt_mul_ghost(a: WittVector, b: WittVector) -> WittVector:
    a._check(b)
    return from_ghost(ghost(a) * ghost(b))


def verschiebung(n: int, w: WittVector, target: TruncationSet = None) -> WittVector:
    """V_n: W_S -> W_T with y_{nd} = x_d and zeros elsewhere.

    The default target is the divisor closure of n*S.  The target must
    contain n*S and satisfy T/n = S so that V_n is well defined.
    """
    if n < 1:
        raise ValueError("n must be positive")
    S = w.trunc
    if target is None:
        closure = set()
        for i in S.dilate(n):
            closure.update(divisors(i))
        target = TruncationSet(tuple(closure))
    if not set(S.dilate(n)) <= set(target.indices):
        raise ValueError(f"n*S = {list(S.dilate(n))} is not contained in {list(target.indices)}")
    if target.divide(n) != S:
        raise ValueError(f"target/{n} = {list(target.divide(n).indices)} differs from the source truncation")
    R = w.ring
    out = []
    for t in target:
        out.append(w.coeffs[S.position(t // n)] if t % n == 0 else R.zero())
    return WittVector(target, R, tuple(out))


def frobenius(n: int, w: WittVector, target: TruncationSet = None) -> WittVector:
    """F_n: W_T -> W_{T/n}, characterised by ghost_m(F_n w) = ghost_{nm}(w).

    ``target`` (a truncation subset of T/n) evaluates only those coordinates,
    i.e. returns the restriction of F_n w.
    """
    if n < 1:
        raise ValueError("n must be positive")
    quot = w.trunc.divide(n)
    if target is None:
        target = quot
    elif not target.issubset(quot):
        raise ValueError(f"{target} is not contained in T/{n} = {quot}")
    if n == 1:
        return restriction(w, target)
    w.trunc.check_caps()
    f = _compiled(w.trunc.indices, "frob", w.ring, n, target.indices)
    return WittVector(target, w.ring, f(w.coeffs, ()))


def teichmuller(a: RingElement, trunc: TruncationSet) -> WittVector:
    R = a.ring
    vals = [a.value if n == 1 else R.zero() for n in trunc]
    return WittVector(trunc, R, tuple(vals))


def restriction(w: WittVector, sub: TruncationSet) -> WittVector:
    if not sub.issubset(w.trunc):
        raise ValueError(f"{sub} is not a subset of {w.trunc}")
    return WittVector(sub, w.ring, tuple(w.coeffs[w.trunc.position(n)] for n in sub))


def enumerate_witt(trunc: TruncationSet, R, cap: int = DEFAULT_WITT_ENUM_CAP) -> Iterator[WittVector]:
    if not R.is_finite:
        raise CapExceeded(f"{R} is infinite")
    size = R.cardinality ** len(trunc)
    if size > cap:
        raise CapExceeded(f"|W| = {size} exceeds cap {cap}")
    elems = list(R.elements())
    for coeffs in itertools.product(elems, repeat=len(trunc)):
        yield WittVector(trunc, R, coeffs)


def witt_cardinality(trunc: TruncationSet, R) -> int:
    return R.cardinality ** len(trunc)


def lift_to_integers(w: WittVector) -> WittVector:
    """Coefficientwise lift from Z/m or F_p to representatives in [0, m)."""
    if not isinstance(w.ring, IntegersMod):
        raise TypeError("only Z/m and F_p coefficients lift to Z")
    return WittVector(w.trunc, Integers(), tuple(int(c) for c in w.coeffs))


def reduce_from_integers(w: WittVector, R) -> WittVector:
    return WittVector(w.trunc, R, tuple(R.from_int(c) for c in w.coeffs))


def universal_poly_string(n: int, op: str) -> str:
    key = ({"product": "prod"}.get(op, op), n)
    return polys.to_str(universal_poly(key), poly_variables(key))
