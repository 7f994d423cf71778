"""Exact coefficient rings: Z, Z/m, F_p, F_{p^f} and integer-style polynomial rings.

Ring descriptors are frozen dataclasses.  Every descriptor knows how to do
arithmetic on *payloads* (plain ints, or tuples for polynomials); the
:class:`RingElement` wrapper adds operator overloading and the descriptor
mismatch check on top.  Hot loops elsewhere (Witt vector arithmetic) work on
payloads directly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence, Tuple

from . import polys
from .polys import NonIntegral

__all__ = [
    "CapExceeded",
    "DescriptorMismatch",
    "FiniteField",
    "Integers",
    "IntegersMod",
    "MultivarPoly",
    "NonIntegral",
    "PrimeField",
    "RingElement",
    "arith",
    "default_modulus",
    "divide_exact",
    "enumerate_ring",
    "is_prime",
    "p_valuation",
    "ring_from_json",
]

DEFAULT_ENUM_CAP = 2**24
GF_TABLE_LIMIT = 2**16
GF_SIZE_LIMIT = 2**20


class DescriptorMismatch(TypeError):
    pass


class CapExceeded(RuntimeError):
    """A configured size cap would be exceeded."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def vp_int(n: int, p: int) -> float:
    """p-adic valuation of an integer; ``math.inf`` for 0."""
    if n == 0:
        return math.inf
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


# --------------------------------------------------------------------------
# F_p[x] helpers on coefficient lists (low degree first)


def _fp_trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _fp_mod(a, m, p):
    """Remainder of a modulo monic m over F_p."""
    a = [c % p for c in a]
    dm = len(m) - 1
    for i in range(len(a) - 1, dm - 1, -1):
        c = a[i]
        if c:
            for j in range(dm + 1):
                a[i - dm + j] = (a[i - dm + j] - c * m[j]) % p
    return _fp_trim(a[:dm])


def _monic_polys(p: int, degree: int):
    for low in itertools.product(range(p), repeat=degree):
        yield list(low) + [1]


def is_irreducible(modulus: Sequence[int], p: int) -> bool:
    """Exhaustive check: no monic factor of degree <= deg/2 divides ``modulus``."""
    m = [c % p for c in modulus]
    f = len(m) - 1
    if f < 1 or m[-1] != 1:
        return False
    if f == 1:
        return True
    if m[0] == 0:
        return False
    for deg in range(1, f // 2 + 1):
        for cand in _monic_polys(p, deg):
            if not _fp_mod(m, cand, p):
                return False
    return True


@lru_cache(maxsize=None)
def default_modulus(p: int, f: int) -> Tuple[int, ...]:
    """First monic irreducible of degree f over F_p, coefficients low to high.

    Candidates are scanned with the constant term varying slowest-last, i.e.
    by the integer encoding of the lower coefficients; the choice is fixed
    and reproducible.
    """
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if f < 1:
        raise ValueError("extension degree must be >= 1")
    if p**f > GF_SIZE_LIMIT:
        raise CapExceeded(f"GF({p}^{f}) exceeds the supported size 2^20")
    if f == 1:
        return (0, 1)
    for code in range(p**f):
        low = [(code // p**j) % p for j in range(f)]
        cand = low + [1]
        if cand[0] and is_irreducible(cand, p):
            return tuple(cand)
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


# --------------------------------------------------------------------------
# descriptors


class _Ring:
    """Shared conveniences; subclasses implement the payload arithmetic."""

    def __call__(self, value) -> "RingElement":
        return RingElement(self, self.coerce(value))

    def coerce(self, value):
        if isinstance(value, RingElement):
            if value.ring != self:
                raise DescriptorMismatch(f"{value.ring} vs {self}")
            return value.value
        if isinstance(value, int):
            return self.from_int(value)
        raise TypeError(f"cannot coerce {value!r} into {self}")

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def pow(self, a, k: int):
        if k < 0:
            raise ValueError("negative exponent")
        result = self.one()
        base = a
        while k:
            if k & 1:
                result = self.mul(result, base)
            k >>= 1
            if k:
                base = self.mul(base, base)
        return result

    def is_zero(self, a) -> bool:
        return a == self.zero()

    def scalar(self, n: int, a):
        return self.mul(self.from_int(n), a)

    @property
    def is_finite(self) -> bool:
        return self.cardinality is not None

    def elements(self):
        raise CapExceeded(f"{self} is infinite")


@dataclass(frozen=True)
class Integers(_Ring):
    def zero(self):
        return 0

    def one(self):
        return 1

    def from_int(self, n: int):
        return int(n)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def pow(self, a, k):
        return a**k

    characteristic = 0
    cardinality = None
    torsion_free = True

    def to_json(self):
        return {"ring": "Z"}

    def payload_to_json(self, a):
        return a

    def payload_from_json(self, x):
        return int(x)

    def lift(self, a) -> int:
        return a

    def __str__(self):
        return "Z"


@dataclass(frozen=True)
class IntegersMod(_Ring):
    m: int

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("IntegersMod requires m >= 2")

    def zero(self):
        return 0

    def one(self):
        return 1

    def from_int(self, n: int):
        return int(n) % self.m

    def add(self, a, b):
        return (a + b) % self.m

    def sub(self, a, b):
        return (a - b) % self.m

    def neg(self, a):
        return (-a) % self.m

    def mul(self, a, b):
        return (a * b) % self.m

    def pow(self, a, k):
        if k < 0:
            raise ValueError("negative exponent")
        return pow(a, k, self.m)

    @property
    def characteristic(self):
        return self.m

    @property
    def cardinality(self):
        return self.m

    torsion_free = False

    def elements(self):
        return iter(range(self.m))

    def to_json(self):
        return {"ring": "Zmod", "m": self.m}

    def payload_to_json(self, a):
        return a

    def payload_from_json(self, x):
        return int(x) % self.m

    def lift(self, a) -> int:
        return a

    def __str__(self):
        return f"Z/{self.m}"


@dataclass(frozen=True)
class PrimeField(IntegersMod):
    """F_p; arithmetic is exactly that of Z/p."""

    def __init__(self, p: int):
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        object.__setattr__(self, "m", p)

    @property
    def p(self) -> int:
        return self.m

    @property
    def f(self) -> int:
        return 1

    def to_json(self):
        return {"ring": "Fp", "p": self.m}

    def __str__(self):
        return f"F_{self.m}"

    def __repr__(self):
        return f"PrimeField({self.m})"


@dataclass(frozen=True)
class FiniteField(_Ring):
    """F_{p^f} = F_p[x]/(modulus).

    Payloads are ints encoding the coefficient list in base p (low degree
    first), so 0..q-1 enumerate the field and 0, 1 are the zero and one.
    """

    p: int
    f: int
    modulus: Tuple[int, ...] = field(default=None)

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.f < 1:
            raise ValueError("extension degree must be >= 1")
        if self.modulus is None:
            object.__setattr__(self, "modulus", default_modulus(self.p, self.f))
        mod = tuple(int(c) % self.p for c in self.modulus)
        object.__setattr__(self, "modulus", mod)
        if len(mod) != self.f + 1 or mod[-1] != 1:
            raise ValueError("modulus must be monic of degree f")
        if self.p**self.f > GF_SIZE_LIMIT:
            raise CapExceeded("finite fields are supported up to 2^20 elements")
        if not _irreducible_cached(mod, self.p):
            raise ValueError(f"modulus {mod} is reducible over F_{self.p}")

    @property
    def q(self) -> int:
        return self.p**self.f

    characteristic = property(lambda self: self.p)
    cardinality = property(lambda self: self.p**self.f)
    torsion_free = False

    # encoding ------------------------------------------------------------
    def encode(self, coeffs: Sequence[int]) -> int:
        coeffs = _fp_mod(list(coeffs), list(self.modulus), self.p) if len(coeffs) > self.f else coeffs
        out = 0
        for c in reversed(list(coeffs)):
            out = out * self.p + (c % self.p)
        return out

    def decode(self, a: int):
        out = []
        for _ in range(self.f):
            out.append(a % self.p)
            a //= self.p
        return out

    # arithmetic ----------------------------------------------------------
    def zero(self):
        return 0

    def one(self):
        return 1

    def from_int(self, n: int):
        return int(n) % self.p

    def add(self, a, b):
        if self.p == 2:
            return a ^ b
        return _gf_tables(self).add(a, b)

    def neg(self, a):
        if self.p == 2:
            return a
        return self.encode([(-c) % self.p for c in self.decode(a)])

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        return _gf_tables(self).mul(a, b)

    def scalar(self, n: int, a):
        n %= self.p
        if n == 0 or a == 0:
            return 0
        if n == 1:
            return a
        return self.encode([(n * c) % self.p for c in self.decode(a)])

    def pow(self, a, k):
        if k < 0:
            raise ValueError("negative exponent")
        return _gf_tables(self).pow(a, k)

    def elements(self):
        return iter(range(self.q))

    def to_json(self):
        return {"ring": "GF", "p": self.p, "f": self.f, "modulus": list(self.modulus)}

    def payload_to_json(self, a):
        return self.decode(a)

    def payload_from_json(self, x):
        if isinstance(x, int):
            return self.from_int(x)
        return self.encode([int(c) for c in x])

    def __str__(self):
        return f"GF({self.p}^{self.f})"


@lru_cache(maxsize=None)
def _irreducible_cached(mod, p):
    return is_irreducible(mod, p)


class _GFTables:
    """Log/antilog tables (small fields) or direct polynomial arithmetic."""

    def __init__(self, F: FiniteField):
        self.F = F
        self.p, self.f, self.q = F.p, F.f, F.p**F.f
        self.mod = list(F.modulus)
        self.log = None
        self.exp = None
        self.addt = None
        if self.q <= GF_TABLE_LIMIT:
            self._build()

    def _polymul(self, a, b):
        p = self.p
        da, db = self.F.decode(a), self.F.decode(b)
        prod = [0] * (2 * self.f - 1)
        for i, x in enumerate(da):
            if x:
                for j, y in enumerate(db):
                    prod[i + j] += x * y
        return self.F.encode(_fp_mod(prod, self.mod, p) + [0] * 0)

    def _build(self):
        q = self.q
        for g in range(2, q) if q > 2 else [1]:
            exp = [1] * (q - 1)
            x = 1
            ok = True
            for k in range(1, q - 1):
                x = self._polymul(x, g)
                if x == 1:
                    ok = False
                    break
                exp[k] = x
            if ok:
                break
        log = [None] * q
        for k, x in enumerate(exp):
            log[x] = k
        self.exp, self.log = exp, log
        if self.p != 2 and q <= 1024:
            self.addt = [[self._digit_add(a, b) for b in range(q)] for a in range(q)]

    def _digit_add(self, a, b):
        p = self.p
        out, place = 0, 1
        while a or b:
            out += ((a % p + b % p) % p) * place
            a //= p
            b //= p
            place *= p
        return out

    def add(self, a, b):
        if self.addt is not None:
            return self.addt[a][b]
        return self._digit_add(a, b)

    def mul(self, a, b):
        if a == 0 or b == 0:
            return 0
        if self.log is not None:
            return self.exp[(self.log[a] + self.log[b]) % (self.q - 1)]
        return self._polymul(a, b)

    def pow(self, a, k):
        if k == 0:
            return 1
        if a == 0:
            return 0
        if self.log is not None:
            return self.exp[(self.log[a] * k) % (self.q - 1)]
        result, base = 1, a
        while k:
            if k & 1:
                result = self._polymul(result, base)
            k >>= 1
            if k:
                base = self._polymul(base, base)
        return result


@lru_cache(maxsize=None)
def _gf_tables(F: FiniteField) -> _GFTables:
    return _GFTables(F)


@dataclass(frozen=True)
class MultivarPoly(_Ring):
    """Polynomials over ``base`` in the named variables.

    Payload: tuple of ``(exponent tuple, base payload)`` pairs sorted by total
    degree then lex, no zero coefficients.
    """

    base: _Ring
    vars: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))

    @property
    def nvars(self):
        return len(self.vars)

    def _canon(self, d: dict):
        b = self.base
        items = [(m, c) for m, c in d.items() if not b.is_zero(c)]
        items.sort(key=lambda t: polys.monomial_key(t[0]))
        return tuple(items)

    def zero(self):
        return ()

    def one(self):
        return self._canon({(0,) * self.nvars: self.base.one()})

    def from_int(self, n: int):
        return self._canon({(0,) * self.nvars: self.base.from_int(n)})

    def gen(self, name: str):
        i = self.vars.index(name)
        mono = [0] * self.nvars
        mono[i] = 1
        return self._canon({tuple(mono): self.base.one()})

    def from_zpoly(self, zp: dict):
        return self._canon({m: self.base.from_int(c) for m, c in zp.items()})

    def add(self, a, b):
        b_ = self.base
        d = dict(a)
        for m, c in b:
            d[m] = b_.add(d[m], c) if m in d else c
        return self._canon(d)

    def neg(self, a):
        return tuple((m, self.base.neg(c)) for m, c in a)

    def mul(self, a, b):
        b_ = self.base
        d = {}
        for ma, ca in a:
            for mb, cb in b:
                m = tuple(x + y for x, y in zip(ma, mb))
                t = b_.mul(ca, cb)
                d[m] = b_.add(d[m], t) if m in d else t
        return self._canon(d)

    @property
    def characteristic(self):
        return self.base.characteristic

    cardinality = None

    @property
    def torsion_free(self):
        return self.base.torsion_free

    def to_json(self):
        return {"ring": "Poly", "base": self.base.to_json(), "vars": list(self.vars)}

    def payload_to_json(self, a):
        return [[list(m), self.base.payload_to_json(c)] for m, c in a]

    def payload_from_json(self, x):
        return self._canon({tuple(m): self.base.payload_from_json(c) for m, c in x})

    def format(self, a):
        if self.base == Integers():
            return polys.to_str(dict(a), self.vars)
        return repr(a)

    def __str__(self):
        return f"{self.base}[{','.join(self.vars)}]"


def ring_from_json(d: dict):
    kind = d.get("ring")
    if kind == "Z":
        return Integers()
    if kind == "Zmod":
        return IntegersMod(int(d["m"]))
    if kind == "Fp":
        return PrimeField(int(d["p"]))
    if kind == "GF":
        p, f = int(d["p"]), int(d.get("f", 1))
        mod = d.get("modulus")
        if f == 1 and mod is None:
            return PrimeField(p)
        return FiniteField(p, f, tuple(mod) if mod is not None else None)
    if kind == "Poly":
        return MultivarPoly(ring_from_json(d["base"]), tuple(d["vars"]))
    raise ValueError(f"unknown ring descriptor {d!r}")


# --------------------------------------------------------------------------
# elements and the operation surface


@dataclass(frozen=True)
class RingElement:
    ring: _Ring
    value: object

    def _other(self, other):
        if isinstance(other, RingElement):
            if other.ring != self.ring:
                raise DescriptorMismatch(f"{self.ring} vs {other.ring}")
            return other.value
        if isinstance(other, int):
            return self.ring.from_int(other)
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else RingElement(self.ring, self.ring.add(self.value, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else RingElement(self.ring, self.ring.sub(self.value, o))

    def __rsub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else RingElement(self.ring, self.ring.sub(o, self.value))

    def __mul__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else RingElement(self.ring, self.ring.mul(self.value, o))

    __rmul__ = __mul__

    def __neg__(self):
        return RingElement(self.ring, self.ring.neg(self.value))

    def __pow__(self, k: int):
        return RingElement(self.ring, self.ring.pow(self.value, k))

    def is_zero(self) -> bool:
        return self.ring.is_zero(self.value)

    def to_json(self):
        return self.ring.payload_to_json(self.value)

    def __repr__(self):
        if isinstance(self.ring, MultivarPoly):
            return f"<{self.ring.format(self.value)} in {self.ring}>"
        if isinstance(self.ring, FiniteField):
            return f"<{self.ring.decode(self.value)} in {self.ring}>"
        return f"<{self.value} in {self.ring}>"


def arith(op: str, a: RingElement, b=None) -> RingElement:
    """Dispatch ``add/sub/mul/neg/pow`` on ring elements."""
    if op == "neg":
        return -a
    if op == "pow":
        if not isinstance(b, int) or b < 0:
            raise ValueError("pow takes a non-negative integer exponent")
        return a**b
    if not isinstance(b, RingElement) or b.ring != a.ring:
        raise DescriptorMismatch("operands must share a ring descriptor")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def divide_exact(a: RingElement, n: int) -> RingElement:
    """Return q with n*q = a over Z or Z[vars]; raise NonIntegral otherwise."""
    if n <= 0:
        raise ValueError("divisor must be a positive integer")
    R = a.ring
    if isinstance(R, Integers):
        q, r = divmod(a.value, n)
        if r:
            raise NonIntegral(f"{a.value} is not divisible by {n}")
        return RingElement(R, q)
    if isinstance(R, MultivarPoly) and isinstance(R.base, Integers):
        return RingElement(R, R._canon(polys.divide_exact(dict(a.value), n)))
    raise TypeError(f"divide_exact needs a torsion-free ring, got {R}")


def p_valuation(a, p: int):
    """Largest j with p^j | a (``math.inf`` for zero).

    Over Z/p^M the answer is read off the canonical representative; any other
    modulus is rejected.
    """
    if isinstance(a, int):
        return vp_int(a, p)
    R = a.ring
    if isinstance(R, Integers):
        return vp_int(a.value, p)
    if isinstance(R, IntegersMod):
        m, k = R.m, 0
        while m % p == 0:
            m //= p
            k += 1
        if m != 1:
            raise ValueError(f"modulus {R.m} is not a power of {p}")
        v = vp_int(a.value, p)
        return math.inf if v >= k else v
    raise TypeError(f"p_valuation is defined over Z and Z/p^M, not {R}")


def enumerate_ring(R: _Ring, cap: int = DEFAULT_ENUM_CAP) -> Iterator[RingElement]:
    if not R.is_finite:
        raise CapExceeded(f"{R} is infinite")
    if R.cardinality > cap:
        raise CapExceeded(f"|{R}| = {R.cardinality} exceeds cap {cap}")
    return (RingElement(R, x) for x in R.elements())
