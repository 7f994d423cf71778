"""Sparse multivariate polynomials with arbitrary-precision integer coefficients.

A polynomial is a plain ``dict`` mapping exponent tuples (one slot per
variable) to nonzero ``int`` coefficients.  Helpers here never mutate their
inputs.  This is the workhorse behind the universal Witt polynomials, so the
inner loops are kept deliberately flat.
"""

from __future__ import annotations

from typing import Dict, Iterable, Sequence, Tuple

Mono = Tuple[int, ...]
ZPoly = Dict[Mono, int]


class NonIntegral(ArithmeticError):
    """Raised when an exact division by an integer does not exist."""


def monomial_key(mono: Mono):
    """Total degree first, then lexicographic."""
    return (sum(mono), mono)


def const(c: int, nvars: int) -> ZPoly:
    return {(0,) * nvars: c} if c else {}


def var(i: int, nvars: int) -> ZPoly:
    mono = [0] * nvars
    mono[i] = 1
    return {tuple(mono): 1}


def add(a: ZPoly, b: ZPoly) -> ZPoly:
    if len(a) < len(b):
        a, b = b, a
    out = dict(a)
    for m, c in b.items():
        v = out.get(m, 0) + c
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def sub(a: ZPoly, b: ZPoly) -> ZPoly:
    out = dict(a)
    for m, c in b.items():
        v = out.get(m, 0) - c
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def scale(a: ZPoly, k: int) -> ZPoly:
    if not k:
        return {}
    return {m: c * k for m, c in a.items()}


def mul(a: ZPoly, b: ZPoly) -> ZPoly:
    if len(a) > len(b):
        a, b = b, a
    out: ZPoly = {}
    get = out.get
    bitems = list(b.items())
    for ma, ca in a.items():
        for mb, cb in bitems:
            m = tuple(x + y for x, y in zip(ma, mb))
            out[m] = get(m, 0) + ca * cb
    return {m: c for m, c in out.items() if c}


def power(a: ZPoly, k: int, nvars: int) -> ZPoly:
    if k < 0:
        raise ValueError("negative exponent")
    result = const(1, nvars)
    base = a
    while k:
        if k & 1:
            result = mul(result, base)
        k >>= 1
        if k:
            base = mul(base, base)
    return result


def divide_exact(a: ZPoly, n: int) -> ZPoly:
    """Divide every coefficient by ``n``; raise :class:`NonIntegral` otherwise."""
    if n == 0:
        raise ZeroDivisionError("division by zero")
    out = {}
    for m, c in a.items():
        q, r = divmod(c, n)
        if r:
            raise NonIntegral(f"coefficient {c} of {m} is not divisible by {n}")
        out[m] = q
    return out


def remap(a: ZPoly, positions: Sequence[int], nvars: int) -> ZPoly:
    """Move variable ``j`` of ``a`` to slot ``positions[j]`` of an ``nvars`` space."""
    out = {}
    for m, c in a.items():
        new = [0] * nvars
        for j, e in enumerate(m):
            if e:
                new[positions[j]] += e
        out[tuple(new)] = c
    return out


def reduce_mod(a: ZPoly, m: int) -> ZPoly:
    out = {}
    for mono, c in a.items():
        c %= m
        if c:
            out[mono] = c
    return out


def evaluate_int(a: ZPoly, values: Sequence[int]) -> int:
    total = 0
    for mono, c in a.items():
        term = c
        for x, e in zip(values, mono):
            if e:
                term *= x**e
        total += term
    return total


def sorted_terms(a: ZPoly) -> list:
    return sorted(a.items(), key=lambda t: monomial_key(t[0]))


def to_str(a: ZPoly, names: Iterable[str]) -> str:
    names = list(names)
    if not a:
        return "0"
    parts = []
    for mono, c in sorted_terms(a):
        factors = []
        for name, e in zip(names, mono):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        body = "*".join(factors)
        if not body:
            parts.append(str(c))
        elif c == 1:
            parts.append(body)
        elif c == -1:
            parts.append("-" + body)
        else:
            parts.append(f"{c}*{body}")
    return " + ".join(parts).replace("+ -", "- ")
