"""Integer Smith normal form and finitely generated abelian groups.

Modules are presented as Z^g modulo the row span of a relation matrix.
Kernels, images and cokernels of integer matrices between such modules are
computed exactly; group structure is always read off a Smith form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Hashable, Iterable, List, Sequence, Tuple

Matrix = List[List[int]]


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(A: Sequence[Sequence[int]], B: Sequence[Sequence[int]]) -> Matrix:
    if not A:
        return []
    cols = len(B[0]) if B else 0
    return [[sum(a * B[k][j] for k, a in enumerate(row) if a) for j in range(cols)] for row in A]


def transpose(A: Sequence[Sequence[int]], ncols: int = None) -> Matrix:
    if not A:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*A)]


@dataclass
class SmithForm:
    """U @ A @ V = D with D diagonal (d_1 | d_2 | ...), U and V unimodular."""

    diag: List[int]
    U: Matrix
    V: Matrix
    Vinv: Matrix
    shape: Tuple[int, int]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diag if d)


def smith_form(A: Sequence[Sequence[int]], ncols: int = None) -> SmithForm:
    m = len(A)
    n = len(A[0]) if m else (ncols or 0)
    D = [list(map(int, row)) for row in A]
    U, V, Vi = identity(m), identity(n), identity(n)

    def row_add(dst, src, k):  # row_dst += k * row_src
        if k:
            D[dst] = [x + k * y for x, y in zip(D[dst], D[src])]
            U[dst] = [x + k * y for x, y in zip(U[dst], U[src])]

    def col_add(dst, src, k):  # col_dst += k * col_src
        if k:
            for row in D:
                row[dst] += k * row[src]
            for row in V:
                row[dst] += k * row[src]
            Vi[src] = [x - k * y for x, y in zip(Vi[src], Vi[dst])]

    def row_swap(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def col_swap(i, j):
        for row in D:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]
        Vi[i], Vi[j] = Vi[j], Vi[i]

    def pivot_to(t):
        # smallest nonzero entry of the trailing block; re-pivoting globally
        # after every reduction pass keeps entries from growing
        best = None
        for i in range(t, m):
            for j in range(t, n):
                x = D[i][j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            return False
        _, i, j = best
        row_swap(t, i)
        col_swap(t, j)
        return True

    t = 0
    while t < min(m, n):
        if not pivot_to(t):
            break
        while True:
            piv = D[t][t]
            for i in range(t + 1, m):
                if D[i][t]:
                    row_add(i, t, -(D[i][t] // piv))
            for j in range(t + 1, n):
                if D[t][j]:
                    col_add(j, t, -(D[t][j] // piv))
            if any(D[i][t] for i in range(t + 1, m)) or any(D[t][j] for j in range(t + 1, n)):
                pivot_to(t)
                continue
            bad = next(
                (i for i in range(t + 1, m) if any(D[i][j] % piv for j in range(t + 1, n))),
                None,
            )
            if bad is None:
                break
            row_add(t, bad, 1)
        if D[t][t] < 0:
            D[t] = [-x for x in D[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    diag = [D[k][k] for k in range(min(m, n))]
    return SmithForm(diag, U, V, Vi, (m, n))


def _prime_power(d: int):
    """(p, k) with d = p^k, or None."""
    if d < 2:
        return None
    q = next(f for f in range(2, d + 1) if d % f == 0)
    k = 0
    while d % q == 0:
        d //= q
        k += 1
    return (q, k) if d == 1 else None


def smith_form_mod(A: Sequence[Sequence[int]], ncols: int, d: int) -> Tuple[List[int], Matrix]:
    """Smith form over Z/d for a prime power d.

    Returns (diag, V) with U A V = diag(diag) mod d for some U invertible mod
    d and V invertible mod d; each diagonal entry is a divisor of d (d itself
    for a zero pivot).  Entries stay reduced mod d, so nothing grows.
    """
    pk = _prime_power(d)
    if pk is None:
        raise ValueError(f"{d} is not a prime power")
    p = pk[0]
    m, n = len(A), ncols
    D = [[int(x) % d for x in row] for row in A]
    V = identity(n)

    def val(x):
        v = 0
        while x % p == 0:
            x //= p
            v += 1
        return v

    diag = []
    for t in range(min(m, n)):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                x = D[i][j]
                if x:
                    v = val(x)
                    if best is None or v < best[0]:
                        best = (v, i, j)
                        if v == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None:
            diag.extend([d] * (min(m, n) - t))
            break
        v, i, j = best
        D[t], D[i] = D[i], D[t]
        for row in D:
            row[t], row[j] = row[j], row[t]
        for row in V:
            row[t], row[j] = row[j], row[t]
        g = p**v
        unit = D[t][t] // g
        inv = pow(unit, -1, d)
        D[t] = [(x * inv) % d for x in D[t]]  # row scaling by a unit
        for i in range(t + 1, m):
            c = D[i][t]
            if c:
                q = c // g
                D[i] = [(x - q * y) % d for x, y in zip(D[i], D[t])]
        for j in range(t + 1, n):
            c = D[t][j]
            if c:
                q = c // g
                for row in D:
                    row[j] = (row[j] - q * row[t]) % d
                for row in V:
                    row[j] = (row[j] - q * row[t]) % d
        diag.append(g)
    return diag, V


def invariant_factors(A: Sequence[Sequence[int]], ncols: int = None) -> List[int]:
    return smith_form(A, ncols).diag


# --------------------------------------------------------------------------
# lattices


def integer_kernel(A: Sequence[Sequence[int]], ncols: int) -> Matrix:
    """Basis (as rows) of {x in Z^ncols : A x = 0}."""
    if not A:
        return identity(ncols)
    S = smith_form(A, ncols)
    r = S.rank
    return [[S.V[i][j] for i in range(ncols)] for j in range(r, ncols)]


def _egcd(a: int, b: int):
    """(g, x, y) with g = gcd(a, b) = x a + y b, g >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def hnf_mod(rows: Iterable[Sequence[int]], n: int, d: int) -> Matrix:
    """Upper triangular basis of span(rows) + d Z^n with entries reduced mod d.

    Reducing mod d is harmless because every d e_j lies in the lattice; the
    pivot of column j is gcd(d, column entries), so it divides d.
    """
    work = [[x % d for x in r] for r in rows]
    basis = []
    for j in range(n):
        piv = [0] * n
        piv[j] = d
        rest = []
        for r in work:
            if r[j] == 0:
                rest.append(r)
                continue
            a, b = piv[j], r[j]
            g, x, y = _egcd(a, b)
            new_piv = [(x * u + y * v) % d for u, v in zip(piv, r)]
            new_piv[j] = g
            other = [((b // g) * u - (a // g) * v) % d for u, v in zip(piv, r)]
            other[j] = 0
            piv = new_piv
            if any(other):
                rest.append(other)
        basis.append(piv)
        work = rest
    return basis


@dataclass
class Lattice:
    """Sublattice of Z^n with a basis and exact coordinates."""

    n: int
    basis: Matrix
    _V: Matrix = field(repr=False, default=None)
    _d: List[int] = field(repr=False, default=None)
    triangular: bool = False

    @classmethod
    def span(cls, rows: Iterable[Sequence[int]], n: int, modulus: int = None) -> "Lattice":
        """Lattice spanned by ``rows`` (and by modulus * Z^n when given)."""
        if modulus:
            return cls(n, hnf_mod(rows, n, modulus), triangular=True)
        rows = [list(r) for r in rows if any(r)]
        if not rows:
            return cls(n, [], identity(n), [])
        S = smith_form(rows, n)
        d = [x for x in S.diag if x]
        basis = [[d[i] * x for x in S.Vinv[i]] for i in range(len(d))]
        return cls(n, basis, S.V, d)

    @property
    def rank(self) -> int:
        return len(self.basis)

    def coordinates(self, y: Sequence[int]) -> List[int]:
        if self.triangular:
            y = list(y)
            coords = []
            for j, b in enumerate(self.basis):
                q, r = divmod(y[j], b[j])
                if r:
                    raise ValueError("vector is not in the lattice")
                coords.append(q)
                if q:
                    y = [u - q * v for u, v in zip(y, b)]
            return coords
        yV = [sum(y[k] * self._V[k][j] for k in range(self.n)) for j in range(self.n)]
        coords = []
        for i, d in enumerate(self._d):
            q, r = divmod(yV[i], d)
            if r:
                raise ValueError("vector is not in the lattice")
            coords.append(q)
        if any(yV[len(self._d):]):
            raise ValueError("vector is not in the lattice")
        return coords


# --------------------------------------------------------------------------
# presented modules


@dataclass(frozen=True)
class Presentation:
    """Z^gens / (row span of rels)."""

    gens: int
    rels: Tuple[Tuple[int, ...], ...] = ()

    @classmethod
    def cyclic(cls, orders: Sequence[int]) -> "Presentation":
        """Direct sum of Z/a_i (a_i = 0 gives a free summand)."""
        g = len(orders)
        rels = tuple(tuple(a if j == i else 0 for j in range(g)) for i, a in enumerate(orders) if a)
        return cls(g, rels)

    def invariants(self) -> List[int]:
        """Invariant factors with units dropped and free summands as 0."""
        if self.gens == 0:
            return []
        diag = invariant_factors([list(r) for r in self.rels], self.gens) if self.rels else []
        diag = diag + [0] * (self.gens - len(diag))
        return [d for d in diag if d != 1]

    def order(self):
        inv = self.invariants()
        if any(d == 0 for d in inv):
            return None
        out = 1
        for d in inv:
            out *= d
        return out


def _check_matrix(M, src: Presentation, tgt: Presentation):
    if len(M) != tgt.gens or any(len(row) != src.gens for row in M):
        raise ValueError("matrix shape does not match the presentations")


def exponent(P: Presentation):
    """Least d > 0 with d P = 0, or None when P is infinite."""
    inv = P.invariants()
    if any(x == 0 for x in inv):
        return None
    return max(inv, default=1)


def preimage_lattice(M: Sequence[Sequence[int]], src: Presentation, tgt: Presentation) -> Lattice:
    """{x in Z^src.gens : M x lies in the relation lattice of tgt}, plus src relations."""
    _check_matrix(M, src, tgt)
    n, r = src.gens, len(tgt.rels)
    d = exponent(tgt)
    if d is not None:
        return _preimage_mod(M, src, tgt, d)
    block = [list(M[i]) + [-tgt.rels[k][i] for k in range(r)] for i in range(tgt.gens)]
    ker = integer_kernel(block, n + r) if tgt.gens else identity(n + r)
    rows = [v[:n] for v in ker] + [list(x) for x in src.rels]
    return Lattice.span(rows, n)


def _preimage_mod(M, src: Presentation, tgt: Presentation, d: int) -> Lattice:
    """Finite target of exponent d: the preimage contains d Z^n, so work mod d.

    Diagonalise the target as sum Z/g_j (y -> yV), rescale each condition
    to modulus d, then solve A x = 0 mod d through a Smith form of A.
    """
    n = src.gens
    if d == 1 or tgt.gens == 0:
        return Lattice.span([list(r) for r in identity(n)], n, 1) if n else Lattice(n, [], triangular=True)
    H = hnf_mod([list(r) for r in tgt.rels], tgt.gens, d)
    modular = _prime_power(d) is not None
    if modular:
        g, SV = smith_form_mod(H, tgt.gens, d)
    else:
        S = smith_form(H)
        g, SV = S.diag, S.V
    m = tgt.gens
    # condition j: sum_i (V^T M)[j][i] x_i = 0 mod g_j
    A = []
    for j in range(m):
        scale = d // g[j]
        row = [sum(SV[k][j] * M[k][i] for k in range(m)) * scale % d for i in range(n)]
        A.append(row)
    gens = []
    if any(any(row) for row in A):
        if modular:
            sd, TV = smith_form_mod(A, n, d)
        else:
            T = smith_form(A, n)
            sd, TV = T.diag, T.V
        for i in range(n):
            s_i = sd[i] if i < len(sd) else 0
            step = d // math.gcd(s_i, d)
            gens.append([(step * TV[k][i]) % d for k in range(n)])
    else:
        gens = identity(n)
    gens += [list(x) for x in src.rels]
    return Lattice.span(gens, n, d)


def kernel(M, src: Presentation, tgt: Presentation) -> Tuple[Presentation, Matrix]:
    """Presentation of ker(M) and its generators as vectors in Z^src.gens."""
    L = preimage_lattice(M, src, tgt)
    rels = tuple(tuple(L.coordinates(r)) for r in src.rels)
    return Presentation(L.rank, rels), L.basis


def image(M, src: Presentation, tgt: Presentation) -> Presentation:
    L = preimage_lattice(M, src, tgt)
    return Presentation(src.gens, tuple(tuple(r) for r in L.basis))


def cokernel(M, src: Presentation, tgt: Presentation) -> Presentation:
    _check_matrix(M, src, tgt)
    cols = [tuple(M[i][j] for i in range(tgt.gens)) for j in range(src.gens)]
    return Presentation(tgt.gens, tgt.rels + tuple(c for c in cols if any(c)))


def is_well_defined(M, src: Presentation, tgt: Presentation) -> bool:
    L = preimage_lattice(M, Presentation(src.gens), tgt)
    try:
        for r in src.rels:
            L.coordinates(list(r))
    except ValueError:
        return False
    return True


# --------------------------------------------------------------------------
# canonical p-groups


@dataclass(frozen=True)
class AbelianPGroup:
    """(Z/p^{a_1} + ... + Z/p^{a_k}) + Z^free_rank with a_1 >= ... >= a_k >= 1."""

    p: int
    exponents: Tuple[int, ...] = ()
    free_rank: int = 0

    def __post_init__(self):
        exps = tuple(sorted((int(a) for a in self.exponents if a), reverse=True))
        if any(a < 0 for a in exps):
            raise ValueError("exponents must be non-negative")
        if self.free_rank < 0:
            raise ValueError("free rank must be non-negative")
        object.__setattr__(self, "exponents", exps)

    @classmethod
    def trivial(cls, p: int) -> "AbelianPGroup":
        return cls(p)

    @classmethod
    def from_invariants(cls, p: int, invariants: Iterable[int]) -> "AbelianPGroup":
        exps, free = [], 0
        for d in invariants:
            d = abs(int(d))
            if d == 0:
                free += 1
                continue
            k = 0
            while d % p == 0:
                d //= p
                k += 1
            if d != 1:
                raise ValueError(f"invariant factor is not a power of {p}")
            exps.append(k)
        return cls(p, tuple(exps), free)

    @classmethod
    def from_presentation(cls, p: int, P: Presentation, modulus: int = None) -> "AbelianPGroup":
        """Canonical form of P; ``modulus`` (a power of p) must kill P and enables mod-d elimination."""
        if modulus is None:
            return cls.from_invariants(p, P.invariants())
        if P.gens == 0:
            return cls(p)
        H = hnf_mod([list(r) for r in P.rels], P.gens, modulus)
        diag, _ = smith_form_mod(H, P.gens, modulus)
        return cls.from_invariants(p, diag)

    @property
    def order_valuation(self):
        return None if self.free_rank else sum(self.exponents)

    @property
    def order(self):
        v = self.order_valuation
        return None if v is None else self.p**v

    def is_trivial(self) -> bool:
        return not self.exponents and not self.free_rank

    def __add__(self, other: "AbelianPGroup") -> "AbelianPGroup":
        if other.p != self.p:
            raise ValueError("direct sum of groups for different primes")
        return AbelianPGroup(self.p, self.exponents + other.exponents, self.free_rank + other.free_rank)

    def power(self, k: int) -> "AbelianPGroup":
        return AbelianPGroup(self.p, self.exponents * k, self.free_rank * k)

    def to_json(self):
        return {"p": self.p, "exponents": list(self.exponents), "free_rank": self.free_rank}

    @classmethod
    def from_json(cls, d):
        return cls(int(d["p"]), tuple(d.get("exponents", ())), int(d.get("free_rank", 0)))

    def __str__(self):
        parts = [f"Z/{self.p}^{a}" if a > 1 else f"Z/{self.p}" for a in self.exponents]
        parts += ["Z"] * self.free_rank
        return " + ".join(parts) if parts else "0"


def direct_sum(groups: Iterable[AbelianPGroup], p: int) -> AbelianPGroup:
    out = AbelianPGroup(p)
    for g in groups:
        out = out + g
    return out


# --------------------------------------------------------------------------
# groups generated inside an ambient finite group


@dataclass
class GeneratedGroup:
    """Presentation of the subgroup spanned by ``generators``.

    ``coords`` maps each element of the subgroup to one integer combination
    of the generators producing it; ``rels`` is a complete set of relations.
    """

    generators: list
    coords: Dict[Hashable, Tuple[int, ...]]
    rels: List[Tuple[int, ...]]

    @property
    def size(self) -> int:
        return len(self.coords)

    def presentation(self) -> Presentation:
        return Presentation(len(self.generators), tuple(self.rels))

    def quotient(self, subgroup_elements: Iterable[Hashable]) -> Presentation:
        """The group modulo the subgroup generated by the given elements."""
        extra = tuple(self.coords[x] for x in subgroup_elements)
        return Presentation(len(self.generators), tuple(self.rels) + tuple(e for e in extra if any(e)))


def generate_group(generators: Sequence[Hashable], add: Callable, zero: Hashable, cap: int = 2**24) -> GeneratedGroup:
    """Incremental closure.

    For generator g_j let c be least with c*g_j in the span S of g_1..g_{j-1};
    record c*e_j - coords(c*g_j) and enlarge S by the cosets t*g_j + S, t < c.
    The recorded relations present the closure exactly.
    """
    k = len(generators)
    coords: Dict[Hashable, Tuple[int, ...]] = {zero: (0,) * k}
    rels: List[Tuple[int, ...]] = []
    for j, g in enumerate(generators):
        multiples = [zero]
        x = g
        while x not in coords:
            multiples.append(x)
            x = add(x, g)
            if len(multiples) * len(coords) > cap:
                from .rings import CapExceeded

                raise CapExceeded(f"generated group exceeds {cap} elements")
        c = len(multiples)
        base = coords[x]
        rel = [-a for a in base]
        rel[j] += c
        rels.append(tuple(rel))
        if c == 1:
            continue
        old = list(coords.items())
        for t in range(1, c):
            m = multiples[t]
            for y, cy in old:
                z = add(m, y)
                cz = list(cy)
                cz[j] += t
                coords[z] = tuple(cz)
    return GeneratedGroup(list(generators), coords, rels)
