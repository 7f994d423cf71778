"""Inverse towers at finite precision and the theta complexes computing TR.

A stage is a module over Z/p^M presented as Z^g modulo its relation rows and
p^M Z^g.  Limits are read off stable images: Y_n is the image of X_{n+W}
in X_n, and once |Y_n| stops changing the limit is Y_n.  Stages are finite,
so image chains always stabilize (Mittag-Leffler) and lim^1 vanishes; it is
still computed, as the cokernel of 1 - shift on the truncated product.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

from .rings import FiniteField, PrimeField, is_prime
from .smith import AbelianPGroup, Lattice, Presentation, identity, kernel, matmul, preimage_lattice


class NoStabilization(RuntimeError):
    pass


@dataclass
class Tower:
    """Stages X_0, X_1, ... with maps[n]: X_{n+1} -> X_n (g_n x g_{n+1} integer matrices)."""

    p: int
    precision: int
    stages: List[Presentation]
    maps: List[List[List[int]]]

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if len(self.maps) != len(self.stages) - 1:
            raise ValueError("need exactly one map between consecutive stages")
        q = self.p**self.precision
        for n, M in enumerate(self.maps):
            g_lo, g_hi = self.stages[n].gens, self.stages[n + 1].gens
            if len(M) != g_lo or any(len(row) != g_hi for row in M):
                raise ValueError(f"map {n + 1} -> {n} has the wrong shape")
        self.maps = [[[x % q for x in row] for row in M] for M in self.maps]

    def module(self, n: int) -> Presentation:
        """Stage n with the precision relations p^M e_j adjoined."""
        X = self.stages[n]
        q = self.p**self.precision
        extra = tuple(tuple(q if j == k else 0 for j in range(X.gens)) for k in range(X.gens))
        return Presentation(X.gens, tuple(X.rels) + extra)

    def composite(self, n: int, k: int):
        """Matrix of X_{n+k} -> X_n, entries reduced mod p^M."""
        q = self.p**self.precision
        C = identity(self.stages[n].gens)
        for j in range(n, n + k):
            C = [[x % q for x in row] for row in matmul(C, self.maps[j])]
        return C

    def to_json(self):
        return {
            "p": self.p,
            "precision": self.precision,
            "stages": [{"gens": X.gens, "relations": [list(r) for r in X.rels]} for X in self.stages],
            "maps": [[list(row) for row in M] for M in self.maps],
        }

    @classmethod
    def from_json(cls, d):
        stages = [Presentation(int(s["gens"]), tuple(tuple(r) for r in s.get("relations", []))) for s in d["stages"]]
        return cls(int(d["p"]), int(d["precision"]), stages, [[list(r) for r in M] for M in d["maps"]])


def _group(p: int, P: Presentation, M: int) -> AbelianPGroup:
    # every module here is killed by p^M, so eliminate mod p^M
    return AbelianPGroup.from_presentation(p, P, p**M)


def image_presentation(C, src_gens: int, tgt: Presentation) -> Presentation:
    """The subgroup of tgt spanned by the columns of C, as Z^src_gens / preimage."""
    L = preimage_lattice(C, Presentation(src_gens), tgt)
    return Presentation(src_gens, tuple(tuple(r) for r in L.basis))


def _order(T: Tower, P: Presentation) -> int:
    return _group(T.p, P, T.precision).order


@dataclass
class LimitData:
    lim: AbelianPGroup
    lim1: AbelianPGroup
    stable_from: int
    image_orders: List[int] = field(default_factory=list)


def stable_images(T: Tower, window: int):
    """(n, order of image X_{n+window} -> X_n, composite matrix) for each usable n.

    Raises NoStabilization when some image chain still moves in the second
    half of the window.
    """
    N = len(T.stages)
    if N <= window + 1:
        raise NoStabilization(f"tower has {N} stages, the window needs more than {window + 1}")
    out = []
    for n in range(N - window):
        # images shrink as k grows, so equal orders at both ends pin the chain
        half, last = window // 2, N - 1 - n
        C_half = T.composite(n, half)
        C_last = matmul(C_half, T.composite(n + half, last - half)) if last > half else C_half
        lo = _order(T, image_presentation(C_half, T.stages[n + half].gens, T.module(n)))
        hi = _order(T, image_presentation(C_last, T.stages[n + last].gens, T.module(n)))
        if lo != hi:
            raise NoStabilization(f"image chain at stage {n} does not stabilize within the window")
        out.append((n, lo, T.composite(n, window)))
    return out


def lim_tower(T: Tower, window: int = None) -> LimitData:
    """lim and lim^1 at precision M."""
    W = window if window is not None else 4 * T.precision
    imgs = stable_images(T, W)
    orders = [o for _, o, _ in imgs]
    # surjective Y-transitions with equal orders are isomorphisms
    n0 = len(orders) - 1
    while n0 > 0 and orders[n0 - 1] == orders[n0]:
        n0 -= 1
    if n0 >= len(orders) - 1:
        raise NoStabilization("stable images keep growing through the window")
    _, _, C = imgs[n0]
    lim = _group(T.p, image_presentation(C, T.stages[n0 + W].gens, T.module(n0)), T.precision)
    lim1 = _lim1_truncated(T, n0 + 1, W)
    return LimitData(lim, lim1, n0, orders)


def _lim1_truncated(T: Tower, L: int, W: int) -> AbelianPGroup:
    """coker of (x_n) -> (x_n - f(x_{n+1})) from prod_{n<=L} to prod_{n<L}, top stage = Y_L."""
    gens = [T.stages[n].gens for n in range(L)] + [T.stages[L + W].gens]
    mods = [T.module(n) for n in range(L)]
    tgt_g = sum(X.gens for X in mods)
    src_g = sum(gens)
    M = [[0] * src_g for _ in range(tgt_g)]
    roff = [sum(X.gens for X in mods[:n]) for n in range(L)]
    coff = [sum(gens[:n]) for n in range(L + 1)]
    for n in range(L):
        for a in range(mods[n].gens):
            M[roff[n] + a][coff[n] + a] += 1
        F = T.maps[n] if n < L - 1 else T.composite(n, W + 1)
        for a in range(len(F)):
            for b in range(len(F[a])):
                M[roff[n] + a][coff[n + 1] + b] -= F[a][b]
    rels = []
    for n, X in enumerate(mods):
        for r in X.rels:
            rels.append(tuple([0] * roff[n] + list(r) + [0] * (tgt_g - roff[n] - X.gens)))
    cols = [tuple(M[i][j] for i in range(tgt_g)) for j in range(src_g)]
    return _group(T.p, Presentation(tgt_g, tuple(rels) + tuple(c for c in cols if any(c))), T.precision)


# --------------------------------------------------------------------------
# theta complexes for perfect fields


def _field_data(k):
    if isinstance(k, PrimeField):
        return k.p, 1
    if isinstance(k, FiniteField):
        return k.p, k.f
    raise TypeError(f"{k} is not a finite field")


@dataclass
class ThetaComplex:
    H0: AbelianPGroup
    H1: AbelianPGroup
    H2: AbelianPGroup
    model: str
    i: int
    precision: int

    def is_zero(self) -> bool:
        return self.H0.is_trivial() and self.H1.is_trivial() and self.H2.is_trivial()

    def to_json(self):
        return {
            "model": self.model,
            "i": self.i,
            "precision": self.precision,
            "H0": self.H0.to_json(),
            "H1": self.H1.to_json(),
            "H2": self.H2.to_json(),
        }


def theta_tower(k, i: int, M: int, stages: int) -> Tower:
    """A_inf/(d_n)^i for n = 1..stages with A_inf = W(k), d = p: (Z/p^{min(ni, M)})^f, reductions."""
    p, f = _field_data(k)
    X = [Presentation.cyclic([p ** min(n * i, M)] * f) for n in range(1, stages + 1)]
    maps = [identity(f) for _ in range(stages - 1)]
    return Tower(p, M, X, maps)


def theta_infty(k, i: int, M: int, window: int = None) -> ThetaComplex:
    """fib(A_inf -> lim_n A_inf/(d_n)^i) at precision M."""
    if i < 0 or M < 1:
        raise ValueError("need i >= 0 and M >= 1")
    p, f = _field_data(k)
    W = window if window is not None else 4 * M
    T = theta_tower(k, i, M, 2 * W + 2)
    data = lim_tower(T, W)
    A = Presentation.cyclic([p**M] * f)
    n0 = data.stable_from
    Xn = T.module(n0)
    # A -> X_{n0} is reduction; the limit is the stable image Y inside X_{n0}
    H0, _ = kernel(identity(f), A, Xn)
    C = T.composite(n0, W)
    cg = T.stages[n0 + W].gens
    with_A = Presentation(Xn.gens, Xn.rels + tuple(tuple(int(a == b) for a in range(f)) for b in range(f)))
    L = preimage_lattice(C, Presentation(cg), with_A)
    H1 = Presentation(cg, tuple(tuple(r) for r in L.basis))
    return ThetaComplex(_group(p, H0, M), _group(p, H1, M), data.lim1, str(k), i, M)


def precision_label(G: AbelianPGroup, M: int) -> str:
    """Render G, writing exponent-M summands as Z_p (they are Z_p at precision M)."""
    parts = []
    for a in G.exponents:
        if a >= M:
            parts.append(f"Z_{G.p}")
        elif a == 1:
            parts.append(f"Z/{G.p}")
        else:
            parts.append(f"Z/{G.p}^{a}")
    parts += ["Z"] * G.free_rank
    return " + ".join(parts) if parts else "0"


def tr_groups(k, D: int, M: int) -> List[Tuple[int, AbelianPGroup]]:
    """TR_j(k; Z_p) for 0 <= j <= D at precision M.

    TR_{2i-1} = H^1(theta(i)); TR_{2i} is an extension of H^0(theta(i)) by
    H^2(theta(i+1)).  An extension with both ends nonzero is not resolved and
    raises.
    """
    if D < 0:
        raise ValueError("degree bound must be >= 0")
    thetas = {}

    def th(i):
        if i not in thetas:
            thetas[i] = theta_infty(k, i, M)
        return thetas[i]

    out = []
    for j in range(D + 1):
        if j % 2:
            out.append((j, th((j + 1) // 2).H1))
            continue
        i = j // 2
        left, right = th(i + 1).H2, th(i).H0
        if left.is_trivial():
            out.append((j, right))
        elif right.is_trivial():
            out.append((j, left))
        else:
            raise NotImplementedError(f"TR_{j}: extension of {right} by {left} is not determined")
    return out
