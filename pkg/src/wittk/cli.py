"""Command line entry point: ``wittk <subcommand> ...``.

Exit codes: 0 success, 2 invalid parameters, 3 size cap exceeded,
4 selfcheck failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from typing import List, Optional, Sequence

from . import decomp, kgroups, selfcheck, tr, witt
from .polys import NonIntegral
from .rings import CapExceeded, DescriptorMismatch, FiniteField, Integers, IntegersMod, PrimeField, is_prime
from .smith import AbelianPGroup

EXIT_OK, EXIT_INVALID, EXIT_CAP, EXIT_SELFCHECK = 0, 2, 3, 4


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --------------------------------------------------------------------------
# argument parsing helpers


def parse_field(text: str):
    """GF(q), GF(p^f), F_p or Fp."""
    t = text.replace(" ", "")
    m = re.fullmatch(r"(?:GF|F)\(?_?(\d+)(?:\^(\d+))?\)?", t, flags=re.IGNORECASE)
    if not m:
        raise UsageError(f"cannot parse field {text!r}")
    base, f = int(m.group(1)), m.group(2)
    if f is not None:
        p, f = base, int(f)
    else:
        p, f = _prime_power(base)
    if not is_prime(p):
        raise UsageError(f"{text!r} is not a prime power field")
    return PrimeField(p) if f == 1 else FiniteField(p, f)


def _prime_power(q: int):
    for p in range(2, q + 1):
        if q % p == 0:
            f = 0
            while q % p == 0:
                q //= p
                f += 1
            if q != 1:
                raise UsageError("field size must be a prime power")
            return p, f
    raise UsageError("field size must be at least 2")


def parse_ring(text: str):
    t = text.replace(" ", "")
    if t in ("Z", "ZZ"):
        return Integers()
    m = re.fullmatch(r"Z/(\d+)", t)
    if m:
        return IntegersMod(int(m.group(1)))
    if t.startswith("{"):
        from .rings import ring_from_json

        return ring_from_json(json.loads(t))
    return parse_field(t)


def parse_trunc(text: str) -> witt.TruncationSet:
    """full:m, ptyp:p:L, or an explicit comma list of indices."""
    t = text.replace(" ", "")
    if t.startswith("full:"):
        T = witt.full(int(t[5:]))
    elif t.startswith("ptyp:"):
        _, p, L = t.split(":")
        T = witt.p_typical(int(p), int(L))
    else:
        T = witt.TruncationSet(tuple(int(x) for x in t.split(",") if x))
    T.check_caps()
    return T


def parse_vector(text: str, trunc, R) -> witt.WittVector:
    if text.strip().startswith("["):
        vals = json.loads(text)
    else:
        vals = [int(x) for x in text.split(",") if x.strip()]
    if len(vals) != len(trunc):
        raise UsageError(f"expected {len(trunc)} coefficients, got {len(vals)}")
    return witt.WittVector(trunc, R, tuple(R.payload_from_json(v) for v in vals))


def parse_local(text: str) -> kgroups.CdvrData:
    try:
        p, f, e, dE = (int(x) for x in text.split(":"))
    except ValueError:
        raise UsageError(f"local data must be p:f:e:dE, got {text!r}")
    return kgroups.CdvrData(p, f, e, dE)


# --------------------------------------------------------------------------
# documents


class Document:
    """A JSON payload plus a flat table for csv/markdown rendering."""

    def __init__(self, payload, rows: List[dict], columns: Sequence[str], markdown: Optional[str] = None):
        self.payload = payload
        self.rows = rows
        self.columns = list(columns)
        self.markdown = markdown

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return json.dumps(self.payload, indent=2, sort_keys=True) + "\n"
        if fmt == "csv":
            buf = io.StringIO()
            w = csv.DictWriter(buf, fieldnames=self.columns, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
            w.writeheader()
            for r in self.rows:
                w.writerow({c: _cell(r.get(c)) for c in self.columns})
            return buf.getvalue()
        if self.markdown is not None:
            return self.markdown
        return markdown_table(self.columns, [[_cell(r.get(c)) for c in self.columns] for r in self.rows])


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (dict, list)):
        return json.dumps(x, sort_keys=True)
    return str(x)


def markdown_table(header: Sequence[str], body: Sequence[Sequence[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(str(c) for c in row) + " |" for row in body]
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# subcommands


def cmd_witt(args) -> Document:
    R = parse_ring(args.ring)
    T = parse_trunc(args.trunc)
    a = parse_vector(args.a, T, R)
    op = args.op
    if op in ("add", "mul"):
        if args.b is None:
            raise UsageError(f"{op} needs --b")
        b = parse_vector(args.b, T, R)
        out = a + b if op == "add" else a * b
    elif op == "V":
        target = parse_trunc(args.target) if args.target else None
        out = witt.verschiebung(args.n, a, target)
    elif op == "F":
        out = witt.frobenius(args.n, a)
    elif op == "ghost":
        g = witt.ghost(a)
        payload = g.to_json()
        rows = [{"index": n, "value": R.payload_to_json(c)} for n, c in zip(g.trunc, g.components)]
        return Document(payload, rows, ["index", "value"])
    elif op == "teichmuller":
        out = witt.teichmuller(witt.RingElement(R, a.coeffs[0]), T)
    else:
        raise UsageError(f"unknown witt op {op!r}")
    payload = out.to_json()
    rows = [{"index": n, "value": R.payload_to_json(c)} for n, c in zip(out.trunc, out.coeffs)]
    return Document(payload, rows, ["index", "value"])


def cmd_decomp(args) -> Document:
    R = parse_ring(args.ring)
    T = witt.full(args.m)
    w = parse_vector(args.a, T, R)
    rep = decomp.decompose(w, args.p)
    rows = [{"u": u, "length": s, "coeffs": [R.payload_to_json(c) for c in v.coeffs]} for u, s, v in rep.components]
    return Document(rep.to_json(), rows, ["u", "length", "coeffs"])


def _kresult_rows(results):
    rows = []
    for r in results:
        j = r.to_json()
        tors = j["torsion"]
        rows.append(
            {
                "degree": j["degree"],
                "free_rank": j["free_rank"],
                "exponents": None if tors is None else tors["exponents"],
                "order_valuation": j["order_valuation"] if tors is None else r.order_valuation,
                "provenance": ";".join(j["provenance"]),
            }
        )
    return rows


KCOLS = ["degree", "free_rank", "exponents", "order_valuation", "provenance"]


def cmd_kgroup(args) -> Document:
    kind = args.kind
    if kind == "perfectoid":
        k = parse_field(args.field)
        odd, even = kgroups.k_perfectoid(args.p, args.e, args.r, k)
        factors = kgroups.enumerate_gr_factors(args.p, args.e, args.r - 1, 1 if isinstance(k, PrimeField) else k.f)
        payload = {
            "results": [odd.to_json(), even.to_json()],
            "factors": [fd.to_json() for fd in factors],
        }
        return Document(payload, _kresult_rows([odd, even]), KCOLS)
    if kind == "cdvr":
        if args.eisenstein:
            try:
                E = [int(x) for x in args.eisenstein.split(",")]
            except ValueError:
                raise UsageError("--eisenstein takes comma separated integer coefficients, low degree first")
            if args.p is None:
                raise UsageError("--eisenstein needs --p")
            data = kgroups.cdvr_from_polynomial(args.p, args.f or 1, E, args.precision)
        else:
            if None in (args.p, args.e, args.dE):
                raise UsageError("cdvr needs --p --e --dE (and --f) or --eisenstein")
            data = kgroups.CdvrData(args.p, args.f or 1, args.e, args.dE)
        odd, even = kgroups.cdvr_k_groups(data, args.n, args.i)
        rec = None
        if args.n <= kgroups.RECURSIVE_GRID and args.i <= kgroups.RECURSIVE_GRID:
            rec = kgroups.cdvr_even_recursive(data, args.n, args.i)
            if rec != even.order_valuation:
                raise AssertionError("recurrence disagrees with the closed form")
            even.provenance.append("recurrence")
        payload = {"data": data.to_json(), "results": [odd.to_json(), even.to_json()]}
        return Document(payload, _kresult_rows([odd, even]), KCOLS)
    if kind == "integral":
        local = [parse_local(x) for x in (args.local or [])]
        res = kgroups.integral_agh(args.n, args.i, local, args.degree)
        payload = res.to_json()
        return Document(payload, [payload], ["order", "rank"])
    raise UsageError(f"unknown kgroup kind {kind!r}")


def cmd_table(args) -> Document:
    if args.which != "agh":
        raise UsageError("only the agh table is available")
    if args.n_max < 1 or args.i_max < 0:
        raise UsageError("need --n-max >= 1 and --i-max >= 0")
    cells = []
    for n in range(1, args.n_max + 1):
        for i in range(0, args.i_max + 1):
            res = kgroups.integral_agh(n, i)
            if res.order != kgroups.agh_order(n, i):
                raise AssertionError(f"prime-by-prime order differs from (ni)!(i!)^(n-2) at n={n}, i={i}")
            cells.append({"n": n, "i": i, "order": res.order, "rank": res.rank})
    header = ["n \\ i"] + [str(i) for i in range(args.i_max + 1)]
    body = []
    for n in range(1, args.n_max + 1):
        row = [str(n)] + [f"{c['order']} / {c['rank']}" for c in cells if c["n"] == n]
        body.append(row)
    md = "K_{2i}(Z[x]/x^n, (x)) order / K_{2i+1} rank\n\n" + markdown_table(header, body)
    payload = {"table": "agh", "cells": cells}
    return Document(payload, cells, ["n", "i", "order", "rank"], md)


def cmd_tr(args) -> Document:
    k = parse_field(args.field)
    if args.degree_bound < 0 or args.precision < 1:
        raise UsageError("need --degree-bound >= 0 and --precision >= 1")
    groups = tr.tr_groups(k, args.degree_bound, args.precision)
    rows = [
        {"degree": j, "group": tr.precision_label(g, args.precision), "exponents": list(g.exponents)} for j, g in groups
    ]
    payload = {
        "field": str(k),
        "precision": args.precision,
        "groups": [{"degree": j, "group": g.to_json(), "label": tr.precision_label(g, args.precision)} for j, g in groups],
    }
    return Document(payload, rows, ["degree", "group", "exponents"])


def cmd_selfcheck(args) -> Document:
    checks = selfcheck.run_suites(args.suite, args.seed)
    payload = {
        "suite": args.suite,
        "seed": args.seed,
        "passed": all(c.passed for c in checks),
        "checks": [c.to_json() for c in checks],
    }
    return Document(payload, [c.to_json() for c in checks], ["suite", "name", "passed", "cases", "detail"])


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "markdown"), default="json")
    common.add_argument("--seed", type=int, default=0)

    ap = _Parser(prog="wittk", description="Witt vectors and K-groups of truncated polynomial algebras.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    w = sub.add_parser("witt", parents=[common], help="Witt vector arithmetic")
    w.add_argument("op", choices=("add", "mul", "V", "F", "ghost", "teichmuller"))
    w.add_argument("--ring", required=True)
    w.add_argument("--trunc", required=True)
    w.add_argument("--a", required=True)
    w.add_argument("--b")
    w.add_argument("--n", type=int, default=1)
    w.add_argument("--target")
    w.set_defaults(func=cmd_witt)

    d = sub.add_parser("decomp", parents=[common], help="p-typical decomposition")
    d.add_argument("--p", type=int, required=True)
    d.add_argument("--m", type=int, required=True)
    d.add_argument("--ring", required=True)
    d.add_argument("--a", required=True)
    d.set_defaults(func=cmd_decomp)

    k = sub.add_parser("kgroup", parents=[common], help="relative K-groups")
    k.add_argument("kind", choices=("perfectoid", "cdvr", "integral"))
    k.add_argument("--p", type=int)
    k.add_argument("--e", type=int)
    k.add_argument("--r", type=int)
    k.add_argument("--field")
    k.add_argument("--f", type=int)
    k.add_argument("--dE", type=int)
    k.add_argument("--eisenstein")
    k.add_argument("--precision", type=int, default=8)
    k.add_argument("--n", type=int)
    k.add_argument("--i", type=int)
    k.add_argument("--degree", type=int, default=1)
    k.add_argument("--local", action="append", help="p:f:e:dE, repeatable")
    k.set_defaults(func=cmd_kgroup)

    t = sub.add_parser("table", parents=[common], help="tables")
    t.add_argument("which", choices=("agh",))
    t.add_argument("--n-max", type=int, default=6)
    t.add_argument("--i-max", type=int, default=6)
    t.set_defaults(func=cmd_table)

    r = sub.add_parser("tr", parents=[common], help="TR of a perfect field")
    r.add_argument("--field", required=True)
    r.add_argument("--degree-bound", type=int, required=True)
    r.add_argument("--precision", type=int, required=True)
    r.set_defaults(func=cmd_tr)

    s = sub.add_parser("selfcheck", parents=[common], help="oracle suites")
    s.add_argument("--suite", choices=selfcheck.SUITES + ("all",), default="all")
    s.set_defaults(func=cmd_selfcheck)
    return ap


def _required(args):
    need = {
        ("kgroup", "perfectoid"): ("p", "e", "r", "field"),
        ("kgroup", "cdvr"): ("n", "i"),
        ("kgroup", "integral"): ("n", "i"),
    }
    for name in need.get((args.command, getattr(args, "kind", None)), ()):
        if getattr(args, name) is None:
            raise UsageError(f"--{name} is required for kgroup {args.kind}")


_VALUE_FLAGS = ("--a", "--b", "--eisenstein")


def _attach_negative_values(argv: Sequence[str]) -> List[str]:
    """Rewrite ``--eisenstein -2,0,1`` as ``--eisenstein=-2,0,1``.

    argparse reads a value starting with '-' as an option unless it is a
    plain negative number, which coefficient lists are not.
    """
    argv = list(argv)
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv) and re.match(r"^-[\d\[]", argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def run(argv: Sequence[str], out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    try:
        args = build_parser().parse_args(_attach_negative_values(argv))
        _required(args)
        doc = args.func(args)
    except CapExceeded as exc:
        err.write(json.dumps({"error": "cap_exceeded", "message": str(exc)}) + "\n")
        return EXIT_CAP
    except (UsageError, ValueError, TypeError, DescriptorMismatch, NonIntegral, KeyError) as exc:
        err.write(json.dumps({"error": "invalid_parameters", "message": str(exc)}) + "\n")
        return EXIT_INVALID
    out.write(doc.render(args.format))
    if args.command == "selfcheck" and not doc.payload["passed"]:
        return EXIT_SELFCHECK
    return EXIT_OK


def main(argv=None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
