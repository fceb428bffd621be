"""Command-line front end.  Every subcommand prints one JSON document
(``"schema": 1``) unless it writes a table or DOT file."""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DuorepError
from .monoid import FiniteMonoid, check_axioms, format_table, read_table, support_lattice

SCHEMA = 1


def threads() -> int:
    try:
        return max(1, int(os.environ.get("DUOREP_THREADS", "1")))
    except ValueError:
        return 1


def _dump(obj) -> str:
    return json.dumps({"schema": SCHEMA, **obj}, sort_keys=True, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _emit(args, obj) -> None:
    text = _dump(obj)
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def load_monoid(args) -> FiniteMonoid:
    from .registry import BUILTINS, build
    src = args.monoid
    if src is None:
        raise ValueError("--monoid is required")
    if src in ("sigma", *BUILTINS):
        return build(src, n=args.n, group=args.group)
    if Path(src).exists():
        return read_table(src)
    raise ValueError(f"--monoid {src!r} is neither a builtin nor a table file")


def resolve_prime(M: FiniteMonoid, prime) -> int:
    from . import fp
    from .errors import BadPrime
    from .idempotents import auto_prime
    if prime in (None, "auto"):
        return auto_prime(M)
    p = int(prime)
    if not fp.is_prime(p):
        raise BadPrime(f"{p} is not prime")
    return p


def _monoid_info(M: FiniteMonoid, p: int | None = None) -> dict:
    out = {"kind": M.kind or "table", "params": {k: list(v) if isinstance(v, tuple) else v
                                                 for k, v in M.params.items()}, "size": M.size}
    if p is not None:
        out["prime"] = p
    return out


# -- subcommands ---------------------------------------------------------------------------


def cmd_gen(args) -> int:
    from .registry import build
    M = build(args.kind, n=args.n, group=args.group)
    text = format_table(M)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_axioms(args) -> int:
    M = load_monoid(args)
    _emit(args, {"monoid": _monoid_info(M), "axioms": check_axioms(M).as_dict()})
    return 0


def cmd_lattice(args) -> int:
    M = load_monoid(args)
    lat = support_lattice(M)
    nodes = [{"id": X, "rank": int(lat.rank[X]), "representative": int(lat.representative[X]),
              "name": M.names[int(lat.representative[X])]} for X in range(lat.size)]
    _emit(args, {
        "monoid": _monoid_info(M),
        "nodes": nodes,
        "covers": [list(c) for c in lat.covers()],
        "sigma": lat.sigma.tolist(),
    })
    return 0


def cmd_idempotents(args) -> int:
    from .idempotents import check_idempotent_suite, eta_idempotents, gamma_idempotents
    M = load_monoid(args)
    p = resolve_prime(M, args.prime)
    eta = eta_idempotents(M, p)
    gam = gamma_idempotents(M, p)
    out = {
        "monoid": _monoid_info(M, p),
        "eta": {str(X): {str(k): v for k, v in e.to_dict().items()} for X, e in eta.items()},
        "gamma": [{"label": str(L), "coefficients": {str(k): v for k, v in g.to_dict().items()}}
                  for L, g in gam.items()],
    }
    if args.level == "full":
        out["checks"] = check_idempotent_suite(M, p)
    _emit(args, out)
    return 0


def _ext_payload(M: FiniteMonoid, p: int) -> tuple[dict, bool]:
    from .ext import ext_table
    topo = ext_table(M, p)
    out = {"topological": topo.to_json()}
    agree = True
    if M.kind in ("hsiao", "sigma_n"):
        hs = ext_table(M, p, method="hsiao")
        agree = hs.entries == topo.entries
        out["closed_form"] = hs.to_json()
        out["mismatches"] = [list(k) for k in sorted(topo.entries) if topo.entries[k] != hs.entries[k]]
    out["agree"] = agree
    return out, agree


def cmd_ext(args) -> int:
    M = load_monoid(args)
    p = resolve_prime(M, args.prime)
    payload, agree = _ext_payload(M, p)
    _emit(args, {"monoid": _monoid_info(M, p), **payload})
    return 0 if agree else 1


def cmd_quiver(args) -> int:
    from .ext import build_quiver, component_count
    M = load_monoid(args)
    p = resolve_prime(M, args.prime)
    Q = build_quiver(M, p)
    if args.dot:
        Path(args.dot).write_text(Q.to_dot())
        side = Path(args.dot).with_suffix(".relations.json")
        side.write_text(json.dumps(Q.relations_json(), sort_keys=True, indent=2) + "\n")
    _emit(args, {
        "monoid": _monoid_info(M, p),
        "vertices": [str(L) for L in Q.vertices],
        "arrows": [list(a) for a in Q.arrows],
        "relations": Q.relations_json()["relations"],
        "components": component_count(Q),
    })
    return 0


def cmd_koszul(args) -> int:
    from .ext import koszul_diagnostics
    M = load_monoid(args)
    p = resolve_prime(M, args.prime)
    rep = koszul_diagnostics(M, p)
    _emit(args, {"monoid": _monoid_info(M, p), **rep.as_dict(),
                 "offending": [list(t) for t in rep.offending]})
    return 0 if rep.concentrated and rep.dims_equal else 1


def _resolution_payload(M, p, L, kind: str) -> dict:
    from .oracle import minimal_cellular_resolution, minimal_resolution, order_complex_resolution
    if kind == "minimal":
        R = minimal_resolution(M, p, L)
    elif kind == "cellular":
        R = minimal_cellular_resolution(M, p, L.apex, L)
    else:
        R = order_complex_resolution(M, p, L.apex, L)
    return {
        "label": str(L),
        "resolution": kind,
        "ranks": R.dims(),
        "top_multiplicities": R.top_multiplicities(),
        "exact": R.is_exact(),
    }


def cmd_resolve(args) -> int:
    from .idempotents import find_label
    M = load_monoid(args)
    p = resolve_prime(M, args.prime)
    L = find_label(M, p, args.label)
    _emit(args, {"monoid": _monoid_info(M, p), **_resolution_payload(M, p, L, args.kind)})
    return 0


def cmd_betti(args) -> int:
    from .topology import boundary_subposet, order_complex, read_poset, reduced_betti
    if args.poset:
        P = read_poset(args.poset)
        p = int(args.prime) if args.prime not in (None, "auto") else 2
        _emit(args, {"prime": p, "betti_from_degree_minus_1": reduced_betti(order_complex(P), p)})
        return 0
    M = load_monoid(args)
    p = resolve_prime(M, args.prime)
    lat = support_lattice(M)
    rows = []
    for X in range(lat.size):
        for Y in range(lat.size):
            if lat.lt(X, Y):
                P = boundary_subposet(M, int(lat.representative[Y]), X)
                rows.append({"X": X, "Y": Y, "rank": lat.interval_rank(X, Y),
                             "betti_from_degree_minus_1": reduced_betti(order_complex(P), p)})
    _emit(args, {"monoid": _monoid_info(M, p), "intervals": rows})
    return 0


def oracle_table_parallel(M, p):
    from .ext import ExtTable, lattice_rank
    from .idempotents import simple_labels
    from .oracle import minimal_resolution
    labels = simple_labels(M, p)
    qmax = lattice_rank(M)
    # warm shared caches before fanning out
    from .oracle import radical
    radical(M, p)
    for L in labels:
        from .oracle import projective
        projective(M, p, L)
    with ThreadPoolExecutor(max_workers=threads()) as ex:
        tops = list(ex.map(lambda L: minimal_resolution(M, p, L).top_multiplicities(), labels))
    T = ExtTable(list(labels), qmax)
    for i, t in enumerate(tops):
        for j in range(len(labels)):
            for q in range(qmax + 1):
                T.entries[(i, j, q)] = t[q][j] if q < len(t) else 0
    return T


def cmd_oracle(args) -> int:
    M = load_monoid(args)
    p = resolve_prime(M, args.prime)
    if args.action == "ext":
        T = oracle_table_parallel(M, p)
        _emit(args, {"monoid": _monoid_info(M, p), "oracle": T.to_json()})
        return 0
    from .idempotents import find_label
    if args.label is None:
        raise ValueError("oracle resolve needs --label")
    L = find_label(M, p, args.label)
    _emit(args, {"monoid": _monoid_info(M, p), **_resolution_payload(M, p, L, "minimal")})
    return 0


def crosscheck(M: FiniteMonoid, p: int, level: str = "full") -> dict:
    """Run every agreement check that applies; values are True, False or None (skipped)."""
    from .ext import build_quiver, component_count, component_witness, ext_table, koszul_diagnostics
    from .idempotents import check_idempotent_suite, label_poset, simple_labels
    from .oracle import (
        ORACLE_LIMIT,
        ext1_oracle,
        minimal_cellular_resolution,
        order_complex_resolution,
        presentation_dimension_check,
    )
    from .topology import contraction_band, is_cw_poset

    rep: dict = {"mismatches": []}
    ax = check_axioms(M)
    rep["axioms"] = ax.as_dict()
    suite = check_idempotent_suite(M, p)
    rep["idempotents_ok"] = all(v for k, v in suite.items() if k != "count")
    labels = simple_labels(M, p)
    topo = ext_table(M, p)
    agree = True
    if M.kind in ("hsiao", "sigma_n"):
        hs = ext_table(M, p, method="hsiao")
        bad = [k for k in sorted(topo.entries) if topo.entries[k] != hs.entries[k]]
        rep["mismatches"] += [{"check": "closed_form", "triple": list(k)} for k in bad]
        agree = agree and not bad
    oracle_ok = M.size <= ORACLE_LIMIT
    if oracle_ok:
        orc = oracle_table_parallel(M, p)
        bad = [k for k in sorted(topo.entries) if topo.entries[k] != orc.entries[k]]
        rep["mismatches"] += [{"check": "oracle", "triple": list(k)} for k in bad]
        agree = agree and not bad
    rep["ext_agree"] = agree
    kz = koszul_diagnostics(M, p, topo)
    rep["koszul_concentrated"] = kz.concentrated
    rep["koszul_dims_equal"] = kz.dims_equal
    Q = build_quiver(M, p)
    if M.kind == "hsiao":
        from .hsiao import hsiao_group
        comps = component_count(Q)
        witness_ok = all(component_witness(Q.vertices[a]) == component_witness(Q.vertices[b])
                         for a, b in Q.arrows)
        rep["components_equal_group_order"] = comps == hsiao_group(M).order and witness_ok
    if oracle_ok:
        LP = label_poset(M, p)
        arrows = Q.arrow_counts()
        ok = True
        if level == "full":
            for i, V in enumerate(labels):
                for j, W in enumerate(labels):
                    if LP.leq[i, j] and ext1_oracle(M, p, V, W) != arrows.get((i, j), 0):
                        ok = False
                        rep["mismatches"].append({"check": "arrows", "pair": [i, j]})
        rels = {(r[0][0], r[0][2]) for r in Q.relations}
        for (i, j, q), v in orc.entries.items():
            if q == 2 and v != int((i, j) in rels):
                ok = False
                rep["mismatches"].append({"check": "relations", "pair": [i, j]})
        rep["quiver_matches_oracle"] = ok
        pres = presentation_dimension_check(M, p)
        rep["presentation_dims_equal"] = pres.dims_equal
        rep["cartan_equal"] = pres.cartan_equal
        if level == "full":
            res_ok = True
            cw = all(is_cw_poset(contraction_band(M, X)) for X in range(support_lattice(M).size))
            for i, L in enumerate(labels):
                R = order_complex_resolution(M, p, L.apex, L)
                res_ok &= R.is_exact() and R.is_equivariant() and R.all_projective()
                if cw:
                    C = minimal_cellular_resolution(M, p, L.apex, L)
                    tops = C.top_multiplicities()
                    for j in range(len(labels)):
                        for q in range(topo.max_degree + 1):
                            got = tops[q][j] if q < len(tops) else 0
                            if got != orc.entries[(i, j, q)]:
                                res_ok = False
                                rep["mismatches"].append({"check": "cellular", "triple": [i, j, q]})
            rep["resolutions_ok"] = bool(res_ok)
        else:
            rep["resolutions_ok"] = None
    else:
        rep["quiver_matches_oracle"] = None
        rep["presentation_dims_equal"] = None
        rep["cartan_equal"] = None
        rep["resolutions_ok"] = None
    flags = [v for k, v in rep.items() if k not in ("mismatches", "axioms") and v is not None]
    rep["ok"] = all(flags) and not rep["mismatches"]
    return rep


def cmd_crosscheck(args) -> int:
    M = load_monoid(args)
    p = resolve_prime(M, args.prime)
    rep = crosscheck(M, p, args.level)
    _emit(args, {"monoid": _monoid_info(M, p), "level": args.level, **rep})
    return 0 if rep["ok"] else 1


# -- argument parsing -------------------------------------------------------------------


def _common(sp: argparse.ArgumentParser, prime: bool = True) -> None:
    sp.add_argument("--monoid", help="builtin (sigma, sigma_n, hsiao, group_zmod, t2) or table file")
    sp.add_argument("--n", type=int, help="ground set size (or modulus for group_zmod)")
    sp.add_argument("--group", default="", help='invariant factors, e.g. "2" or "2x2"')
    if prime:
        sp.add_argument("--prime", default="auto", help='"auto" or a prime')
    sp.add_argument("--out", help="write the JSON result here instead of stdout")
    sp.add_argument("--level", choices=("fast", "full"), default="full")
    sp.add_argument("--json", action="store_true", help="JSON output (always on; accepted for clarity)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="duorep", description=__doc__)
    ap.add_argument("--version", action="version", version=f"duorep {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a multiplication table")
    g.add_argument("kind", choices=("sigma", "sigma_n", "hsiao", "group_zmod", "t2"))
    g.add_argument("--n", type=int)
    g.add_argument("--group", default="")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    for name, func, prime in [("axioms", cmd_axioms, False), ("lattice", cmd_lattice, False),
                              ("idempotents", cmd_idempotents, True), ("ext", cmd_ext, True),
                              ("koszul", cmd_koszul, True), ("crosscheck", cmd_crosscheck, True)]:
        sp = sub.add_parser(name)
        _common(sp, prime)
        if name == "koszul":
            sp.add_argument("--report", action="store_true")
        sp.set_defaults(func=func)

    q = sub.add_parser("quiver")
    _common(q)
    q.add_argument("--dot", help="write the quiver as DOT (relations go to a .relations.json sidecar)")
    q.set_defaults(func=cmd_quiver)

    r = sub.add_parser("resolve")
    _common(r)
    r.add_argument("--label", required=True, help='label index or "X|chi" string')
    r.add_argument("--kind", choices=("minimal", "cellular", "order_complex"), default="cellular")
    r.set_defaults(func=cmd_resolve)

    b = sub.add_parser("betti")
    _common(b)
    b.add_argument("--poset", help="poset dump file (node count, then cover pairs)")
    b.set_defaults(func=cmd_betti)

    o = sub.add_parser("oracle")
    o.add_argument("action", choices=("ext", "resolve"))
    _common(o)
    o.add_argument("--label")
    o.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DuorepError, ValueError, KeyError, OSError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc).strip("'\""),
               "command": args.command}
        sys.stderr.write(_dump(err))
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
