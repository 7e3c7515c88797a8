"""Command-line entry point.

Every command prints its result on stdout and a one-line JSON run manifest
on stderr (also written to --manifest when given). Exit codes: 0 success,
1 verification failure, 2 usage or input error.
"""

import argparse
import hashlib
import json
import math
import sys
import time
from fractions import Fraction

from . import __version__
from .budget import BudgetExceeded
from .dso import DsoOracle, dso_preprocess, dso_query
from .graph import INF, Graph, read_graph, write_graph
from .hashing import (
    HashFamily, build_naive_hm, build_prime_modulus_hm, build_rs_hm, verify_hm, verify_strong_hm,
)
from .lowerbound import (
    build_lower_bound_graph, check_ftbfs_necessity, check_replacement_path_properties,
    covering_floor, hop_diameter,
)
from .restricted import build_restricted_rpc, load_critical_list, selected_functions, verify_restricted
from .rpc import RpcFamily, build_randomized_rpc, build_rpc, verify_rpc
from .spanner import (
    SpannerResult, additive_two_spanner, ft_additive_spanner, ft_multiplicative_spanner,
    verify_ft_spanner,
)

OK, FAILED, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _sha256(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _write_json(path, data):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def _read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _num(x):
    return "inf" if x == INF else str(int(x))


def _fault_list(text):
    if text is None or text.strip() in ("", "-"):
        return []
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad fault list {text!r}: expected comma-separated integers")


class Run:
    """Collects what a command read, built and measured."""

    def __init__(self, args):
        self.args = args
        self.inputs = {}
        self.provenance = None
        self.stats = {}
        self.timings = {}

    def graph(self, path):
        self.inputs[path] = _sha256(path)
        return read_graph(path)

    def json(self, path):
        self.inputs[path] = _sha256(path)
        return _read_json(path)

    def timed(self, name, fn, *a, **kw):
        t0 = time.perf_counter()
        out = fn(*a, **kw)
        self.timings[name] = round(time.perf_counter() - t0, 6)
        return out

    def manifest(self, status):
        params = {k: v for k, v in vars(self.args).items() if k not in ("func", "manifest")}
        return {
            "command": " ".join(x for x in (self.args.command, getattr(self.args, "action", None)) if x),
            "parameters": params,
            "inputs": self.inputs,
            "version": __version__,
            "provenance": self.provenance,
            "stats": self.stats,
            "timings": self.timings,
            "exit_status": status,
        }


# ---------------------------------------------------------------- rpc

def cmd_rpc_build(run, a):
    G = run.graph(a.graph)
    if a.randomized:
        if a.seed is None:
            raise UsageError("--randomized needs --seed")
        rpc = run.timed("build", build_randomized_rpc, G, a.L, a.f, a.seed, mode=a.mode, c=a.c)
    else:
        rpc = run.timed("build", build_rpc, G, a.L, a.f, mode=a.mode, family=a.family, regime=a.regime)
    _write_json(a.output, rpc.to_json())
    run.provenance = rpc.construction.get("family", {"kind": rpc.construction.get("kind")})
    run.stats = {"cv": rpc.cv, "regime": rpc.regime, "items": rpc.N}
    print(f"cv {rpc.cv}")
    return OK


def cmd_rpc_verify(run, a):
    G = run.graph(a.graph)
    rpc = RpcFamily.from_json(run.json(a.rpc))
    sources = None if a.source is None else a.source
    rep = run.timed("verify", verify_rpc, G, rpc, sources=sources)
    run.stats = {"cv": rpc.cv, "ok": rep.ok, "fault_sets": rep.fault_sets,
                 "pairs_checked": rep.pairs_checked, "violations": len(rep.violations)}
    print(json.dumps(rep.to_json(), sort_keys=True))
    return OK if rep.ok else FAILED


# ---------------------------------------------------------------- hm

def _family(kind, N, a, b, strong):
    if kind == "naive":
        return build_naive_hm(N)
    if kind == "prime-modulus":
        return build_prime_modulus_hm(N, a, b)
    return build_rs_hm(N, a, b, strong=strong)


def cmd_hm_build(run, a):
    H = run.timed("build", _family, a.family, a.N, a.a, a.b, a.strong)
    data = H.to_json()
    data.setdefault("a", a.a)
    data.setdefault("b", a.b)
    _write_json(a.output, data)
    run.provenance = data
    run.stats = {"ell": H.size, "q": H.q}
    print(f"ell {H.size} q {H.q}")
    return OK


def cmd_hm_verify(run, a):
    H = HashFamily.from_json(run.json(a.hm))
    check = verify_strong_hm if a.strong else verify_hm
    ok = run.timed("verify", check, H, a.a, a.b)
    run.provenance = H.to_json()
    run.stats = {"ok": ok, "ell": H.size, "q": H.q}
    print("pass" if ok else "fail")
    return OK if ok else FAILED


# ---------------------------------------------------------------- dso

def _dso_L(a, n):
    if a.eps is not None:
        if a.f < 1 or not 0 <= a.eps < 1:
            raise UsageError("--eps needs f >= 1 and 0 <= eps < 1")
        return max(2, math.ceil(n ** ((1 - a.eps) / a.f)))
    if a.L is None:
        raise UsageError("give -L or --eps")
    return a.L


def cmd_dso_build(run, a):
    G = run.graph(a.graph)
    L = _dso_L(a, G.n)
    kind = "vertex" if a.vertex else "edge"
    oracle = run.timed("preprocess", dso_preprocess, G, a.f, L, fault_kind=kind, threads=a.threads)
    with open(a.output, "w", encoding="utf-8") as fh:
        fh.write(oracle.dumps() + "\n")
    run.stats = dict(oracle.stats, L=L)
    print(f"L {L} cv {oracle.stats['cv']} nodes {oracle.stats['nodes']} R {len(oracle.R)}")
    return OK


def cmd_dso_query(run, a):
    G = run.graph(a.graph)
    oracle = DsoOracle.from_json(run.json(a.oracle), G)
    F = _fault_list(a.faults)
    kind = "vertex" if a.vertex else None
    d = run.timed("query", dso_query, oracle, a.s, a.t, F, kind=kind)
    run.stats = {"distance": _num(d)}
    print(_num(d))
    return OK


# ---------------------------------------------------------------- spanner

def _contract(a):
    if a.additive:
        if a.eps is None:
            raise UsageError("--additive needs --eps")
        return "additive", 1 + Fraction(a.eps).limit_denominator(10**6), 2
    if a.k is None:
        raise UsageError("give --k or --additive --eps")
    return "multiplicative", Fraction(2 * a.k - 1), 0


def cmd_spanner_build(run, a):
    G = run.graph(a.graph)
    kind, mult, add = _contract(a)
    if kind == "additive":
        res = run.timed("build", ft_additive_spanner, G, a.f, a.eps,
                        base=additive_two_spanner, base_stretch=(1, 2))
    else:
        res = run.timed("build", ft_multiplicative_spanner, G, a.k, a.f)
    write_graph(G.subgraph(res.edges), a.output)
    stats = {"cv": res.cv, "edges": len(res.edges), "graph_edges": G.m, "contract": res.contract()}
    if a.verify:
        rep = run.timed("verify", verify_ft_spanner, G, res)
        stats.update(verified=rep.ok, worst_stretch=round(rep.worst_ratio, 6))
    run.stats = stats
    print(json.dumps(stats, sort_keys=True))
    return FAILED if a.verify and not stats["verified"] else OK


def _edge_ids(G, H):
    pool = {}
    for e, (u, v, w) in enumerate(G.edges):
        pool.setdefault((min(u, v), max(u, v), w), []).append(e)
    ids = []
    for u, v, w in H.edges:
        bucket = pool.get((min(u, v), max(u, v), w))
        if not bucket:
            raise UsageError(f"spanner edge ({u}, {v}, {w}) is not in the graph")
        ids.append(bucket.pop(0))
    return sorted(ids)


def cmd_spanner_verify(run, a):
    G = run.graph(a.graph)
    H = run.graph(a.spanner)
    kind, mult, add = _contract(a)
    res = SpannerResult(_edge_ids(G, H), kind, mult, add, a.f)
    rep = run.timed("verify", verify_ft_spanner, G, res)
    run.stats = {"ok": rep.ok, "worst_stretch": round(rep.worst_ratio, 6), "fault_sets": rep.fault_sets}
    print(json.dumps(rep.to_json(), sort_keys=True, default=str))
    return OK if rep.ok else FAILED


# ---------------------------------------------------------------- lower bound

def cmd_lbgraph_gen(run, a):
    lbg = run.timed("build", build_lower_bound_graph, a.f, a.d, a.n)
    write_graph(lbg.graph, a.output)
    if a.labels:
        _write_json(a.labels, lbg.labels_json())
    run.stats = {"n": lbg.graph.n, "m": lbg.graph.m, "tower_n": lbg.tower_n,
                 "b_edges": len(lbg.b_edges), "floor": covering_floor(lbg)}
    print(f"n {lbg.graph.n} m {lbg.graph.m} B {len(lbg.b_edges)} floor {covering_floor(lbg)}")
    return OK


def cmd_lbgraph_check(run, a):
    lbg = build_lower_bound_graph(a.f, a.d, a.n)
    if a.graph:
        G = run.graph(a.graph)
        if G.checksum() != lbg.graph.checksum():
            print("graph differs from the generated instance")
            return FAILED
    props = run.timed("properties", check_replacement_path_properties, lbg)
    need = run.timed("necessity", check_ftbfs_necessity, lbg)
    tower = Graph(lbg.tower_n, lbg.graph.edges[:lbg.tower_m])
    hops = hop_diameter(tower)
    stats = {"properties": props.ok, "witnessed": need.witnessed, "b_edges": need.total,
             "tower_hop_diameter": hops, "floor": covering_floor(lbg)}
    ok = props.ok and need.ok and hops <= 2 * a.f * a.d
    if a.rpc:
        L = a.f * a.d
        rpc = run.timed("rpc", build_rpc, lbg.graph, L, a.f)
        rep = run.timed("rpc_verify", verify_rpc, lbg.graph, rpc, sources=[lbg.root])
        stats.update(cv=rpc.cv, rpc_L=L, rpc_verified=rep.ok)
        ok = ok and rep.ok and rpc.cv >= stats["floor"]
    run.stats = stats
    print(json.dumps(stats, sort_keys=True))
    return OK if ok else FAILED


# ---------------------------------------------------------------- restricted

def cmd_restricted_build(run, a):
    G = run.graph(a.graph)
    run.inputs[a.list] = _sha256(a.list)
    D = load_critical_list(a.list, G.m, a.L, a.f)
    rpc = run.timed("build", build_restricted_rpc, G, a.L, a.f, D, lazy=a.lazy)
    _write_json(a.output, rpc.to_json())
    run.provenance = rpc.construction["family"]
    run.stats = {"cv": rpc.cv, "pairs": len(D), "functions": len(selected_functions(rpc))}
    print(f"cv {rpc.cv} functions {len(selected_functions(rpc))}")
    return OK


def cmd_restricted_verify(run, a):
    G = run.graph(a.graph)
    rpc = RpcFamily.from_json(run.json(a.rpc))
    if rpc.N != G.m:
        raise UsageError("covering and graph disagree on the number of edges")
    run.inputs[a.list] = _sha256(a.list)
    D = load_critical_list(a.list, G.m)
    rep = run.timed("verify", verify_restricted, rpc, D)
    run.stats = {"ok": rep.ok, "pairs": rep.pairs, "uncovered": len(rep.uncovered)}
    print(json.dumps(rep.to_json(), sort_keys=True))
    return OK if rep.ok else FAILED


# ---------------------------------------------------------------- bench

def cmd_bench(run, a):
    G = run.graph(a.graph)
    rows = []
    for name, build in (
        ("deterministic", lambda: build_rpc(G, a.L, a.f, mode=a.mode)),
        ("randomized", lambda: build_randomized_rpc(G, a.L, a.f, a.seed, mode=a.mode, c=a.c)),
    ):
        best = math.inf
        for _ in range(a.repeat):
            t0 = time.perf_counter()
            rpc = build()
            rpc.retained_matrix()
            best = min(best, time.perf_counter() - t0)
        row = {"construction": name, "cv": rpc.cv, "seconds": round(best, 6)}
        if a.verify:
            row["verified"] = verify_rpc(G, rpc).ok
        rows.append(row)
        print(f"{name:<14} cv {rpc.cv:>8d}  time {best:10.6f} s"
              + (f"  verified {row['verified']}" if a.verify else ""))
    run.stats = {"rows": rows}
    return OK


# ---------------------------------------------------------------- parser

def _add_common(p):
    p.add_argument("--manifest", help="also write the run manifest to this file")
    p.add_argument("--threads", type=int, default=1, help="parallelism cap (default 1)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rpcover", description="Replacement-path coverings and the structures built on them.")
    parser.add_argument("--version", action="version", version=f"rpcover {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def action(group, name, func, help):
        p = group.add_parser(name, help=help)
        p.set_defaults(func=func)
        _add_common(p)
        return p

    rpc = sub.add_parser("rpc", help="replacement-path coverings").add_subparsers(dest="action", required=True)
    p = action(rpc, "build", cmd_rpc_build, "build a covering")
    p.add_argument("-g", "--graph", required=True)
    p.add_argument("-L", type=int, required=True)
    p.add_argument("-f", type=int, required=True)
    p.add_argument("--family", choices=["rs", "prime-modulus", "naive"], default="rs")
    p.add_argument("--mode", choices=["edge", "vertex"], default="edge")
    p.add_argument("--regime", choices=["faults", "paths"])
    p.add_argument("--randomized", action="store_true", help="sampling baseline (needs --seed)")
    p.add_argument("--seed", type=int)
    p.add_argument("--c", type=float, default=4.0, help="sampling constant (default 4)")
    p.add_argument("-o", "--output", required=True)
    p = action(rpc, "verify", cmd_rpc_verify, "exhaustively verify a covering")
    p.add_argument("-g", "--graph", required=True)
    p.add_argument("--rpc", required=True)
    p.add_argument("--source", type=int, action="append", help="restrict sources (repeatable)")

    hm = sub.add_parser("hm", help="hit-and-miss hash families").add_subparsers(dest="action", required=True)
    p = action(hm, "build", cmd_hm_build, "build a family")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--family", choices=["rs", "prime-modulus", "naive"], default="rs")
    p.add_argument("--strong", action="store_true")
    p.add_argument("-o", "--output", required=True)
    p = action(hm, "verify", cmd_hm_verify, "exhaustively verify a family")
    p.add_argument("--hm", required=True, help="family JSON")
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--strong", action="store_true")

    dso = sub.add_parser("dso", help="distance sensitivity oracle").add_subparsers(dest="action", required=True)
    p = action(dso, "build", cmd_dso_build, "preprocess an oracle")
    p.add_argument("-g", "--graph", required=True)
    p.add_argument("-f", type=int, required=True)
    p.add_argument("-L", type=int)
    p.add_argument("--eps", type=float, help="derive L = ceil(n^((1-eps)/f)) instead of -L")
    p.add_argument("--vertex", action="store_true", help="vertex faults")
    p.add_argument("-o", "--output", required=True)
    p = action(dso, "query", cmd_dso_query, "answer one query")
    p.add_argument("-g", "--graph", required=True)
    p.add_argument("--oracle", required=True)
    p.add_argument("s", type=int)
    p.add_argument("t", type=int)
    p.add_argument("faults", nargs="?", help="comma-separated fault ids")
    p.add_argument("--vertex", action="store_true", help="faults are vertices")

    sp = sub.add_parser("spanner", help="fault-tolerant spanners").add_subparsers(dest="action", required=True)
    for name, func in (("build", cmd_spanner_build), ("verify", cmd_spanner_verify)):
        p = action(sp, name, func, f"{name} a spanner")
        p.add_argument("-g", "--graph", required=True)
        p.add_argument("--k", type=int)
        p.add_argument("--f", type=int, required=True)
        p.add_argument("--additive", action="store_true")
        p.add_argument("--eps", type=float)
        if name == "build":
            p.add_argument("--verify", action="store_true")
            p.add_argument("-o", "--output", required=True)
        else:
            p.add_argument("--spanner", required=True, help="spanner edge list")

    lb = sub.add_parser("lbgraph", help="lower-bound instances").add_subparsers(dest="action", required=True)
    for name, func in (("gen", cmd_lbgraph_gen), ("check", cmd_lbgraph_check)):
        p = action(lb, name, func, f"{name} an instance")
        p.add_argument("--f", type=int, required=True)
        p.add_argument("--d", type=int, required=True)
        p.add_argument("--n", type=int, required=True)
        if name == "gen":
            p.add_argument("-o", "--output", required=True)
            p.add_argument("--labels")
        else:
            p.add_argument("-g", "--graph", help="compare against this edge list")
            p.add_argument("--rpc", action="store_true", help="also verify a covering from the root")

    rs = sub.add_parser("restricted", help="coverings for explicit pair lists").add_subparsers(
        dest="action", required=True)
    p = action(rs, "build", cmd_restricted_build, "build a restricted covering")
    p.add_argument("-g", "--graph", required=True)
    p.add_argument("-L", type=int, required=True)
    p.add_argument("-f", type=int, required=True)
    p.add_argument("--list", required=True, help="critical list JSON")
    p.add_argument("--lazy", action="store_true")
    p.add_argument("-o", "--output", required=True)
    p = action(rs, "verify", cmd_restricted_verify, "check every listed pair is covered")
    p.add_argument("-g", "--graph", required=True)
    p.add_argument("--rpc", required=True)
    p.add_argument("--list", required=True)

    p = sub.add_parser("bench", help="deterministic vs randomized coverings")
    p.set_defaults(func=cmd_bench, action=None)
    _add_common(p)
    p.add_argument("-g", "--graph", required=True)
    p.add_argument("-L", type=int, required=True)
    p.add_argument("-f", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--c", type=float, default=4.0)
    p.add_argument("--mode", choices=["edge", "vertex"], default="edge")
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--verify", action="store_true")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    run = Run(args)
    try:
        status = args.func(run, args)
    except (UsageError, ValueError, KeyError, OSError, BudgetExceeded) as exc:
        print(f"rpcover: error: {exc}", file=sys.stderr)
        status = USAGE
    manifest = json.dumps(run.manifest(status), sort_keys=True, default=str)
    print(manifest, file=sys.stderr)
    if args.manifest:
        with open(args.manifest, "w", encoding="utf-8") as fh:
            fh.write(manifest + "\n")
    return status


if __name__ == "__main__":
    sys.exit(main())
