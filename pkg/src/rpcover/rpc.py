"""Replacement-path coverings (RPCs).

An (L, f)-RPC of a graph is a list of subgraphs such that for every pair
s, t and every fault set F of at most f items, some subgraph avoids F and
still contains a lightest s-t path of G \\ F with at most L items.

Subgraphs are described by provenance (function index i, value set S,
polarity rho): item x is kept iff (h_i(x) in S) == (rho == 0). Bitsets are
produced on demand from that description.

In edge mode the items are edge ids and L bounds the number of edges of a
path. In vertex mode the items are vertices, L bounds the number of path
vertices (endpoints included) and each subgraph is induced on its kept
vertices.
"""

import hashlib
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .budget import check_budget
from .graph import BIG, INF
from .hashing import (
    BooleanHashFamily, HashFamily, build_naive_hm, build_prime_modulus_hm,
    build_rs_hm, subset_count, subsets_upto,
)

FORMAT = "rpcover.rpc"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class SubgraphRef:
    index: int
    func: int | None = None
    S: tuple = ()
    rho: int = 1


class RpcFamily:
    """A materializable list of subgraphs plus the data needed to rebuild it."""

    def __init__(self, mode, L, f, N, regime, refs, family=None, construction=None, table=None):
        if mode not in ("edge", "vertex"):
            raise ValueError(f"mode must be 'edge' or 'vertex', got {mode!r}")
        self.mode = mode
        self.L, self.f, self.N = L, f, N
        self.a, self.b = max(L, f), min(L, f)
        self.regime = regime
        self.refs = list(refs)
        self.family = family
        self.construction = dict(construction or {})
        self._table = table
        self._lookup = {(r.func, r.S, r.rho): r.index for r in self.refs}

    def __repr__(self):
        return (f"RpcFamily(mode={self.mode!r}, L={self.L}, f={self.f}, "
                f"regime={self.regime!r}, cv={self.cv})")

    def __len__(self):
        return len(self.refs)

    @property
    def cv(self):
        return len(self.refs)

    @property
    def hop_bound(self):
        """Largest number of edges on a covered path."""
        return self.L if self.mode == "edge" else self.L - 1

    # ------------------------------------------------------------ bitsets

    def retained(self, ref) -> np.ndarray:
        """Boolean mask over items kept by one subgraph."""
        if isinstance(ref, int):
            ref = self.refs[ref]
        if self._table is not None:
            return self._table[ref.index]
        return self._materialize(ref)

    def _materialize(self, ref):
        if ref.func is None:
            return np.ones(self.N, dtype=bool)
        H = self.family
        if H.kind == "reed-solomon":
            inside = np.zeros(self.N, dtype=bool)
            for z in ref.S:
                inside[rs_preimage(H.q, H.params["k"], ref.func, z, self.N)] = True
        else:
            inside = np.isin(H.row(ref.func), ref.S)
        return inside if ref.rho == 0 else ~inside

    def retained_matrix(self) -> np.ndarray:
        if self._table is None:
            table = np.zeros((self.cv, self.N), dtype=bool)
            for ref in self.refs:
                table[ref.index] = self._materialize(ref)
            table.setflags(write=False)
            self._table = table
        return self._table

    def edge_masks(self, G) -> np.ndarray:
        """(cv, m) mask of the graph edges present in each subgraph."""
        table = self.retained_matrix()
        if self.mode == "edge":
            return table
        us, vs = G.endpoint_arrays()
        return table[:, us] & table[:, vs]

    def checksum(self) -> str:
        table = np.ascontiguousarray(self.retained_matrix())
        h = hashlib.sha256(f"{self.cv}x{self.N}:".encode())
        h.update(np.packbits(table, axis=None).tobytes())
        return h.hexdigest()

    def index_of(self, func, S, rho):
        return self._lookup.get((func, tuple(S), rho))

    def sizes(self):
        return self.retained_matrix().sum(axis=1)

    # ------------------------------------------------------------ persistence

    def to_json(self) -> dict:
        return {
            "format": FORMAT, "version": FORMAT_VERSION,
            "mode": self.mode, "L": self.L, "f": self.f, "N": self.N,
            "regime": self.regime, "cv": self.cv,
            "construction": self.construction,
            "checksum": self.checksum(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "RpcFamily":
        if data.get("format") != FORMAT or data.get("version") != FORMAT_VERSION:
            raise ValueError("not an rpcover RPC file of a supported version")
        rpc = _rebuild(data)
        if rpc.cv != data["cv"] or rpc.checksum() != data["checksum"]:
            raise ValueError("rebuilt RPC does not match the stored checksum")
        return rpc


def rs_preimage(q, k, point, value, N):
    """Items x < N whose Reed-Solomon codeword has `value` at coordinate `point`.

    Fixes the k-1 high coefficients freely and solves for the constant one,
    so the work is q**(k-1) rather than N.
    """
    tails = np.arange(q ** (k - 1), dtype=np.int64)
    digits = tails.copy()
    acc = np.zeros_like(tails)
    xs = np.zeros_like(tails)
    power = 1
    scale = q
    for _ in range(1, k):
        digits, c = np.divmod(digits, q)
        power = power * point % q
        acc = (acc + c * power) % q
        xs += c * scale
        scale *= q
    c0 = (value - acc) % q
    xs = xs + c0
    return np.sort(xs[xs < N])


def _items(G, mode):
    return G.m if mode == "edge" else G.n


def trivial_rpc(N, mode="edge", L=1):
    """The covering {G} for f = 0."""
    return RpcFamily(mode, L, 0, N, "trivial", [SubgraphRef(0)], construction={"kind": "trivial"})


def _family_for(kind, N, a, b, strong):
    if kind == "rs":
        return build_rs_hm(N, a, b, strong=strong)
    if kind == "prime-modulus":
        return build_prime_modulus_hm(N, a, b)
    if kind == "naive":
        return build_naive_hm(N)
    raise ValueError(f"unknown family {kind!r}")


def build_rpc(G, L, f, mode="edge", family="rs", strong=None, regime=None, budget=None):
    """Deterministic (L, f)-RPC from a q-ary hit-and-miss family.

    One polarity is emitted. In the 'faults' regime (default when L >= f)
    subgraph (i, S) keeps the items whose value avoids S, for every S of at
    most f values. In the 'paths' regime (default when L < f) it keeps the
    items whose value lies in S, for every S of at most L values; this needs
    a strong family. Passing regime='faults' with L < f gives a covering that
    still supports fault-set lookup, at the price of larger S.
    """
    if L < 1 or f < 0:
        raise ValueError("need L >= 1 and f >= 0")
    N = _items(G, mode)
    if f == 0 or N == 0:
        return trivial_rpc(N, mode, L)
    if regime is None:
        regime = "faults" if L >= f else "paths"
    if regime not in ("faults", "paths"):
        raise ValueError(f"unknown regime {regime!r}")
    if strong is None:
        strong = regime == "paths" and family == "rs"
    if regime == "paths" and family == "rs" and not strong:
        raise ValueError("the path-lookup regime needs a strong Reed-Solomon family")
    a, b = max(L, f), min(L, f)
    H = _family_for(family, N, a, b, strong)
    smax = f if regime == "faults" else L
    rho = 1 if regime == "faults" else 0
    check_budget(H.size * subset_count(H.q, smax) * N, budget, "RPC construction")
    refs = []
    for i in range(H.size):
        for S in subsets_upto(H.q, smax):
            refs.append(SubgraphRef(len(refs), i, S, rho))
    construction = {"kind": "hash", "family": H.to_json(), "subset_bound": smax, "rho": rho}
    return RpcFamily(mode, L, f, N, regime, refs, family=H, construction=construction)


def rpc_from_boolean_family(G, L, f, bfam: BooleanHashFamily, mode="edge", budget=None):
    """Covering from a generic Boolean family: both polarities, 2 * size subgraphs."""
    N = _items(G, mode)
    if bfam.N != N:
        raise ValueError(f"family domain {bfam.N} does not match {N} items")
    check_budget(2 * bfam.size * max(N, 1), budget, "RPC construction")
    refs = []
    for i, S in bfam.functions():
        for rho in (0, 1):
            refs.append(SubgraphRef(len(refs), i, S, rho))
    construction = {"kind": "boolean", "family": bfam.source.to_json(), "b": bfam.b}
    return RpcFamily(mode, L, f, N, "both", refs, family=bfam.source, construction=construction)


def randomized_parameters(L, f, n, c=4.0):
    """(r, keep probability) of the sampling baseline."""
    log_n = math.log2(n) if n > 1 else 0.0
    if L >= f:
        if L == 1:
            raise ValueError("L = 1 with L >= f gives keep probability 0; use L >= 2")
        r, p = math.ceil(c * f * L**f * log_n), 1 - 1 / L
    else:
        r, p = math.ceil(c * f ** (L + 1) * log_n), 1 / f
    return max(r, 1), p


def build_randomized_rpc(G, L, f, seed, mode="edge", c=4.0):
    """Sampling baseline: r subgraphs, each keeping items independently."""
    N = _items(G, mode)
    if f == 0:
        return trivial_rpc(N, mode, L)
    r, p = randomized_parameters(L, f, G.n, c)
    construction = {"kind": "random", "seed": int(seed), "c": c, "r": r, "p": p, "n": G.n}
    return _random_family(mode, L, f, N, construction)


def _random_family(mode, L, f, N, construction):
    rng = np.random.default_rng(construction["seed"])
    r, p = construction["r"], construction["p"]
    table = rng.random((r, N)) < p
    table.setflags(write=False)
    refs = [SubgraphRef(i) for i in range(r)]
    return RpcFamily(mode, L, f, N, "random", refs, construction=construction, table=table)


def explicit_rpc(masks, mode="edge", L=1, f=0):
    """Covering given by explicit item masks (for tests and external input)."""
    table = np.array(masks, dtype=bool, ndmin=2)
    table.setflags(write=False)
    refs = [SubgraphRef(i) for i in range(table.shape[0])]
    construction = {"kind": "explicit", "masks": table.astype(int).tolist()}
    return RpcFamily(mode, L, f, table.shape[1], "explicit", refs, construction=construction, table=table)


def _rebuild(data):
    mode, L, f, N = data["mode"], data["L"], data["f"], data["N"]
    con = data["construction"]
    kind = con["kind"]
    if kind == "trivial":
        return trivial_rpc(N, mode, L)
    if kind == "random":
        return _random_family(mode, L, f, N, con)
    if kind == "explicit":
        return explicit_rpc(con["masks"], mode, L, f)
    H = HashFamily.from_json(con["family"])
    if kind == "hash":
        refs = []
        for i in range(H.size):
            for S in subsets_upto(H.q, con["subset_bound"]):
                refs.append(SubgraphRef(len(refs), i, S, con["rho"]))
    elif kind == "boolean":
        refs = []
        for i in range(H.size):
            for S in subsets_upto(H.q, con["b"]):
                for rho in (0, 1):
                    refs.append(SubgraphRef(len(refs), i, S, rho))
    elif kind == "restricted":
        refs = [SubgraphRef(j, i, tuple(S), 1) for j, (i, S) in enumerate(con["subgraphs"])]
    else:
        raise ValueError(f"unknown construction {kind!r}")
    return RpcFamily(mode, L, f, N, data["regime"], refs, family=H, construction=con)


# ---------------------------------------------------------------- lookups

def _images(H, i, items):
    return tuple(sorted({H.evaluate(i, x) for x in items}))


def subgraphs_avoiding_faults(rpc: RpcFamily, F):
    """The subgraphs (i, h_i(F), rho=1), one per function.

    None of them keeps an item of F, and every path of at most L items that
    avoids F lies inside one of them.
    """
    F = sorted(set(F))
    if rpc.regime == "trivial":
        if F:
            raise ValueError("an f = 0 covering has no fault lookup")
        return list(rpc.refs)
    if rpc.regime != "faults" or rpc.family is None:
        raise ValueError(f"fault lookup needs a hash covering in the 'faults' regime, got {rpc.regime!r}")
    if len(F) > rpc.f:
        raise ValueError(f"{len(F)} faults exceed f={rpc.f}")
    H = rpc.family
    return [rpc.refs[rpc.index_of(i, _images(H, i, F), 1)] for i in range(H.size)]


def subgraphs_containing_path(rpc: RpcFamily, P):
    """The subgraphs (i, h_i(P), rho=0), one per function.

    Each keeps all of P. With a strong family, for any F of at most f items
    disjoint from P, at least half of them avoid F.
    """
    P = sorted(set(P))
    if rpc.regime != "paths" or rpc.family is None:
        raise ValueError(f"path lookup needs a covering in the 'paths' regime, got {rpc.regime!r}")
    if len(P) > rpc.L:
        raise ValueError(f"path has {len(P)} items, more than L={rpc.L}")
    H = rpc.family
    return [rpc.refs[rpc.index_of(i, _images(H, i, P), 0)] for i in range(H.size)]


# ---------------------------------------------------------------- verification

@dataclass
class Violation:
    s: int
    t: int
    faults: tuple
    expected: float
    best: float


@dataclass
class RpcReport:
    ok: bool
    fault_sets: int
    pairs_checked: int
    violations: list = field(default_factory=list)

    def to_json(self):
        return {
            "ok": self.ok, "fault_sets": self.fault_sets, "pairs_checked": self.pairs_checked,
            "violations": [
                {"s": v.s, "t": v.t, "faults": list(v.faults),
                 "expected": _num(v.expected), "best": _num(v.best)} for v in self.violations
            ],
        }


def _num(x):
    return None if x == INF else int(x)


def _weight_stack(G, masks):
    """(k, n, n) single-edge weight matrices for a stack of edge masks."""
    k = masks.shape[0]
    W = np.full((k, G.n, G.n), BIG, dtype=np.int64)
    for e, (u, v, w) in enumerate(G.edges):
        rows = masks[:, e]
        W[rows, u, v] = np.minimum(W[rows, u, v], w)
        if not G.directed:
            W[rows, v, u] = np.minimum(W[rows, v, u], w)
    idx = np.arange(G.n)
    W[:, idx, idx] = 0
    return W


def _relax(W, sources, hops, cells=1 << 22):
    """Hop-limited distances from `sources` in each graph of the stack."""
    k, n, _ = W.shape
    out = np.empty((k, len(sources), n), dtype=np.int64)
    step = max(1, cells // max(1, len(sources) * n * n))
    for lo in range(0, k, step):
        Wc = W[lo:lo + step]
        D = np.full((Wc.shape[0], len(sources), n), BIG, dtype=np.int64)
        D[:, np.arange(len(sources)), sources] = 0
        for _ in range(hops):
            D = (D[:, :, :, None] + Wc[:, None, :, :]).min(axis=2)
            np.minimum(D, BIG, out=D)
        out[lo:lo + step] = D
    return out


def fault_sets(N, f):
    for size in range(f + 1):
        yield from combinations(range(N), size)


def verify_rpc(G, rpc: RpcFamily, budget=None, sources=None, max_violations=20, batch=256):
    """Exhaustively check the covering property.

    For every fault set F of at most f items and every pair (s, t) with a
    finite hop-limited distance in G \\ F, some subgraph avoiding F must
    attain that same distance. `sources` restricts s to a subset.
    """
    if rpc.N != _items(G, rpc.mode):
        raise ValueError("covering and graph disagree on the number of items")
    n = G.n
    sources = np.arange(n) if sources is None else np.asarray(sorted(sources), dtype=np.int64)
    n_faults = sum(math.comb(rpc.N, j) for j in range(rpc.f + 1))
    check_budget(n_faults * len(sources) * n, budget, "RPC verification")
    hops = rpc.hop_bound
    report = RpcReport(True, 0, 0)
    if hops < 1:
        report.fault_sets = n_faults
        return report

    masks = rpc.edge_masks(G)
    retained = rpc.retained_matrix().astype(np.int32)
    tables = _relax(_weight_stack(G, masks), sources, hops)
    # try large subgraphs first; they attain most distances
    order = np.argsort(-masks.sum(axis=1), kind="stable")
    tables = tables[order]
    retained = retained[order]

    offdiag = np.ones((len(sources), n), dtype=bool)
    offdiag[np.arange(len(sources)), sources] = False

    pending = list(fault_sets(rpc.N, rpc.f))
    for start in range(0, len(pending), batch):
        chunk = pending[start:start + batch]
        indicator = np.zeros((len(chunk), rpc.N), dtype=np.int32)
        for j, F in enumerate(chunk):
            indicator[j, list(F)] = 1
        if rpc.mode == "edge":
            fmasks = indicator == 0
        else:
            us, vs = G.endpoint_arrays()
            alive = indicator == 0
            fmasks = alive[:, us] & alive[:, vs]
        brute = _relax(_weight_stack(G, fmasks), sources, hops)
        avoid = (retained @ indicator.T) == 0
        for j, F in enumerate(chunk):
            report.fault_sets += 1
            need = offdiag & (brute[j] < BIG)
            if rpc.mode == "vertex" and F:
                dead = np.zeros(n, dtype=bool)
                dead[list(F)] = True
                need &= ~dead[sources][:, None] & ~dead[None, :]
            if not need.any():
                continue
            report.pairs_checked += int(need.sum())
            idx = np.flatnonzero(avoid[:, j])
            target = brute[j]
            covered = np.zeros_like(need)
            for lo in range(0, len(idx), 64):
                covered |= (tables[idx[lo:lo + 64]] == target).any(axis=0)
                if covered[need].all():
                    break
            missing = need & ~covered
            if missing.any():
                report.ok = False
                best = tables[idx].min(axis=0) if len(idx) else np.full_like(target, BIG)
                for si, t in zip(*np.nonzero(missing)):
                    if len(report.violations) >= max_violations:
                        break
                    b = int(best[si, t])
                    report.violations.append(Violation(
                        int(sources[si]), int(t), tuple(F), int(target[si, t]), INF if b >= BIG else b))
    return report
