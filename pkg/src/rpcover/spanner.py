"""Vertex-fault-tolerant spanners from vertex-mode coverings.

Both conversions run a base spanner inside every subgraph of a
vertex-mode covering and take the union of the outputs. The greedy
(2k-1)-spanner is the built-in base.
"""

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .budget import check_budget
from .graph import INF, sssp
from .rpc import build_rpc


def _bounded_distance(adj, s, t, limit):
    """Distance from s to t in adjacency `adj` if it is at most `limit`, else inf."""
    dist = {s: 0}
    heap = [(0, s)]
    while heap:
        d, u = heapq.heappop(heap)
        if u == t:
            return d
        if d > dist.get(u, INF):
            continue
        for v, w in adj[u]:
            nd = d + w
            if nd <= limit and nd < dist.get(v, INF):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return INF


def greedy_spanner(G, k, edge_mask=None):
    """Greedy (2k-1)-spanner: scan edges by (weight, id), keep e = (u, v) iff
    the kept edges do not already connect u and v within (2k-1) * w(e)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if G.directed:
        raise ValueError("spanners are defined for undirected graphs")
    stretch = 2 * k - 1
    order = sorted(range(G.m), key=lambda e: (G.edges[e][2], e))
    adj = [[] for _ in range(G.n)]
    kept = []
    for e in order:
        if edge_mask is not None and not edge_mask[e]:
            continue
        u, v, w = G.edges[e]
        if _bounded_distance(adj, u, v, stretch * w) > stretch * w:
            adj[u].append((v, w))
            adj[v].append((u, w))
            kept.append(e)
    return sorted(kept)


def additive_two_spanner(G, edge_mask=None):
    """(1, 2)-spanner of an unweighted graph.

    Edges at vertices of degree below sqrt(n) are kept; every other vertex
    gets a neighbor in a greedily chosen dominating set D, and a BFS tree is
    kept from each vertex of D. A shortest path through a high-degree vertex
    x is then matched within +2 by the tree of x's dominator.
    """
    n = G.n
    alive = np.ones(G.m, dtype=bool) if edge_mask is None else np.asarray(edge_mask, dtype=bool)
    adj = [[] for _ in range(n)]
    for e, (u, v, _) in enumerate(G.edges):
        if alive[e]:
            adj[u].append((v, e))
            adj[v].append((u, e))
    threshold = math.isqrt(n)
    heavy = [v for v in range(n) if len(adj[v]) >= max(threshold, 1)]
    kept = set()
    for v in range(n):
        if len(adj[v]) < max(threshold, 1):
            kept.update(e for _, e in adj[v])
    undominated = set(heavy)
    centers = []
    while undominated:
        # vertex whose neighborhood covers the most undominated heavy vertices
        best = max(range(n), key=lambda c: (sum(1 for u, _ in adj[c] if u in undominated), -c))
        centers.append(best)
        undominated -= {u for u, _ in adj[best]}
    for c in centers:
        seen = {c}
        frontier = [c]
        while frontier:
            nxt = []
            for u in frontier:
                for v, e in sorted(adj[u]):
                    if v not in seen:
                        seen.add(v)
                        kept.add(e)
                        nxt.append(v)
            frontier = nxt
    return sorted(kept)


@dataclass
class SpannerResult:
    edges: list
    kind: str            # "multiplicative" or "additive"
    mult: Fraction       # multiplicative stretch in the contract
    add: int             # additive term in the contract
    f: int
    cv: int = 1
    provenance: dict = field(default_factory=dict)
    subgraph_sizes: list = field(default_factory=list)

    def contract(self):
        return {"kind": self.kind, "multiplicative": str(self.mult), "additive": self.add, "f": self.f}


def _convert(G, f, L, base, family):
    rpc = build_rpc(G, L, f, mode="vertex", family=family)
    masks = rpc.edge_masks(G)
    provenance = {}
    for j in range(rpc.cv):
        for e in base(G, masks[j]):
            provenance.setdefault(e, []).append(j)
    sizes = rpc.sizes().tolist()
    return rpc, provenance, sizes


def ft_multiplicative_spanner(G, k, f, family="rs"):
    """f-vertex-fault-tolerant (2k-1)-spanner.

    A vertex-mode covering with paths of two vertices keeps, for each edge
    (u, v) and fault set F avoiding u and v, some subgraph holding u and v
    but no vertex of F; its greedy spanner then has a short u-v path.
    """
    if G.directed:
        raise ValueError("spanners are defined for undirected graphs")
    if any(w <= 0 for _, _, w in G.edges):
        raise ValueError("multiplicative conversion expects positive weights")
    rpc, provenance, sizes = _convert(G, f, 2, lambda H, m: greedy_spanner(H, k, m), family)
    return SpannerResult(sorted(provenance), "multiplicative", Fraction(2 * k - 1), 0, f,
                         rpc.cv, provenance, sizes)


def ft_additive_spanner(G, f, eps, base=None, base_stretch=None, family="rs"):
    """f-vertex-fault-tolerant (mu + eps, alpha)-spanner from a (mu, alpha) base.

    `base(G, edge_mask)` returns edge ids and `base_stretch` = (mu, alpha)
    is the contract it satisfies. With L = ceil(alpha / eps) + 1 the
    covering keeps every L-edge path segment avoiding F in some subgraph.
    """
    if base is None:
        base, base_stretch = (lambda H, m: greedy_spanner(H, 2, m)), (3, 0)
    mu, alpha = base_stretch
    eps = Fraction(eps).limit_denominator(10**6)
    if eps <= 0:
        raise ValueError("eps must be positive")
    L = math.ceil(Fraction(alpha) / eps) + 1
    if f > L:
        raise ValueError(f"f={f} exceeds L={L}")
    if G.directed or any(w != 1 for _, _, w in G.edges):
        raise ValueError("the additive conversion is for unweighted undirected graphs")
    rpc, provenance, sizes = _convert(G, f, L + 1, base, family)
    result = SpannerResult(sorted(provenance), "additive", Fraction(mu) + eps, int(alpha), f,
                           rpc.cv, provenance, sizes)
    result.provenance["L"] = L
    return result


@dataclass
class SpannerReport:
    ok: bool
    worst_ratio: float
    fault_sets: int
    violations: list = field(default_factory=list)

    def to_json(self):
        return {"ok": self.ok, "worst_ratio": self.worst_ratio, "fault_sets": self.fault_sets,
                "violations": self.violations}


def verify_ft_spanner(G, result: SpannerResult, budget=None, max_violations=20):
    """Check dist(H - F) <= mult * dist(G - F) + add for all pairs and vertex sets |F| <= f."""
    n_faults = sum(math.comb(G.n, j) for j in range(result.f + 1))
    check_budget(n_faults * G.n * G.n, budget, "spanner verification")
    in_h = np.zeros(G.m, dtype=bool)
    in_h[list(result.edges)] = True
    if result.kind == "additive" and any(w != 1 for _, _, w in G.edges):
        raise ValueError("additive contracts are checked on unweighted graphs only")
    worst = 1.0
    violations = []
    count = 0
    for size in range(result.f + 1):
        for F in combinations(range(G.n), size):
            count += 1
            alive = G.edge_mask(removed_vertices=F)
            dead = set(F)
            for s in range(G.n):
                if s in dead:
                    continue
                dg = sssp(G, s, alive)
                dh = sssp(G, s, alive & in_h)
                for t in range(G.n):
                    if t in dead or t == s or dg[t] == INF:
                        continue
                    if dh[t] > result.mult * dg[t] + result.add:
                        if len(violations) < max_violations:
                            violations.append({"s": s, "t": t, "faults": list(F),
                                               "spanner": None if dh[t] == INF else dh[t], "graph": dg[t]})
                    if dg[t] > 0:
                        worst = max(worst, dh[t] / dg[t])
    return SpannerReport(not violations, worst, count, violations)
