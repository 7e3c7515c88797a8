"""Distance sensitivity oracle built on a fault-lookup covering.

Preprocessing builds, for every ordered pair (s, t), a fault-tolerant tree
whose nodes are labeled by (path, fault set): the root holds the lightest
path of at most L edges, and the child for a failed path item a holds the
lightest such path once a is also removed. Node paths with between
ceil(L/4) and L edges are "critical"; a greedy hitting set R meets all of
them.

A query with fault set F returns the smaller of
  * the tree answer for (s, t), exact whenever a lightest replacement path
    has at most L edges, and
  * the s-t distance in the dense graph on R + {s, t} whose edge (x, y)
    weighs the tree answer for (x, y), exact for longer replacement paths.

Faults are edges or vertices (`fault_kind`). For vertex faults the tree
children are keyed by internal path vertices.
"""

import heapq
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .budget import check_budget
from .graph import BIG, INF, apsp_hop_limited
from .rpc import build_rpc, subgraphs_avoiding_faults

FORMAT = "rpcover.dso"
FORMAT_VERSION = 1


@dataclass(eq=False)
class FtNode:
    path: tuple
    vertices: tuple
    faults: tuple
    weight: int
    items: frozenset
    children: dict = field(default_factory=dict)

    @property
    def hops(self):
        return len(self.path)

    def walk(self):
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(node.children[a] for a in sorted(node.children, reverse=True))

    def size(self):
        return sum(1 for _ in self.walk())


def _path_items(path, vertices, fault_kind):
    if fault_kind == "edge":
        return frozenset(path)
    return frozenset(vertices[1:-1])


class TripletSolver:
    """Hop-limited distances in G minus F, answered from per-subgraph tables."""

    def __init__(self, G, rpc, tables):
        self.graph = G
        self.rpc = rpc
        self.tables = tables
        self.keys = np.stack([t.keys for t in tables])
        self.scale = tables[0].scale

    def __call__(self, s, t, F):
        return triplet_distance(self.rpc, self, s, t, F)


def triplet_distance(rpc, tables, s, t, F):
    """Lightest path of at most L edges from s to t in G minus F.

    Returns (weight, edge-id path) or (inf, None). The minimum is taken
    over the subgraphs that avoid F; among minimizers the subgraph of
    smallest index supplies the path.
    """
    if not isinstance(tables, TripletSolver):
        tables = TripletSolver(None, rpc, list(tables))
    refs = subgraphs_avoiding_faults(rpc, F)
    idx = np.fromiter((r.index for r in refs), dtype=np.int64, count=len(refs))
    keys = tables.keys[idx, s, t]
    j = int(np.argmin(keys))
    if keys[j] >= BIG:
        return INF, None
    table = tables.tables[idx[j]]
    return int(keys[j]) // tables.scale, table.path(s, t)


def node_bound(L, f, fault_kind="edge"):
    """Largest possible tree size: depth f, at most L (or L-1 internal vertices) children."""
    width = L if fault_kind == "edge" else L - 1
    return sum(width**i for i in range(f + 1))


def build_ft_trees(G, L, f, solver, fault_kind="edge", budget=None):
    """One tree per ordered pair with a finite L-hop distance."""
    check_budget(G.n * G.n * node_bound(L, f, fault_kind), budget, "FT-tree construction")
    forest = {}
    cap = node_bound(L, f, fault_kind)
    for s in range(G.n):
        for t in range(G.n):
            if s == t:
                continue
            root = _make_node(G, solver, s, t, (), fault_kind)
            if root is None:
                continue
            frontier = [root]
            count = 1
            while frontier:
                nxt = []
                for node in frontier:
                    if len(node.faults) >= f:
                        continue
                    order = node.path if fault_kind == "edge" else node.vertices[1:-1]
                    for a in order:
                        child = _make_node(G, solver, s, t, tuple(sorted(node.faults + (a,))), fault_kind)
                        if child is not None:
                            node.children[a] = child
                            nxt.append(child)
                            count += 1
                frontier = nxt
            if count > cap:
                raise AssertionError(f"tree ({s}, {t}) has {count} nodes, above {cap}")
            forest[(s, t)] = root
    return forest


def _make_node(G, solver, s, t, faults, fault_kind):
    weight, path = solver(s, t, faults)
    if path is None:
        return None
    path = tuple(path)
    vertices = tuple(G.path_vertices(s, path))
    return FtNode(path, vertices, faults, weight, _path_items(path, vertices, fault_kind))


def query_ft_tree(root, F):
    """(value, node) for the tree of one pair under fault set F.

    Descends along the smallest failed item of the current path; a missing
    child means no path of at most L edges survives.
    """
    if root is None:
        return INF, None
    node = root
    while True:
        hit = node.items & F
        if not hit:
            return node.weight, node
        node = node.children.get(min(hit))
        if node is None:
            return INF, None


def compute_critical_paths(forest, L):
    """Vertex sequences of node paths with ceil(L/4)..L edges, deduplicated."""
    lo = -(-L // 4)
    seen = {}
    for key in sorted(forest):
        for node in forest[key].walk():
            if lo <= node.hops <= L and node.vertices not in seen:
                seen[node.vertices] = None
    return list(seen)


def hitting_set_bound(n, l_min, n_sets):
    if n_sets == 0:
        return 0
    return math.ceil(n / l_min * math.log(n_sets)) + 1


def greedy_hitting_set(sets, n, l_min=1):
    """Greedy max-coverage hitting set, smallest vertex id on ties.

    Every step picks a vertex lying in at least l_min/n of the sets still
    unhit, which gives |R| <= ceil((n/l_min) * ln(#sets)) + 1.
    """
    sets = [frozenset(s) for s in sets]
    for s in sets:
        if len(s) < l_min:
            raise ValueError(f"set {sorted(s)} has fewer than {l_min} elements")
        if any(not 0 <= v < n for v in s):
            raise ValueError(f"set {sorted(s)} has a vertex outside [0, {n})")
    members = [[] for _ in range(n)]
    for j, s in enumerate(sets):
        for v in s:
            members[v].append(j)
    count = np.array([len(m) for m in members], dtype=np.int64)
    unhit = np.ones(len(sets), dtype=bool)
    left = len(sets)
    chosen = []
    while left:
        v = int(np.argmax(count))
        chosen.append(v)
        for j in members[v]:
            if unhit[j]:
                unhit[j] = False
                left -= 1
                for u in sets[j]:
                    count[u] -= 1
    return sorted(chosen)


@dataclass(eq=False)
class DsoOracle:
    n: int
    L: int
    f: int
    fault_kind: str
    forest: dict
    R: list
    graph_checksum: str = ""
    stats: dict = field(default_factory=dict)
    graph: object = None

    def tree(self, s, t):
        return self.forest.get((s, t))

    def tree_sizes(self):
        return {key: root.size() for key, root in self.forest.items()}

    # ------------------------------------------------------------ persistence

    def to_json(self) -> dict:
        return {
            "format": FORMAT, "version": FORMAT_VERSION,
            "n": self.n, "L": self.L, "f": self.f, "fault_kind": self.fault_kind,
            "graph_checksum": self.graph_checksum,
            "R": list(self.R),
            "trees": [{"s": s, "t": t, "root": _node_json(self.forest[(s, t)])} for s, t in sorted(self.forest)],
            "stats": self.stats,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, data, graph=None) -> "DsoOracle":
        if data.get("format") != FORMAT or data.get("version") != FORMAT_VERSION:
            raise ValueError("not an rpcover oracle file of a supported version")
        if graph is not None and data["graph_checksum"] and graph.checksum() != data["graph_checksum"]:
            raise ValueError("oracle was built for a different graph")
        kind = data["fault_kind"]
        forest = {(tr["s"], tr["t"]): _node_from_json(tr["root"], kind) for tr in data["trees"]}
        return cls(data["n"], data["L"], data["f"], kind, forest, list(data["R"]),
                   data["graph_checksum"], dict(data.get("stats", {})), graph)


def _node_json(node):
    return {
        "path": list(node.path), "vertices": list(node.vertices), "faults": list(node.faults),
        "weight": node.weight,
        "children": [[a, _node_json(node.children[a])] for a in sorted(node.children)],
    }


def _node_from_json(data, kind):
    path, vertices = tuple(data["path"]), tuple(data["vertices"])
    node = FtNode(path, vertices, tuple(data["faults"]), data["weight"], _path_items(path, vertices, kind))
    for a, child in data["children"]:
        node.children[a] = _node_from_json(child, kind)
    return node


def dso_preprocess(G, f, L, fault_kind="edge", family="rs", budget=None, threads=1):
    """Build the oracle for up to f faults with hop parameter L >= 2."""
    if L < 2:
        raise ValueError("the long-query argument needs L >= 2")
    if fault_kind not in ("edge", "vertex"):
        raise ValueError("fault_kind must be 'edge' or 'vertex'")
    check_budget(G.n * G.n * node_bound(L, f, fault_kind), budget, "oracle preprocessing")
    items_per_path = L if fault_kind == "edge" else L + 1
    rpc = build_rpc(G, items_per_path, f, mode=fault_kind, family=family, regime="faults", budget=budget)
    masks = rpc.edge_masks(G)

    def table(j):
        return apsp_hop_limited(G, L, masks[j])

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            tables = list(pool.map(table, range(rpc.cv)))
    else:
        tables = [table(j) for j in range(rpc.cv)]
    solver = TripletSolver(G, rpc, tables)
    forest = build_ft_trees(G, L, f, solver, fault_kind, budget)
    critical = compute_critical_paths(forest, L)
    R = greedy_hitting_set([set(p) for p in critical], G.n, -(-L // 4))
    sizes = [root.size() for root in forest.values()]
    stats = {
        "cv": rpc.cv, "q": rpc.family.q if rpc.family is not None else None,
        "trees": len(forest), "nodes": sum(sizes), "max_tree": max(sizes, default=0),
        "critical_paths": len(critical), "hitting_set": len(R),
    }
    return DsoOracle(G.n, L, f, fault_kind, forest, R, G.checksum(), stats, G)


def _normalize_faults(oracle, F, kind):
    kind = kind or oracle.fault_kind
    F = frozenset(F)
    dead = frozenset()
    if kind == "vertex":
        dead = F
        if oracle.fault_kind == "edge":
            if oracle.graph is None:
                raise ValueError("expanding vertex faults needs the graph")
            F = frozenset(e for v in F for e in oracle.graph.incident_edges(v))
    elif oracle.fault_kind == "vertex":
        raise ValueError("a vertex-fault oracle cannot answer edge-fault queries")
    if len(F) > oracle.f:
        raise ValueError(f"{len(F)} faults exceed the oracle's budget f={oracle.f}")
    return F, dead


def dso_query(oracle: DsoOracle, s, t, F=(), kind=None):
    """dist(s, t, G minus F), exactly.

    `kind` defaults to the oracle's fault kind. Vertex faults on an edge
    oracle are expanded to their incident edges and count against f.
    """
    F, dead = _normalize_faults(oracle, F, kind)
    if s in dead or t in dead:
        return INF
    if s == t:
        return 0
    short, _ = query_ft_tree(oracle.tree(s, t), F)
    nodes = sorted((set(oracle.R) | {s, t}) - dead)
    if len(nodes) <= 2 and not oracle.R:
        return short
    long = _dense_distance(oracle, nodes, s, t, F)
    return min(short, long)


def _dense_distance(oracle, nodes, s, t, F):
    dist = {v: INF for v in nodes}
    dist[s] = 0
    heap = [(0, s)]
    done = set()
    while heap:
        d, x = heapq.heappop(heap)
        if x in done:
            continue
        if x == t:
            return d
        done.add(x)
        for y in nodes:
            if y in done:
                continue
            w, _ = query_ft_tree(oracle.tree(x, y), F)
            if d + w < dist[y]:
                dist[y] = d + w
                heapq.heappush(heap, (d + w, y))
    return INF
