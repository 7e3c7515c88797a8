"""Graphs, shortest paths and hop-limited all-pairs distances.

Edges carry nonnegative integer weights and stable ids 0..m-1 in input
order. Distances are returned as Python ints, or `math.inf` when no path
exists.
"""

import hashlib
import heapq
import math
from dataclasses import dataclass, field

import numpy as np

INF = math.inf
# Internal sentinel for integer distance matrices. Sums of two sentinels
# still fit in int64, and anything at or above it is clamped back.
BIG = 1 << 61


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple
    directed: bool = False
    _adj: list = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        edges = tuple((int(u), int(v), int(w)) for u, v, w in self.edges)
        for u, v, w in edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) has an endpoint outside [0, {self.n})")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if w < 0:
                raise ValueError(f"negative weight {w} on edge ({u}, {v})")
        object.__setattr__(self, "edges", edges)
        adj = [[] for _ in range(self.n)]
        for eid, (u, v, w) in enumerate(edges):
            adj[u].append((v, w, eid))
            if not self.directed:
                adj[v].append((u, w, eid))
        object.__setattr__(self, "_adj", adj)

    @property
    def m(self):
        return len(self.edges)

    @property
    def max_weight(self):
        return max((w for _, _, w in self.edges), default=0)

    def out_edges(self, u):
        """(neighbor, weight, edge id) triples leaving u."""
        return self._adj[u]

    def incident_edges(self, v):
        return sorted({eid for eid, (a, b, _) in enumerate(self.edges) if v in (a, b)})

    def other_end(self, eid, u):
        a, b, _ = self.edges[eid]
        return b if u == a else a

    def path_vertices(self, s, path):
        """Vertex sequence of an edge-id path that starts at s."""
        out = [s]
        for eid in path:
            out.append(self.other_end(eid, out[-1]))
        return out

    def path_weight(self, path):
        return sum(self.edges[e][2] for e in path)

    def edge_mask(self, removed_edges=(), removed_vertices=()):
        """Boolean mask of edges that survive the given deletions."""
        mask = np.ones(self.m, dtype=bool)
        if removed_edges:
            mask[list(removed_edges)] = False
        if removed_vertices:
            dead = np.zeros(self.n, dtype=bool)
            dead[list(removed_vertices)] = True
            ends = self.endpoint_arrays()
            mask &= ~(dead[ends[0]] | dead[ends[1]])
        return mask

    def induced_edge_mask(self, vertex_mask):
        """Edges whose endpoints are both retained."""
        vertex_mask = np.asarray(vertex_mask, dtype=bool)
        us, vs = self.endpoint_arrays()
        return vertex_mask[us] & vertex_mask[vs]

    def endpoint_arrays(self):
        if not self.edges:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty
        arr = np.array([(u, v) for u, v, _ in self.edges], dtype=np.int64)
        return arr[:, 0], arr[:, 1]

    def subgraph(self, edge_ids):
        """Graph on the same vertex set keeping only `edge_ids` (ids renumbered)."""
        return Graph(self.n, [self.edges[e] for e in sorted(edge_ids)], self.directed)

    def checksum(self):
        return hashlib.sha256(to_edge_list(self).encode()).hexdigest()


# ---------------------------------------------------------------- I/O

def parse_edge_list(text: str) -> Graph:
    """Parse the `n m directed|undirected` header format."""
    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            rows.append(line.split())
    if not rows:
        raise ValueError("empty graph file")
    header = rows[0]
    if len(header) != 3 or header[2] not in ("directed", "undirected"):
        raise ValueError("header must be: n m directed|undirected")
    n, m = int(header[0]), int(header[1])
    body = rows[1:]
    if len(body) != m:
        raise ValueError(f"header announces {m} edges, found {len(body)}")
    edges = []
    for row in body:
        if len(row) != 3:
            raise ValueError(f"edge line must be 'u v w': {' '.join(row)}")
        edges.append(tuple(int(x) for x in row))
    return Graph(n, edges, header[2] == "directed")


def to_edge_list(G: Graph) -> str:
    lines = [f"{G.n} {G.m} {'directed' if G.directed else 'undirected'}"]
    lines += [f"{u} {v} {w}" for u, v, w in G.edges]
    return "\n".join(lines) + "\n"


def read_graph(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh.read())


def write_graph(G: Graph, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(to_edge_list(G))


# ---------------------------------------------------------------- generators

def random_graph(n, m, seed, weights=(1, 8), directed=False):
    """Random simple graph with up to m distinct edges and uniform integer weights."""
    rng = np.random.default_rng(seed)
    if directed:
        pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    else:
        pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    m = min(m, len(pairs))
    chosen = rng.choice(len(pairs), size=m, replace=False)
    lo, hi = weights
    ws = rng.integers(lo, hi + 1, size=m)
    return Graph(n, [(*pairs[c], int(w)) for c, w in zip(chosen, ws)], directed)


def path_graph(n, weight=1):
    return Graph(n, [(i, i + 1, weight) for i in range(n - 1)])


def cycle_graph(n, weight=1):
    return Graph(n, [(i, (i + 1) % n, weight) for i in range(n)])


# ---------------------------------------------------------------- single source

def sssp(G: Graph, s: int, edge_mask=None):
    """Dijkstra from s. Returns a list of distances with `inf` for unreachable."""
    dist = [INF] * G.n
    dist[s] = 0
    heap = [(0, s)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, w, eid in G.out_edges(u):
            if edge_mask is not None and not edge_mask[eid]:
                continue
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def hop_limited_sssp(G: Graph, s: int, L: int, edge_mask=None):
    """Bellman-Ford style DP over hop counts: best weight using at most L edges."""
    dist = [INF] * G.n
    dist[s] = 0
    for _ in range(L):
        nxt = list(dist)
        for u in range(G.n):
            if dist[u] == INF:
                continue
            for v, w, eid in G.out_edges(u):
                if edge_mask is not None and not edge_mask[eid]:
                    continue
                if dist[u] + w < nxt[v]:
                    nxt[v] = dist[u] + w
        dist = nxt
    return dist


def replacement_distance_oracle(G: Graph, s, t, F=(), L=None, vertex_faults=False):
    """dist(s, t, G \\ F), or the L-hop-limited distance when L is given."""
    if vertex_faults:
        if s in F or t in F:
            return INF
        mask = G.edge_mask(removed_vertices=F)
    else:
        mask = G.edge_mask(removed_edges=F)
    if L is None:
        return sssp(G, s, mask)[t]
    return hop_limited_sssp(G, s, L, mask)[t]


# ---------------------------------------------------------------- hop-limited APSP

def _base_keys(G, scale, edge_mask):
    """Key matrix for single edges: weight*scale + 1, diagonal 0.

    Parallel edges keep the lightest one, then the smallest id.
    """
    n = G.n
    key = np.full((n, n), BIG, dtype=np.int64)
    eid = np.full((n, n), -1, dtype=np.int64)
    for e, (u, v, w) in enumerate(G.edges):
        if edge_mask is not None and not edge_mask[e]:
            continue
        k = w * scale + 1
        pairs = ((u, v),) if G.directed else ((u, v), (v, u))
        for a, b in pairs:
            if k < key[a, b]:
                key[a, b], eid[a, b] = k, e
    np.fill_diagonal(key, 0)
    return key, eid


def _minplus(A, B):
    """Min-plus product and the argmin midpoint (smallest index on ties)."""
    total = A[:, :, None] + B[None, :, :]
    mid = np.argmin(total, axis=1)
    out = np.take_along_axis(total, mid[:, None, :], axis=1)[:, 0, :]
    np.minimum(out, BIG, out=out)
    return out, mid


class _Node:
    __slots__ = ("key", "eid", "left", "right", "mid")

    def __init__(self, key, eid=None, left=None, right=None, mid=None):
        self.key, self.eid, self.left, self.right, self.mid = key, eid, left, right, mid


class HopDistanceTable:
    """All-pairs distances over paths with at most L edges, with witness paths.

    Internally every path is scored by weight*(L+1) + hops, so the table
    holds the lightest path and, among those, the one with fewest edges.
    """

    def __init__(self, G, L, root):
        self.graph = G
        self.L = L
        self.scale = L + 1
        self._root = root
        self.keys = root.key

    def _finite(self, s, t):
        return self.keys[s, t] < BIG

    def distance(self, s, t):
        k = int(self.keys[s, t])
        return INF if k >= BIG else k // self.scale

    def hops(self, s, t):
        k = int(self.keys[s, t])
        return None if k >= BIG else k % self.scale

    def distances(self):
        """Weights as a float array with inf for missing paths."""
        out = (self.keys // self.scale).astype(float)
        out[self.keys >= BIG] = np.inf
        return out

    def path(self, s, t):
        """Edge ids of the witness path from s to t, or None."""
        if not self._finite(s, t):
            return None
        out = []
        stack = [(self._root, s, t)]
        while stack:
            node, a, b = stack.pop()
            if a == b:
                continue
            if node.eid is not None:
                out.append(int(node.eid[a, b]))
                continue
            c = int(node.mid[a, b])
            stack.append((node.right, c, b))
            stack.append((node.left, a, c))
        return out


def apsp_hop_limited(G: Graph, L: int, edge_mask=None) -> HopDistanceTable:
    """Exact hop-limited APSP by binary decomposition of L into min-plus powers."""
    if L < 1:
        raise ValueError("hop bound L must be >= 1")
    key, eid = _base_keys(G, L + 1, edge_mask)
    power = _Node(key, eid=eid)
    result = None
    bits = L
    while True:
        if bits & 1:
            if result is None:
                result = power
            else:
                k, mid = _minplus(result.key, power.key)
                result = _Node(k, left=result, right=power, mid=mid)
        bits >>= 1
        if not bits:
            break
        k, mid = _minplus(power.key, power.key)
        power = _Node(k, left=power, right=power, mid=mid)
    return HopDistanceTable(G, L, result)


def hop_limited_matrix(G: Graph, L: int, edge_mask=None) -> np.ndarray:
    """Weights-only hop-limited APSP as a float array (inf for no path)."""
    return apsp_hop_limited(G, L, edge_mask).distances()
