"""Lower-bound instances for replacement-path coverings.

The tower G_f(d) is a weighted tree built recursively: a unit path
u_1..u_d, with a gadget hanging from each u_i (a single leaf for f = 1, a
copy of G_{f-1}(d) otherwise). Attachment weights make root-to-leaf
distances strictly decrease from left to right, and each leaf z_j has a
label of at most f edges whose removal keeps z_j's path but cuts every
path to a later leaf.

The full instance adds a hub v* (joined to u^f_d and to a set X) and the
complete bipartite block B between X and the leaves. Any f-fault-tolerant
BFS structure from the root must keep every edge of B, which forces a
covering with paths of about f*d edges to have at least |B|/(n-1)
subgraphs.
"""

from dataclasses import dataclass, field

import numpy as np

from .budget import check_budget
from .graph import INF, Graph, sssp


@dataclass
class LowerBoundGraph:
    graph: Graph
    f: int
    d: int
    root: int
    leaves: list
    labels: dict           # leaf -> fault edge ids in the full graph
    tower_labels: dict     # leaf -> fault edge ids inside the tower
    leaf_paths: dict       # leaf -> edge ids of the root-to-leaf tower path
    tower_n: int
    tower_m: int
    depth: int
    b_edges: list = field(default_factory=list)
    hub: int | None = None
    X: list = field(default_factory=list)

    def tags(self):
        out = {v: "tower" for v in range(self.tower_n)}
        if self.hub is not None:
            out[self.hub] = "v*"
        out.update({x: "X" for x in self.X})
        return out

    def labels_json(self):
        return {
            "f": self.f, "d": self.d, "n": self.graph.n, "root": self.root,
            "leaves": self.leaves,
            "labels": {str(z): list(self.labels[z]) for z in self.leaves},
            "b_edges": self.b_edges,
        }


class _Builder:
    def __init__(self):
        self.n = 0
        self.edges = []

    def vertex(self):
        self.n += 1
        return self.n - 1

    def edge(self, u, v, w):
        self.edges.append((u, v, w))
        return len(self.edges) - 1


def _tower(b, f, d):
    """Build G_f(d) into builder b.

    Returns (root, leaves, labels, paths, depth) where depth is the largest
    weighted distance from the root. The top path u_1..u_d always gets the
    first d vertex ids of the call.
    """
    us = [b.vertex() for _ in range(d)]
    top = [b.edge(us[i], us[i + 1], 1) for i in range(d - 1)]
    leaves, labels, paths = [], [], []
    if f == 1:
        for i in range(1, d + 1):
            z = b.vertex()
            e = b.edge(us[i - 1], z, 6 + 2 * (d - i))
            leaves.append(z)
            labels.append((top[i - 1],) if i < d else ())
            paths.append(tuple(top[:i - 1]) + (e,))
        depth = max(i - 1 + 6 + 2 * (d - i) for i in range(1, d + 1))
        return us[0], leaves, labels, paths, depth
    sub_depth = None
    depth = 0
    for i in range(1, d + 1):
        root, sl, slab, spaths, sdepth = _tower(b, f - 1, d)
        sub_depth = sdepth if sub_depth is None else sub_depth
        e = b.edge(us[i - 1], root, (d - i) * sub_depth)
        for z, lab, p in zip(sl, slab, spaths):
            leaves.append(z)
            labels.append(((top[i - 1],) if i < d else ()) + lab)
            paths.append(tuple(top[:i - 1]) + (e,) + p)
        depth = max(depth, i - 1 + (d - i) * sub_depth + sdepth)
    return us[0], leaves, labels, paths, depth


def build_gfd(f, d) -> LowerBoundGraph:
    """The tower G_f(d) alone."""
    if f < 1 or d < 1:
        raise ValueError("need f >= 1 and d >= 1")
    b = _Builder()
    root, leaves, labels, paths, depth = _tower(b, f, d)
    G = Graph(b.n, b.edges)
    labels = dict(zip(leaves, (tuple(sorted(x)) for x in labels)))
    return LowerBoundGraph(G, f, d, root, leaves, labels, dict(labels), dict(zip(leaves, paths)),
                           b.n, len(b.edges), depth)


def tower_size(f, d):
    """N(f, d): vertices of the tower (2d for f = 1, d + d*N(f-1, d) after)."""
    return 2 * d if f == 1 else d + d * tower_size(f - 1, d)


def build_lower_bound_graph(f, d, n) -> LowerBoundGraph:
    """Tower plus hub v*, the set X and the bipartite block B (all unit weights).

    Leaves in the last top-level copy keep u^f_d connected to the root
    under their tower label, which would let the route through v* reach X;
    their label therefore also includes the edge (u^f_d, v*).
    """
    tower = build_gfd(f, d)
    chi = n - tower.tower_n - 1
    if chi < 1:
        raise ValueError(f"n={n} too small: the tower alone has {tower.tower_n} vertices")
    edges = list(tower.graph.edges)
    last_top = tower.root + d - 1     # u^f_d
    hub = tower.tower_n
    X = list(range(hub + 1, hub + 1 + chi))
    hub_edge = len(edges)
    edges.append((last_top, hub, 1))
    edges += [(hub, x, 1) for x in X]
    b_edges = []
    for z in tower.leaves:
        for x in X:
            b_edges.append(len(edges))
            edges.append((z, x, 1))
    G = Graph(n, edges)
    labels = {}
    reach = _tower_reach(tower)
    for z in tower.leaves:
        lab = tower.tower_labels[z]
        if reach(lab, last_top):
            lab = tuple(sorted(lab + (hub_edge,)))
        labels[z] = lab
    return LowerBoundGraph(G, f, d, tower.root, tower.leaves, labels, tower.tower_labels,
                           tower.leaf_paths, tower.tower_n, tower.tower_m, tower.depth,
                           b_edges, hub, X)


def _tower_reach(tower):
    G = tower.graph

    def reach(removed, target):
        return sssp(G, tower.root, G.edge_mask(removed_edges=removed))[target] < INF
    return reach


@dataclass
class PropertyReport:
    ok: bool
    unique_paths: bool
    survive_own_label: bool
    later_paths_cut: bool
    weights_decreasing: bool
    failures: list = field(default_factory=list)


def _count_simple_paths(G, s, t, cap=2):
    """Number of simple s-t paths, stopping early at `cap`."""
    count = 0
    stack = [(s, 0, {s})]
    while stack:
        u, _, seen = stack.pop()
        if u == t:
            count += 1
            if count >= cap:
                return count
            continue
        for v, _, _ in G.out_edges(u):
            if v not in seen:
                stack.append((v, 0, seen | {v}))
    return count


def check_replacement_path_properties(lbg: LowerBoundGraph, budget=None) -> PropertyReport:
    """Check path uniqueness, label survival, label cuts and weight order on the tower."""
    tower = Graph(lbg.tower_n, lbg.graph.edges[:lbg.tower_m])
    lam = len(lbg.leaves)
    check_budget(lam * lam * tower.m, budget, "lower-bound property check")
    failures = []
    unique = survive = cut = decreasing = True
    for j, z in enumerate(lbg.leaves):
        path = set(lbg.leaf_paths[z])
        label = set(lbg.tower_labels[z])
        if _count_simple_paths(tower, lbg.root, z) != 1:
            unique = False
            failures.append(("unique", z))
        if path & label:
            survive = False
            failures.append(("survive", z))
        for i in range(j + 1, lam):
            if not set(lbg.leaf_paths[lbg.leaves[i]]) & label:
                cut = False
                failures.append(("cut", z, lbg.leaves[i]))
    weights = [tower.path_weight(lbg.leaf_paths[z]) for z in lbg.leaves]
    dist = sssp(tower, lbg.root)
    if weights != [dist[z] for z in lbg.leaves]:
        failures.append(("weights", "path weight differs from distance"))
        decreasing = False
    if any(a <= b for a, b in zip(weights, weights[1:])):
        decreasing = False
        failures.append(("weights", weights))
    ok = unique and survive and cut and decreasing
    return PropertyReport(ok, unique, survive, cut, decreasing, failures)


@dataclass
class NecessityReport:
    ok: bool
    witnessed: int
    total: int
    missing: list = field(default_factory=list)


def check_ftbfs_necessity(lbg: LowerBoundGraph, budget=None) -> NecessityReport:
    """For every B edge e = (z, x), removing Label(z) and then e must lengthen dist(root, x)."""
    G = lbg.graph
    check_budget(2 * len(lbg.b_edges) * (G.n + G.m), budget, "FT-BFS necessity check")
    missing = []
    cache = {}
    for e in lbg.b_edges:
        z, x, _ = G.edges[e]
        F = lbg.labels[z]
        if F not in cache:
            cache[F] = sssp(G, lbg.root, G.edge_mask(removed_edges=F))
        before = cache[F][x]
        after = sssp(G, lbg.root, G.edge_mask(removed_edges=F + (e,)))[x]
        if not after > before:
            missing.append(e)
    return NecessityReport(not missing, len(lbg.b_edges) - len(missing), len(lbg.b_edges), missing)


def hop_diameter(G: Graph) -> int:
    """Largest finite number of edges on a fewest-edge path between two vertices."""
    unit = Graph(G.n, [(u, v, 1) for u, v, _ in G.edges], G.directed)
    best = 0
    for s in range(G.n):
        best = max([best] + [d for d in sssp(unit, s) if d < INF])
    return int(best)


def shortest_path_tree(G, s, edge_mask=None):
    """Edge ids of a deterministic shortest-path tree from s (smallest edge id on ties)."""
    dist = sssp(G, s, edge_mask)
    tree = []
    for v in range(G.n):
        if v == s or dist[v] == INF:
            continue
        for u, w, e in sorted(G.out_edges(v), key=lambda t: t[2]):
            if (edge_mask is None or edge_mask[e]) and dist[u] + w == dist[v]:
                tree.append(e)
                break
    return tree


def ftbfs_from_rpc(G, rpc, s):
    """Union of shortest-path trees from s over the subgraphs of an edge-mode covering."""
    masks = rpc.edge_masks(G)
    H = set()
    for mask in masks:
        H.update(shortest_path_tree(G, s, mask))
    return sorted(H)


def covering_floor(lbg: LowerBoundGraph) -> int:
    """ceil(|B| / (n - 1)): fewest subgraphs whose shortest-path trees can hold all of B."""
    n = lbg.graph.n
    return -(-len(lbg.b_edges) // (n - 1))


def leaf_hops(lbg):
    return np.array([len(lbg.leaf_paths[z]) for z in lbg.leaves])
