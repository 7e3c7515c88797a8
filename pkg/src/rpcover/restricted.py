"""Restricted coverings: cover an explicit list of (path, fault set) pairs.

A strong hit-and-miss family separates any pair with at least half of its
functions, so a greedy hitting set over the separating index sets picks
O(log |D|) functions. Each chosen function h contributes the subgraphs
G_{h,S} = {e : h(e) not in S}; the one with S = h(F) keeps P and drops F.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .budget import check_budget
from .dso import greedy_hitting_set, hitting_set_bound
from .hashing import build_rs_hm, subsets_upto
from .rpc import RpcFamily, SubgraphRef


@dataclass(frozen=True)
class CriticalPair:
    path: tuple
    faults: tuple

    def to_json(self):
        return {"path": list(self.path), "faults": list(self.faults)}


def critical_list(pairs, m=None, L=None, f=None):
    """Validate (path, faults) pairs: known edge ids, disjoint, sizes within (L, f)."""
    out = []
    for k, item in enumerate(pairs):
        if isinstance(item, dict):
            path, faults = item.get("path"), item.get("faults")
        else:
            path, faults = item
        if path is None or faults is None:
            raise ValueError(f"pair {k} needs 'path' and 'faults'")
        path = tuple(int(e) for e in path)
        faults = tuple(sorted({int(e) for e in faults}))
        if len(set(path)) != len(path):
            raise ValueError(f"pair {k}: path repeats an edge")
        if set(path) & set(faults):
            raise ValueError(f"pair {k}: path and fault set intersect")
        if L is not None and len(path) > L:
            raise ValueError(f"pair {k}: path has {len(path)} edges, more than L={L}")
        if f is not None and len(faults) > f:
            raise ValueError(f"pair {k}: {len(faults)} faults, more than f={f}")
        if m is not None and any(not 0 <= e < m for e in path + faults):
            raise ValueError(f"pair {k}: edge id outside [0, {m})")
        out.append(CriticalPair(path, faults))
    return out


def load_critical_list(path, m=None, L=None, f=None):
    with open(path, encoding="utf-8") as fh:
        return critical_list(json.load(fh), m, L, f)


def dump_critical_list(D):
    return json.dumps([p.to_json() for p in D])


def random_critical_list(G, L, f, size, seed):
    """Random simple paths of 1..L edges, each with a disjoint random fault set of 0..f edges."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < size:
        v = int(rng.integers(G.n))
        seen, path = {v}, []
        for _ in range(int(rng.integers(1, L + 1))):
            steps = [(u, e) for u, _, e in G.out_edges(v) if u not in seen]
            if not steps:
                break
            u, e = steps[int(rng.integers(len(steps)))]
            seen.add(u)
            path.append(e)
            v = u
        if not path:
            continue
        rest = np.setdiff1d(np.arange(G.m), path)
        k = min(int(rng.integers(f + 1)), len(rest))
        faults = rng.choice(rest, size=k, replace=False).tolist()
        out.append(CriticalPair(tuple(path), tuple(sorted(int(e) for e in faults))))
    return out


def separating_indices(H, pair):
    """Functions h with h(path) and h(faults) disjoint."""
    M = H.matrix()
    if not pair.faults:
        return np.arange(H.size)
    P = M[:, list(pair.path)]
    F = M[:, list(pair.faults)]
    clash = (P[:, :, None] == F[:, None, :]).any(axis=(1, 2))
    return np.flatnonzero(~clash)


def select_function_subset(H, D):
    """Greedy hitting set over the separating index sets of the pairs in D.

    With a strong family each set holds at least half of the functions, so
    the result has at most ceil(2 ln |D|) + 1 indices.
    """
    D = list(D)
    if not D:
        return []
    sets = [separating_indices(H, p) for p in D]
    l_min = min(len(s) for s in sets)
    if l_min == 0:
        bad = next(p for p, s in zip(D, sets) if len(s) == 0)
        raise ValueError(f"no function separates path {list(bad.path)} from faults {list(bad.faults)}")
    chosen = greedy_hitting_set([set(s.tolist()) for s in sets], H.size, l_min)
    assert len(chosen) <= hitting_set_bound(H.size, l_min, len(D))
    return chosen


def selection_bound(n_pairs):
    return math.ceil(2 * math.log(n_pairs)) + 1 if n_pairs else 0


def build_restricted_rpc(G, L, f, D, lazy=False, budget=None):
    """Edge covering that serves the pairs of D (L >= f).

    Eager mode emits every S of at most f values for each selected
    function; lazy mode only the images h(F) of the listed fault sets and
    the empty set.
    """
    if L < f:
        raise ValueError(f"restricted coverings need L >= f (got L={L}, f={f})")
    if G.m == 0:
        raise ValueError("graph has no edges")
    D = critical_list([(p.path, p.faults) if isinstance(p, CriticalPair) else p for p in D], G.m, L, f)
    H = build_rs_hm(G.m, L, max(f, 1), strong=True)
    check_budget(len(D) * H.size * (L + 1) * (f + 1), budget, "separation checks")
    chosen = select_function_subset(H, D)
    M = H.matrix()
    subgraphs = []
    for i in chosen:
        if lazy:
            images = {()} | {tuple(sorted(set(M[i, list(p.faults)].tolist()))) for p in D}
            subsets = sorted(images, key=lambda S: (len(S), S))
        else:
            subsets = subsets_upto(H.q, f)
        subgraphs += [(int(i), tuple(S)) for S in subsets]
    refs = [SubgraphRef(j, i, S, 1) for j, (i, S) in enumerate(subgraphs)]
    construction = {"kind": "restricted", "family": H.to_json(),
                    "subgraphs": [[i, list(S)] for i, S in subgraphs], "lazy": bool(lazy)}
    return RpcFamily("edge", L, f, G.m, "restricted", refs, family=H, construction=construction)


def selected_functions(rpc):
    return sorted({i for i, _ in rpc.construction["subgraphs"]})


@dataclass
class RestrictedReport:
    ok: bool
    pairs: int
    uncovered: list = field(default_factory=list)

    def to_json(self):
        return {"ok": self.ok, "pairs": self.pairs, "uncovered": [p.to_json() for p in self.uncovered]}


def covering_subgraphs(rpc, pair):
    """Indices of subgraphs that keep every edge of the path and none of the faults."""
    R = rpc.retained_matrix()
    keep = R[:, list(pair.path)].all(axis=1)
    if pair.faults:
        keep &= ~R[:, list(pair.faults)].any(axis=1)
    return np.flatnonzero(keep)


def verify_restricted(rpc, D):
    D = critical_list([(p.path, p.faults) if isinstance(p, CriticalPair) else p for p in D], rpc.N)
    uncovered = [p for p in D if len(covering_subgraphs(rpc, p)) == 0]
    return RestrictedReport(not uncovered, len(D), uncovered)
