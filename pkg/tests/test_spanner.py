import math
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from rpcover.graph import INF, Graph, random_graph, sssp
from rpcover.rpc import build_rpc
from rpcover.spanner import (
    SpannerResult, additive_two_spanner, ft_additive_spanner, ft_multiplicative_spanner,
    greedy_spanner, verify_ft_spanner,
)


def unweighted(n, m, seed):
    return random_graph(n, m, seed=seed, weights=(1, 1))


def stretch_ok(G, H_edges, mult, add=0, removed=()):
    alive = G.edge_mask(removed_vertices=removed)
    in_h = np.zeros(G.m, dtype=bool)
    in_h[list(H_edges)] = True
    for s in range(G.n):
        if s in removed:
            continue
        dg, dh = sssp(G, s, alive), sssp(G, s, alive & in_h)
        for t in range(G.n):
            if t not in removed and dh[t] > mult * dg[t] + add:
                return False
    return True


def test_greedy_drops_heavy_triangle_edge():
    G = Graph(3, [(0, 1, 1), (1, 2, 1), (0, 2, 3)])
    assert greedy_spanner(G, 1) == [0, 1]
    assert greedy_spanner(G, 2) == [0, 1]
    # a tie is already covered by the two-edge path
    assert greedy_spanner(Graph(3, [(0, 1, 1), (1, 2, 1), (0, 2, 2)]), 1) == [0, 1]
    # a strictly shorter direct edge has to stay in a 1-spanner, not in a 3-spanner
    G3 = Graph(3, [(0, 1, 2), (1, 2, 2), (0, 2, 3)])
    assert greedy_spanner(G3, 1) == [0, 1, 2]
    assert greedy_spanner(G3, 2) == [0, 1]


@pytest.mark.parametrize("k", [1, 2, 3])
def test_greedy_stretch_and_size(k):
    for seed in range(50):
        n = 6 + seed % 10
        G = random_graph(n, 3 * n, seed=seed)
        H = greedy_spanner(G, k)
        assert stretch_ok(G, H, 2 * k - 1)
        assert len(H) < n * (1 + n ** (1 / k))


def test_greedy_rejects_directed_and_bad_k():
    with pytest.raises(ValueError):
        greedy_spanner(random_graph(5, 6, seed=0, directed=True), 2)
    with pytest.raises(ValueError):
        greedy_spanner(random_graph(5, 6, seed=0), 0)


@pytest.mark.parametrize("seed", range(10))
def test_additive_two_spanner(seed):
    G = unweighted(9 + seed % 3, 25, seed)
    assert stretch_ok(G, additive_two_spanner(G), 1, 2)


def test_zero_faults_is_plain_greedy():
    G = random_graph(8, 16, seed=3)
    res = ft_multiplicative_spanner(G, 2, 0)
    assert res.cv == 1
    assert res.edges == greedy_spanner(G, 2)


@pytest.mark.parametrize("k,f,seed", [(1, 1, 0), (1, 2, 1), (2, 1, 2), (2, 2, 3), (2, 2, 4)])
def test_ft_multiplicative_exhaustive(k, f, seed):
    G = random_graph(9, 18, seed=seed)
    res = ft_multiplicative_spanner(G, k, f)
    rep = verify_ft_spanner(G, res)
    assert rep.ok, rep.violations[:3]
    assert rep.worst_ratio <= 2 * k - 1
    assert rep.fault_sets == sum(math.comb(G.n, j) for j in range(f + 1))
    assert res.contract() == {"kind": "multiplicative", "multiplicative": str(2 * k - 1), "additive": 0, "f": f}
    # every kept edge is traced back to the subgraphs that produced it
    assert set(res.edges) == {e for e in res.provenance if isinstance(e, int)}
    assert len(res.subgraph_sizes) == res.cv


@pytest.mark.parametrize("eps,f,seed", [(1, 1, 0), (1, 2, 1), (Fraction(1, 2), 1, 2), (Fraction(1, 2), 2, 3)])
def test_ft_additive_exhaustive(eps, f, seed):
    G = unweighted(9, 20, seed)
    res = ft_additive_spanner(G, f, eps, base=additive_two_spanner, base_stretch=(1, 2))
    assert res.mult == 1 + Fraction(eps)
    assert res.provenance["L"] == math.ceil(2 / Fraction(eps)) + 1
    rep = verify_ft_spanner(G, res)
    assert rep.ok, rep.violations[:3]


def test_ft_additive_default_base():
    G = unweighted(8, 16, 5)
    res = ft_additive_spanner(G, 1, 1)
    assert res.mult == 4 and res.add == 0
    assert verify_ft_spanner(G, res).ok


def test_additive_argument_checks():
    G = unweighted(7, 12, 0)
    with pytest.raises(ValueError):
        ft_additive_spanner(G, 5, 1, base=additive_two_spanner, base_stretch=(1, 2))
    with pytest.raises(ValueError):
        ft_additive_spanner(random_graph(7, 12, seed=0, weights=(1, 5)), 1, 1,
                            base=additive_two_spanner, base_stretch=(1, 2))
    with pytest.raises(ValueError):
        ft_additive_spanner(G, 1, 0)


def test_verifier_accepts_whole_graph_and_flags_missing_bridge():
    G = Graph(5, [(0, 1, 1), (1, 2, 1), (2, 0, 1), (2, 3, 1), (3, 4, 1)])
    whole = SpannerResult(list(range(G.m)), "multiplicative", Fraction(1), 0, 1)
    rep = verify_ft_spanner(G, whole)
    assert rep.ok and rep.worst_ratio == 1.0
    broken = SpannerResult([0, 1, 2, 4], "multiplicative", Fraction(3), 0, 1)
    rep = verify_ft_spanner(G, broken)
    assert not rep.ok
    v = rep.violations[0]
    assert v["spanner"] is None and {v["s"], v["t"]} & {3}


def test_vertex_cover_of_every_edge():
    # the (2, f) vertex covering behind the multiplicative conversion: for each
    # edge (u, v) and vertex set F missing u and v, some subgraph keeps u, v and drops F
    G = random_graph(8, 14, seed=7)
    for f in (1, 2):
        rpc = build_rpc(G, 2, f, mode="vertex")
        R = rpc.retained_matrix()
        for u, v, _ in G.edges:
            for size in range(f + 1):
                for F in combinations(sorted(set(range(G.n)) - {u, v}), size):
                    keep = R[:, u] & R[:, v]
                    for x in F:
                        keep &= ~R[:, x]
                    assert keep.any()


def test_spanner_on_disconnected_graph():
    G = Graph(6, [(0, 1, 2), (1, 2, 1), (3, 4, 1)])
    res = ft_multiplicative_spanner(G, 2, 1)
    rep = verify_ft_spanner(G, res)
    assert rep.ok
    assert sssp(G, 0)[5] == INF
