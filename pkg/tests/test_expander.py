import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from compatham.conflicts import ConflictSystem, gen_adversarial
from compatham.expander import (
    BUDGET_EXCEEDED,
    CERTIFIED_FALSE,
    CERTIFIED_TRUE,
    DOutParams,
    ExpanderParams,
    build_compatible_expander,
    is_expander,
)
from compatham.graph import Graph, complete_graph, cycle_graph, gen_gnp

from strategies import graphs, seeds


def _brute_expands(R, k, r):
    for t in range(1, k + 1):
        for X in itertools.combinations(range(R.n), t):
            if len(R.neighborhood(X) - set(X)) < r * t:
                return False
    return True


def test_k9_expands():
    assert is_expander(complete_graph(9), ExpanderParams(k=3, r=2)).status == CERTIFIED_TRUE


def test_edgeless_fails_with_singleton():
    c = is_expander(Graph(5), ExpanderParams(k=1, r=1))
    assert c.status == CERTIFIED_FALSE
    assert len(c.witness) == 1


def test_c5():
    assert is_expander(cycle_graph(5), ExpanderParams(k=1, r=2)).status == CERTIFIED_TRUE
    c = is_expander(cycle_graph(5), ExpanderParams(k=2, r=2))
    assert c.status == CERTIFIED_FALSE
    X = set(c.witness)
    assert len(cycle_graph(5).neighborhood(X) - X) < 2 * len(X)


def test_budget_exceeded():
    G = gen_gnp(200, 0.2, 1)
    c = is_expander(G, ExpanderParams(k=50, r=2, enumeration_budget=100))
    assert c.status == BUDGET_EXCEEDED


@pytest.mark.parametrize("kw", [{"k": 0}, {"r": 0.5}])
def test_params_validation(kw):
    with pytest.raises(ValueError):
        ExpanderParams(**kw)


@settings(max_examples=60, deadline=None)
@given(graphs(min_n=1, max_n=8), st.integers(1, 3), st.sampled_from([1.0, 1.5, 2.0]))
def test_certificate_matches_brute_force(R, k, r):
    c = is_expander(R, ExpanderParams(k=k, r=r))
    truth = _brute_expands(R, min(k, R.n), r)
    assert c.status == (CERTIFIED_TRUE if truth else CERTIFIED_FALSE)
    if c.status == CERTIFIED_FALSE:
        X = set(c.witness)
        assert 1 <= len(X) <= k
        assert len(R.neighborhood(X) - X) < r * len(X)


def test_k50_d5():
    G = complete_graph(50)
    b = build_compatible_expander(G, ConflictSystem.empty(G), DOutParams(d=5, seed=3))
    assert b.ok
    assert b.graph.m <= 250
    assert is_expander(b.graph, ExpanderParams(k=12, r=2)).status == CERTIFIED_TRUE


def test_two_disjoint_cliques_fail():
    G = Graph(50, [(u, v) for base in (0, 25) for u in range(base, base + 25) for v in range(u + 1, base + 25)])
    b = build_compatible_expander(G, ConflictSystem.empty(G), DOutParams(d=5, seed=0, max_retries=3))
    assert not b.ok
    assert b.certificate is not None and b.certificate.status == CERTIFIED_FALSE


def _pair_scan(R, G, S):
    ids = [G.edge_id(u, v) for u, v in R.edges]
    return all(S.is_compatible_pair(e, f) for e, f in itertools.combinations(ids, 2))


def test_gnp_400_compatible():
    import math
    n = 400
    p = 3 * math.log(n) / n
    G = gen_gnp(n, p, 12)
    S = gen_adversarial(G, "random_bounded", 12, delta=int(0.02 * n * p))
    # certification at k = 100 is out of reach; only compatibility is asserted
    b = build_compatible_expander(G, S, DOutParams(d=8, seed=12), ExpanderParams(enumeration_budget=20_000),
                                  strict=False)
    assert b.ok
    assert b.graph.m <= 8 * n
    assert _pair_scan(b.graph, G, S)


@settings(max_examples=20, deadline=None)
@given(st.integers(12, 40), seeds, st.integers(1, 2))
def test_drop_on_stall_output_is_compatible(n, seed, delta):
    G = gen_gnp(n, 0.5, seed)
    S = gen_adversarial(G, "random_bounded", seed, delta=delta)
    b = build_compatible_expander(G, S, DOutParams(d=3, seed=seed, max_retries=2), strict=False,
                                  drop_on_stall=True)
    if b.ok:
        assert all(G.has_edge(u, v) for u, v in b.graph.edges)
        assert _pair_scan(b.graph, G, S)
