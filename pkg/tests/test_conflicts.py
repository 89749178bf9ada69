import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from compatham.conflicts import (
    ConflictSystem,
    Mode,
    SystemFormatError,
    from_local_coloring,
    gen_adversarial,
    is_compatible_pair,
    max_bound,
)
from compatham.graph import Graph, complete_graph, cycle_graph, gen_gnp

from strategies import graphs, seeds


def star(k):
    return Graph(k + 1, [(0, i) for i in range(1, k + 1)])


def test_empty_system_allows_everything():
    G = complete_graph(4)
    S = ConflictSystem.empty(G)
    for e, f in itertools.combinations(range(G.m), 2):
        assert is_compatible_pair(S, e, f)


def test_local_pair_symmetric():
    G = star(3)
    S = ConflictSystem.from_pairs(G, [(0, 0, 1)])
    assert not is_compatible_pair(S, 0, 1)
    assert not is_compatible_pair(S, 1, 0)
    assert is_compatible_pair(S, 0, 2)


def test_global_colours_conflict_disjoint_edges():
    G = cycle_graph(4)  # edges (0,1) (0,3) (1,2) (2,3)
    S = ConflictSystem.from_colors(G, [3, 1, 2, 3])
    assert S.mode is Mode.GLOBAL
    assert G.edge(0) == (0, 1) and G.edge(3) == (2, 3)
    assert not is_compatible_pair(S, 0, 3)
    assert is_compatible_pair(S, 0, 1)


def test_star_one_colour():
    S = from_local_coloring(star(3), {0: 1, 1: 1, 2: 1})
    assert len(S.pairs()) == 3
    assert max_bound(S).max_bound == 2


def test_rainbow_k4_gives_empty_system():
    G = complete_graph(4)
    S = from_local_coloring(G, list(range(6)))
    assert S.pairs() == []
    assert max_bound(S).max_bound == 0


def _brute_multiplicity(G, colors):
    best = 0
    for v in range(G.n):
        counts = {}
        for e in G.incident_edges(v):
            counts[colors[e]] = counts.get(colors[e], 0) + 1
        best = max([best, *counts.values()])
    return max(best - 1, 0)


def test_coloring_bound_matches_multiplicity_scan():
    G = gen_gnp(100, 0.3, 4)
    colors = np.random.default_rng(4).integers(0, 5, G.m).tolist()
    S = from_local_coloring(G, colors)
    assert max_bound(S).max_bound == _brute_multiplicity(G, colors)


def test_random_bounded_zero_is_empty():
    S = gen_adversarial(gen_gnp(30, 0.3, 1), "random_bounded", 1, delta=0)
    assert S.pairs() == []


def test_star_killer():
    G = star(3)
    S = gen_adversarial(G, "star_killer", vertex=0)
    assert len(S.pairs()) == 3
    assert max_bound(S).max_bound == 2


def test_random_bounded_on_gnp_200():
    S = gen_adversarial(gen_gnp(200, 0.1, 11), "random_bounded", 11, delta=5)
    assert max_bound(S).max_bound <= 5


@pytest.mark.parametrize("kind, kw", [("nope", {}), ("star_killer", {}), ("global_random", {"bound": 0}),
                                      ("random_bounded", {"delta": -1})])
def test_generator_errors(kind, kw):
    with pytest.raises(ValueError):
        gen_adversarial(complete_graph(4), kind, **kw)


def test_pair_must_share_vertex():
    G = cycle_graph(4)
    with pytest.raises(ValueError):
        ConflictSystem.from_pairs(G, [(0, G.edge_id(0, 1), G.edge_id(2, 3))])


@settings(max_examples=40, deadline=None)
@given(graphs(min_n=2, max_n=9), st.integers(0, 4), seeds)
def test_random_bounded_respects_delta(G, delta, seed):
    S = gen_adversarial(G, "random_bounded", seed, delta=delta)
    assert max_bound(S).max_bound <= delta


@given(graphs(min_n=2, max_n=8), seeds)
def test_pair_query_symmetric(G, seed):
    S = gen_adversarial(G, "random_bounded", seed, delta=2)
    for e, f in itertools.permutations(range(G.m), 2):
        assert is_compatible_pair(S, e, f) == is_compatible_pair(S, f, e)


@given(graphs(min_n=2, max_n=8), st.data())
def test_local_coloring_agrees_with_colours(G, data):
    colors = data.draw(st.lists(st.integers(0, 3), min_size=G.m, max_size=G.m))
    S = from_local_coloring(G, colors)
    for e, f in itertools.combinations(range(G.m), 2):
        if set(G.edge(e)) & set(G.edge(f)):
            assert is_compatible_pair(S, e, f) == (colors[e] != colors[f])
        else:
            assert is_compatible_pair(S, e, f)


@settings(max_examples=30, deadline=None)
@given(graphs(min_n=2, max_n=8), seeds, st.booleans())
def test_serialization_round_trip(tmp_path_factory, G, seed, colour):
    if colour:
        S = gen_adversarial(G, "global_random", seed, bound=2)
    else:
        S = gen_adversarial(G, "random_bounded", seed, delta=2)
    path = tmp_path_factory.mktemp("sys") / "s.json"
    S.save(path)
    T = ConflictSystem.load(G, path)
    assert T.mode is S.mode
    assert sorted(T.pairs()) == sorted(S.pairs())
    assert T.colors == S.colors


def test_load_rejects_garbage(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises((SystemFormatError, ValueError)):
        ConflictSystem.load(complete_graph(3), p)
