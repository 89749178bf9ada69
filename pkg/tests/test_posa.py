import math
from collections import deque

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from compatham.conflicts import ConflictSystem, gen_adversarial
from compatham.expander import DOutParams
from compatham.graph import Graph, complete_graph, cycle_graph, gen_gnp, path_edges
from compatham.posa import (
    SolveLimits,
    find_boosters,
    find_boosters_with_witnesses,
    rotate_reachable_ends,
    solve_constrained,
)
from compatham.verify import brute_force_boosters, brute_force_hamilton, verify_cycle

from strategies import graphs, seeds


def rotation_oracle(P, R, fixed):
    # BFS over every path state reachable by elementary rotations
    P = list(P) if P[0] == fixed else list(P)[::-1]
    edges = {frozenset(e) for e in path_edges(P)} | {frozenset(e) for e in R.edges}
    start = tuple(P)
    seen = {start}
    queue = deque([start])
    ends = set()
    while queue:
        path = queue.popleft()
        ends.add(path[-1])
        end = path[-1]
        for i in range(len(path) - 2):
            if frozenset((end, path[i])) in edges:
                nxt = path[:i + 1] + path[i + 1:][::-1]
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
    return ends


def test_no_r_only_opposite_end():
    assert rotate_reachable_ends([0, 1, 2, 3], Graph(4), 0) == {3}


def test_single_rotation():
    R = Graph(5, [(4, 1)])
    assert rotate_reachable_ends([0, 1, 2, 3, 4], R, 0) == {4, 2}


@settings(max_examples=150, deadline=None)
@given(graphs(min_n=2, max_n=8), st.data())
def test_exhaustive_rotations_match_oracle(R, data):
    perm = data.draw(st.permutations(range(R.n)))
    k = data.draw(st.integers(2, R.n))
    P = perm[:k]
    fixed = data.draw(st.sampled_from([P[0], P[-1]]))
    assert rotate_reachable_ends(P, R, fixed) == rotation_oracle(P, R, fixed)
    assert rotate_reachable_ends(P, R, fixed, exhaustive=False) <= rotation_oracle(P, R, fixed)


def test_triangle_boosters():
    got = find_boosters([0, 1, 2], Graph(3, [(2, 0)]), complete_graph(3))
    assert got == {frozenset(p) for p in [(0, 1), (1, 2), (2, 0)]}


@pytest.mark.parametrize("P", [[0, 1], [0], [0, 1, 0]])
def test_degenerate_paths_rejected(P):
    with pytest.raises(ValueError):
        find_boosters(P, Graph(3), complete_graph(3))


@settings(max_examples=300, deadline=None)
@given(graphs(min_n=3, max_n=7), graphs(min_n=7, max_n=7), st.data())
def test_boosters_match_brute_force(R, host, data):
    R = Graph(7, R.edges)
    perm = data.draw(st.permutations(range(7)))
    P = perm[:data.draw(st.integers(3, 7))]
    assert find_boosters(P, R, host) == brute_force_boosters(P, R, host)


def _check_witnesses(P, R, host, found):
    union = {frozenset(e) for e in path_edges(P)} | {frozenset(e) for e in R.edges}
    for pair, path in found.items():
        v, w = tuple(pair)
        assert host.has_edge(v, w)
        assert sorted(path) == sorted(P)
        assert {path[0], path[-1]} == {v, w}
        assert all(frozenset(e) in union for e in path_edges(path))


@settings(max_examples=100, deadline=None)
@given(st.integers(3, 20), seeds)
def test_booster_witnesses_close_cycles(n, seed):
    host = gen_gnp(n, 0.6, seed)
    R = gen_gnp(n, 0.3, seed + 1)
    P = list(range(n))
    P = [v for v in P if v % 3 != 2] or P
    if len(P) < 3:
        return
    _check_witnesses(P, R, host, find_boosters_with_witnesses(P, R, host))


def test_large_path_uses_closure_subset():
    host = complete_graph(14)
    R = gen_gnp(14, 0.3, 2)
    P = list(range(14))
    fast = find_boosters(P, R, host)
    exact = find_boosters(P, R, host, exact_limit=14)
    assert fast <= exact
    assert frozenset((0, 13)) in fast


def test_cycle_graph_returns_the_cycle():
    n = 12
    G = cycle_graph(n)
    rep = solve_constrained(G, ConflictSystem.empty(G), DOutParams(d=2, seed=1))
    assert rep.success
    c = rep.cycle
    assert all(G.has_edge(c[i], c[(i + 1) % n]) for i in range(n))


def test_star_killer_k4_fails():
    G = complete_graph(4)
    S = gen_adversarial(G, "star_killer", vertex=0)
    rep = solve_constrained(G, S, DOutParams(d=3, seed=0), SolveLimits(time_limit=5, max_restarts=2))
    assert not rep.success
    assert brute_force_hamilton(G, S) is None


def test_gnp_300_compatible():
    n = 300
    p = 3 * math.log(n) / n
    G = gen_gnp(n, p, 300)
    S = gen_adversarial(G, "random_bounded", 300, delta=int(0.02 * n * p))
    rep = solve_constrained(G, S, DOutParams(seed=300), SolveLimits(time_limit=60))
    assert rep.success, rep.reason
    assert verify_cycle(G, S, rep.cycle, "compatible").passed


def test_k8_rainbow():
    G = complete_graph(8)
    S = ConflictSystem.from_colors(G, list(range(28)))
    rep = solve_constrained(G, S, DOutParams(d=3, seed=4))
    assert rep.success
    assert verify_cycle(G, S, rep.cycle, "rainbow").passed


def test_low_degree_input_rejected():
    G = Graph(4, [(0, 1), (1, 2), (2, 3)])
    rep = solve_constrained(G, ConflictSystem.empty(G), DOutParams(d=2))
    assert not rep.success
    assert rep.stage == "input"


@settings(max_examples=30, deadline=None)
@given(st.integers(8, 60), st.floats(0.15, 0.6), seeds, st.integers(0, 3))
def test_successes_verify_and_path_never_shrinks(n, p, seed, delta):
    G = gen_gnp(n, p, seed)
    if G.min_degree() < 2:
        return
    S = gen_adversarial(G, "random_bounded", seed, delta=delta)
    rep = solve_constrained(G, S, DOutParams(d=3, seed=seed), SolveLimits(time_limit=10, max_restarts=2))
    for lengths in rep.path_lengths:
        assert all(a <= b for a, b in zip(lengths, lengths[1:]))
    if rep.success:
        assert verify_cycle(G, S, rep.cycle, "compatible").passed


@settings(max_examples=30, deadline=None)
@given(st.integers(6, 40), seeds, st.integers(1, 3))
def test_rainbow_successes_verify(n, seed, bound):
    G = gen_gnp(n, 0.7, seed)
    if G.min_degree() < 2:
        return
    S = gen_adversarial(G, "global_random", seed, bound=bound)
    rep = solve_constrained(G, S, DOutParams(d=3, seed=seed), SolveLimits(time_limit=10, max_restarts=2))
    if rep.success:
        assert verify_cycle(G, S, rep.cycle, "rainbow").passed
