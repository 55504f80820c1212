import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import FIG1A, FIG3B, random_deun
from deun import (Deun, build_junction_tree, enumerate_cliques, is_decomposable,
                  make_decomposable, validate_deun)
from deun.errors import CycleDetected, InvalidDeun, NotDecomposable, OrderingViolated, SelfLoop
from deun.graph import deun_violations, find_cycle, maximum_cardinality_search


def brute_force_maximal_cliques(deun):
    adj = deun.skeleton
    cliques = [frozenset(s) for r in range(1, deun.n + 1)
               for s in itertools.combinations(deun.vertices, r)
               if all(b in adj[a] for a, b in itertools.combinations(s, 2))]
    return {c for c in cliques if not any(c < d for d in cliques)}


@st.composite
def deuns(draw, max_n=8):
    n = draw(st.integers(1, max_n))
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    pe = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    ue = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return Deun(n, pe, ue)


class TestValidation:
    def test_valid_network(self):
        d = validate_deun(3, [(1, 2)], [(2, 3)])
        assert d.prob_parents(2) == (1,) and d.util_parents(3) == (2,)

    def test_self_loop(self):
        with pytest.raises(SelfLoop):
            validate_deun(3, [(2, 2)], [])

    def test_ordering(self):
        with pytest.raises(OrderingViolated) as info:
            validate_deun(4, [], [(4, 1)])
        assert info.value.violations[0].edge == (4, 1)

    def test_cycle_is_reported_alongside_ordering(self):
        found = deun_violations(3, [(1, 2), (2, 3), (3, 1)], [])
        kinds = {v.kind for v in found}
        assert {"OrderingViolated", "CycleDetected"} <= kinds

    def test_out_of_range(self):
        with pytest.raises(InvalidDeun):
            validate_deun(2, [(1, 3)], [])

    def test_find_cycle(self):
        assert find_cycle(3, [(1, 2), (2, 3)]) is None
        cycle = find_cycle(3, [(1, 2), (2, 3), (3, 1)])
        assert cycle[0] == cycle[-1] and len(cycle) == 4

    def test_cycle_error_class(self):
        err = CycleDetected("x", [])
        assert isinstance(err, InvalidDeun)


class TestDecomposability:
    def test_fig1a_is_decomposable(self):
        assert is_decomposable(FIG1A)

    def test_unshadowed_utility_edge(self):
        check = is_decomposable(FIG3B)
        assert not check and check.condition == "unshadowed_utility_edge"
        assert check.vertices == (2, 5)

    def test_unmarried_parents(self):
        check = is_decomposable(Deun(3, [(1, 3), (2, 3)], []))
        assert check.condition == "unmarried_parents" and check.child == 3

    def test_marriage_cascades(self):
        # joining 1 and 2 makes them co-parents of nothing new, but joining
        # 3 and 4 (parents of 5) creates new co-parents of 4
        d = Deun(5, [(1, 4), (2, 4), (3, 5), (4, 5)], [])
        out = make_decomposable(d)
        assert is_decomposable(out)
        assert {(1, 2), (3, 4)} <= out.prob_edges

    def test_indirect_path_needs_no_edge(self):
        d = Deun(3, [(1, 2), (2, 3)], [(1, 3)])
        assert is_decomposable(d)
        assert make_decomposable(d) == d

    @settings(max_examples=150, deadline=None)
    @given(deuns())
    def test_make_decomposable_properties(self, d):
        out = make_decomposable(d)
        assert is_decomposable(out)
        assert out.util_edges == d.util_edges
        assert d.prob_edges <= out.prob_edges
        assert not deun_violations(out.n, out.prob_edges, out.util_edges)
        assert make_decomposable(out) == out


class TestCliques:
    def test_fig1a(self):
        cs = enumerate_cliques(FIG1A)
        assert cs.cliques == (frozenset({1, 2, 3}), frozenset({2, 4}), frozenset({1, 5}))
        assert cs.separators == (frozenset(), frozenset({2}), frozenset({1}))
        assert cs.rip_parent == (None, 0, 0)

    def test_chain(self):
        cs = enumerate_cliques(Deun(3, [(1, 2), (2, 3)], []))
        assert cs.cliques == (frozenset({1, 2}), frozenset({2, 3}))
        assert cs.separators[1] == frozenset({2})

    def test_mcs_tie_break(self):
        assert maximum_cardinality_search(FIG1A) == [1, 2, 3, 4, 5]

    def test_requires_decomposable(self):
        with pytest.raises(NotDecomposable):
            enumerate_cliques(FIG3B)

    @settings(max_examples=200, deadline=None)
    @given(deuns())
    def test_matches_brute_force(self, d):
        d = make_decomposable(d)
        cs = enumerate_cliques(d)
        assert set(cs.cliques) == brute_force_maximal_cliques(d)
        assert len(set(cs.cliques)) == len(cs.cliques)
        seen = set()
        for k, c in enumerate(cs.cliques):
            if k:
                assert cs.separators[k] == c & seen
                assert cs.separators[k] <= cs.cliques[cs.rip_parent[k]]
                assert cs.rip_parent[k] < k
            seen |= c


class TestJunctionTree:
    def test_fig1a_tree(self):
        jt = build_junction_tree(FIG1A)
        assert jt.edges == ((0, 1), (0, 2))
        assert jt.family_assignment == {1: 0, 2: 0, 3: 0, 4: 1, 5: 2}
        assert jt.roots == (0,)
        assert jt.children(0) == (1, 2)

    def test_single_clique(self):
        jt = build_junction_tree(Deun(3, [(1, 2), (1, 3), (2, 3)], []))
        assert len(jt.cliques) == 1 and jt.edges == ()

    def test_forest(self):
        jt = build_junction_tree(Deun(4, [(1, 2), (3, 4)], []))
        assert jt.roots == (0, 1)
        assert jt.edges == ()

    def test_isolated_vertices(self):
        jt = build_junction_tree(Deun(3, [], []))
        assert jt.cliques == (frozenset({1}), frozenset({2}), frozenset({3}))

    def test_random_invariants(self):
        rng = np.random.default_rng(5)
        for _ in range(300):
            d = random_deun(rng, int(rng.integers(1, 9)), decomposable=True)
            jt = build_junction_tree(d)
            assert frozenset().union(*jt.cliques) == frozenset(d.vertices)
            for p, c in jt.edges:
                assert jt.cliques[p] & jt.cliques[c] >= jt.separators[c]
            for v in d.vertices:
                assert d.family(v) <= jt.cliques[jt.family_assignment[v]]
            assert sorted(jt.family_assignment) == list(d.vertices)
