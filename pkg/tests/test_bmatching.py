"""Tests for maximum b-matching."""

from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from bundle_control.bmatching import Multigraph, max_bmatching


def respects_caps(graph, chosen):
    degree = graph.degrees(chosen)
    return all(degree[v] <= cap for v, cap in graph.capacities.items())


def brute_force_size(graph):
    for size in range(len(graph.edges), -1, -1):
        for chosen in combinations(range(len(graph.edges)), size):
            if respects_caps(graph, list(chosen)):
                return size
    return 0


@st.composite
def multigraphs(draw):
    names = [f"v{i}" for i in range(draw(st.integers(min_value=1, max_value=5)))]
    capacities = {name: draw(st.integers(min_value=0, max_value=3)) for name in names}
    endpoint = st.sampled_from(names)
    edges = draw(st.lists(st.tuples(endpoint, endpoint), max_size=7))
    return Multigraph(capacities=capacities, edges=tuple(edges))


class TestMultigraph:
    """Test the multigraph model."""

    def test_loop_counts_twice(self):
        """Test a loop adds two to its vertex degree."""
        graph = Multigraph(capacities={"v": 2}, edges=(("v", "v"),))
        assert graph.degrees() == {"v": 2}

    def test_unknown_endpoint(self):
        """Test every endpoint needs a capacity."""
        with pytest.raises(ValidationError, match="without a capacity"):
            Multigraph(capacities={"u": 1}, edges=(("u", "x"),))


class TestMaxBMatching:
    """Test b-matching sizes against enumeration."""

    def test_triangle_with_unit_caps(self):
        """Test a triangle with capacity one everywhere holds one edge."""
        graph = Multigraph(
            capacities={"a": 1, "b": 1, "c": 1},
            edges=(("a", "b"), ("b", "c"), ("a", "c")),
        )
        assert len(max_bmatching(graph)) == 1

    def test_loop_needs_capacity_two(self):
        """Test a loop is selected only when its vertex can take degree two."""
        assert max_bmatching(Multigraph(capacities={"v": 2}, edges=(("v", "v"),))) == [0]
        assert max_bmatching(Multigraph(capacities={"v": 1}, edges=(("v", "v"),))) == []

    def test_parallel_edges(self):
        """Test parallel edges are matched up to the smaller capacity."""
        graph = Multigraph(capacities={"a": 2, "b": 3}, edges=(("a", "b"),) * 3)
        assert len(max_bmatching(graph)) == 2

    def test_no_edges(self):
        """Test an edgeless graph gives the empty matching."""
        assert max_bmatching(Multigraph(capacities={"a": 4})) == []

    @settings(max_examples=200, deadline=None)
    @given(graph=multigraphs())
    def test_matches_enumeration(self, graph):
        """Test the result is feasible and as large as the best subset."""
        chosen = max_bmatching(graph)
        assert chosen == sorted(set(chosen))
        assert respects_caps(graph, chosen)
        assert len(chosen) == brute_force_size(graph)
