import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from szegedy_search.errors import GraphValidationError, InvalidParameter, NotStronglyRegular
from szegedy_search.graphs import (
    Graph,
    MarkedSet,
    absorbing_transition,
    complete_graph,
    graph_from_edge_list,
    graph_to_edge_list,
    named_srg,
    parse_graph_spec,
    srg_parameters,
    torus_lattice,
    transition_matrix,
)


def brute_force_common_neighbours(g: Graph):
    """Independent oracle: set intersections over every unordered pair."""
    nbrs = [set(g.neighbors(x).tolist()) for x in range(g.n)]
    adj_counts, nonadj_counts = set(), set()
    for x, y in itertools.combinations(range(g.n), 2):
        c = len(nbrs[x] & nbrs[y])
        (adj_counts if y in nbrs[x] else nonadj_counts).add(c)
    return adj_counts, nonadj_counts


class TestComplete:
    def test_k5(self):
        g = complete_graph(5)
        assert g.n == 5
        assert g.num_directed_edges == 20
        assert np.all(g.degrees == 4)
        p = transition_matrix(g)
        assert p.support() == {(x, y) for x in range(5) for y in range(5) if x != y}
        assert np.all(p.matrix.data == 0.25)

    def test_triangle(self):
        g = complete_graph(3)
        assert np.all(g.degrees == 2)

    def test_large_rows_stochastic(self):
        p = transition_matrix(complete_graph(1000))
        assert np.abs(p.row_sums() - 1).max() <= 1e-12

    @pytest.mark.parametrize("n", [-1, 0, 1, 2])
    def test_too_small(self, n):
        with pytest.raises(InvalidParameter):
            complete_graph(n)


class TestTorus:
    def test_53x53(self):
        g = torus_lattice(53, 53)
        assert g.n == 2809
        assert np.all(g.degrees == 4)

    def test_3x3(self):
        g = torus_lattice(3, 3)
        assert g.n == 9 and g.num_edges == 18
        assert np.all(g.degrees == 4)

    def test_4x4_wraparound(self):
        g = torus_lattice(4, 4)
        # (r, c) -> 4r + c
        assert g.neighbors(0).tolist() == sorted([4 * 1 + 0, 4 * 3 + 0, 1, 3])

    def test_rectangular(self):
        g = torus_lattice(3, 5)
        assert g.n == 15 and g.is_regular()

    @pytest.mark.parametrize("r,c", [(2, 5), (5, 2), (1, 1)])
    def test_too_small(self, r, c):
        with pytest.raises(InvalidParameter):
            torus_lattice(r, c)


class TestSrg:
    def test_petersen(self):
        g = named_srg("petersen")
        assert g.n == 10
        assert brute_force_common_neighbours(g) == ({0}, {1})
        params = srg_parameters(g)
        assert (params.k, params.lam, params.mu) == (3, 0, 1)

    def test_paley13(self):
        g = named_srg("paley", 13)
        assert g.n == 13
        assert brute_force_common_neighbours(g) == ({2}, {3})
        params = srg_parameters(g)
        assert (params.k, params.lam, params.mu) == (6, 2, 3)

    @pytest.mark.parametrize("q", [12, 7, 9, 21, 1])
    def test_paley_bad_modulus(self, q):
        with pytest.raises(InvalidParameter):
            named_srg("paley", q)

    def test_unknown_family(self):
        with pytest.raises(InvalidParameter):
            named_srg("clebsch")

    def test_torus_not_srg(self):
        g = torus_lattice(4, 4)
        adj, nonadj = brute_force_common_neighbours(g)
        assert len(nonadj) > 1
        with pytest.raises(NotStronglyRegular) as info:
            srg_parameters(g)
        x, y = info.value.witness
        assert not g.has_edge(x, y)

    def test_irregular_witness(self):
        g = graph_from_edge_list("0 1\n1 2\n2 3")
        with pytest.raises(NotStronglyRegular) as info:
            srg_parameters(g)
        assert info.value.witness == (0, 1)

    def test_complete_is_degenerate(self):
        params = srg_parameters(complete_graph(5))
        assert (params.k, params.lam) == (4, 3)
        assert params.mu is None and params.degenerate

    @pytest.mark.parametrize("family,q", [("petersen", None), ("paley", 5), ("paley", 13), ("paley", 17), ("paley", 29)])
    def test_srg_identity(self, family, q):
        g = named_srg(family, q)
        p = srg_parameters(g)
        assert p.k * (p.k - p.lam - 1) == (g.n - p.k - 1) * p.mu


class TestTransition:
    def test_regular_symmetric(self):
        for g in (torus_lattice(3, 4), named_srg("petersen"), complete_graph(6)):
            dense = transition_matrix(g).dense()
            assert np.array_equal(dense, dense.T)

    def test_irregular_rows(self):
        g = graph_from_edge_list("0 1\n1 2\n2 3\n3 4\n1 4")
        p = transition_matrix(g)
        assert np.abs(p.row_sums() - 1).max() <= 1e-12
        assert p.entry(1, 0) == pytest.approx(1 / 3)
        assert not p.absorbing

    def test_absorbing_k5(self):
        p = transition_matrix(complete_graph(5))
        pa = absorbing_transition(p, MarkedSet.of([4]))
        dense = pa.dense()
        assert np.array_equal(dense[4], np.eye(5)[4])
        assert np.array_equal(dense[:4], p.dense()[:4])
        assert pa.absorbing and (4, 4) in pa.support()
        assert np.abs(pa.row_sums() - 1).max() <= 1e-12

    def test_absorbing_empty(self):
        p = transition_matrix(complete_graph(5))
        pa = absorbing_transition(p, MarkedSet())
        assert np.array_equal(pa.dense(), p.dense())

    def test_absorbing_all(self):
        p = transition_matrix(torus_lattice(3, 3))
        pa = absorbing_transition(p, MarkedSet.of(range(9)))
        assert np.array_equal(pa.dense(), np.eye(9))

    def test_idempotent(self):
        p = transition_matrix(named_srg("petersen"))
        m = MarkedSet.of([1, 6])
        once = absorbing_transition(p, m)
        twice = absorbing_transition(once, m)
        assert np.array_equal(once.dense(), twice.dense())
        assert once.support() == twice.support()


class TestEdgeList:
    def test_triangle(self):
        g = graph_from_edge_list("0 1\n1 2\n2 0")
        assert g.n == 3 and g.is_complete()

    def test_comments_and_blanks(self):
        g = graph_from_edge_list("# header\n\n0 1\n  # indented comment\n1 2\n")
        assert g.n == 3 and g.num_edges == 2

    @pytest.mark.parametrize(
        "text,line",
        [
            ("0 0", 1),
            ("0 1\n1 0", 2),
            ("0 1\n1 x", 2),
            ("0 1 2", 1),
            ("0 1\n\n-1 2", 3),
        ],
    )
    def test_errors_carry_line(self, text, line):
        with pytest.raises(GraphValidationError) as info:
            graph_from_edge_list(text)
        assert info.value.line == line
        assert f"line {line}" in str(info.value)

    def test_disconnected(self):
        with pytest.raises(GraphValidationError, match="connected"):
            graph_from_edge_list("0 1\n2 3")

    def test_isolated_index(self):
        with pytest.raises(GraphValidationError):
            graph_from_edge_list("0 1\n1 3\n3 0")

    def test_petersen_cross_check(self):
        text = graph_to_edge_list(named_srg("petersen"))
        g = graph_from_edge_list(text)
        assert g.same_structure(named_srg("petersen"))
        p = srg_parameters(g)
        assert (p.k, p.lam, p.mu) == (3, 0, 1)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(2, 12).flatmap(lambda n: st.tuples(
        st.just(n),
        st.permutations(range(n)),
        st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=20),
    )))
    def test_round_trip(self, case):
        n, perm, extra = case
        # A random spanning path keeps the graph connected.
        edges = {tuple(sorted((perm[i], perm[i + 1]))) for i in range(n - 1)}
        edges |= {tuple(sorted(e)) for e in extra if e[0] != e[1]}
        g = Graph.from_edges(n, sorted(edges))
        again = graph_from_edge_list(graph_to_edge_list(g))
        assert again.same_structure(g)


class TestGraphSpec:
    def test_specs(self, tmp_path):
        assert parse_graph_spec("complete:6").n == 6
        assert parse_graph_spec("torus:3x4").n == 12
        assert parse_graph_spec("petersen").n == 10
        assert parse_graph_spec("paley:13").n == 13
        f = tmp_path / "tri.txt"
        f.write_text("0 1\n1 2\n0 2\n")
        assert parse_graph_spec(f"file:{f}").is_complete()

    @pytest.mark.parametrize("spec", ["complete:x", "torus:3", "torus:axb", "cube:3", "petersen:3", "complete:2", ""])
    def test_bad_specs(self, spec):
        with pytest.raises(InvalidParameter):
            parse_graph_spec(spec)
