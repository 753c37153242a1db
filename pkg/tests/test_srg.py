import numpy as np
import pytest

from szegedy_search.errors import DecompositionUnstable, InvalidParameter, Unsupported
from szegedy_search.graphs import MarkedSet, complete_graph, named_srg, torus_lattice
from szegedy_search.operators import WalkContext, evolve, iterate
from szegedy_search.srg import build_srg_states, srg_decompose, verify_reflection_relations, verify_u3_equivalence
from szegedy_search.state import star_state_row

from conftest import random_state


@pytest.fixture(scope="module")
def petersen():
    return WalkContext(named_srg("petersen"), MarkedSet.of([0]))


@pytest.fixture(scope="module")
def paley13():
    return WalkContext(named_srg("paley", 13), MarkedSet.of([5]))


class TestBundle:
    def test_psi0_from_bundle(self, petersen):
        bundle = build_srg_states(petersen)
        psi0 = petersen.initial_state()
        rebuilt = (bundle.phi1 + bundle.phi_b) * (1 / np.sqrt(10))
        assert (psi0 - rebuilt).norm() <= 1e-15

    def test_complete_phi2_is_scaled_phi1(self):
        bundle = build_srg_states(WalkContext(complete_graph(5), MarkedSet.of([2])))
        assert (bundle.phi2 - bundle.phi1 * 0.25).norm() <= 1e-15

    def test_petersen_phi2_support(self, petersen):
        bundle = build_srg_states(petersen)
        expected = None
        for x in petersen.graph.neighbors(0):
            term = star_state_row(petersen.P, int(x), petersen.layout) * (1 / 3)
            expected = term if expected is None else expected + term
        assert (bundle.phi2 - expected).norm() <= 1e-15

    def test_requires_single_marked(self):
        ctx = WalkContext(named_srg("petersen"), MarkedSet.of([0, 1]))
        with pytest.raises(Unsupported):
            build_srg_states(ctx)

    def test_wrong_b(self, petersen):
        with pytest.raises(InvalidParameter):
            build_srg_states(petersen, b=3)

    def test_irregular_rejected(self):
        from szegedy_search.graphs import graph_from_edge_list

        ctx = WalkContext(graph_from_edge_list("0 1\n1 2\n2 0\n2 3"), MarkedSet.of([0]))
        with pytest.raises(Unsupported):
            build_srg_states(ctx)


class TestRelations:
    @pytest.mark.parametrize("name", ["petersen", "paley13"])
    def test_all_relations(self, name, request):
        report = verify_reflection_relations(request.getfixturevalue(name))
        assert len(report.residuals) == 10
        assert report.passed, report.to_dict()
        assert max(report.psiy1.values()) <= 1e-12

    def test_petersen_params(self, petersen):
        report = verify_reflection_relations(petersen)
        assert (report.params.k, report.params.lam, report.params.mu) == (3, 0, 1)
        d = report.to_dict()
        assert d["passed"] and d["mu"] == 1

    def test_complete_graph_mu_vacuous(self):
        report = verify_reflection_relations(WalkContext(complete_graph(7), MarkedSet.of([0])))
        assert report.params.mu is None
        assert report.passed

    def test_torus_is_not_srg(self):
        from szegedy_search.errors import NotStronglyRegular

        with pytest.raises(NotStronglyRegular):
            verify_reflection_relations(WalkContext(torus_lattice(4, 4), MarkedSet.of([0])))

    def test_paley_other_marked_vertex(self):
        report = verify_reflection_relations(WalkContext(named_srg("paley", 17), MarkedSet.of([11])))
        assert report.passed


class TestEquivalence:
    @pytest.mark.parametrize("name", ["petersen", "paley13"])
    def test_trajectories_coincide(self, name, request):
        ctx = request.getfixturevalue(name)
        res = verify_u3_equivalence(ctx, 100)
        assert res.max_deviation <= 1e-10
        assert len(res.state_deviation) == 101
        assert np.abs(res.series_u3.probabilities - res.series_u2.probabilities).max() <= 1e-10

    def test_two_marked_differs(self):
        ctx = WalkContext(named_srg("petersen"), MarkedSet.of([0, 1]))
        res = verify_u3_equivalence(ctx, 50)
        assert res.max_deviation > 1e-3

    def test_series_match_evolve(self, petersen):
        res = verify_u3_equivalence(petersen, 20)
        assert np.array_equal(res.series_u3.probabilities, evolve(petersen, "U3", 20).probabilities)


class TestDecomposition:
    def test_psi0(self, petersen):
        bundle = build_srg_states(petersen)
        coeffs, resid = srg_decompose(petersen.initial_state(), bundle)
        r = 1 / np.sqrt(10)
        assert np.abs(coeffs - [r, 0, 0, 0, r]).max() <= 1e-12
        assert resid <= 1e-14

    @pytest.mark.parametrize("name", ["petersen", "paley13"])
    def test_closure_under_absorbing_walk(self, name, request):
        ctx = request.getfixturevalue(name)
        bundle = build_srg_states(ctx)
        worst = max(srg_decompose(s, bundle)[1] for _, s in iterate(ctx, "U2", 100))
        assert worst <= 1e-10

    def test_random_state_outside_span(self, petersen, rng):
        bundle = build_srg_states(petersen)
        _, resid = srg_decompose(random_state(petersen, rng), bundle)
        assert resid > 0.1

    def test_complete_graph_unstable(self):
        ctx = WalkContext(complete_graph(6), MarkedSet.of([0]))
        with pytest.raises(DecompositionUnstable):
            srg_decompose(ctx.initial_state(), build_srg_states(ctx))


def test_torus_operator_comparison_report(capsys):
    # Observational only: how far apart U1 and U2 run on small tori.
    for side in (4, 5):
        ctx = WalkContext(torus_lattice(side, side), MarkedSet.of([0]))
        p1 = evolve(ctx, "U1", 60).probabilities
        p2 = evolve(ctx, "U2", 60).probabilities
        print(f"torus {side}x{side}: U1 peak {p1.max():.4f}, U2 peak {p2.max():.4f}")
        assert np.all(np.isfinite(p1)) and np.all(np.isfinite(p2))
