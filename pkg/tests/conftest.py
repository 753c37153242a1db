from __future__ import annotations

import numpy as np
import pytest

from szegedy_search.graphs import MarkedSet, complete_graph, named_srg, torus_lattice
from szegedy_search.operators import WalkContext

# Criterion id -> (passed, detail); filled by test_acceptance, printed at session end.
ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


def small_graphs():
    """(graph, marked) pairs with n <= 10 used across the oracle and invariant tests."""
    return [
        (complete_graph(3), [2]),
        (complete_graph(5), [4]),
        (complete_graph(7), [1, 5]),
        (torus_lattice(3, 3), [4]),
        (torus_lattice(3, 3), [0, 8]),
        (named_srg("petersen"), [0]),
        (named_srg("petersen"), [2, 7]),
    ]


def small_contexts():
    return [WalkContext(g, MarkedSet.of(m)) for g, m in small_graphs()]


def context_id(ctx: WalkContext) -> str:
    return f"{ctx.graph.name}-M{sorted(ctx.marked.vertices)}"


def random_state(ctx: WalkContext, rng: np.random.Generator):
    from szegedy_search.state import EdgeState

    amps = rng.normal(size=ctx.layout.size) + 1j * rng.normal(size=ctx.layout.size)
    return EdgeState(amps / np.linalg.norm(amps), ctx.layout)


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS, key=lambda k: int(k.split()[0])):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {detail}")
