"""Reflections, search operators and time evolution on the edge space.

Operators are products of reflections written right-to-left, so the
rightmost factor acts first:

    UP = R_B R_A
    U1 = R_B R_A R_M1              (walk with queries, U_M)
    U2 = R_B' R_A'                 (absorbing walk, U_P')
    U3 = R_B R_M2 R_A R_M1
    U4 = R_B R_M1 R_A R_M1
    U5 = R_M1 R_B R_M1 R_A

``R_A`` reflects about span{|Phi_x>}, ``R_B`` about span{|Psi_y>}, primes
denote the absorbing chain, and ``R_M1``/``R_M2`` flip the sign of
amplitudes whose first/second vertex is marked.
"""

from __future__ import annotations

import enum
from collections.abc import Iterator

import numpy as np

from .errors import IncompatibleState, InvalidParameter, SizeGuardError
from .graphs import Graph, MarkedSet, TransitionMatrix, absorbing_transition, transition_matrix
from .state import EdgeLayout, EdgeState, ProbabilitySeries, initial_state, marked_probability

__all__ = [
    "OperatorId",
    "WalkContext",
    "apply_reflection_A",
    "apply_reflection_B",
    "apply_marked_reflection",
    "step",
    "evolve",
    "iterate",
    "dense_operator",
    "dense_reflection",
    "DENSE_MAX_VERTICES",
]

DENSE_MAX_VERTICES = 64


class OperatorId(str, enum.Enum):
    UP = "UP"
    U1 = "U1"
    U2 = "U2"
    U3 = "U3"
    U4 = "U4"
    U5 = "U5"

    @classmethod
    def parse(cls, text: "str | OperatorId") -> "OperatorId":
        if isinstance(text, OperatorId):
            return text
        key = text.strip().upper()
        key = {"UM": "U1", "UP'": "U2", "UPP": "U2"}.get(key, key)
        try:
            return cls(key)
        except ValueError:
            valid = ", ".join(o.value for o in cls)
            raise InvalidParameter(f"unknown operator {text!r}; valid ids: {valid}") from None

    @property
    def factors(self) -> tuple[str, ...]:
        """Reflections in application order (rightmost factor of the product first)."""
        return _FACTORS[self]


_FACTORS = {
    OperatorId.UP: ("A", "B"),
    OperatorId.U1: ("M1", "A", "B"),
    OperatorId.U2: ("A'", "B'"),
    OperatorId.U3: ("M1", "A", "M2", "B"),
    OperatorId.U4: ("M1", "A", "M1", "B"),
    OperatorId.U5: ("A", "M1", "B", "M1"),
}


class _Workspace:
    __slots__ = ("tmp", "gathered", "sums")

    def __init__(self, layout: EdgeLayout):
        self.tmp = np.empty(layout.size, dtype=complex)
        self.gathered = np.empty(layout.num_edges, dtype=complex)
        self.sums = np.empty(layout.n, dtype=complex)


class WalkContext:
    """Everything needed to apply the reflections of one (graph, marked set) pair.

    Holds P, the absorbing P', the shared slot layout and per-slot
    ``sqrt(p)`` tables for row sweeps (``R_A``) and column sweeps (``R_B``)
    under both chains.  Immutable once built.
    """

    def __init__(self, graph: Graph, marked: MarkedSet | None = None):
        marked = marked or MarkedSet()
        bad = [v for v in marked.vertices if not 0 <= v < graph.n]
        if bad:
            raise InvalidParameter(f"marked vertex {bad[0]} outside 0..{graph.n - 1}")
        self.graph = graph
        self.marked = marked
        self.P = transition_matrix(graph)
        self.P_abs = absorbing_transition(self.P, marked)
        self.layout = layout = EdgeLayout(graph, marked)
        e = layout.num_edges

        row = np.zeros(layout.size)
        row[:e] = np.sqrt(self.P.matrix.data)
        col = np.zeros(layout.size)
        # Slot (x, y) needs sqrt(p_yx), which sits at the CSR slot of (y, x).
        col[layout.column_order] = row[:e]

        row_abs = row.copy()
        row_abs[layout.is_marked[layout.first[:e]].nonzero()[0]] = 0.0
        row_abs[e:] = 1.0
        col_abs = col.copy()
        col_abs[layout.is_marked[layout.second[:e]].nonzero()[0]] = 0.0
        col_abs[e:] = 1.0

        self._row = {False: row, True: row_abs}
        self._col = {False: col, True: col_abs}
        for arr in (row, col, row_abs, col_abs):
            arr.setflags(write=False)
        self._check_tables()

    def _check_tables(self) -> None:
        layout = self.layout
        e = layout.num_edges
        for primed in (False, True):
            sq = self._row[primed] ** 2
            sums = np.add.reduceat(sq[:e], layout.segment_starts)
            np.add.at(sums, layout.loops, sq[e:])
            if not np.allclose(sums, 1.0, rtol=0, atol=1e-12):
                raise AssertionError("row coefficient table is not stochastic")

    @property
    def n(self) -> int:
        return self.graph.n

    def row_coefficients(self, primed: bool = False) -> np.ndarray:
        return self._row[primed]

    def column_coefficients(self, primed: bool = False) -> np.ndarray:
        return self._col[primed]

    def initial_state(self) -> EdgeState:
        return initial_state(self.P, self.layout)

    def check_state(self, s: EdgeState) -> None:
        if not self.layout.compatible(s.layout):
            raise IncompatibleState(f"state on {s.layout} does not match context layout {self.layout}")

    def __repr__(self) -> str:
        return f"WalkContext({self.graph.name}, marked={sorted(self.marked.vertices)})"

    # In-place kernels.  ``psi`` is overwritten; ``ws`` supplies scratch space.

    def _reflect_rows(self, primed: bool, psi: np.ndarray, ws: _Workspace) -> None:
        layout = self.layout
        coef = self._row[primed]
        e = layout.num_edges
        np.multiply(psi, coef, out=ws.tmp)
        np.add.reduceat(ws.tmp[:e], layout.segment_starts, out=ws.sums)
        if layout.loops.size:
            ws.sums[layout.loops] += ws.tmp[e:]
        np.take(ws.sums, layout.first, out=ws.tmp)
        ws.tmp *= coef
        ws.tmp *= 2.0
        np.subtract(ws.tmp, psi, out=psi)

    def _reflect_cols(self, primed: bool, psi: np.ndarray, ws: _Workspace) -> None:
        layout = self.layout
        coef = self._col[primed]
        e = layout.num_edges
        np.multiply(psi, coef, out=ws.tmp)
        np.take(ws.tmp[:e], layout.column_order, out=ws.gathered)
        np.add.reduceat(ws.gathered, layout.segment_starts, out=ws.sums)
        if layout.loops.size:
            ws.sums[layout.loops] += ws.tmp[e:]
        np.take(ws.sums, layout.second, out=ws.tmp)
        ws.tmp *= coef
        ws.tmp *= 2.0
        np.subtract(ws.tmp, psi, out=psi)

    def _flip(self, register: int, psi: np.ndarray) -> None:
        slots = self.layout.first_marked_slots if register == 1 else self.layout.second_marked_slots
        psi[slots] *= -1.0

    def _apply_factor(self, factor: str, psi: np.ndarray, ws: _Workspace) -> None:
        if factor == "M1":
            self._flip(1, psi)
        elif factor == "M2":
            self._flip(2, psi)
        elif factor[0] == "A":
            self._reflect_rows(factor.endswith("'"), psi, ws)
        else:
            self._reflect_cols(factor.endswith("'"), psi, ws)

    def _apply(self, op: OperatorId, psi: np.ndarray, ws: _Workspace) -> None:
        for factor in _FACTORS[op]:
            self._apply_factor(factor, psi, ws)


def _single(ctx: WalkContext, factor: str, s: EdgeState) -> EdgeState:
    ctx.check_state(s)
    psi = s.amplitudes.astype(complex, copy=True)
    ctx._apply_factor(factor, psi, _Workspace(ctx.layout))
    return EdgeState(psi, ctx.layout)


def apply_reflection_A(ctx: WalkContext, primed: bool, s: EdgeState) -> EdgeState:
    """``2 sum_x |Phi_x><Phi_x| - I`` (``P'`` rows when ``primed``)."""
    return _single(ctx, "A'" if primed else "A", s)


def apply_reflection_B(ctx: WalkContext, primed: bool, s: EdgeState) -> EdgeState:
    """``2 sum_y |Psi_y><Psi_y| - I`` (``P'`` rows when ``primed``)."""
    return _single(ctx, "B'" if primed else "B", s)


def apply_marked_reflection(ctx: WalkContext, register: int, s: EdgeState) -> EdgeState:
    if register not in (1, 2):
        raise InvalidParameter(f"register must be 1 or 2, got {register}")
    return _single(ctx, f"M{register}", s)


def step(ctx: WalkContext, op: "OperatorId | str", s: EdgeState) -> EdgeState:
    op = OperatorId.parse(op)
    ctx.check_state(s)
    psi = s.amplitudes.astype(complex, copy=True)
    ctx._apply(op, psi, _Workspace(ctx.layout))
    return EdgeState(psi, ctx.layout)


def iterate(
    ctx: WalkContext, op: "OperatorId | str", steps: int, state: EdgeState | None = None
) -> Iterator[tuple[int, EdgeState]]:
    """Yield ``(t, U^t psi)`` for ``t = 0..steps``.

    The yielded state wraps a buffer that is overwritten on the next
    iteration; copy it if it must outlive the loop body.
    """
    op = OperatorId.parse(op)
    if steps < 0:
        raise InvalidParameter(f"steps must be >= 0, got {steps}")
    if state is None:
        state = ctx.initial_state()
    ctx.check_state(state)
    psi = state.amplitudes.astype(complex, copy=True)
    current = EdgeState(psi, ctx.layout)
    ws = _Workspace(ctx.layout)
    yield 0, current
    for t in range(1, steps + 1):
        ctx._apply(op, psi, ws)
        yield t, current


def evolve(
    ctx: WalkContext, op: "OperatorId | str", steps: int, state: EdgeState | None = None
) -> ProbabilitySeries:
    """Run ``steps`` applications from ``state`` (default: psi(0) of the unabsorbed chain)."""
    op = OperatorId.parse(op)
    probs = np.empty(steps + 1 if steps >= 0 else 0)
    current = None
    for t, current in iterate(ctx, op, steps, state):
        probs[t] = marked_probability(current)
    return ProbabilitySeries(
        probabilities=probs,
        operator=op.value,
        graph=ctx.graph.name,
        marked=tuple(sorted(ctx.marked.vertices)),
        final_state=current.copy(),
    )


def _dense_star_matrix(p: TransitionMatrix, by_row: bool) -> np.ndarray:
    # Column z of the result is |Phi_z> (by_row) or |Psi_z> in the n*n basis.
    n = p.n
    sq = np.sqrt(p.dense())
    out = np.zeros((n * n, n))
    for z in range(n):
        for w in range(n):
            if sq[z, w]:
                idx = z * n + w if by_row else w * n + z
                out[idx, z] = sq[z, w]
    return out


def dense_reflection(ctx: WalkContext, factor: str) -> np.ndarray:
    """Explicit ``n^2 x n^2`` matrix of one reflection in the basis ``|x,y>`` (index ``x*n+y``)."""
    n = ctx.n
    if n > DENSE_MAX_VERTICES:
        raise SizeGuardError(f"dense operators are limited to n <= {DENSE_MAX_VERTICES}, got n={n}")
    eye = np.eye(n * n)
    if factor in ("M1", "M2"):
        x, y = np.divmod(np.arange(n * n), n)
        reg = x if factor == "M1" else y
        signs = np.where(np.isin(reg, list(ctx.marked.vertices)), -1.0, 1.0)
        return np.diag(signs)
    p = ctx.P_abs if factor.endswith("'") else ctx.P
    stars = _dense_star_matrix(p, by_row=factor[0] == "A")
    return 2.0 * stars @ stars.T - eye


def dense_operator(ctx: WalkContext, op: "OperatorId | str") -> np.ndarray:
    """Brute-force matrix of ``op`` built by multiplying explicit reflection matrices.

    Real orthogonal, ``n^2 x n^2``; guarded to ``n <= 64``.
    """
    op = OperatorId.parse(op)
    n = ctx.n
    if n > DENSE_MAX_VERTICES:
        raise SizeGuardError(f"dense operators are limited to n <= {DENSE_MAX_VERTICES}, got n={n}")
    total = np.eye(n * n)
    for factor in _FACTORS[op]:
        total = dense_reflection(ctx, factor) @ total
    return total
