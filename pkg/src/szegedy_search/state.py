"""Edge-space states of the walk.

Every state lives on a fixed slot layout: the directed edges ``(x, y)`` grouped
by ``x`` with ``y`` ascending (the graph's CSR order), followed by one ``(b, b)``
slot per marked vertex ``b``.  The trailing self-loop slots are the extra
support of the absorbing chain; keeping them in every state means the primed
and unprimed operators act on one vector layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IncompatibleState, InvalidParameter
from .graphs import Graph, MarkedSet, TransitionMatrix

__all__ = [
    "EdgeLayout",
    "EdgeState",
    "ProbabilitySeries",
    "initial_state",
    "star_state_row",
    "star_state_col",
    "basis_state",
    "marked_probability",
    "inner_product",
]


class EdgeLayout:
    """Slot indexing shared by all states of one (graph, marked set) pair.

    Attributes
    ----------
    first, second : int32 arrays
        Endpoints ``x`` and ``y`` of each slot.
    num_edges : int
        Number of directed-edge slots; slots at and beyond it are ``(b, b)`` loops.
    loops : int64 array
        Sorted marked vertices, one per trailing loop slot.
    column_order : int64 array
        Permutation of the edge slots listing column ``y`` contiguously with ``x``
        ascending.  Columns have the same extents as rows since adjacency is symmetric.
    """

    def __init__(self, graph: Graph, marked: MarkedSet | None = None):
        marked = marked or MarkedSet()
        self.graph = graph
        self.marked = marked
        self.n = graph.n
        self.num_edges = graph.num_directed_edges
        self.loops = marked.sorted()
        self.size = self.num_edges + self.loops.size
        self.segment_starts = graph.indptr[:-1]

        rows = np.repeat(np.arange(self.n, dtype=np.int32), graph.degrees)
        self.first = np.concatenate([rows, self.loops.astype(np.int32)])
        self.second = np.concatenate([graph.indices, self.loops.astype(np.int32)])
        self.column_order = np.lexsort((rows, graph.indices))

        is_marked = np.zeros(self.n, dtype=bool)
        is_marked[self.loops] = True
        self.is_marked = is_marked
        self.first_marked_slots = np.flatnonzero(is_marked[self.first])
        self.second_marked_slots = np.flatnonzero(is_marked[self.second])
        for arr in (self.first, self.second, self.column_order, self.first_marked_slots,
                    self.second_marked_slots, self.loops, is_marked):
            arr.setflags(write=False)

    def slot(self, x: int, y: int) -> int:
        """Index of ``(x, y)``; raises ``KeyError`` if the pair is outside the support."""
        if not (0 <= x < self.n and 0 <= y < self.n):
            raise KeyError((x, y))
        if x == y:
            i = np.searchsorted(self.loops, x)
            if i < self.loops.size and self.loops[i] == x:
                return self.num_edges + int(i)
            raise KeyError((x, y))
        lo, hi = self.graph.indptr[x], self.graph.indptr[x + 1]
        i = lo + np.searchsorted(self.graph.indices[lo:hi], y)
        if i < hi and self.graph.indices[i] == y:
            return int(i)
        raise KeyError((x, y))

    def compatible(self, other: "EdgeLayout") -> bool:
        return self is other or (
            self.graph.same_structure(other.graph) and np.array_equal(self.loops, other.loops)
        )

    def to_dense_index(self) -> np.ndarray:
        """Position of each slot in the full ``n*n`` tensor basis (``x*n + y``)."""
        return self.first.astype(np.int64) * self.n + self.second

    def __repr__(self) -> str:
        return f"EdgeLayout({self.graph.name}, slots={self.size}, marked={self.loops.tolist()})"


@dataclass(eq=False)
class EdgeState:
    amplitudes: np.ndarray
    layout: EdgeLayout

    def __post_init__(self):
        if self.amplitudes.shape != (self.layout.size,):
            raise IncompatibleState(
                f"amplitude vector has shape {self.amplitudes.shape}, layout needs ({self.layout.size},)"
            )

    @property
    def n(self) -> int:
        return self.layout.n

    def __getitem__(self, pair: tuple[int, int]) -> complex:
        try:
            return complex(self.amplitudes[self.layout.slot(*pair)])
        except KeyError:
            return 0j

    def norm(self) -> float:
        a = self.amplitudes
        return float(np.sqrt(np.sum(a.real * a.real + a.imag * a.imag)))

    def copy(self) -> "EdgeState":
        return EdgeState(self.amplitudes.copy(), self.layout)

    def to_dense(self) -> np.ndarray:
        """Embed into the full ``n*n`` basis ``|x, y>`` with index ``x*n + y``."""
        out = np.zeros(self.n * self.n, dtype=complex)
        out[self.layout.to_dense_index()] = self.amplitudes
        return out

    def __add__(self, other: "EdgeState") -> "EdgeState":
        _check_compatible(self, other)
        return EdgeState(self.amplitudes + other.amplitudes, self.layout)

    def __sub__(self, other: "EdgeState") -> "EdgeState":
        _check_compatible(self, other)
        return EdgeState(self.amplitudes - other.amplitudes, self.layout)

    def __mul__(self, scalar: complex) -> "EdgeState":
        return EdgeState(self.amplitudes * scalar, self.layout)

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> "EdgeState":
        return EdgeState(self.amplitudes / scalar, self.layout)

    def __neg__(self) -> "EdgeState":
        return EdgeState(-self.amplitudes, self.layout)


@dataclass
class ProbabilitySeries:
    """Samples ``(t, p_M(t))`` for ``t = 0, 1, ...`` plus run metadata."""

    probabilities: np.ndarray
    operator: str = ""
    graph: str = ""
    marked: tuple[int, ...] = ()
    final_state: EdgeState | None = field(default=None, repr=False)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.probabilities.size)

    @property
    def steps(self) -> int:
        return self.probabilities.size - 1

    def peak(self) -> tuple[int, float]:
        """First time of maximum probability (ties resolve to the earliest t)."""
        t = int(np.argmax(self.probabilities))
        return t, float(self.probabilities[t])

    def __len__(self) -> int:
        return self.probabilities.size


def _check_compatible(a: EdgeState, b: EdgeState) -> None:
    if not a.layout.compatible(b.layout):
        raise IncompatibleState(f"states live on different supports: {a.layout} vs {b.layout}")


def _layout_for(p: TransitionMatrix, layout: EdgeLayout | None) -> EdgeLayout:
    if layout is None:
        return EdgeLayout(p.graph, p.marked)
    if not layout.graph.same_structure(p.graph):
        raise IncompatibleState("layout and transition matrix belong to different graphs")
    missing = p.marked.vertices - layout.marked.vertices
    if missing:
        raise IncompatibleState(f"layout has no (b, b) slot for marked vertices {sorted(missing)}")
    return layout


def initial_state(p: TransitionMatrix, layout: EdgeLayout | None = None) -> EdgeState:
    """Uniform edge superposition ``sum sqrt(p_xy)/sqrt(n) |x,y>`` of the unabsorbed chain."""
    if p.absorbing:
        raise InvalidParameter("initial state is built from the non-absorbing chain")
    layout = _layout_for(p, layout)
    amps = np.zeros(layout.size, dtype=complex)
    amps[: layout.num_edges] = np.sqrt(p.matrix.data) / np.sqrt(p.n)
    return EdgeState(amps, layout)


def star_state_row(p: TransitionMatrix, x: int, layout: EdgeLayout | None = None) -> EdgeState:
    """``|Phi_x> = sum_y sqrt(p_xy) |x, y>``."""
    layout = _layout_for(p, layout)
    amps = np.zeros(layout.size, dtype=complex)
    lo, hi = p.matrix.indptr[x], p.matrix.indptr[x + 1]
    for y, pxy in zip(p.matrix.indices[lo:hi], p.matrix.data[lo:hi]):
        amps[layout.slot(x, int(y))] = np.sqrt(pxy)
    return EdgeState(amps, layout)


def star_state_col(p: TransitionMatrix, y: int, layout: EdgeLayout | None = None) -> EdgeState:
    """``|Psi_y> = sum_x sqrt(p_yx) |x, y>``."""
    layout = _layout_for(p, layout)
    amps = np.zeros(layout.size, dtype=complex)
    lo, hi = p.matrix.indptr[y], p.matrix.indptr[y + 1]
    for x, pyx in zip(p.matrix.indices[lo:hi], p.matrix.data[lo:hi]):
        amps[layout.slot(int(x), y)] = np.sqrt(pyx)
    return EdgeState(amps, layout)


def basis_state(layout: EdgeLayout, x: int, y: int) -> EdgeState:
    amps = np.zeros(layout.size, dtype=complex)
    amps[layout.slot(x, y)] = 1.0
    return EdgeState(amps, layout)


def marked_probability(s: EdgeState, marked: MarkedSet | None = None) -> float:
    """Probability that measuring the first register gives a vertex of ``marked``.

    Defaults to the layout's own marked set, whose slot list is precomputed.
    """
    layout = s.layout
    if marked is None or marked.vertices == layout.marked.vertices:
        slots = layout.first_marked_slots
    else:
        if not marked.m:
            return 0.0
        mask = np.zeros(layout.n, dtype=bool)
        mask[marked.sorted()] = True
        slots = np.flatnonzero(mask[layout.first])
    a = s.amplitudes[slots]
    return float(np.sum(a.real * a.real + a.imag * a.imag))


def inner_product(a: EdgeState, b: EdgeState) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    _check_compatible(a, b)
    return complex(np.sum(np.conj(a.amplitudes) * b.amplitudes))
