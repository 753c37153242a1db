"""Graph construction and the uniform / absorbing transition matrices built on them.

Graphs are stored in CSR form (``indptr``/``indices``) with each neighbor list
sorted, which is also the order the walk's edge layout uses.  Vertex labels are
0-based throughout.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import GraphValidationError, InvalidParameter, NotStronglyRegular

__all__ = [
    "Graph",
    "MarkedSet",
    "TransitionMatrix",
    "SrgParams",
    "complete_graph",
    "torus_lattice",
    "named_srg",
    "srg_parameters",
    "transition_matrix",
    "absorbing_transition",
    "graph_from_edge_list",
    "graph_to_edge_list",
    "parse_graph_spec",
]


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple connected graph in CSR adjacency form."""

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    name: str = "graph"

    def __post_init__(self):
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], name: str = "graph") -> "Graph":
        pairs = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if n < 1:
            raise GraphValidationError("graph needs at least one vertex")
        if pairs.size and (pairs.min() < 0 or pairs.max() >= n):
            raise GraphValidationError(f"edge endpoint outside 0..{n - 1}")
        rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
        cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
        return cls._from_directed(n, rows, cols, name)

    @classmethod
    def _from_directed(cls, n: int, rows: np.ndarray, cols: np.ndarray, name: str) -> "Graph":
        if np.any(rows == cols):
            x = int(rows[rows == cols][0])
            raise GraphValidationError(f"self-loop at vertex {x}")
        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]
        dup = (rows[1:] == rows[:-1]) & (cols[1:] == cols[:-1])
        if np.any(dup):
            i = int(np.flatnonzero(dup)[0])
            raise GraphValidationError(f"duplicate edge ({rows[i]}, {cols[i]})")
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
        g = cls(n, indptr, cols.astype(np.int32), name)
        g._validate()
        return g

    def _validate(self) -> None:
        deg = self.degrees
        if np.any(deg == 0) and self.n > 1:
            raise GraphValidationError(f"vertex {int(np.argmin(deg))} is isolated; graph must be connected")
        adj = self.adjacency_matrix()
        if (adj != adj.T).nnz:
            raise GraphValidationError("adjacency is not symmetric")
        ncomp, _ = connected_components(adj, directed=False)
        if ncomp != 1:
            raise GraphValidationError(f"graph has {ncomp} connected components; must be connected")

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def num_directed_edges(self) -> int:
        return int(self.indptr[-1])

    @property
    def num_edges(self) -> int:
        return self.num_directed_edges // 2

    def neighbors(self, x: int) -> np.ndarray:
        return self.indices[self.indptr[x]:self.indptr[x + 1]]

    def has_edge(self, x: int, y: int) -> bool:
        nb = self.neighbors(x)
        i = np.searchsorted(nb, y)
        return bool(i < nb.size and nb[i] == y)

    def edges(self) -> list[tuple[int, int]]:
        """Undirected edges as ``(u, v)`` with ``u < v``, in CSR order."""
        rows = np.repeat(np.arange(self.n), self.degrees)
        keep = rows < self.indices
        return list(zip(rows[keep].tolist(), self.indices[keep].tolist()))

    def adjacency_matrix(self) -> sp.csr_array:
        data = np.ones(self.indices.size, dtype=np.float64)
        return sp.csr_array((data, self.indices, self.indptr), shape=(self.n, self.n))

    def is_regular(self) -> bool:
        deg = self.degrees
        return bool(np.all(deg == deg[0]))

    def is_complete(self) -> bool:
        return bool(np.all(self.degrees == self.n - 1))

    def same_structure(self, other: "Graph") -> bool:
        return (
            self is other
            or (
                self.n == other.n
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices)
            )
        )

    def __repr__(self) -> str:
        return f"Graph({self.name!r}, n={self.n}, edges={self.num_edges})"


@dataclass(frozen=True)
class MarkedSet:
    vertices: frozenset[int] = field(default_factory=frozenset)

    @classmethod
    def of(cls, vertices: Iterable[int], n: int | None = None) -> "MarkedSet":
        vs = frozenset(int(v) for v in vertices)
        if n is not None:
            bad = sorted(v for v in vs if not 0 <= v < n)
            if bad:
                raise InvalidParameter(f"marked vertex {bad[0]} outside 0..{n - 1}")
        return cls(vs)

    @property
    def m(self) -> int:
        return len(self.vertices)

    def sorted(self) -> np.ndarray:
        return np.array(sorted(self.vertices), dtype=np.int64)

    def complement(self, n: int) -> "MarkedSet":
        return MarkedSet(frozenset(range(n)) - self.vertices)

    def __contains__(self, x: object) -> bool:
        return x in self.vertices

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Row-stochastic matrix on a graph's vertices.

    ``matrix`` is a CSR array whose stored entries are exactly the support.
    When ``absorbing`` is set, the rows of ``marked`` are Kronecker rows.
    """

    graph: Graph
    matrix: sp.csr_array
    absorbing: bool = False
    marked: MarkedSet = field(default_factory=MarkedSet)

    @property
    def n(self) -> int:
        return self.graph.n

    def entry(self, x: int, y: int) -> float:
        row = slice(self.matrix.indptr[x], self.matrix.indptr[x + 1])
        cols = self.matrix.indices[row]
        i = np.searchsorted(cols, y)
        if i < cols.size and cols[i] == y:
            return float(self.matrix.data[row][i])
        return 0.0

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    def support(self) -> set[tuple[int, int]]:
        coo = self.matrix.tocoo()
        return set(zip(coo.row.tolist(), coo.col.tolist()))

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


@dataclass(frozen=True)
class SrgParams:
    k: int
    lam: int
    mu: int | None  # None: no non-adjacent pair exists (complete graph)

    @property
    def degenerate(self) -> bool:
        return self.mu is None


def complete_graph(n: int) -> Graph:
    if n < 3:
        raise InvalidParameter(f"complete graph needs n >= 3, got {n}")
    cols = np.broadcast_to(np.arange(n, dtype=np.int32), (n, n))
    cols = cols[~np.eye(n, dtype=bool)]
    indptr = np.arange(0, n * (n - 1) + 1, n - 1, dtype=np.int64)
    g = Graph(n, indptr, np.ascontiguousarray(cols), f"complete:{n}")
    # Structure is correct by construction; only connectivity is worth re-checking.
    g._validate()
    return g


def torus_lattice(rows: int, cols: int) -> Graph:
    """``rows x cols`` grid with periodic boundaries; vertex (r, c) has index ``r*cols + c``."""
    if rows < 3 or cols < 3:
        raise InvalidParameter(f"torus sides must be >= 3, got {rows}x{cols}")
    r, c = np.divmod(np.arange(rows * cols), cols)
    src = np.tile(np.arange(rows * cols), 4)
    dst = np.concatenate([
        ((r + 1) % rows) * cols + c,
        ((r - 1) % rows) * cols + c,
        r * cols + (c + 1) % cols,
        r * cols + (c - 1) % cols,
    ])
    return Graph._from_directed(rows * cols, src, dst, f"torus:{rows}x{cols}")


def _is_prime(q: int) -> bool:
    return q >= 2 and all(q % d for d in range(2, math.isqrt(q) + 1))


def petersen_graph() -> Graph:
    # Kneser graph K(5,2): 2-subsets of {0..4}, adjacent when disjoint.
    subsets = list(itertools.combinations(range(5), 2))
    edges = [
        (i, j)
        for i, j in itertools.combinations(range(len(subsets)), 2)
        if not set(subsets[i]) & set(subsets[j])
    ]
    return Graph.from_edges(10, edges, "petersen")


def paley_graph(q: int) -> Graph:
    if not (_is_prime(q) and q % 4 == 1):
        raise InvalidParameter(f"Paley modulus must be a prime = 1 mod 4, got {q}")
    residues = {(x * x) % q for x in range(1, q)}
    edges = [(x, y) for x, y in itertools.combinations(range(q), 2) if (y - x) % q in residues]
    return Graph.from_edges(q, edges, f"paley:{q}")


def named_srg(family: str, parameter: int | None = None) -> Graph:
    family = family.lower()
    if family == "petersen":
        if parameter is not None:
            raise InvalidParameter("petersen takes no parameter")
        return petersen_graph()
    if family == "paley":
        if parameter is None:
            raise InvalidParameter("paley needs a prime modulus q = 1 mod 4")
        return paley_graph(parameter)
    raise InvalidParameter(f"unknown strongly regular family {family!r} (expected petersen or paley)")


def srg_parameters(g: Graph) -> SrgParams:
    """Exhaustively count common neighbours over all vertex pairs.

    Raises ``NotStronglyRegular`` with the first offending pair (lexicographic)
    if the graph is irregular or the counts are inconsistent.
    """
    deg = g.degrees
    if not g.is_regular():
        x = int(np.flatnonzero(deg != deg[0])[0])
        raise NotStronglyRegular(f"graph is not regular: deg(0)={deg[0]}, deg({x})={deg[x]}", (0, x))
    k = int(deg[0])
    adj = g.adjacency_matrix().toarray()
    common = adj @ adj  # exact small integers in float64
    upper = np.triu(np.ones_like(adj, dtype=bool), 1)
    adjacent = upper & (adj > 0)
    nonadjacent = upper & (adj == 0)

    def uniform(mask: np.ndarray, kind: str) -> int | None:
        if not mask.any():
            return None
        vals = common[mask]
        bad = vals != vals[0]
        if bad.any():
            rows, cols = np.nonzero(mask)
            i = int(np.flatnonzero(bad)[0])
            x, y = int(rows[i]), int(cols[i])
            raise NotStronglyRegular(
                f"{kind} pairs disagree: {int(vals[0])} vs {int(vals[i])} common neighbours", (x, y)
            )
        return int(vals[0])

    lam = uniform(adjacent, "adjacent")
    mu = uniform(nonadjacent, "non-adjacent")
    return SrgParams(k, lam if lam is not None else 0, mu)


def transition_matrix(g: Graph) -> TransitionMatrix:
    data = np.repeat(1.0 / g.degrees, g.degrees)
    mat = sp.csr_array((data, g.indices, g.indptr), shape=(g.n, g.n))
    return TransitionMatrix(g, mat, absorbing=False)


def absorbing_transition(p: TransitionMatrix, marked: MarkedSet) -> TransitionMatrix:
    """Replace the rows of marked vertices with Kronecker rows (absorbing walk)."""
    n = p.n
    is_marked = np.zeros(n, dtype=bool)
    is_marked[marked.sorted()] = True
    coo = p.matrix.tocoo()
    keep = ~is_marked[coo.row]
    loops = marked.sorted()
    rows = np.concatenate([coo.row[keep], loops])
    cols = np.concatenate([coo.col[keep], loops])
    data = np.concatenate([coo.data[keep], np.ones(loops.size)])
    mat = sp.csr_array((data, (rows, cols)), shape=(n, n))
    mat.sort_indices()
    union = MarkedSet(p.marked.vertices | marked.vertices)
    return TransitionMatrix(p.graph, mat, absorbing=bool(p.absorbing or union.m), marked=union)


def graph_from_edge_list(text: str, name: str = "edge-list") -> Graph:
    """Parse ``u v`` lines (0-based); ``#`` lines and blank lines are skipped."""
    seen: dict[tuple[int, int], int] = {}
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise GraphValidationError(f"expected two vertex indices, got {len(tokens)} tokens", lineno)
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise GraphValidationError(f"non-integer token in {line!r}", lineno) from None
        if u < 0 or v < 0:
            raise GraphValidationError("vertex indices must be non-negative", lineno)
        if u == v:
            raise GraphValidationError(f"self-loop at vertex {u}", lineno)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphValidationError(f"duplicate edge {key} (first seen on line {seen[key]})", lineno)
        seen[key] = lineno
        edges.append(key)
    if not edges:
        raise GraphValidationError("edge list is empty")
    n = max(max(e) for e in edges) + 1
    return Graph.from_edges(n, edges, name)


def graph_to_edge_list(g: Graph) -> str:
    lines = [f"# {g.name}: {g.n} vertices, {g.num_edges} edges"]
    lines += [f"{u} {v}" for u, v in g.edges()]
    return "\n".join(lines) + "\n"


def parse_graph_spec(spec: str) -> Graph:
    """Build a graph from ``complete:<n>``, ``torus:<r>x<c>``, ``petersen``, ``paley:<q>`` or ``file:<path>``."""
    kind, _, arg = spec.strip().partition(":")
    kind = kind.lower()
    try:
        if kind == "complete":
            return complete_graph(int(arg))
        if kind == "torus":
            r, _, c = arg.lower().partition("x")
            return torus_lattice(int(r), int(c))
        if kind == "petersen" and not arg:
            return named_srg("petersen")
        if kind == "paley":
            return named_srg("paley", int(arg))
        if kind == "file":
            path = Path(arg)
            return graph_from_edge_list(path.read_text(encoding="utf-8"), name=f"file:{path.name}")
    except ValueError as exc:
        if isinstance(exc, (InvalidParameter, GraphValidationError)):
            raise
        raise InvalidParameter(f"malformed graph spec {spec!r}: {exc}") from None
    raise InvalidParameter(
        f"malformed graph spec {spec!r} (expected complete:<n>, torus:<r>x<c>, petersen, paley:<q>, file:<path>)"
    )
