"""Closed-form results for search on the complete graph.

Covers the Chebyshev expression for the absorbing walk's success
probability, its peak time and height, and the reduced 3x3 / 4x4
operators that the query walk ``U1`` induces on the symmetry-class
subspace spanned by |a,a>, |a,b>, |b,a> (and |b,b> for several marked
vertices).  Here ``a`` stands for unmarked and ``b`` for marked vertices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter, Unsupported
from .graphs import MarkedSet
from .state import EdgeState

__all__ = [
    "chebyshev_T",
    "chebyshev_U",
    "pm_closed_form",
    "pm_series",
    "TimeEstimate",
    "t_max",
    "pm_peak_asymptotic",
    "ReducedModel",
    "ReducedEigensystem",
    "reduced_operator",
    "reduced_eigensystem",
    "t_f",
    "InvariantProjection",
    "project_to_invariant_basis",
]


def _recurrence(k: int, x: float, first: float) -> float:
    # T: first = x ; U: first = 2x.  Both share y_{j+1} = 2x y_j - y_{j-1}, y_0 = 1.
    prev, cur = 1.0, first
    if k == 0:
        return prev
    for _ in range(k - 1):
        prev, cur = cur, 2.0 * x * cur - prev
    return cur


def chebyshev_T(k: int, x: float) -> float:
    """First-kind Chebyshev polynomial, via ``cos(k*arccos x)`` inside (-1, 1)."""
    if k < 0:
        raise InvalidParameter(f"T_k needs k >= 0, got {k}")
    if -1.0 < x < 1.0:
        return math.cos(k * math.acos(x))
    return _recurrence(k, x, x)


def chebyshev_U(k: int, x: float) -> float:
    """Second-kind Chebyshev polynomial; ``U_{-1} = 0``."""
    if k < -1:
        raise InvalidParameter(f"U_k needs k >= -1, got {k}")
    if k == -1:
        return 0.0
    if -1.0 < x < 1.0:
        a = math.acos(x)
        return math.sin((k + 1) * a) / math.sin(a)
    return _recurrence(k, x, 2.0 * x)


def _check_nm(n: int, m: int, *, m_min: int = 1) -> None:
    if n < 3:
        raise InvalidParameter(f"n must be >= 3, got {n}")
    if not m_min <= m < n:
        raise InvalidParameter(f"need {m_min} <= m < n, got m={m}, n={n}")


def pm_closed_form(n: int, m: int, t: int) -> float:
    """Success probability of the absorbing walk ``U2`` on K_n after ``t`` steps."""
    _check_nm(n, m)
    if t < 0:
        raise InvalidParameter(f"t must be >= 0, got {t}")
    x = (n - m - 1) / (n - 1)
    bracket = (
        (n - 1) / (2 * n - m - 2) * chebyshev_T(2 * t, x)
        + chebyshev_U(2 * t - 1, x)
        + (n - m - 1) / (2 * n - m - 2)
    )
    return m * (m - 1) / (n * (n - 1)) + m * (n - m) / (n * (n - 1)) * bracket**2


def pm_series(n: int, m: int, steps: int) -> np.ndarray:
    return np.array([pm_closed_form(n, m, t) for t in range(steps + 1)])


@dataclass(frozen=True)
class TimeEstimate:
    exact: float
    asymptotic: float

    @property
    def nearest(self) -> int:
        return int(round(self.exact))


def t_max(n: int, m: int) -> TimeEstimate:
    """First maximum of the absorbing-walk curve and its large-n expansion."""
    _check_nm(n, m)
    exact = math.atan(math.sqrt(2 * n - m - 2) / math.sqrt(m)) / (2 * math.acos((n - m - 1) / (n - 1)))
    asymptotic = math.pi / 4 * math.sqrt(n / (2 * m)) - 0.25
    return TimeEstimate(exact, asymptotic)


def pm_peak_asymptotic(n: int, m: int) -> float:
    _check_nm(n, m)
    return 0.5 + math.sqrt(m / (2 * n))


@dataclass(frozen=True)
class ReducedModel:
    """``U1`` restricted to the invariant subspace of K_n with ``m`` marked vertices.

    For ``dim == 3`` the theta fields hold the eigenphase of the 3x3 block
    (``cos theta = (1 + cos^2 phi)/2``); for ``dim == 4`` they hold the second
    angle appearing in the 4x4 matrix entries.
    """

    n: int
    m: int
    dim: int
    cos_phi: float
    sin_phi: float
    cos_theta: float
    sin_theta: float
    matrix: np.ndarray
    substituted: bool = False

    @property
    def labels(self) -> tuple[str, ...]:
        return ("aa", "ab", "ba", "bb")[: self.dim]

    @property
    def phi(self) -> float:
        return math.atan2(self.sin_phi, self.cos_phi)

    @property
    def theta(self) -> float:
        return math.atan2(self.sin_theta, self.cos_theta)


def _matrix3(c: float, s: float) -> np.ndarray:
    return np.array([
        [c * c, c * s, -s],
        [s, -c, 0.0],
        [c * s, s * s, c],
    ])


def _matrix4(c: float, s: float, ct: float, st: float) -> np.ndarray:
    # The bottom-right entry is -cos^2(theta); that is what keeps the block orthogonal.
    return np.array([
        [c * c, c * s, -ct * s, -st * s],
        [ct * s, -ct * c, -st * st, ct * st],
        [c * s, s * s, ct * c, st * c],
        [st * s, -st * c, ct * st, -ct * ct],
    ])


def reduced_operator(n: int, m: int, *, force_dim4: bool = False) -> ReducedModel:
    """3x3 block for one marked vertex, 4x4 block for ``m >= 2``.

    ``force_dim4`` evaluates the 4x4 formulas at ``m = 1`` (the |b,b> row
    then decouples), which is useful for consistency checks.
    """
    _check_nm(n, m)
    if m == 1 and not force_dim4:
        c = (n - 3) / (n - 1)
        s = 2 * math.sqrt(n - 2) / (n - 1)
        ct = (1 + c * c) / 2
        st = s * math.sqrt(4 - s * s) / 2
        return ReducedModel(n, m, 3, c, s, ct, st, _matrix3(c, s))
    c = (n - 2 * m - 1) / (n - 1)
    s = 2 * math.sqrt(m * (n - m - 1)) / (n - 1)
    ct = (n - 2 * m + 1) / (n - 1)
    st = 2 * math.sqrt((n - m) * (m - 1)) / (n - 1)
    return ReducedModel(n, m, 4, c, s, ct, st, _matrix4(c, s, ct, st))


@dataclass(frozen=True)
class ReducedEigensystem:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns
    labels: tuple[str, ...]
    model: ReducedModel  # the matrix these pairs belong to (substituted for dim 4)

    def residuals(self) -> np.ndarray:
        u = self.model.matrix
        return np.array([
            np.linalg.norm(u @ self.eigenvectors[:, j] - self.eigenvalues[j] * self.eigenvectors[:, j])
            for j in range(len(self.labels))
        ])

    def vector(self, label: str) -> np.ndarray:
        return self.eigenvectors[:, self.labels.index(label)]


def _fix_phase(v: np.ndarray) -> np.ndarray:
    # Last component real and positive.
    return v * np.exp(-1j * np.angle(v[-1]))


def reduced_eigensystem(model: ReducedModel, *, substitute: bool = False) -> ReducedEigensystem:
    """Closed-form eigenpairs of the reduced operator.

    Three dimensions: exact, eigenvalues ``-1, e^{i theta}, e^{-i theta}``.
    Four dimensions: only under ``substitute=True``, which replaces
    ``cos theta`` by ``cos phi`` and returns the ``e^{+-i phi}`` pair of that
    modified matrix.
    """
    if model.dim == 3:
        n = model.n
        q = n * n - 3 * n + 3
        v_m1 = np.array([math.sqrt(n - 2), 2 - n, 1.0], dtype=complex) / math.sqrt(q)
        r = math.sqrt((n - 2) * q)
        v_p = math.sqrt((n - 2) * (n - 1)) / math.sqrt(2 * q) * np.array([
            (-1 + 1j * r) / ((n - 1) * math.sqrt(n - 2)),
            (n - 1) / (n - 2 - 1j * r),
            1.0,
        ])
        theta = model.theta
        vals = np.array([-1.0, np.exp(1j * theta), np.exp(-1j * theta)])
        vecs = np.column_stack([_fix_phase(v_m1), _fix_phase(v_p), _fix_phase(v_p.conj())])
        system = ReducedEigensystem(vals, vecs, ("-1", "+", "-"), model)
    else:
        if not substitute:
            raise Unsupported(
                "the 4-dimensional block has no closed-form spectrum; pass substitute=True "
                "to use the cos(theta) = cos(phi) approximation"
            )
        c, s = model.cos_phi, model.sin_phi
        sub = ReducedModel(model.n, model.m, 4, c, s, c, s, _matrix4(c, s, c, s), substituted=True)
        v_p = math.sqrt(1 - c) / 2 * np.array([
            1j * s / (1 - c),
            (2 * c + 1j * s) / (s - 2j * c),
            s / (1 - c),
            1.0,
        ])
        phi = sub.phi
        vals = np.array([np.exp(1j * phi), np.exp(-1j * phi)])
        vecs = np.column_stack([_fix_phase(v_p), _fix_phase(v_p.conj())])
        system = ReducedEigensystem(vals, vecs, ("+", "-"), sub)
    worst = float(system.residuals().max())
    if worst > 1e-10:
        raise ArithmeticError(f"reduced eigenpair residual {worst:.3e} exceeds 1e-10")
    return system


def t_f(n: int, m: int) -> TimeEstimate:
    """Time for ``U1`` to rotate psi(0) onto |b,a>: ``pi/(2 theta)`` or ``pi/(2 phi)``."""
    _check_nm(n, m)
    model = reduced_operator(n, m)
    angle = model.theta if m == 1 else model.phi
    return TimeEstimate(math.pi / (2 * angle), math.pi / 4 * math.sqrt(n / m))


@dataclass(frozen=True)
class InvariantProjection:
    coefficients: np.ndarray
    residual: float
    labels: tuple[str, ...]
    degenerate: bool = False


def project_to_invariant_basis(s: EdgeState, marked: MarkedSet | None = None) -> InvariantProjection:
    """Coefficients of ``s`` on the normalised class sums |a,a>, |a,b>, |b,a>[, |b,b>].

    Also returns the norm of the part of ``s`` outside their span.  With
    ``m = n-1`` no unmarked pair exists, so |a,a> is dropped and the
    result is flagged ``degenerate``.
    """
    layout = s.layout
    if not layout.graph.is_complete():
        raise Unsupported("invariant-basis projection is defined for complete graphs only")
    marked = layout.marked if marked is None else marked
    n, m = layout.n, marked.m
    if not 1 <= m < n:
        raise InvalidParameter(f"need 1 <= m < n, got m={m}")
    mask = np.zeros(n, dtype=bool)
    mask[marked.sorted()] = True
    e = layout.num_edges
    fm = mask[layout.first[:e]]
    sm = mask[layout.second[:e]]
    classes = {
        "aa": ~fm & ~sm,
        "ab": ~fm & sm,
        "ba": fm & ~sm,
        "bb": fm & sm,
    }
    labels = [lab for lab in ("aa", "ab", "ba", "bb") if classes[lab].any()]
    if m == 1:
        labels = [lab for lab in labels if lab != "bb"]
    amps = s.amplitudes[:e]
    coeffs = []
    resid_sq = 0.0
    for lab in labels:
        block = amps[classes[lab]]
        mean = block.mean()
        coeffs.append(block.sum() / math.sqrt(block.size))
        d = block - mean
        resid_sq += float(np.sum(d.real**2 + d.imag**2))
    tail = s.amplitudes[e:]
    resid_sq += float(np.sum(tail.real**2 + tail.imag**2))
    return InvariantProjection(
        np.array(coeffs, dtype=complex),
        math.sqrt(resid_sq),
        tuple(labels),
        degenerate="aa" not in labels,
    )
