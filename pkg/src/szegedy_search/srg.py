"""Numerical check that U3 and the absorbing walk U2 agree on psi(0) for strongly regular graphs.

With one marked vertex ``b`` the absorbing evolution stays in the span of

    phi1 = sum_{x != b} |Phi_x>        phi2 = sum_{x != b} p_xb |Phi_x>
    psi1 = sum_{y != b} |Psi_y>        psi2 = sum_{y != b} p_yb |Psi_y>
    Phi_b

and on that span ``R_A R_M1`` coincides with ``R_A'`` (likewise
``R_B R_M2`` with ``R_B'``).  This module materialises the five states,
measures the residual of every reflection identity, and compares the two
trajectories directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DecompositionUnstable, InvalidParameter, Unsupported
from .graphs import SrgParams, srg_parameters
from .operators import (
    OperatorId,
    WalkContext,
    apply_marked_reflection,
    apply_reflection_A,
    apply_reflection_B,
    iterate,
)
from .state import EdgeState, ProbabilitySeries, basis_state, marked_probability, star_state_col, star_state_row

__all__ = [
    "SrgStateBundle",
    "RelationReport",
    "EquivalenceResult",
    "build_srg_states",
    "verify_reflection_relations",
    "verify_u3_equivalence",
    "srg_decompose",
    "GRAM_CONDITION_LIMIT",
]

GRAM_CONDITION_LIMIT = 1e12


@dataclass
class SrgStateBundle:
    phi1: EdgeState
    phi2: EdgeState
    psi1: EdgeState
    psi2: EdgeState
    phi_b: EdgeState
    b: int
    params: SrgParams | None = None

    def states(self) -> list[EdgeState]:
        return [self.phi1, self.phi2, self.psi1, self.psi2, self.phi_b]


@dataclass
class RelationReport:
    residuals: dict[str, float]
    psiy1: dict[int, float]
    params: SrgParams
    tolerance: float = 1e-12

    @property
    def max_residual(self) -> float:
        return max([*self.residuals.values(), *self.psiy1.values(), 0.0])

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "k": self.params.k,
            "lambda": self.params.lam,
            "mu": self.params.mu,
            "relations": self.residuals,
            "psiy1_max": max(self.psiy1.values(), default=0.0),
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


@dataclass
class EquivalenceResult:
    max_deviation: float
    state_deviation: np.ndarray
    series_u3: ProbabilitySeries
    series_u2: ProbabilitySeries = field(repr=False)


def _single_marked(ctx: WalkContext, b: int | None) -> int:
    if ctx.marked.m != 1:
        raise Unsupported(f"the decomposition needs exactly one marked vertex, got m={ctx.marked.m}")
    (only,) = ctx.marked.vertices
    if b is not None and b != only:
        raise InvalidParameter(f"vertex {b} is not the marked vertex {only}")
    return only


def build_srg_states(ctx: WalkContext, b: int | None = None) -> SrgStateBundle:
    b = _single_marked(ctx, b)
    g = ctx.graph
    if not g.is_regular():
        raise Unsupported("the five-state bundle is defined for regular graphs")
    p, layout = ctx.P, ctx.layout
    zero = EdgeState(np.zeros(layout.size, dtype=complex), layout)
    phi1, phi2, psi1, psi2 = zero.copy(), zero.copy(), zero.copy(), zero.copy()
    for v in range(g.n):
        if v == b:
            continue
        row = star_state_row(p, v, layout)
        col = star_state_col(p, v, layout)
        pvb = p.entry(v, b)
        phi1.amplitudes += row.amplitudes
        psi1.amplitudes += col.amplitudes
        if pvb:
            phi2.amplitudes += pvb * row.amplitudes
            psi2.amplitudes += pvb * col.amplitudes
    return SrgStateBundle(phi1, phi2, psi1, psi2, star_state_row(p, b, layout), b)


def verify_reflection_relations(ctx: WalkContext, b: int | None = None, tolerance: float = 1e-12) -> RelationReport:
    """Residual norms of the ten reflection identities and of the per-vertex psi_y identity.

    (k, lambda, mu) come from an exhaustive common-neighbour count.  For a
    complete graph mu is vacuous; phi2 = phi1/k there, so mu drops out and 0 is used.
    """
    b = _single_marked(ctx, b)
    params = srg_parameters(ctx.graph)
    bundle = build_srg_states(ctx, b)
    bundle.params = params
    k, lam = params.k, params.lam
    mu = params.mu if params.mu is not None else 0
    phi1, phi2, psi1, psi2, phi_b = bundle.states()

    def ra(s):
        return apply_reflection_A(ctx, True, s)

    def rb(s):
        return apply_reflection_B(ctx, True, s)

    checks = {
        "RA'(phi1) = phi1": (ra(phi1), phi1),
        "RA'(phi2) = phi2": (ra(phi2), phi2),
        "RA'(psi1) = 2 phi1 - 2 phi2 - psi1": (ra(psi1), 2 * phi1 - 2 * phi2 - psi1),
        "RA'(psi2) = 2mu/k^2 phi1 + 2(lambda-mu)/k phi2 - psi2": (
            ra(psi2), (2 * mu / k**2) * phi1 + (2 * (lam - mu) / k) * phi2 - psi2),
        "RA'(Phi_b) = -Phi_b": (ra(phi_b), -phi_b),
        "RB'(phi1) = 2 psi1 - 2 psi2 - phi1": (rb(phi1), 2 * psi1 - 2 * psi2 - phi1),
        "RB'(phi2) = 2mu/k^2 psi1 + 2(lambda-mu)/k psi2 - phi2": (
            rb(phi2), (2 * mu / k**2) * psi1 + (2 * (lam - mu) / k) * psi2 - phi2),
        "RB'(psi1) = psi1": (rb(psi1), psi1),
        "RB'(psi2) = psi2": (rb(psi2), psi2),
        "RB'(Phi_b) = 2 psi2 - Phi_b": (rb(phi_b), 2 * psi2 - phi_b),
    }
    residuals = {name: (lhs - rhs).norm() for name, (lhs, rhs) in checks.items()}

    psiy1 = {}
    for y in range(ctx.n):
        if y == b:
            continue
        psi_y = star_state_col(ctx.P, y, ctx.layout)
        lhs = apply_reflection_A(ctx, False, apply_marked_reflection(ctx, 1, psi_y)) - ra(psi_y)
        pyb = ctx.P.entry(y, b)
        rhs = (-2 * pyb) * phi_b
        if pyb:
            rhs = rhs + (2 * np.sqrt(pyb)) * basis_state(ctx.layout, b, y)
        psiy1[y] = (lhs - rhs).norm()
    return RelationReport(residuals, psiy1, params, tolerance)


def verify_u3_equivalence(ctx: WalkContext, horizon: int) -> EquivalenceResult:
    """Evolve psi(0) under U3 and U2 side by side and record ``||U3^t psi - U2^t psi||``.

    Any marked set is accepted: for m > 1 (or non-SRG graphs) the result is
    an observation, not a claim.
    """
    diffs = np.empty(horizon + 1)
    p3 = np.empty(horizon + 1)
    p2 = np.empty(horizon + 1)
    final3 = final2 = None
    for (t, s3), (_, s2) in zip(iterate(ctx, OperatorId.U3, horizon), iterate(ctx, OperatorId.U2, horizon)):
        d = s3.amplitudes - s2.amplitudes
        diffs[t] = np.sqrt(np.sum(d.real**2 + d.imag**2))
        p3[t] = marked_probability(s3)
        p2[t] = marked_probability(s2)
        final3, final2 = s3, s2
    meta = dict(graph=ctx.graph.name, marked=tuple(sorted(ctx.marked.vertices)))
    return EquivalenceResult(
        max_deviation=float(diffs.max()),
        state_deviation=diffs,
        series_u3=ProbabilitySeries(p3, operator="U3", final_state=final3.copy(), **meta),
        series_u2=ProbabilitySeries(p2, operator="U2", final_state=final2.copy(), **meta),
    )


def srg_decompose(s: EdgeState, bundle: SrgStateBundle) -> tuple[np.ndarray, float]:
    """Least-squares coefficients of ``s`` in the (non-orthogonal) bundle basis and the residual norm."""
    basis = np.column_stack([v.amplitudes for v in bundle.states()])
    gram = basis.conj().T @ basis
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > GRAM_CONDITION_LIMIT:
        raise DecompositionUnstable(f"bundle Gram matrix condition number {cond:.3e} exceeds {GRAM_CONDITION_LIMIT:.0e}")
    coeffs = np.linalg.solve(gram, basis.conj().T @ s.amplitudes)
    r = s.amplitudes - basis @ coeffs
    return coeffs, float(np.sqrt(np.sum(r.real**2 + r.imag**2)))
