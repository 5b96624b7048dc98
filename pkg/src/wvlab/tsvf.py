"""Weak values and ABL statistics for pre- and post-selected ensembles."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .hilbert import (
    DEGENERACY_TOL,
    NotHermitian,
    OperatorMatrix,
    ShapeMismatch,
    StateVector,
    inner,
    inner_accurate,
    pauli,
    sandwich,
    sandwich_accurate,
    support,
)

OVERLAP_TOL = 1e-12
FORBIDDEN_TOL = 1e-24
EIGENVALUE_MATCH_TOL = 1e-10


class OrthogonalSelection(ValueError):
    """Pre- and post-selected states are orthogonal; the weak value is undefined."""


class AllOutcomesForbidden(ValueError):
    """No eigenvalue of the observable is compatible with the pre/post pair."""


class TwoStateVector:
    """A pre-selected ket ``|psi>`` and a post-selected bra ``<phi|``.

    Construction does not reject orthogonal pairs, since a pointer can still
    be post-selected through coupling-induced terms. Operations that divide
    by the overlap raise :class:`OrthogonalSelection` instead.
    """

    __slots__ = ("pre", "post", "overlap", "overlap_tol")

    def __init__(self, pre: StateVector, post: StateVector, overlap_tol: float = OVERLAP_TOL):
        if pre.shape != post.shape:
            raise ShapeMismatch(f"pre {pre.shape} vs post {post.shape}")
        self.pre = pre
        self.post = post
        self.overlap = inner(post, pre)
        self.overlap_tol = overlap_tol

    @property
    def shape(self):
        return self.pre.shape

    @property
    def orthogonal(self) -> bool:
        return abs(self.overlap) <= self.overlap_tol

    def require_overlap(self):
        if self.orthogonal:
            raise OrthogonalSelection(
                f"|<post|pre>| = {abs(self.overlap):.3g} <= {self.overlap_tol:g}")

    def reversed(self) -> "TwoStateVector":
        """The time-reversed pair: old post-selection becomes pre-selection."""
        return TwoStateVector(self.post, self.pre, self.overlap_tol)

    def __repr__(self):
        return f"TwoStateVector(dims={list(self.shape.dims)}, overlap={self.overlap:.6g})"


@dataclass(frozen=True)
class AblDistribution:
    outcomes: tuple[tuple[float, float], ...]

    @property
    def eigenvalues(self) -> tuple[float, ...]:
        return tuple(a for a, _ in self.outcomes)

    @property
    def probabilities(self) -> tuple[float, ...]:
        return tuple(p for _, p in self.outcomes)

    def probability(self, eigenvalue: float, tol: float = DEGENERACY_TOL) -> float:
        for a, p in self.outcomes:
            if abs(a - eigenvalue) <= tol:
                return p
        return 0.0

    def expectation(self) -> float:
        return float(sum(a * p for a, p in self.outcomes))


def weak_value(tsv: TwoStateVector, op: OperatorMatrix) -> complex:
    """``<phi|A|psi> / <phi|psi>``; ``A`` need not be Hermitian.

    Numerator and denominator are each correctly rounded, so the relative
    error stays at a few ulps even when the overlap is small.
    """
    tsv.require_overlap()
    return (sandwich_accurate(tsv.post, op, tsv.pre)
            / inner_accurate(tsv.post, tsv.pre))


def branch_amplitudes(tsv: TwoStateVector, op: OperatorMatrix,
                      degeneracy_tol: float = DEGENERACY_TOL):
    """Eigenvalues ``a_k`` and amplitudes ``<phi|P_k|psi>`` of a Hermitian observable."""
    spec = op.spectral(degeneracy_tol)
    amps = np.array([sandwich(tsv.post, p, tsv.pre) for p in spec.projectors])
    return np.array(spec.eigenvalues), amps


def abl_distribution(tsv: TwoStateVector, op: OperatorMatrix,
                     degeneracy_tol: float = DEGENERACY_TOL) -> AblDistribution:
    """Outcome probabilities of a strong measurement of ``op`` between the selections.

    P(a_k) = |<phi|P_k|psi>|^2 / sum_j |<phi|P_j|psi>|^2
    """
    values, amps = branch_amplitudes(tsv, op, degeneracy_tol)
    weights = np.abs(amps) ** 2
    total = weights.sum()
    if total <= FORBIDDEN_TOL:
        raise AllOutcomesForbidden(
            "every outcome has zero amplitude between these selections")
    probs = weights / total
    return AblDistribution(tuple((float(a), float(p)) for a, p in zip(values, probs)))


def abl_expectation(tsv: TwoStateVector, op: OperatorMatrix) -> float:
    return abl_distribution(tsv, op).expectation()


def correlation(tsv: TwoStateVector, a: OperatorMatrix, b: OperatorMatrix) -> float:
    """``<AB> - <A><B>`` with every expectation taken from the ABL rule.

    ``a`` and ``b`` must act on disjoint sets of subsystems.
    """
    for op in (a, b):
        if not op.hermitian:
            raise NotHermitian("correlation needs Hermitian operators")
    if support(a) & support(b):
        raise ValueError(
            f"operators share subsystems {sorted(support(a) & support(b))}")
    return abl_expectation(tsv, a @ b) - abl_expectation(tsv, a) * abl_expectation(tsv, b)


def dichotomic_strong_check(tsv: TwoStateVector, op: OperatorMatrix) -> Optional[float]:
    """Eigenvalue that the weak value lands on, if any.

    For a two-valued observable, a weak value equal to one of the eigenvalues
    means a strong measurement yields that eigenvalue with certainty; the
    returned value is cross-checked against the ABL distribution.
    """
    spec = op.spectral()
    if len(spec) != 2:
        raise ValueError(f"operator has {len(spec)} distinct eigenvalues, not 2")
    w = weak_value(tsv, op)
    for a in spec.eigenvalues:
        if abs(w - a) <= EIGENVALUE_MATCH_TOL:
            p = abl_distribution(tsv, op).probability(a)
            if abs(p - 1.0) > EIGENVALUE_MATCH_TOL:
                raise ArithmeticError(
                    f"weak value {w} hits eigenvalue {a} but ABL gives P = {p}")
            return a
    return None


def pauli_identity_residual(tsv: TwoStateVector) -> float:
    """``|(X_w)^2 + (Y_w)^2 + (Z_w)^2 - 1|`` for a single qubit."""
    if tsv.shape.total_dim != 2:
        raise ShapeMismatch("the Pauli identity is for a single qubit")
    total = sum(weak_value(tsv, pauli(n)) ** 2 for n in "XYZ")
    return abs(total - 1.0)
