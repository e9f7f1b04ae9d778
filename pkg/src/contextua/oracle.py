"""Dense brute-force ground truth on explicit state vectors.

Everything here works directly with complex amplitude arrays: weak values by
matrix-vector arithmetic, intermediate-measurement probabilities from the
squared weak-value magnitudes of a whole basis, and sequential projective
measurements enumerated exhaustively as a branch tree (never sampled).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from contextua.pauli import PauliObservable, apply_to_vector
from contextua.stabilizer import StabilizerProjector

OVERLAP_TOL = 1e-10


class VanishingOverlapError(ValueError):
    """Raised when <post|pre> is numerically zero so weak values are undefined."""


class IncompleteBasisError(ValueError):
    """Raised when the supplied projectors do not sum to the identity."""


ProjectorLike = Union[StabilizerProjector, np.ndarray]


@dataclass(frozen=True)
class DenseState:
    """A normalized complex state vector."""

    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=complex)
        norm = np.linalg.norm(v)
        if norm < 1e-12:
            raise ValueError("cannot normalize the zero vector")
        object.__setattr__(self, "amplitudes", v / norm)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]


def _as_vector(state) -> np.ndarray:
    if isinstance(state, DenseState):
        return state.amplitudes
    if isinstance(state, StabilizerProjector):
        return state.dense_vector()
    v = np.asarray(state, dtype=complex)
    norm = np.linalg.norm(v)
    if norm < 1e-12:
        raise ValueError("cannot normalize the zero vector")
    return v / norm


def _apply(projector: ProjectorLike, vec: np.ndarray) -> np.ndarray:
    if isinstance(projector, StabilizerProjector):
        return projector.apply_to(vec)
    return np.asarray(projector, dtype=complex) @ vec


def oracle_weak_value(pre, post, projector: ProjectorLike) -> complex:
    """<post|P|pre> / <post|pre> by direct dense arithmetic."""
    psi = _as_vector(pre)
    phi = _as_vector(post)
    overlap = np.vdot(phi, psi)
    if abs(overlap) < OVERLAP_TOL:
        raise VanishingOverlapError(f"|<post|pre>| = {abs(overlap):.3e}")
    return complex(np.vdot(phi, _apply(projector, psi)) / overlap)


def oracle_abl(pre, post, basis: Sequence[ProjectorLike], atol: float = 1e-9) -> np.ndarray:
    """Intermediate-measurement probabilities for a full basis.

    The basis projectors must sum to the identity; the probability of outcome
    k is |w_k|^2 normalized over the basis, where w_k is the weak value.
    """
    psi = _as_vector(pre)
    dim = psi.shape[0]
    total = np.zeros((dim, dim), dtype=complex)
    for p in basis:
        total += p.dense_matrix() if isinstance(p, StabilizerProjector) else np.asarray(p, dtype=complex)
    if not np.allclose(total, np.eye(dim), atol=atol):
        raise IncompleteBasisError("basis projectors do not sum to identity")
    weights = np.array([abs(oracle_weak_value(pre, post, p)) ** 2 for p in basis])
    denom = weights.sum()
    if denom < 1e-18:
        raise VanishingOverlapError("all basis weak values vanish")
    return weights / denom


MeasurementStep = Union[PauliObservable, Sequence[ProjectorLike]]


@dataclass(frozen=True)
class Branch:
    """One exhaustive outcome sequence of a sequential measurement."""

    outcomes: tuple
    step_probabilities: tuple[float, ...]
    postselection_probability: float
    joint_probability: float
    conditional_probability: float
    final_state: np.ndarray


@dataclass(frozen=True)
class MeasurementRecord:
    branches: tuple[Branch, ...]
    postselection_total: float

    def outcome_distribution(self, step: int) -> dict:
        """Conditional distribution of one step's outcome given post-selection."""
        dist: dict = {}
        for b in self.branches:
            key = b.outcomes[step]
            dist[key] = dist.get(key, 0.0) + b.conditional_probability
        return dist


def _step_branches(state: np.ndarray, step: MeasurementStep):
    """Yield (outcome label, unnormalized projected state)."""
    if isinstance(step, PauliObservable):
        ov = apply_to_vector(step, state)
        yield +1, (state + ov) / 2.0
        yield -1, (state - ov) / 2.0
        return
    for k, proj in enumerate(step):
        yield k, _apply(proj, state)


def sequential_measure(
    pre,
    post,
    steps: Sequence[MeasurementStep],
    prune_tol: float = 1e-12,
) -> MeasurementRecord:
    """Exhaustive projective branch tree between pre- and post-selection.

    Each step is either a Pauli observable (a two-outcome parity measurement)
    or an explicit list of orthogonal projectors (a full basis measurement).
    Branch probabilities follow the chain rule; afterwards each surviving
    branch is post-selected on ``post`` and conditional probabilities are
    reported among branches with nonzero post-selection weight.
    """
    psi = _as_vector(pre)
    phi = _as_vector(post)
    partial = [((), (), psi, 1.0)]
    for step in steps:
        nxt = []
        for outcomes, probs, state, weight in partial:
            for label, projected in _step_branches(state, step):
                p = float(np.linalg.norm(projected) ** 2)
                if p <= prune_tol:
                    continue
                nxt.append(
                    (
                        outcomes + (label,),
                        probs + (p,),
                        projected / np.sqrt(p),
                        weight * p,
                    )
                )
        partial = nxt
    branches = []
    total = 0.0
    for outcomes, probs, state, weight in partial:
        ps = float(abs(np.vdot(phi, state)) ** 2)
        joint = weight * ps
        total += joint
        branches.append((outcomes, probs, ps, joint, state))
    if total <= prune_tol:
        raise VanishingOverlapError("post-selection succeeds on no branch")
    records = tuple(
        Branch(
            outcomes=outcomes,
            step_probabilities=probs,
            postselection_probability=ps,
            joint_probability=joint,
            conditional_probability=joint / total,
            final_state=state,
        )
        for outcomes, probs, ps, joint, state in branches
    )
    return MeasurementRecord(branches=records, postselection_total=total)
