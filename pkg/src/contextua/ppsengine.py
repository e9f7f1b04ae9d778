"""Weak values, ABL probabilities, forcing rules, and pigeonhole detection.

The realist-assignment propagation is strictly single round:

  stage 1  mark the set projectors containing the pre/post states One, and
           projectors orthogonal to either state Zero;
  stage 2  in any basis whose members are all stage-1 Zero except one
           unassigned projector, force that projector to One;
  stage 3  force Zero on unassigned projectors orthogonal to a forced One;
  stage 4  flag conflict bases (every member Zero, or two or more Ones).

Forced values never seed further stage-2 forcings; the forcing sweep cannot
be iterated.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from contextua.ksverify import ProjectorKsSet, catalog
from contextua.pauli import PauliObservable, parse_pauli
from contextua.stabilizer import Basis, StabilizerProjector

OVERLAP_TOL = 1e-10
EQ_TOL = 1e-9
NONZERO_TOL = 1e-9

ONE = "One"
ZERO = "Zero"
UNASSIGNED = "Unassigned"

PROV_PPS = "PPS"
PROV_FORCED_ONE = "ForcedOne"
PROV_FORCED_ZERO = "ForcedZero"

ALL_ZERO = "AllZero"
MULTIPLE_ONES = "MultipleOnes"


class VanishingOverlapError(ValueError):
    """Raised when the pre/post overlap is below tolerance."""


class PpsPair:
    """A pre-selected and post-selected state with a cached overlap.

    Each side is either a stabilizer projector (the dense state is its
    deterministic canonical representative; for rank 1 that is the state
    itself) or a raw complex vector.  The overlap must clear OVERLAP_TOL or
    weak values are undefined.
    """

    def __init__(
        self,
        pre_vector: np.ndarray,
        post_vector: np.ndarray,
        pre_projector: Optional[StabilizerProjector] = None,
        post_projector: Optional[StabilizerProjector] = None,
        tol: float = OVERLAP_TOL,
    ):
        self.pre_vector = _normalize(pre_vector)
        self.post_vector = _normalize(post_vector)
        if self.pre_vector.shape != self.post_vector.shape:
            raise ValueError("pre and post vectors have different dimensions")
        self.pre_projector = pre_projector
        self.post_projector = post_projector
        self.overlap = complex(np.vdot(self.post_vector, self.pre_vector))
        if abs(self.overlap) < tol:
            raise VanishingOverlapError(
                f"|<post|pre>| = {abs(self.overlap):.3e} below tolerance {tol}"
            )

    @property
    def dim(self) -> int:
        return self.pre_vector.shape[0]

    @classmethod
    def from_projectors(
        cls, pre: StabilizerProjector, post: StabilizerProjector
    ) -> "PpsPair":
        return cls(
            _canonical_state(pre),
            _canonical_state(post),
            pre_projector=pre,
            post_projector=post,
        )

    @classmethod
    def from_vectors(cls, pre, post) -> "PpsPair":
        return cls(np.asarray(pre, dtype=complex), np.asarray(post, dtype=complex))

    @classmethod
    def from_generator_strings(
        cls, pre: Sequence[str] | str, post: Sequence[str] | str
    ) -> "PpsPair":
        """Signed generator strings, e.g. ("+XII", "+IXI", "+IIX")."""
        return cls.from_projectors(_projector_from_strings(pre), _projector_from_strings(post))


def _projector_from_strings(spec: Sequence[str] | str) -> StabilizerProjector:
    if isinstance(spec, str):
        spec = [s for s in spec.split(",") if s.strip()]
    return StabilizerProjector.from_strings(list(spec))


def _normalize(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    norm = np.linalg.norm(v)
    if norm < 1e-12:
        raise ValueError("cannot normalize the zero vector")
    return v / norm


def _canonical_state(p: StabilizerProjector) -> np.ndarray:
    """Deterministic representative state inside a projector's subspace."""
    if p.rank == 1:
        return p.dense_vector()
    dim = 1 << p.n_qubits
    for seed in range(dim):
        v = np.zeros(dim, dtype=complex)
        v[seed] = 1.0
        v = p.apply_to(v)
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            v = v / norm
            for a in v:
                if abs(a) > 1e-9:
                    return v * (abs(a) / a)
    raise ValueError("projector annihilated every seed vector")


# ---------------------------------------------------------------------------
# Weak values and ABL probabilities
# ---------------------------------------------------------------------------


def weak_value(projector: Union[StabilizerProjector, np.ndarray], pps: PpsPair) -> complex:
    """<post|P|pre> / <post|pre>."""
    if isinstance(projector, StabilizerProjector):
        applied = projector.apply_to(pps.pre_vector)
    else:
        applied = np.asarray(projector, dtype=complex) @ pps.pre_vector
    return complex(np.vdot(pps.post_vector, applied) / pps.overlap)


def basis_weak_values(basis: Basis, pps: PpsPair) -> np.ndarray:
    return np.array([weak_value(p, pps) for p in basis])


def abl_probability(basis: Basis, i: int, pps: PpsPair) -> float:
    """Probability of outcome i for a strong measurement of the whole basis.

    Computed as |w_i|^2 / sum_k |w_k|^2, so it always takes the full basis;
    the probabilities of a coarse projector cannot be obtained by summing the
    fine-grained ones.
    """
    return float(abl_row(basis, pps)[i])


def abl_row(basis: Basis, pps: PpsPair) -> np.ndarray:
    values = basis_weak_values(basis, pps)
    weights = np.abs(values) ** 2
    denom = weights.sum()
    if denom < 1e-18:
        raise VanishingOverlapError(
            "all weak values in the basis vanish; inconsistent inputs"
        )
    return weights / denom


@dataclass(frozen=True)
class WeakValueReport:
    """Per-projector weak values plus per-basis sums, ABL rows, and delta."""

    set_name: str
    projector_values: tuple[complex, ...]
    basis_rows: tuple[tuple[complex, ...], ...]
    sum_residuals: tuple[float, ...]
    abl_rows: tuple[tuple[float, ...], ...]
    delta: tuple[int, ...]

    def to_json_dict(self) -> dict:
        return {
            "set": self.set_name,
            "projector_weak_values": [[v.real, v.imag] for v in self.projector_values],
            "bases": [
                {
                    "weak_values": [{"re": v.real, "im": v.imag} for v in row],
                    "sum_residual": res,
                    "abl": list(abl),
                    "delta": d,
                }
                for row, res, abl, d in zip(
                    self.basis_rows, self.sum_residuals, self.abl_rows, self.delta
                )
            ],
        }


def weak_value_report(ks_set: ProjectorKsSet, pps: PpsPair) -> WeakValueReport:
    values = [weak_value(p, pps) for p in ks_set.projectors]
    rows, residuals, abl_rows_out, delta = [], [], [], []
    for b in ks_set.bases:
        row = [values[i] for i in b]
        rows.append(tuple(row))
        residuals.append(abs(sum(row) - 1.0))
        weights = np.array([abs(v) ** 2 for v in row])
        abl_rows_out.append(tuple(float(x) for x in weights / weights.sum()))
        delta.append(int(sum(1 for v in row if abs(v) > NONZERO_TOL)))
    return WeakValueReport(
        set_name=ks_set.name,
        projector_values=tuple(values),
        basis_rows=tuple(rows),
        sum_residuals=tuple(residuals),
        abl_rows=tuple(abl_rows_out),
        delta=tuple(delta),
    )


# ---------------------------------------------------------------------------
# Truth-value propagation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TruthAssignment:
    """Realist valuation of a projector set under one pre/post selection."""

    values: tuple[str, ...]
    provenance: tuple[Optional[str], ...]
    conflict_bases: tuple[tuple[int, str], ...]

    def ones(self) -> list[int]:
        return [i for i, v in enumerate(self.values) if v == ONE]

    def forced_ones(self) -> list[int]:
        return [
            i
            for i, (v, p) in enumerate(zip(self.values, self.provenance))
            if v == ONE and p == PROV_FORCED_ONE
        ]

    def forced_zeros(self) -> list[int]:
        return [
            i
            for i, (v, p) in enumerate(zip(self.values, self.provenance))
            if v == ZERO and p == PROV_FORCED_ZERO
        ]

    def to_json_dict(self) -> dict:
        return {
            "values": list(self.values),
            "provenance": list(self.provenance),
            "conflict_bases": [
                {"basis": b, "reason": r} for b, r in self.conflict_bases
            ],
        }


def _state_group(pps_side: Optional[StabilizerProjector]) -> StabilizerProjector:
    if pps_side is None:
        raise ValueError(
            "propagate needs stabilizer pre/post states (raw vectors carry no group)"
        )
    return pps_side


def propagate(ks_set: ProjectorKsSet, pps: PpsPair) -> TruthAssignment:
    """Single-round staged truth-value assignment (see module docstring)."""
    pre = _state_group(pps.pre_projector)
    post = _state_group(pps.post_projector)
    n = len(ks_set.projectors)
    values: list[str] = [UNASSIGNED] * n
    prov: list[Optional[str]] = [None] * n

    contains_pre = [p.contains(pre) for p in ks_set.projectors]
    contains_post = [p.contains(post) for p in ks_set.projectors]
    if not any(contains_pre):
        raise ValueError("pre state is not contained in any projector of the set")
    if not any(contains_post):
        raise ValueError("post state is not contained in any projector of the set")

    # Stage 1: the PPS itself.
    for i, p in enumerate(ks_set.projectors):
        if contains_pre[i] or contains_post[i]:
            values[i] = ONE
            prov[i] = PROV_PPS
    for i, p in enumerate(ks_set.projectors):
        if values[i] is not UNASSIGNED:
            continue
        if p.is_orthogonal_to(pre) or p.is_orthogonal_to(post):
            values[i] = ZERO
            prov[i] = PROV_PPS

    # Stage 2: one ABL forcing sweep driven by stage-1 zeros only.
    stage1_zero = [v == ZERO for v in values]
    for b in ks_set.bases:
        zeros = [i for i in b if stage1_zero[i]]
        if len(zeros) == len(b) - 1:
            (rest,) = [i for i in b if not stage1_zero[i]]
            if values[rest] == UNASSIGNED:
                values[rest] = ONE
                prov[rest] = PROV_FORCED_ONE

    # Stage 3: zeros orthogonal to the forced Ones.
    forced_one = [
        ks_set.projectors[i]
        for i in range(n)
        if values[i] == ONE and prov[i] == PROV_FORCED_ONE
    ]
    for i, p in enumerate(ks_set.projectors):
        if values[i] != UNASSIGNED:
            continue
        if any(p.is_orthogonal_to(f) for f in forced_one):
            values[i] = ZERO
            prov[i] = PROV_FORCED_ZERO

    # Stage 4: conflict scan.
    conflicts = []
    for bi, b in enumerate(ks_set.bases):
        ones = sum(1 for i in b if values[i] == ONE)
        zeros = sum(1 for i in b if values[i] == ZERO)
        if zeros == len(b):
            conflicts.append((bi, ALL_ZERO))
        elif ones > 1:
            conflicts.append((bi, MULTIPLE_ONES))

    return TruthAssignment(tuple(values), tuple(prov), tuple(conflicts))


@dataclass(frozen=True)
class PigeonholeReport:
    pigeonhole: bool
    classical_conflict_bases: tuple[int, ...]
    max_conflict_projectors: tuple[int, ...]

    @property
    def max_conflict_projector(self) -> Optional[int]:
        return self.max_conflict_projectors[0] if self.max_conflict_projectors else None

    def to_json_dict(self) -> dict:
        return {
            "pigeonhole": self.pigeonhole,
            "classical_conflict_bases": list(self.classical_conflict_bases),
            "max_conflict_projectors": list(self.max_conflict_projectors),
        }


def detect_pigeonhole(assignment: TruthAssignment, ks_set: ProjectorKsSet) -> PigeonholeReport:
    """Check whether some conflict basis is diagonal in the product Z basis.

    Also reports the maximum conflict projector of each such basis: the
    member orthogonal to every forced-One projector.
    """
    forced = [ks_set.projectors[i] for i in assignment.forced_ones()]
    classical = []
    max_conflict: list[int] = []
    for bi, _reason in assignment.conflict_bases:
        members = ks_set.bases[bi]
        if all(ks_set.projectors[i].is_diagonal() for i in members):
            classical.append(bi)
            for i in members:
                if forced and all(
                    ks_set.projectors[i].is_orthogonal_to(f) for f in forced
                ):
                    if i not in max_conflict:
                        max_conflict.append(i)
    return PigeonholeReport(
        pigeonhole=bool(classical),
        classical_conflict_bases=tuple(classical),
        max_conflict_projectors=tuple(max_conflict),
    )


# ---------------------------------------------------------------------------
# Product-state pigeonhole without a KS set
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NonKsPigeonholeReport:
    n_qubits: int
    n: int
    theta: float
    z_weak_value: complex
    per_qubit_z: tuple[complex, ...]
    id_observables: tuple[str, ...]
    id_weak_values: tuple[complex, ...]
    classical_conflict: bool
    max_conflict_weak_value: complex
    max_conflict_closed_form: complex
    pre_single_qubit: np.ndarray = field(repr=False, default=None)
    post_single_qubit: np.ndarray = field(repr=False, default=None)

    def to_json_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "n": self.n,
            "theta": self.theta,
            "z_weak_value": {"re": self.z_weak_value.real, "im": self.z_weak_value.imag},
            "id_observables": list(self.id_observables),
            "id_weak_values": [
                {"re": v.real, "im": v.imag} for v in self.id_weak_values
            ],
            "classical_conflict": self.classical_conflict,
            "max_conflict_weak_value": {
                "re": self.max_conflict_weak_value.real,
                "im": self.max_conflict_weak_value.imag,
            },
            "max_conflict_closed_form": {
                "re": self.max_conflict_closed_form.real,
                "im": self.max_conflict_closed_form.imag,
            },
        }


def nonks_single_qubit_states(N: int, n: int, theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-qubit pre/post states whose Z weak value is exp(i n pi / N).

    Pre lies in the XZ plane at polar angle theta (theta = pi/2 gives |+X>);
    post lies in the YZ plane.  The pair is degenerate when sin(theta) = 0.
    """
    half = theta / 2.0
    c = math.cos(n * math.pi / (2 * N))
    s = math.sin(n * math.pi / (2 * N))
    pre = np.array([math.cos(half), math.sin(half)], dtype=complex)
    post = np.array([math.sin(half) * c, 1j * math.cos(half) * s], dtype=complex)
    norm = np.linalg.norm(post)
    if norm < 1e-12 or abs(np.vdot(post, pre)) < OVERLAP_TOL:
        raise VanishingOverlapError(
            f"theta = {theta} makes the single-qubit pre/post pair degenerate"
        )
    return pre, post / norm


def nonks_max_conflict_closed_form(N: int, n: int) -> complex:
    """Closed-form weak value of the all-+1 classical projector on N+1 qubits."""
    c = math.cos(n * math.pi / (2 * N))
    s = math.sin(n * math.pi / (2 * N))
    return cmath.exp(1j * n * math.pi * (N + 1) / (2 * N)) * (
        c ** (N + 1) + (-1j * s) ** (N + 1)
    )


def nonks_pigeonhole(N: int, n: int, theta: float = math.pi / 2) -> NonKsPigeonholeReport:
    """Product-state pigeonhole construction on N+1 qubits, N even, n odd.

    Builds the per-qubit pre/post pair, reports the single-qubit Z weak value
    exp(i n pi / N), the forced -1 weak value of every all-but-one-Z
    observable in the classical identity product, the resulting conflict in
    the classical basis, and the anomalous weak value of the maximum conflict
    projector together with its closed form.
    """
    if N % 2 != 0 or N < 2:
        raise ValueError(
            f"N must be even (odd N is handled by reducing to the {N}-qubit "
            "construction on N-1 of the qubits; this routine does not compute it)"
        )
    if n % 2 != 1:
        raise ValueError(f"n must be odd, got {n}")
    pre1, post1 = nonks_single_qubit_states(N, n, theta)
    pps1 = PpsPair.from_vectors(pre1, post1)
    z_w = weak_value(np.array([[1, 0], [0, -1]], dtype=complex), pps1)
    per_qubit = tuple([z_w] * (N + 1))

    id_set = catalog(f"classical_id{N}_1")
    id_obs = tuple(o.render() for o in id_set.observables)
    # Each ID observable holds Z on N qubits, so its weak value is z_w^N.
    id_values = tuple([z_w ** N] * len(id_obs))
    conflict = all(abs(v + 1.0) < 1e-6 for v in id_values)

    # Weak value of |0...0><0...0| + |1...1><1...1| factorizes per qubit.
    q0 = weak_value(np.array([[1, 0], [0, 0]], dtype=complex), pps1)
    q1 = weak_value(np.array([[0, 0], [0, 1]], dtype=complex), pps1)
    c_w = q0 ** (N + 1) + q1 ** (N + 1)
    return NonKsPigeonholeReport(
        n_qubits=N + 1,
        n=n,
        theta=theta,
        z_weak_value=z_w,
        per_qubit_z=per_qubit,
        id_observables=id_obs,
        id_weak_values=id_values,
        classical_conflict=conflict,
        max_conflict_weak_value=c_w,
        max_conflict_closed_form=nonks_max_conflict_closed_form(N, n),
        pre_single_qubit=pre1,
        post_single_qubit=post1,
    )
