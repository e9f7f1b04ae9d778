"""Stabilizer projectors of arbitrary rank and complete-basis machinery.

A projector is specified by a list of (observable, eigenvalue) generators.
With l independent generators on N qubits it has rank 2^(N-l).  Orthogonality
and containment are decided exactly on the signed generated groups, which for
stabilizer projectors agrees with the dense trace criteria.
"""

from __future__ import annotations

import itertools
import os
from typing import Iterable, Optional, Sequence

import numpy as np

from contextua.pauli import (
    InconsistentStabilizerError,
    PauliObservable,
    QubitCountMismatchError,
    apply_to_vector,
    canonical_generators,
    group_element_sign,
    id_sign,
    multiply,
    parse_pauli,
    to_matrix,
)

DEFAULT_VECTOR_QUBIT_LIMIT = 14
DEFAULT_MATRIX_QUBIT_LIMIT = 10
_GROUP_ENUM_LIMIT = 20


class DenseLimitError(ValueError):
    """Raised when a dense conversion would exceed the configured qubit cap."""


def _dense_limit(default: int) -> int:
    env = os.environ.get("CONTEXTUA_DENSE_LIMIT")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"CONTEXTUA_DENSE_LIMIT must be an integer, got {env!r}")
    return default


class StabilizerProjector:
    """Rank-2^(N-l) projector given by commuting generators with eigenvalues."""

    def __init__(
        self,
        n_qubits: int,
        generators: Sequence[tuple[PauliObservable, int]],
    ):
        self.n_qubits = int(n_qubits)
        gens = []
        elements = []
        for obs, lam in generators:
            if lam not in (1, -1):
                raise ValueError(f"eigenvalue must be +1 or -1, got {lam}")
            if obs.n_qubits != self.n_qubits:
                raise QubitCountMismatchError(
                    f"generator {obs} acts on {obs.n_qubits} qubits, projector on {self.n_qubits}"
                )
            gens.append((obs, lam))
            elements.append(obs if lam == 1 else obs.negate())
        self.generators = tuple(gens)
        # Canonical signed group rows; raises on anticommuting or inconsistent input.
        self.rows = canonical_generators(elements)

    # -- structure ---------------------------------------------------------

    @property
    def num_independent(self) -> int:
        return len(self.rows)

    @property
    def rank(self) -> int:
        return 2 ** (self.n_qubits - self.num_independent)

    @property
    def key(self) -> tuple:
        """Canonical identity: equal keys mean equal projectors."""
        return (self.n_qubits, tuple(r.render() for r in self.rows))

    def __eq__(self, other) -> bool:
        return isinstance(other, StabilizerProjector) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        inner = ", ".join(r.render() for r in self.rows)
        return f"StabilizerProjector[{inner}]"

    # -- group queries -------------------------------------------------------

    def element_sign(self, obs: PauliObservable) -> Optional[int]:
        """Eigenvalue of ``obs`` on this projector's subspace, or None."""
        return group_element_sign(self.rows, obs)

    def group_elements(self) -> list[PauliObservable]:
        """All 2^l signed elements of the generated group, identity included."""
        l = self.num_independent
        if l > _GROUP_ENUM_LIMIT:
            raise ValueError(f"group with 2^{l} elements is too large to enumerate")
        identity = PauliObservable((0,) * self.n_qubits, (0,) * self.n_qubits, 1)
        out = [identity]
        for r in self.rows:
            out += [multiply(e, r).as_observable() for e in out]
        return out

    def is_orthogonal_to(self, other: "StabilizerProjector") -> bool:
        """True iff the signed groups share an observable with opposite signs.

        Equivalent to trace(P Q) = 0 for stabilizer projectors.
        """
        if other.n_qubits != self.n_qubits:
            raise QubitCountMismatchError("projector qubit counts differ")
        a, b = (self, other) if self.num_independent <= other.num_independent else (other, self)
        for e in a.group_elements():
            if e.is_identity:
                continue
            s = b.element_sign(e)
            if s == -1:
                return True
        return False

    def contains(self, state: "StabilizerProjector") -> bool:
        """True iff ``state``'s subspace lies inside this projector's subspace."""
        return all(state.element_sign(r) == 1 for r in self.rows)

    def is_diagonal(self) -> bool:
        """True iff every group element is Z-type (diagonal in the product basis)."""
        return all(not any(r.x_bits) for r in self.rows)

    # -- dense conversions ---------------------------------------------------

    def apply_to(self, vec: np.ndarray) -> np.ndarray:
        """Apply the projector to a dense vector via (1 + lam O)/2 sweeps."""
        v = np.asarray(vec, dtype=complex)
        for r in self.rows:
            v = (v + apply_to_vector(r, v)) / 2.0
        return v

    def dense_vector(self, limit: Optional[int] = None) -> np.ndarray:
        """Normalized state vector of a rank-1 projector.

        Global phase is fixed so the first nonzero amplitude is real positive.
        """
        if self.rank != 1:
            raise ValueError(f"dense_vector requires rank 1, got rank {self.rank}")
        cap = limit if limit is not None else _dense_limit(DEFAULT_VECTOR_QUBIT_LIMIT)
        if self.n_qubits > cap:
            raise DenseLimitError(f"{self.n_qubits} qubits exceeds vector limit {cap}")
        dim = 1 << self.n_qubits
        for seed in range(dim):
            v = np.zeros(dim, dtype=complex)
            v[seed] = 1.0
            v = self.apply_to(v)
            norm = np.linalg.norm(v)
            if norm > 1e-8:
                return _fix_phase(v / norm)
        raise InconsistentStabilizerError("projector annihilated every seed vector")

    def dense_matrix(self, limit: Optional[int] = None) -> np.ndarray:
        """Dense matrix: ordered product of (I + lam O)/2 over the generators."""
        cap = limit if limit is not None else _dense_limit(DEFAULT_MATRIX_QUBIT_LIMIT)
        if self.n_qubits > cap:
            raise DenseLimitError(f"{self.n_qubits} qubits exceeds matrix limit {cap}")
        dim = 1 << self.n_qubits
        m = np.eye(dim, dtype=complex)
        for r in self.rows:
            m = (m + to_matrix(r) @ m) / 2.0
        return m

    # -- serialization -------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {"generators": [[obs.render(), lam] for obs, lam in self.generators]}

    @classmethod
    def from_json_dict(cls, data: dict, n_qubits: Optional[int] = None) -> "StabilizerProjector":
        gens = [(parse_pauli(s), int(lam)) for s, lam in data["generators"]]
        if n_qubits is None:
            if not gens:
                raise ValueError("cannot infer qubit count from an empty generator list")
            n_qubits = gens[0][0].n_qubits
        return cls(n_qubits, gens)

    @classmethod
    def from_strings(cls, strings: Sequence[str], n_qubits: Optional[int] = None) -> "StabilizerProjector":
        """Build from signed strings like "-ZIZ"; the sign is the eigenvalue."""
        gens = []
        for s in strings:
            obs = parse_pauli(s)
            gens.append((obs.bare(), obs.sign))
        if n_qubits is None:
            if not gens:
                raise ValueError("empty generator list")
            n_qubits = gens[0][0].n_qubits
        return cls(n_qubits, gens)


def _fix_phase(v: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    for a in v:
        if abs(a) > tol:
            return v * (abs(a) / a)
    return v


def identity_projector(n_qubits: int) -> StabilizerProjector:
    return StabilizerProjector(n_qubits, [])


def projector_rank(p: StabilizerProjector) -> int:
    """Rank 2^(N-l), l the number of independent generators."""
    return p.rank


def orthogonal(p: StabilizerProjector, q: StabilizerProjector) -> bool:
    return p.is_orthogonal_to(q)


class Basis:
    """An ordered complete measurement basis of mutually orthogonal projectors."""

    def __init__(self, members: Sequence[StabilizerProjector]):
        members = tuple(members)
        if not members:
            raise ValueError("a basis needs at least one projector")
        n = members[0].n_qubits
        if any(m.n_qubits != n for m in members):
            raise QubitCountMismatchError("basis members act on different qubit counts")
        total = sum(m.rank for m in members)
        if total != 1 << n:
            raise ValueError(f"ranks sum to {total}, expected 2^{n} = {1 << n}")
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                if not members[i].is_orthogonal_to(members[j]):
                    raise ValueError(f"members {i} and {j} are not orthogonal")
        self.members = members
        self.n_qubits = n

    @property
    def cardinality(self) -> int:
        return len(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i):
        return self.members[i]


def eigenbasis(context: Sequence[PauliObservable], n_qubits: int) -> Basis:
    """Joint eigenbasis of an identity product.

    For an ID of M observables with sign s this is the 2^(M-1) projectors of
    rank 2^(N-M+1), one per eigenvalue pattern whose product equals s.  The
    patterns run over the first M-1 observables in the order (+...+, +...-,
    ..., -...-), with + before - and the leftmost observable most significant;
    the last observable's eigenvalue is determined by s.
    """
    obs = list(context)
    s = id_sign(obs)
    m = len(obs)
    if m < 2:
        raise ValueError("an identity product context needs at least two observables")
    projectors = []
    for k in range(1 << (m - 1)):
        lams = [(-1 if (k >> (m - 2 - i)) & 1 else 1) for i in range(m - 1)]
        prod = 1
        for lam in lams:
            prod *= lam
        lams.append(s * prod)
        projectors.append(StabilizerProjector(n_qubits, list(zip(obs, lams))))
    return Basis(projectors)


def enumerate_complete_bases(
    projectors: Sequence[StabilizerProjector],
    n_qubits: int,
    eigenbases: Optional[Sequence[tuple[int, ...]]] = None,
) -> list[tuple[int, ...]]:
    """All complete bases formable from ``projectors``, as index tuples.

    A complete basis is a subset of pairwise-orthogonal projectors whose ranks
    sum to 2^N (such a subset is automatically maximal).  Bases are emitted in
    lexicographic order of their sorted member indices; when ``eigenbases``
    are supplied those are emitted first, in the given order, followed by the
    remaining bases lexicographically.
    """
    n = len(projectors)
    dim = 1 << n_qubits
    ranks = [p.rank for p in projectors]
    orth = [[False] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            o = projectors[i].is_orthogonal_to(projectors[j])
            orth[i][j] = orth[j][i] = o

    found: list[tuple[int, ...]] = []

    def extend(chosen: list[int], total: int, start: int) -> None:
        if total == dim:
            found.append(tuple(chosen))
            return
        for k in range(start, n):
            if total + ranks[k] > dim:
                continue
            if all(orth[k][c] for c in chosen):
                chosen.append(k)
                extend(chosen, total + ranks[k], k + 1)
                chosen.pop()

    extend([], 0, 0)
    if eigenbases:
        eigen = [tuple(sorted(b)) for b in eigenbases]
        eigen_set = set(eigen)
        rest = [b for b in found if b not in eigen_set]
        missing = [b for b in eigen if b not in set(found)]
        if missing:
            raise ValueError(f"claimed eigenbases not found among complete bases: {missing}")
        return eigen + rest
    return found
