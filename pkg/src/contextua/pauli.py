"""Exact N-qubit Pauli group algebra on signed Pauli strings.

An observable is a tensor product of single-qubit letters from {I, X, Y, Z}
with an overall sign of +1 or -1 (canonical Hermitian form).  Internally the
letter at qubit j is encoded by the bit pair (x_j, z_j):

    (0, 0) = I,   (1, 0) = X,   (1, 1) = Y,   (0, 1) = Z.

All group arithmetic is exact integer arithmetic; transient powers of i only
appear inside :class:`PhasedProduct`.  Qubit 0 is the leftmost letter of the
string and the most significant bit of a computational basis index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np


class PauliFormatError(ValueError):
    """Raised when a Pauli string cannot be parsed."""


class QubitCountMismatchError(ValueError):
    """Raised when two observables act on different numbers of qubits."""


class NotMutuallyCommutingError(ValueError):
    """Raised when an operation requires a mutually commuting collection."""


class NotIdentityProductError(ValueError):
    """Raised when an ordered product is not proportional to the identity."""


class InconsistentStabilizerError(ValueError):
    """Raised when a signed Pauli collection generates -identity."""


_LETTERS = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_BITS = {v: k for k, v in _LETTERS.items()}

# Single-letter product table: (a, b) -> (power of i, result letter bits).
_MUL = {}
for _a, _la in _LETTERS.items():
    for _b, _lb in _LETTERS.items():
        _bits = (_a[0] ^ _b[0], _a[1] ^ _b[1])
        if _la == "I" or _lb == "I" or _la == _lb:
            _MUL[(_a, _b)] = (0, _bits)
        elif (_la, _lb) in (("X", "Y"), ("Y", "Z"), ("Z", "X")):
            _MUL[(_a, _b)] = (1, _bits)
        else:
            _MUL[(_a, _b)] = (3, _bits)

_PHASES = (1 + 0j, 1j, -1 + 0j, -1j)

_DENSE_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliObservable:
    """A signed N-qubit Pauli observable in canonical Hermitian form."""

    x_bits: tuple[int, ...]
    z_bits: tuple[int, ...]
    sign: int = 1

    def __post_init__(self):
        if len(self.x_bits) != len(self.z_bits) or not self.x_bits:
            raise PauliFormatError("x and z bit vectors must be nonempty and equal length")
        if any(b not in (0, 1) for b in self.x_bits + self.z_bits):
            raise PauliFormatError("bit vectors must contain only 0/1")
        if self.sign not in (1, -1):
            raise PauliFormatError("canonical sign must be +1 or -1")

    @property
    def n_qubits(self) -> int:
        return len(self.x_bits)

    @property
    def is_identity(self) -> bool:
        return not any(self.x_bits) and not any(self.z_bits)

    def letter(self, j: int) -> str:
        return _LETTERS[(self.x_bits[j], self.z_bits[j])]

    def bare(self) -> "PauliObservable":
        """The same tensor product with sign +1."""
        return self if self.sign == 1 else PauliObservable(self.x_bits, self.z_bits, 1)

    def negate(self) -> "PauliObservable":
        return PauliObservable(self.x_bits, self.z_bits, -self.sign)

    @property
    def key(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Hashable identity of the unsigned tensor product."""
        return (self.x_bits, self.z_bits)

    def render(self) -> str:
        body = "".join(self.letter(j) for j in range(self.n_qubits))
        return ("+" if self.sign == 1 else "-") + body

    def __str__(self) -> str:
        return self.render()


def parse_pauli(text: str) -> PauliObservable:
    """Parse a signed Pauli string such as "-YIY" (omitted sign means +1)."""
    if not isinstance(text, str):
        raise PauliFormatError(f"expected a string, got {type(text).__name__}")
    s = text.strip()
    sign = 1
    if s.startswith(("+", "-", "−")):
        if s[0] != "+":
            sign = -1
        s = s[1:]
    if not s:
        raise PauliFormatError(f"empty Pauli string in {text!r}")
    try:
        pairs = [_BITS[c] for c in s]
    except KeyError:
        bad = next(c for c in s if c not in _BITS)
        raise PauliFormatError(f"invalid letter {bad!r} in {text!r}") from None
    return PauliObservable(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs), sign)


@dataclass(frozen=True)
class PhasedProduct:
    """A Pauli product with its accumulated phase, a fourth root of unity.

    The observable field always carries sign +1; the entire phase of the
    literal matrix product lives in ``phase``.
    """

    phase: complex
    observable: PauliObservable

    def __post_init__(self):
        if self.phase not in _PHASES:
            raise ValueError(f"phase must be a fourth root of unity, got {self.phase}")
        if self.observable.sign != 1:
            raise ValueError("observable inside a PhasedProduct must carry sign +1")

    def as_observable(self) -> PauliObservable:
        """Collapse to canonical Hermitian form; requires a real phase."""
        if self.phase == 1:
            return self.observable
        if self.phase == -1:
            return self.observable.negate()
        raise NotIdentityProductError(f"phase {self.phase} is not Hermitian")


def _check_same_width(p: PauliObservable, q: PauliObservable) -> None:
    if p.n_qubits != q.n_qubits:
        raise QubitCountMismatchError(f"{p.n_qubits} qubits vs {q.n_qubits} qubits")


def multiply(p: PauliObservable, q: PauliObservable) -> PhasedProduct:
    """Literal matrix product P*Q with exact i-power phase tracking."""
    _check_same_width(p, q)
    exp = (0 if p.sign == 1 else 2) + (0 if q.sign == 1 else 2)
    xs, zs = [], []
    for j in range(p.n_qubits):
        e, (x, z) = _MUL[((p.x_bits[j], p.z_bits[j]), (q.x_bits[j], q.z_bits[j]))]
        exp += e
        xs.append(x)
        zs.append(z)
    return PhasedProduct(_PHASES[exp % 4], PauliObservable(tuple(xs), tuple(zs), 1))


def commutation_sign(p: PauliObservable, q: PauliObservable) -> int:
    """+1 if PQ = QP, -1 if PQ = -QP (the only two possibilities)."""
    _check_same_width(p, q)
    acc = 0
    for j in range(p.n_qubits):
        acc ^= (p.x_bits[j] & q.z_bits[j]) ^ (p.z_bits[j] & q.x_bits[j])
    return -1 if acc else 1


def id_sign(context: Sequence[PauliObservable]) -> int:
    """Sign s of an identity product: the ordered product equals s * I.

    The context must mutually commute, which makes the result independent of
    the ordering.
    """
    obs = list(context)
    if not obs:
        raise NotIdentityProductError("empty context")
    for i in range(len(obs)):
        for j in range(i + 1, len(obs)):
            if commutation_sign(obs[i], obs[j]) != 1:
                raise NotMutuallyCommutingError(
                    f"{obs[i]} and {obs[j]} anticommute"
                )
    phase = complex(obs[0].sign)
    running = obs[0].bare()
    for o in obs[1:]:
        step = multiply(running, o)
        phase *= step.phase
        running = step.observable
    if not running.is_identity:
        raise NotIdentityProductError(f"product is {running.render()}, not identity")
    if phase == 1:
        return 1
    if phase == -1:
        return -1
    raise NotIdentityProductError(f"identity product carries non-Hermitian phase {phase}")


def canonical_generators(
    elements: Iterable[PauliObservable], require_commuting: bool = True
) -> tuple[PauliObservable, ...]:
    """Reduce signed Pauli group elements to canonical independent generators.

    Performs Gaussian elimination over F_2 on the (x|z) rows while tracking
    signs through actual Pauli multiplication.  Raises
    InconsistentStabilizerError if the generated signed group contains -I.
    """
    rows: list[PauliObservable] = []
    elems = [e for e in elements if e is not None]
    if require_commuting:
        for i in range(len(elems)):
            for j in range(i + 1, len(elems)):
                if commutation_sign(elems[i], elems[j]) != 1:
                    raise NotMutuallyCommutingError(
                        f"{elems[i]} and {elems[j]} anticommute"
                    )
    for e in elems:
        r = _reduce_against(e, rows)
        if r.is_identity:
            if r.sign == -1:
                raise InconsistentStabilizerError(
                    "generated signed group contains -identity"
                )
            continue
        # Clear the new pivot from every settled row, keeping reduced echelon form.
        p = _pivot(r)
        rows = [
            _mul_signed(row, r) if (row.x_bits + row.z_bits)[p] else row
            for row in rows
        ]
        rows.append(r)
        rows.sort(key=_pivot)
    return tuple(rows)


def _pivot(p: PauliObservable) -> int:
    bits = p.x_bits + p.z_bits
    for i, b in enumerate(bits):
        if b:
            return i
    return 2 * p.n_qubits


def _reduce_against(e: PauliObservable, rows: list[PauliObservable]) -> PauliObservable:
    cur = e
    for r in rows:
        pv = _pivot(r)
        bits = cur.x_bits + cur.z_bits
        if pv < 2 * cur.n_qubits and bits[pv]:
            cur = _mul_signed(cur, r)
    return cur


def _mul_signed(a: PauliObservable, b: PauliObservable) -> PauliObservable:
    """Product of two commuting signed observables (stays Hermitian)."""
    return multiply(a, b).as_observable()


def group_element_sign(
    rows: Sequence[PauliObservable], obs: PauliObservable
) -> Optional[int]:
    """Eigenvalue of ``obs`` on the joint eigenspace stabilized by ``rows``.

    ``rows`` must be canonical generators.  Returns None when the unsigned
    tensor product of ``obs`` is not in the generated group.
    """
    cur = obs.bare()
    for r in rows:
        pv = _pivot(r)
        bits = cur.x_bits + cur.z_bits
        if bits[pv]:
            cur = _mul_signed(cur, r)
    if not cur.is_identity:
        return None
    # cur = bare(obs) * e for the matching group element e = s_e * bare(obs),
    # so cur.sign = s_e and the eigenvalue of obs is obs.sign * s_e.
    return obs.sign * cur.sign


def conjugate_stabilizer(
    u: PauliObservable, state: Sequence[tuple[PauliObservable, int]]
) -> tuple[Optional[int], list[tuple[PauliObservable, int]]]:
    """Conjugate a stabilizer eigenvalue list by a Pauli unitary.

    Acting with U on a joint eigenstate keeps the same stabilizing
    observables and flips the eigenvalue of each one that anticommutes
    with U.  When U itself lies in the state's signed stabilizer group its
    action is a pure phase, which is returned as ``a`` (None otherwise).
    """
    elements = []
    for obs, lam in state:
        if lam not in (1, -1):
            raise ValueError(f"eigenvalue must be +1 or -1, got {lam}")
        _check_same_width(u, obs)
        elements.append(obs if lam == 1 else obs.negate())
    rows = canonical_generators(elements)
    new_state = [
        (obs, commutation_sign(obs, u) * lam) for obs, lam in state
    ]
    return group_element_sign(rows, u), new_state


def to_matrix(p: PauliObservable) -> np.ndarray:
    """Dense 2^N x 2^N matrix of the observable."""
    m = np.array([[complex(p.sign)]])
    for j in range(p.n_qubits):
        m = np.kron(m, _DENSE_1Q[p.letter(j)])
    return m


def index_masks(p: PauliObservable) -> tuple[int, int]:
    """(x, z) masks of the observable in basis-index bit order."""
    n = p.n_qubits
    xm = sum(b << (n - 1 - j) for j, b in enumerate(p.x_bits))
    zm = sum(b << (n - 1 - j) for j, b in enumerate(p.z_bits))
    return xm, zm


def apply_to_vector(p: PauliObservable, vec: np.ndarray) -> np.ndarray:
    """P|v> computed by permutation and phases, without building a matrix."""
    n = p.n_qubits
    dim = 1 << n
    if vec.shape != (dim,):
        raise QubitCountMismatchError(f"vector length {vec.shape} vs 2^{n}")
    xm, zm = index_masks(p)
    y_count = sum(x & z for x, z in zip(p.x_bits, p.z_bits))
    idx = np.arange(dim, dtype=np.int64)
    parity = np.bitwise_count(np.bitwise_and(idx, zm)) & 1
    phases = p.sign * (1j ** y_count) * np.where(parity, -1.0, 1.0)
    out = np.empty(dim, dtype=complex)
    out[idx ^ xm] = phases * np.asarray(vec, dtype=complex)
    return out
