"""KS-set data model, parity and exhaustive-coloring proofs, and the catalog.

Two set flavors are supported.  An observable-form set is a list of Pauli
observables plus identity-product contexts; it is a KS set by parity when
every observable sits in an even number of contexts and the number of
negative contexts is odd.  A projector-form set is a list of stabilizer
projectors plus complete bases; the parity test asks for even incidence and
an odd basis count, and the exhaustive test searches for a 0/1 assignment
giving exactly one 1 per basis.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

from contextua.pauli import (
    PauliObservable,
    commutation_sign,
    id_sign,
    multiply,
    parse_pauli,
)
from contextua.stabilizer import Basis, StabilizerProjector, eigenbasis, enumerate_complete_bases

EXHAUSTIVE_PROJECTOR_LIMIT = 40


class ExhaustiveLimitError(ValueError):
    """Raised when the exhaustive coloring cap is exceeded."""


@dataclass(frozen=True)
class IdentityContext:
    """Member indices of one identity-product context plus its sign."""

    members: tuple[int, ...]
    sign: int


@dataclass(frozen=True)
class ObservableKsSet:
    name: str
    n_qubits: int
    observables: tuple[PauliObservable, ...]
    contexts: tuple[IdentityContext, ...]

    def __post_init__(self):
        seen = set()
        for ctx in self.contexts:
            obs = [self.observables[i] for i in ctx.members]
            s = id_sign(obs)
            if s != ctx.sign:
                raise ValueError(
                    f"context {ctx.members} has product sign {s}, recorded {ctx.sign}"
                )
            seen.update(ctx.members)
        if seen != set(range(len(self.observables))):
            missing = sorted(set(range(len(self.observables))) - seen)
            raise ValueError(f"observables {missing} appear in no context")

    def context_observables(self, ctx: IdentityContext) -> list[PauliObservable]:
        return [self.observables[i] for i in ctx.members]

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "n_qubits": self.n_qubits,
            "observables": [o.render() for o in self.observables],
            "contexts": [
                {"members": list(c.members), "sign": c.sign} for c in self.contexts
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ObservableKsSet":
        return cls(
            name=data.get("name", "unnamed"),
            n_qubits=int(data["n_qubits"]),
            observables=tuple(parse_pauli(s) for s in data["observables"]),
            contexts=tuple(
                IdentityContext(tuple(c["members"]), int(c["sign"]))
                for c in data["contexts"]
            ),
        )


@dataclass(frozen=True)
class ProjectorKsSet:
    name: str
    n_qubits: int
    projectors: tuple[StabilizerProjector, ...]
    bases: tuple[tuple[int, ...], ...]
    eigenbasis_count: int = 0

    def __post_init__(self):
        for b in self.bases:
            Basis([self.projectors[i] for i in b])

    def basis(self, k: int) -> Basis:
        return Basis([self.projectors[i] for i in self.bases[k]])

    @classmethod
    def from_observable_set(
        cls, obs_set: ObservableKsSet, include_hybrid_bases: bool = False
    ) -> "ProjectorKsSet":
        """Collect the joint eigenbases of every context into one projector set.

        Projector indices follow first appearance, context by context.  With
        ``include_hybrid_bases`` the basis list additionally holds every other
        complete basis formable from the projectors, after the eigenbases, in
        lexicographic order of sorted member indices.
        """
        projectors: list[StabilizerProjector] = []
        index: dict = {}
        eigen: list[tuple[int, ...]] = []
        for ctx in obs_set.contexts:
            basis = eigenbasis(obs_set.context_observables(ctx), obs_set.n_qubits)
            ids = []
            for p in basis:
                if p.key not in index:
                    index[p.key] = len(projectors)
                    projectors.append(p)
                ids.append(index[p.key])
            eigen.append(tuple(ids))
        if include_hybrid_bases:
            bases = enumerate_complete_bases(projectors, obs_set.n_qubits, eigenbases=eigen)
        else:
            bases = list(eigen)
        return cls(
            name=obs_set.name,
            n_qubits=obs_set.n_qubits,
            projectors=tuple(projectors),
            bases=tuple(tuple(b) for b in bases),
            eigenbasis_count=len(eigen),
        )

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "n_qubits": self.n_qubits,
            "projectors": [p.to_json_dict() for p in self.projectors],
            "bases": [list(b) for b in self.bases],
            "eigenbasis_count": self.eigenbasis_count,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ProjectorKsSet":
        n = int(data["n_qubits"])
        return cls(
            name=data.get("name", "unnamed"),
            n_qubits=n,
            projectors=tuple(
                StabilizerProjector.from_json_dict(p, n) for p in data["projectors"]
            ),
            bases=tuple(tuple(b) for b in data["bases"]),
            eigenbasis_count=int(data.get("eigenbasis_count", 0)),
        )


@dataclass(frozen=True)
class KsCertificate:
    """Verification verdict plus re-checkable evidence."""

    verdict: str  # KS_by_parity | KS_by_exhaustion | Colorable | NotKS_parity_fails
    evidence: dict = field(default_factory=dict)

    @property
    def is_ks(self) -> bool:
        return self.verdict in ("KS_by_parity", "KS_by_exhaustion")


def verify_observable_ks(ks_set: ObservableKsSet) -> KsCertificate:
    """Parity test: even context incidence per observable, odd negative count."""
    incidence = [0] * len(ks_set.observables)
    for ctx in ks_set.contexts:
        for i in ctx.members:
            incidence[i] += 1
    negatives = sum(1 for ctx in ks_set.contexts if ctx.sign == -1)
    even_incidence = all(c % 2 == 0 for c in incidence)
    evidence = {
        "incidence": incidence,
        "negative_contexts": negatives,
        "context_count": len(ks_set.contexts),
    }
    if even_incidence and negatives % 2 == 1:
        return KsCertificate("KS_by_parity", evidence)
    return KsCertificate("NotKS_parity_fails", evidence)


def verify_projector_ks(ks_set: ProjectorKsSet, mode: str = "parity") -> KsCertificate:
    """Parity or exhaustive-coloring verdict for a projector-form set."""
    if mode == "parity":
        incidence = [0] * len(ks_set.projectors)
        for b in ks_set.bases:
            for i in b:
                incidence[i] += 1
        evidence = {"incidence": incidence, "basis_count": len(ks_set.bases)}
        if all(c % 2 == 0 for c in incidence) and len(ks_set.bases) % 2 == 1:
            return KsCertificate("KS_by_parity", evidence)
        return KsCertificate("NotKS_parity_fails", evidence)
    if mode == "exhaustive":
        if len(ks_set.projectors) > EXHAUSTIVE_PROJECTOR_LIMIT:
            raise ExhaustiveLimitError(
                f"{len(ks_set.projectors)} projectors exceeds the exhaustive cap "
                f"of {EXHAUSTIVE_PROJECTOR_LIMIT}"
            )
        witness = _search_coloring(len(ks_set.projectors), ks_set.bases)
        if witness is None:
            return KsCertificate(
                "KS_by_exhaustion",
                {"projectors": len(ks_set.projectors), "bases": len(ks_set.bases)},
            )
        return KsCertificate("Colorable", {"coloring": witness})
    raise ValueError(f"unknown mode {mode!r}")


def _search_coloring(
    n_projectors: int, bases: Sequence[tuple[int, ...]]
) -> Optional[list[int]]:
    """Backtracking 0/1 assignment with exactly one 1 per basis, or None.

    Branches on the basis with the fewest live candidates; assigning a 1
    forces 0 on every basis-mate, and a basis whose members all reach 0 kills
    the branch.
    """
    def check_and_force(values: dict) -> Optional[bool]:
        # Returns False on contradiction, True if fully consistent and done.
        changed = True
        while changed:
            changed = False
            done = True
            for bi, b in enumerate(bases):
                ones = [m for m in b if values.get(m) == 1]
                free = [m for m in b if m not in values]
                if len(ones) > 1:
                    return False
                if ones:
                    for m in b:
                        if m not in ones:
                            if values.get(m) == 1:
                                return False
                            if m not in values:
                                values[m] = 0
                                changed = True
                    continue
                if not free:
                    return False  # all members zero
                if len(free) == 1:
                    values[free[0]] = 1
                    changed = True
                done = False
            if done:
                return True
        return None

    def solve(values: dict) -> Optional[dict]:
        state = check_and_force(values)
        if state is False:
            return None
        if state is True:
            return values
        best_bi, best_free = None, None
        for bi, b in enumerate(bases):
            if any(values.get(m) == 1 for m in b):
                continue
            free = [m for m in b if m not in values]
            if best_free is None or len(free) < len(best_free):
                best_bi, best_free = bi, free
        for candidate in best_free:
            trial = dict(values)
            trial[candidate] = 1
            result = solve(trial)
            if result is not None:
                return result
        return None

    solution = solve({})
    if solution is None:
        return None
    return [solution.get(i, 0) for i in range(n_projectors)]


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------


def _obs_set(name, n, rows, signs):
    observables: list[PauliObservable] = []
    index: dict = {}
    contexts = []
    for row, sign in zip(rows, signs):
        members = []
        for s in row:
            obs = parse_pauli(s)
            if obs.key not in index:
                index[obs.key] = len(observables)
                observables.append(obs)
            members.append(index[obs.key])
        contexts.append(IdentityContext(tuple(members), sign))
    return ObservableKsSet(name, n, tuple(observables), tuple(contexts))


def _square3() -> ObservableKsSet:
    rows = [
        ["ZIZ", "ZZI", "IZZ"],
        ["XIX", "XXI", "IXX"],
        ["YIY", "YYI", "IYY"],
        # Columns carry the X-row member first so that eigenbasis patterns run
        # over the eigenvalues fixed by a row-2/row-3 pre/post selection.
        ["XIX", "YIY", "ZIZ"],
        ["XXI", "YYI", "ZZI"],
        ["IXX", "IYY", "IZZ"],
    ]
    return _obs_set("square3", 3, rows, [1, 1, 1, -1, -1, -1])


def _square2() -> ObservableKsSet:
    rows = [
        ["ZI", "IZ", "ZZ"],
        ["IX", "XI", "XX"],
        ["ZX", "XZ", "YY"],
        ["ZI", "IX", "ZX"],
        ["IZ", "XI", "XZ"],
        ["ZZ", "XX", "YY"],
    ]
    return _obs_set("square2", 2, rows, [1, 1, 1, 1, 1, -1])


def _pair_string(n: int, i: int, letter: str) -> str:
    letters = ["I"] * n
    letters[i] = letter
    letters[(i + 1) % n] = letter
    return "".join(letters)


def _wheel(n: int) -> ObservableKsSet:
    if n < 3:
        raise ValueError(f"wheel needs at least 3 qubits, got {n}")
    rows = [[_pair_string(n, i, L) for i in range(n)] for L in ("Z", "X", "Y")]
    cols = [
        [_pair_string(n, i, "X"), _pair_string(n, i, "Y"), _pair_string(n, i, "Z")]
        for i in range(n)
    ]
    return _obs_set(f"wheel{n}", n, rows + cols, [1, 1, 1] + [-1] * n)


def _ghz_star() -> ObservableKsSet:
    rows = [
        ["XII", "IXI", "IIX", "XXX"],
        ["XII", "IYI", "IIY", "XYY"],
        ["YII", "IXI", "IIY", "YXY"],
        ["YII", "IYI", "IIX", "YYX"],
        ["XXX", "XYY", "YXY", "YYX"],
    ]
    return _obs_set("ghz_star", 3, rows, [1, 1, 1, 1, -1])


def _classical_id(n: int, m: int) -> ObservableKsSet:
    if n < 2 or n % 2 != 0:
        raise ValueError(f"classical_id needs even N >= 2, got N={n}")
    if m < 1 or m % 2 != 1:
        raise ValueError(f"classical_id needs odd m >= 1, got m={m}")
    k = n + m
    rows = []
    for i in range(k):
        letters = ["Z"] * k
        for d in range(m):
            letters[(i + d) % k] = "I"
        rows.append(["".join(letters)])
    # One context holding all K observables; the product is +identity since
    # each qubit carries Z exactly N times.
    observables = [parse_pauli(r[0]) for r in rows]
    contexts = (IdentityContext(tuple(range(k)), 1),)
    return ObservableKsSet(f"classical_id{n}_{m}", k, tuple(observables), contexts)


_WHEEL_RE = re.compile(r"^wheel\(?(\d+)\)?$")
_CLASSICAL_RE = re.compile(r"^classical_id[\(_]?(\d+)[,_](\d+)\)?$")


def catalog_names() -> list[str]:
    return ["square2", "square3", "wheel<N>", "ghz_star", "classical_id<N>_<m>"]


def catalog(name: str) -> ObservableKsSet:
    """Built-in observable-form sets by name.

    Accepted names: square2, square3, ghz_star, wheelN / wheel(N) for N >= 3,
    and classical_idN_m / classical_id(N,m) for even N and odd m.
    """
    key = name.strip().lower()
    if key == "square3":
        return _square3()
    if key == "square2":
        return _square2()
    if key == "ghz_star":
        return _ghz_star()
    m = _WHEEL_RE.match(key)
    if m:
        return _wheel(int(m.group(1)))
    m = _CLASSICAL_RE.match(key)
    if m:
        return _classical_id(int(m.group(1)), int(m.group(2)))
    raise ValueError(f"unknown catalog set {name!r}")


# ---------------------------------------------------------------------------
# Sub-stabilizer completion
# ---------------------------------------------------------------------------


def _context_group_products(
    obs_set: ObservableKsSet, ctx: IdentityContext
) -> list[PauliObservable]:
    """Signed products of 2+ context members, excluding identity, deduped."""
    members = obs_set.context_observables(ctx)
    seen = {obs_set.observables[i].key for i in ctx.members}
    out = []
    for r in range(2, len(members)):
        for combo in itertools.combinations(range(len(members)), r):
            acc = members[combo[0]]
            for idx in combo[1:]:
                acc = multiply(acc, members[idx]).as_observable()
            if acc.is_identity or acc.key in seen:
                continue
            seen.add(acc.key)
            out.append(acc)
    return out


def complete_substabilizers(obs_set: ObservableKsSet) -> ObservableKsSet:
    """Close every context under multiplication and add the induced ID3s.

    New observables (products of context members, recorded with a +1
    canonical sign) are appended to the observable list and to their home
    context.  Any commuting triple of listed observables that multiplies to
    +-identity and is not already inside a single closed context is added as a
    new three-member context.  Applying the completion twice equals applying
    it once.
    """
    observables = list(obs_set.observables)
    index = {o.key: i for i, o in enumerate(observables)}
    closed_contexts: list[IdentityContext] = []
    for ctx in obs_set.contexts:
        members = list(ctx.members)
        for prod in _context_group_products(obs_set, ctx):
            bare = prod.bare()
            if bare.key not in index:
                index[bare.key] = len(observables)
                observables.append(bare)
            if index[bare.key] not in members:
                members.append(index[bare.key])
        sign = id_sign([observables[i] for i in members])
        closed_contexts.append(IdentityContext(tuple(members), sign))

    context_sets = [set(c.members) for c in closed_contexts]
    new_contexts: list[IdentityContext] = []
    seen_triples = set()
    for i in range(len(observables)):
        for j in range(i + 1, len(observables)):
            a, b = observables[i], observables[j]
            if commutation_sign(a, b) != 1:
                continue
            prod = multiply(a, b).as_observable()
            if prod.is_identity:
                continue
            k = index.get(prod.bare().key)
            if k is None or k in (i, j):
                continue
            triple = frozenset((i, j, k))
            if triple in seen_triples:
                continue
            seen_triples.add(triple)
            if any(triple <= cs for cs in context_sets):
                continue
            members = tuple(sorted(triple))
            sign = id_sign([observables[t] for t in members])
            new_contexts.append(IdentityContext(members, sign))

    return ObservableKsSet(
        name=obs_set.name,
        n_qubits=obs_set.n_qubits,
        observables=tuple(observables),
        contexts=tuple(closed_contexts) + tuple(new_contexts),
    )
