"""Symbolic conflict-basis weak values from ID signs and commutation data.

Works on an abstract structure: named symbols, a commutation-sign matrix,
signed contexts with designated roles (pre, post, conflict, linking).  Each
linking context holds one conflict symbol Q, one pre symbol U, and one post
symbol V with c(Q', U) = c(Q', V) for every conflict symbol Q'.  Applying U
to the pre side and V to the post side maps a conflict eigenvalue pattern to
the pattern with the anticommuting eigenvalues flipped, and relates the two
weak values by the coefficient

    lambda_Q * lambda_U * lambda_V * s(Q, U, V).

Chasing these relations partitions the conflict eigenbasis into orbits whose
weak values share a magnitude; the sum rule then fixes them exactly whenever
a single orbit is nonzero.  No Pauli strings are needed for any of this;
concrete strings only unlock the extra zero-orbit test based on conflict
group elements that factor into a pre-group element times a post-group
element.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from contextua.pauli import (
    PauliObservable,
    commutation_sign,
    id_sign,
    multiply,
    parse_pauli,
)

Pattern = tuple[int, ...]


class OrbitStructureError(ValueError):
    """Raised for malformed abstract structures or inconsistent orbit data."""


class MultipleNonzeroOrbitsError(ValueError):
    """Raised when more than one orbit survives: defer to the numeric engine."""


@dataclass(frozen=True)
class AbstractContext:
    members: tuple[int, ...]
    sign: int
    role: str = "none"  # pre | post | conflict | linking | none


@dataclass(frozen=True)
class AbstractKsStructure:
    """Sign and commutation skeleton of a KS set with a designated PPS."""

    symbols: tuple[str, ...]
    commutes: tuple[tuple[int, ...], ...]
    contexts: tuple[AbstractContext, ...]
    pre_eigenvalues: tuple[int, ...] = ()
    post_eigenvalues: tuple[int, ...] = ()
    paulis: Optional[tuple[PauliObservable, ...]] = None

    def __post_init__(self):
        k = len(self.symbols)
        if len(self.commutes) != k or any(len(r) != k for r in self.commutes):
            raise OrbitStructureError("commutation matrix shape does not match symbols")
        for i in range(k):
            for j in range(k):
                if self.commutes[i][j] not in (1, -1):
                    raise OrbitStructureError("commutation entries must be +1 or -1")
                if self.commutes[i][j] != self.commutes[j][i]:
                    raise OrbitStructureError("commutation matrix must be symmetric")
        roles = [c.role for c in self.contexts]
        for need in ("pre", "post", "conflict"):
            if roles.count(need) != 1:
                raise OrbitStructureError(f"need exactly one context with role {need!r}")
        pre, post = self.pre_context, self.post_context
        if len(self.pre_eigenvalues) != len(pre.members):
            raise OrbitStructureError("pre_eigenvalues must match the pre context")
        if len(self.post_eigenvalues) != len(post.members):
            raise OrbitStructureError("post_eigenvalues must match the post context")
        if _product(self.pre_eigenvalues) != pre.sign:
            raise OrbitStructureError("pre eigenvalues violate the pre context sign")
        if _product(self.post_eigenvalues) != post.sign:
            raise OrbitStructureError("post eigenvalues violate the post context sign")
        # Symbols shared by the pre and post contexts must agree, or the PPS
        # overlap vanishes and weak values are undefined.
        pre_map = dict(zip(pre.members, self.pre_eigenvalues))
        post_map = dict(zip(post.members, self.post_eigenvalues))
        for s in set(pre_map) & set(post_map):
            if pre_map[s] != post_map[s]:
                raise OrbitStructureError(
                    f"symbol {self.symbols[s]} has conflicting pre/post eigenvalues"
                )
        conflict = set(self.conflict_context.members)
        for ctx in self.linking_contexts:
            if len(ctx.members) != 3:
                raise OrbitStructureError("linking contexts must have three members")
            q = [m for m in ctx.members if m in conflict]
            u = [m for m in ctx.members if m in pre_map]
            v = [m for m in ctx.members if m in post_map]
            if len(q) != 1 or len(u) != 1 or len(v) != 1:
                raise OrbitStructureError(
                    f"linking context {ctx.members} must hold one conflict, one pre, "
                    "and one post symbol"
                )
            for qp in conflict:
                if self.commutes[qp][u[0]] != self.commutes[qp][v[0]]:
                    raise OrbitStructureError(
                        f"linking context {ctx.members}: c({self.symbols[qp]}, "
                        f"{self.symbols[u[0]]}) differs from c(., {self.symbols[v[0]]})"
                    )
            if self.commutes[q[0]][u[0]] != 1:
                raise OrbitStructureError(
                    "a linking context's conflict symbol must commute with its partners"
                )
        if self.paulis is not None:
            if len(self.paulis) != k:
                raise OrbitStructureError("paulis must match the symbol list")
            for i in range(k):
                for j in range(k):
                    if commutation_sign(self.paulis[i], self.paulis[j]) != self.commutes[i][j]:
                        raise OrbitStructureError(
                            f"commutation matrix disagrees with the Pauli data at "
                            f"({self.symbols[i]}, {self.symbols[j]})"
                        )

    def _role(self, role: str) -> AbstractContext:
        return next(c for c in self.contexts if c.role == role)

    @property
    def pre_context(self) -> AbstractContext:
        return self._role("pre")

    @property
    def post_context(self) -> AbstractContext:
        return self._role("post")

    @property
    def conflict_context(self) -> AbstractContext:
        return self._role("conflict")

    @property
    def linking_contexts(self) -> list[AbstractContext]:
        return [c for c in self.contexts if c.role == "linking"]

    def pre_eigenvalue(self, symbol: int) -> int:
        return dict(zip(self.pre_context.members, self.pre_eigenvalues))[symbol]

    def post_eigenvalue(self, symbol: int) -> int:
        return dict(zip(self.post_context.members, self.post_eigenvalues))[symbol]

    def to_json_dict(self) -> dict:
        out = {
            "symbols": list(self.symbols),
            "commutes": [list(r) for r in self.commutes],
            "contexts": [
                {"members": list(c.members), "sign": c.sign, "role": c.role}
                for c in self.contexts
            ],
            "pre_eigenvalues": list(self.pre_eigenvalues),
            "post_eigenvalues": list(self.post_eigenvalues),
        }
        if self.paulis is not None:
            out["paulis"] = [p.render() for p in self.paulis]
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "AbstractKsStructure":
        return cls(
            symbols=tuple(data["symbols"]),
            commutes=tuple(tuple(r) for r in data["commutes"]),
            contexts=tuple(
                AbstractContext(tuple(c["members"]), int(c["sign"]), c.get("role", "none"))
                for c in data["contexts"]
            ),
            pre_eigenvalues=tuple(data.get("pre_eigenvalues", ())),
            post_eigenvalues=tuple(data.get("post_eigenvalues", ())),
            paulis=tuple(parse_pauli(s) for s in data["paulis"]) if "paulis" in data else None,
        )

    @classmethod
    def from_json(cls, text: str) -> "AbstractKsStructure":
        return cls.from_json_dict(json.loads(text))


def _product(values) -> int:
    out = 1
    for v in values:
        out *= v
    return out


def uv_coefficient(sign: int, lam_conflict: int, lam_pre: int, lam_post: int) -> int:
    """Relative weak-value coefficient of one linking relation."""
    for v in (sign, lam_conflict, lam_pre, lam_post):
        if v not in (1, -1):
            raise ValueError("all arguments must be +1 or -1")
    return lam_conflict * lam_pre * lam_post * sign


@dataclass(frozen=True)
class OrbitGraph:
    """Conflict eigenvalue patterns, linking edges, and their orbits."""

    structure: AbstractKsStructure
    patterns: tuple[Pattern, ...]
    orbits: tuple[frozenset, ...]
    relative_sign: dict = field(hash=False)
    edges: tuple[tuple[Pattern, int, Pattern, int], ...] = ()

    def orbit_of(self, pattern: Pattern) -> int:
        for k, orb in enumerate(self.orbits):
            if pattern in orb:
                return k
        raise KeyError(pattern)


def conflict_patterns(structure: AbstractKsStructure) -> list[Pattern]:
    """Eigenvalue patterns of the conflict context, product fixed to its sign."""
    ctx = structure.conflict_context
    m = len(ctx.members)
    out = []
    for k in range(1 << m):
        pat = tuple(-1 if (k >> (m - 1 - i)) & 1 else 1 for i in range(m))
        if _product(pat) == ctx.sign:
            out.append(pat)
    return out


def _link_data(structure: AbstractKsStructure, ctx: AbstractContext):
    conflict = structure.conflict_context.members
    pre_map = dict(zip(structure.pre_context.members, structure.pre_eigenvalues))
    post_map = dict(zip(structure.post_context.members, structure.post_eigenvalues))
    q = next(m for m in ctx.members if m in conflict)
    u = next(m for m in ctx.members if m in pre_map)
    v = next(m for m in ctx.members if m in post_map)
    flips = tuple(
        i for i, cm in enumerate(conflict) if structure.commutes[cm][u] == -1
    )
    q_pos = conflict.index(q)
    return q_pos, pre_map[u], post_map[v], ctx.sign, flips


def build_orbits(structure: AbstractKsStructure) -> OrbitGraph:
    """Chase every linking relation and partition the patterns into orbits.

    Compositions of linking contexts are walks in the graph, so only the
    single-link edges are generated.  Edge coefficients around any cycle must
    multiply to +1; a violation raises OrbitStructureError.
    """
    patterns = conflict_patterns(structure)
    links = [_link_data(structure, c) for c in structure.linking_contexts]
    rel: dict[Pattern, int] = {}
    orbits: list[frozenset] = []
    edges = []
    for start in patterns:
        if start in rel:
            continue
        rel[start] = 1
        component = {start}
        queue = [start]
        while queue:
            pat = queue.pop()
            for li, (q_pos, lam_u, lam_v, sign, flips) in enumerate(links):
                coeff = uv_coefficient(sign, pat[q_pos], lam_u, lam_v)
                target = list(pat)
                for f in flips:
                    target[f] = -target[f]
                target = tuple(target)
                edges.append((pat, li, target, coeff))
                # v(pat) = coeff * v(target), so relative signs divide by coeff.
                expected = rel[pat] * coeff
                if target in rel:
                    if rel[target] != expected:
                        raise OrbitStructureError(
                            f"inconsistent cycle signs at pattern {target}"
                        )
                else:
                    rel[target] = expected
                    component.add(target)
                    queue.append(target)
        orbits.append(frozenset(component))
    return OrbitGraph(
        structure=structure,
        patterns=tuple(patterns),
        orbits=tuple(orbits),
        relative_sign=rel,
        edges=tuple(edges),
    )


def max_conflict_pattern(structure: AbstractKsStructure) -> Pattern:
    """Pattern opposing every ABL-forced value, with PPS-fixed symbols kept.

    Each linking context (Q, U, V) forces lambda_Q = s * lambda_U * lambda_V;
    the maximum conflict pattern negates all of these.  Conflict symbols that
    appear directly in the pre or post context keep their fixed eigenvalues.
    Consistency with the conflict context sign is verified.
    """
    conflict = structure.conflict_context.members
    assigned: dict[int, int] = {}
    pre_map = dict(zip(structure.pre_context.members, structure.pre_eigenvalues))
    post_map = dict(zip(structure.post_context.members, structure.post_eigenvalues))
    for cm in conflict:
        if cm in pre_map:
            assigned[cm] = pre_map[cm]
        elif cm in post_map:
            assigned[cm] = post_map[cm]
    for ctx in structure.linking_contexts:
        q_pos, lam_u, lam_v, sign, _ = _link_data(structure, ctx)
        q = conflict[q_pos]
        forced = sign * lam_u * lam_v
        if q in assigned and assigned[q] != -forced:
            raise OrbitStructureError(
                f"conflict symbol {structure.symbols[q]} is both PPS-fixed and "
                "ABL-forced with incompatible values"
            )
        assigned[q] = -forced
    missing = [structure.symbols[m] for m in conflict if m not in assigned]
    if missing:
        raise OrbitStructureError(f"conflict symbols {missing} are neither linked nor PPS-fixed")
    pattern = tuple(assigned[m] for m in conflict)
    if _product(pattern) != structure.conflict_context.sign:
        raise OrbitStructureError(
            "the maximum conflict pattern violates the conflict context sign"
        )
    return pattern


def detect_zero_orbits(structure: AbstractKsStructure, graph: Optional[OrbitGraph] = None) -> set[int]:
    """Orbit indices whose weak values vanish for this PPS.

    Two mechanisms are applied.  First, a conflict symbol fixed directly by
    the pre or post selection zeroes every pattern carrying the opposite
    eigenvalue.  Second, with concrete Pauli data, any element W of the
    completed conflict group that factors as W = phi * U * V with U in the
    pre group, V in the post group, and V commuting with the whole conflict
    group, pins lambda_W = phi * lambda_U * lambda_V; patterns violating the
    pin are zero.  Killed patterns must form whole orbits.
    """
    if graph is None:
        graph = build_orbits(structure)
    conflict = structure.conflict_context.members
    pre_map = dict(zip(structure.pre_context.members, structure.pre_eigenvalues))
    post_map = dict(zip(structure.post_context.members, structure.post_eigenvalues))

    killed: set[Pattern] = set()
    for pos, cm in enumerate(conflict):
        fixed = pre_map.get(cm, post_map.get(cm))
        if fixed is None:
            continue
        for pat in graph.patterns:
            if pat[pos] != fixed:
                killed.add(pat)

    if structure.paulis is not None:
        killed |= _concrete_zero_patterns(structure, graph)

    zero_orbits: set[int] = set()
    for k, orb in enumerate(graph.orbits):
        hit = orb & killed
        if not hit:
            continue
        if hit != set(orb):
            raise OrbitStructureError(
                "zero-pattern detection split an orbit; the structure is inconsistent"
            )
        zero_orbits.add(k)
    return zero_orbits


def _signed_group(paulis: Sequence[PauliObservable], members, eigenvalues) -> dict:
    """bare-key -> eigenvalue map of the group generated by signed members."""
    out = {}
    items = [(paulis[m], lam) for m, lam in zip(members, eigenvalues)]
    # Enumerate products over subsets incrementally.
    acc: list[tuple[Optional[PauliObservable], int]] = [(None, 1)]
    for obs, lam in items:
        new = []
        for base, blam in acc:
            if base is None:
                prod, plam = obs, lam
            else:
                phased = multiply(base, obs)
                signed = phased.as_observable()
                prod = signed.bare()
                plam = blam * lam * signed.sign
            new.append((prod, plam))
        acc += new
    for prod, plam in acc:
        if prod is None:
            continue
        out[prod.key] = plam
    return out


def _concrete_zero_patterns(structure: AbstractKsStructure, graph: OrbitGraph) -> set[Pattern]:
    paulis = structure.paulis
    conflict = structure.conflict_context.members
    conflict_obs = [paulis[m] for m in conflict]
    pre_group = _signed_group(paulis, structure.pre_context.members, structure.pre_eigenvalues)
    post_group = _signed_group(paulis, structure.post_context.members, structure.post_eigenvalues)

    # Conflict group elements as (bare observable, member subset mask, phase).
    m = len(conflict)
    elements = []
    for mask in range(1, 1 << m):
        obs = None
        phase = 1
        for i in range(m):
            if (mask >> i) & 1:
                if obs is None:
                    obs = conflict_obs[i]
                else:
                    signed = multiply(obs, conflict_obs[i]).as_observable()
                    phase *= signed.sign
                    obs = signed.bare()
        if not obs.is_identity:
            elements.append((obs, mask, phase))

    # Post-group elements commuting with the entire conflict group.
    post_commutant = {}
    for key, lam in post_group.items():
        obs = PauliObservable(key[0], key[1], 1)
        if all(commutation_sign(obs, c) == 1 for c in conflict_obs):
            post_commutant[key] = (obs, lam)

    constraints = []  # (subset mask, element phase, required eigenvalue)
    for w_obs, mask, w_phase in elements:
        for v_obs, lam_v in post_commutant.values():
            phased = multiply(w_obs, v_obs)
            if phased.phase not in (1, -1):
                continue
            u_key = phased.observable.key
            if u_key not in pre_group:
                continue
            phi = 1 if phased.phase == 1 else -1
            lam_u = pre_group[u_key]
            constraints.append((mask, w_phase, phi * lam_u * lam_v))

    killed: set[Pattern] = set()
    for pat in graph.patterns:
        for mask, w_phase, required in constraints:
            lam_w = w_phase
            for i in range(m):
                if (mask >> i) & 1:
                    lam_w *= pat[i]
            if lam_w != required:
                killed.add(pat)
                break
    return killed


@dataclass(frozen=True)
class OrbitSolution:
    values: dict  # pattern -> Fraction
    magnitude: Fraction
    negative_count: int
    anomaly_sum: Fraction
    nonzero_orbit: int
    anchor: Pattern
    anchor_value: Fraction

    def value(self, pattern: Pattern) -> Fraction:
        return self.values[pattern]


def solve_orbit_weak_values(
    graph: OrbitGraph, zero_orbits: Optional[set[int]] = None
) -> OrbitSolution:
    """Exact weak values when a single orbit is nonzero.

    All nonzero-orbit values share a magnitude w; relative signs come from
    the linking relations, and the sum rule over the conflict eigenbasis
    fixes w = 1 / (n+ - n-).  The anchor is the maximum conflict pattern
    when it lies in the nonzero orbit, else the orbit's first pattern.
    """
    if zero_orbits is None:
        zero_orbits = set()
    live = [k for k in range(len(graph.orbits)) if k not in zero_orbits]
    if len(live) != 1:
        raise MultipleNonzeroOrbitsError(
            f"{len(live)} orbits remain nonzero; use the dense numeric engine"
        )
    k = live[0]
    orbit = sorted(graph.orbits[k])
    try:
        anchor = max_conflict_pattern(graph.structure)
    except OrbitStructureError:
        anchor = orbit[0]
    if anchor not in graph.orbits[k]:
        anchor = orbit[0]
    base = graph.relative_sign[anchor]
    sigma = {pat: graph.relative_sign[pat] * base for pat in orbit}
    net = sum(sigma.values())
    if net == 0:
        raise OrbitStructureError(
            "equal positive and negative counts; the sum rule cannot be met"
        )
    anchor_value = Fraction(1, net)
    values = {pat: anchor_value * sigma[pat] for pat in orbit}
    for z in zero_orbits:
        for pat in graph.orbits[z]:
            values[pat] = Fraction(0)
    negatives = [v for v in values.values() if v < 0]
    return OrbitSolution(
        values=values,
        magnitude=abs(anchor_value),
        negative_count=len(negatives),
        anomaly_sum=-sum(negatives, Fraction(0)),
        nonzero_orbit=k,
        anchor=anchor,
        anchor_value=values[anchor],
    )


def wheel_closed_forms(N: int) -> tuple[Fraction, int, Fraction]:
    """(magnitude, negative count, cumulative anomaly) for an odd-N wheel.

    w = 1 / 2^((N-1)/2), nu = 2^(N-2) - 2^((N-3)/2), and the cumulative
    anomaly nu * w = 2^((N-3)/2) - 1/2.
    """
    if N < 3 or N % 2 == 0:
        raise ValueError(
            f"closed forms hold for odd N >= 3; even wheels reduce to the "
            f"overlapping (N-1)-qubit wheels (got N={N})"
        )
    w = Fraction(1, 2 ** ((N - 1) // 2))
    nu = 2 ** (N - 2) - 2 ** ((N - 3) // 2)
    anomaly = nu * w
    assert anomaly == Fraction(2 ** ((N - 3) // 2)) - Fraction(1, 2)
    return w, nu, anomaly


def sign_product_check(structure: AbstractKsStructure) -> int:
    """Product of all context signs; -1 exactly for parity KS structures."""
    return _product(c.sign for c in structure.contexts)


# ---------------------------------------------------------------------------
# Builders for the worked structures
# ---------------------------------------------------------------------------


def structure_from_pauli_contexts(
    name_symbols: Sequence[str],
    paulis: Sequence[PauliObservable],
    contexts: Sequence[tuple[tuple[int, ...], str]],
    pre_eigenvalues: Sequence[int],
    post_eigenvalues: Sequence[int],
) -> AbstractKsStructure:
    """Assemble a structure from concrete Paulis; signs and commutation derived."""
    commutes = tuple(
        tuple(commutation_sign(a, b) for b in paulis) for a in paulis
    )
    ctxs = []
    for members, role in contexts:
        sign = id_sign([paulis[i] for i in members])
        ctxs.append(AbstractContext(tuple(members), sign, role))
    return AbstractKsStructure(
        symbols=tuple(name_symbols),
        commutes=commutes,
        contexts=tuple(ctxs),
        pre_eigenvalues=tuple(pre_eigenvalues),
        post_eigenvalues=tuple(post_eigenvalues),
        paulis=tuple(paulis),
    )


def wheel_structure(N: int, pre_eigenvalues=None, post_eigenvalues=None) -> AbstractKsStructure:
    """Wheel with the Z row as conflict, X row as pre, Y row as post.

    The default product pre/post selection fixes every X-pair and Y-pair
    eigenvalue to +1 (the all |+X> / all |+Y> choice).
    """
    ks = _catalog(f"wheel{N}")
    paulis = list(ks.observables)
    symbols = [o.render()[1:] for o in paulis]
    contexts = []
    for k, ctx in enumerate(ks.contexts):
        role = {0: "conflict", 1: "pre", 2: "post"}.get(k, "linking")
        contexts.append((ctx.members, role))
    pre = tuple(pre_eigenvalues) if pre_eigenvalues else (1,) * N
    post = tuple(post_eigenvalues) if post_eigenvalues else (1,) * N
    return structure_from_pauli_contexts(symbols, paulis, contexts, pre, post)


def square3_structure() -> AbstractKsStructure:
    """The 3-qubit square: top row conflict, middle row pre, bottom row post."""
    ks = _catalog("square3")
    paulis = list(ks.observables)
    symbols = [o.render()[1:] for o in paulis]
    contexts = []
    for k, ctx in enumerate(ks.contexts):
        role = {0: "conflict", 1: "pre", 2: "post"}.get(k, "linking")
        contexts.append((ctx.members, role))
    return structure_from_pauli_contexts(symbols, paulis, contexts, (1, 1, 1), (1, 1, 1))


def arch_structure() -> AbstractKsStructure:
    """The 6-qubit arch skeleton (no published Pauli strings required).

    Symbols A..E form the negative five-member pre context, (B,F,G,H) the
    post context, (A,I,J,K) the conflict context, and (C,F,I), (D,G,J),
    (E,H,K) the positive linking contexts.  A is shared between the pre and
    conflict contexts, so half the conflict eigenbasis is zeroed directly by
    the pre-selection.
    """
    symbols = tuple("ABCDEFGHIJK")
    idx = {s: i for i, s in enumerate(symbols)}
    contexts = (
        AbstractContext(tuple(idx[s] for s in "ABCDE"), -1, "pre"),
        AbstractContext(tuple(idx[s] for s in "BFGH"), 1, "post"),
        AbstractContext(tuple(idx[s] for s in "AIJK"), 1, "conflict"),
        AbstractContext(tuple(idx[s] for s in "CFI"), 1, "linking"),
        AbstractContext(tuple(idx[s] for s in "DGJ"), 1, "linking"),
        AbstractContext(tuple(idx[s] for s in "EHK"), 1, "linking"),
    )
    # Commutation: members of a shared context commute; a linking observable
    # anticommutes with the conflict members it must flip (the two conflict
    # symbols not in its own context, A excluded) and with the analogous
    # pre/post partners.  All remaining pairs commute.
    k = len(symbols)
    c = [[1] * k for _ in range(k)]

    def set_anti(a: str, b: str):
        c[idx[a]][idx[b]] = -1
        c[idx[b]][idx[a]] = -1

    # Linking (C,F,I) flips J and K; (D,G,J) flips I and K; (E,H,K) flips I and J.
    for u in ("C", "F"):
        set_anti(u, "J")
        set_anti(u, "K")
    for u in ("D", "G"):
        set_anti(u, "I")
        set_anti(u, "K")
    for u in ("E", "H"):
        set_anti(u, "I")
        set_anti(u, "J")
    # Pre eigenvalues: product must equal -1; fix the shared symbol A to -1.
    pre_eigenvalues = (-1, 1, 1, 1, 1)
    post_eigenvalues = (1, 1, 1, 1)
    return AbstractKsStructure(
        symbols=symbols,
        commutes=tuple(tuple(r) for r in c),
        contexts=contexts,
        pre_eigenvalues=pre_eigenvalues,
        post_eigenvalues=post_eigenvalues,
    )
