"""
Exact preparation of large real qudits that factor across qubit groups.

The embedded target is read as an L-qubit state and split into contiguous
parties of one, two or three qubits. If the state is a product across the
parties, each factor is prepared independently on its own EPR pairs:

* one qubit:   Alice measures in {(a, b), (b, -a)}; on the second outcome
               Bob applies [[0, -1], [1, 0]];
* two qubits:  the four-dimensional minimum protocol;
* three qubits: the eight-dimensional minimum protocol.

Optionally Alice first maps the target through a unitary drawn from a
catalog agreed with Bob in advance (see :class:`UsCatalog`).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .channel import BranchTable, ProtocolTranscript, RoundPlan, enumerate_branches, execute
from .errors import ConfigError, NotPreparableError
from .realspace import MINUS_I_SIGMA_Y, catalog
from .states import QuditSpec, check_pairs, embed, qubit_bounds

SEPARABLE_TOL = 1e-8
POLICIES = ("case1", "case2", "case3", "case4")


@dataclass(frozen=True)
class GroupingSpec:
    parties: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        parties = tuple(tuple(int(q) for q in p) for p in self.parties)
        object.__setattr__(self, "parties", parties)
        flat = [q for p in parties for q in p]
        if not parties or flat != list(range(len(flat))):
            raise ValueError(f"parties {parties} must be contiguous blocks covering 0..L-1 in order")
        if any(not 1 <= len(p) <= 3 for p in parties):
            raise ValueError(f"party sizes must be 1, 2 or 3: {parties}")

    @classmethod
    def from_sizes(cls, sizes: Sequence[int]) -> "GroupingSpec":
        parties, start = [], 0
        for n in sizes:
            parties.append(tuple(range(start, start + n)))
            start += n
        return cls(tuple(parties))

    @property
    def L(self) -> int:
        return sum(len(p) for p in self.parties)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(p) for p in self.parties)

    def to_list(self) -> list[list[int]]:
        return [list(p) for p in self.parties]


@dataclass(frozen=True)
class SeparabilityReport:
    grouping: GroupingSpec
    measure: float
    separable: bool
    factors: tuple[np.ndarray, ...] | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "grouping": self.grouping.to_list(),
            "measure": self.measure,
            "separable": self.separable,
            "factors": None if self.factors is None else [
                {"re": f.real.tolist(), "im": f.imag.tolist()} for f in self.factors
            ],
        }


def _split(v: np.ndarray, party: Sequence[int]) -> np.ndarray:
    """State as a (party, rest) matrix."""
    n = linalg.num_qubits(v.size)
    rest = [q for q in range(n) if q not in party]
    return v.reshape([2] * n).transpose(list(party) + rest).reshape(2 ** len(party), -1)


def purity_deficit(v, party: Sequence[int]) -> float:
    """``1 - tr(rho_party**2)`` for a pure state, from its Schmidt spectrum.

    Equals ``2 * sum_{i<j} l_i l_j`` over the normalized Schmidt weights; the
    pairwise form keeps product states at ~1e-30 instead of ~1e-16.
    """
    v = np.asarray(v, dtype=complex)
    sv = np.linalg.svd(_split(v, party), compute_uv=False)
    w = sv**2
    w = w / w.sum()
    return float(2 * np.sum(np.triu(np.outer(w, w), 1)))


def _check(v, g: GroupingSpec) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.size != 2**g.L:
        raise ValueError(f"state of length {v.size} does not match a {g.L}-qubit grouping")
    return v


def separability_measure(v, g: GroupingSpec) -> float:
    """``sqrt(2 * sum_r (1 - tr rho_r**2))`` over the parties of ``g``; zero iff product."""
    v = _check(v, g)
    return math.sqrt(2 * math.fsum(purity_deficit(v, p) for p in g.parties))


def extract_factors(v, g: GroupingSpec) -> tuple[np.ndarray, ...]:
    """Per-party factors whose tensor product is exactly ``v``.

    Each factor is the dominant Schmidt vector of its party, rotated so the
    largest entry is real and positive; the leftover global phase goes into
    the first factor.
    """
    v = _check(v, g)
    factors = []
    for p in g.parties:
        u, sv, _ = np.linalg.svd(_split(v, p))
        if sv[0] ** 2 < (1 - SEPARABLE_TOL) * np.sum(sv**2):
            raise NotPreparableError(f"party {list(p)} is entangled with the rest")
        f = u[:, 0]
        pivot = f[np.argmax(np.abs(f))]
        factors.append(f * (abs(pivot) / pivot))
    prod = linalg.tensor(*factors)
    overlap = np.vdot(prod, v)
    factors[0] = factors[0] * (overlap / abs(overlap))
    if np.max(np.abs(linalg.tensor(*factors) - v)) > SEPARABLE_TOL:
        raise NotPreparableError("factors do not reproduce the state")
    return tuple(factors)


def analyze(v, g: GroupingSpec) -> SeparabilityReport:
    m = separability_measure(v, g)
    sep = m <= SEPARABLE_TOL
    factors = None
    if sep:
        try:
            factors = extract_factors(v, g)
        except NotPreparableError:
            sep = False
    return SeparabilityReport(g, m, sep, factors)


def compositions(L: int, max_part: int = 3) -> list[tuple[int, ...]]:
    """Ordered splits of ``L`` into parts of at most ``max_part``.

    Canonical order: more parties first, then lexicographic on the sizes.
    """
    out = []

    def rec(left, acc):
        if left == 0:
            out.append(tuple(acc))
            return
        for n in range(1, min(max_part, left) + 1):
            rec(left - n, acc + [n])

    rec(L, [])
    return sorted(out, key=lambda c: (-len(c), c))


def fixed_grouping(L: int, block: int) -> GroupingSpec:
    """Consecutive blocks of ``block`` qubits with the remainder as a final party."""
    sizes = [block] * (L // block)
    if L % block:
        sizes.append(L % block)
    return GroupingSpec.from_sizes(sizes)


def candidate_groupings(L: int, policy: str, limit: int | None = None) -> list[GroupingSpec]:
    if policy == "case1":
        return [fixed_grouping(L, 1)]
    if policy == "case2":
        return [fixed_grouping(L, 2)]
    if policy == "case3":
        return [fixed_grouping(L, 3)]
    if policy == "case4":
        gs = [GroupingSpec.from_sizes(c) for c in compositions(L)]
        return gs[:limit] if limit else gs
    raise ConfigError(f"unknown grouping policy {policy!r}; choose from {POLICIES}")


def plan_grouping(v, policy: str, limit: int | None = None) -> GroupingSpec | None:
    v = np.asarray(v, dtype=complex)
    L = linalg.num_qubits(v.size)
    for g in candidate_groupings(L, policy, limit):
        if separability_measure(v, g) <= SEPARABLE_TOL:
            return g
    return None


def qubit_permutation(perm: Sequence[int]) -> np.ndarray:
    """Unitary putting input qubit ``perm[j]`` on output slot ``j``."""
    perm = list(perm)
    L = len(perm)
    if sorted(perm) != list(range(L)):
        raise ValueError(f"{perm} is not a permutation")
    n = 2**L
    eye = np.eye(n, dtype=complex)
    return np.column_stack([eye[:, i].reshape([2] * L).transpose(perm).reshape(-1) for i in range(n)])


@dataclass(frozen=True)
class UsCatalog:
    """Transforms Alice may apply to the target, fixed before the protocol runs.

    Index 0 is always the identity. Announcing a choice costs
    ``log2(len(catalog))`` classical bits.
    """

    labels: tuple[str, ...]
    matrices: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self):
        if not self.matrices or len(self.labels) != len(self.matrices):
            raise ValueError("catalog needs one label per matrix")
        if not np.allclose(self.matrices[0], np.eye(self.matrices[0].shape[0])):
            raise ValueError("catalog entry 0 must be the identity")
        if not all(linalg.is_unitary(m) for m in self.matrices):
            raise ValueError("catalog entries must be unitary")

    def __len__(self):
        return len(self.matrices)

    @property
    def cbits(self) -> float:
        return math.log2(len(self))

    def index_of(self, u) -> int:
        u = np.asarray(u)
        for i, m in enumerate(self.matrices):
            if m.shape == u.shape and np.max(np.abs(m - u)) <= 1e-12:
                return i
        raise ValueError("unitary is not registered in the catalog")

    @classmethod
    def identity(cls, L: int) -> "UsCatalog":
        return cls(("identity",), (np.eye(2**L, dtype=complex),))

    @classmethod
    def permutations(cls, L: int) -> "UsCatalog":
        perms = list(itertools.permutations(range(L)))
        return cls(tuple("perm" + "".join(map(str, p)) for p in perms),
                   tuple(qubit_permutation(p) for p in perms))


def us_catalog(name: str, L: int) -> UsCatalog:
    if name == "identity":
        return UsCatalog.identity(L)
    if name == "permutations":
        return UsCatalog.permutations(L)
    raise ConfigError(f"unknown U_s catalog {name!r}; choose 'identity' or 'permutations'")


def apply_us(v, u, cat: UsCatalog) -> np.ndarray:
    cat.index_of(u)
    return linalg.apply(u, v)


PI_ROTATION = MINUS_I_SIGMA_Y.astype(complex)


def qubit_basis_change(factor) -> np.ndarray:
    """Rows are the projection bras (a, b) and (b, -a) for a real qubit factor."""
    a, b = np.real(factor)
    return np.array([[a, b], [b, -a]], dtype=complex)


def party_operators(factor: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    """Alice's operator for one party and Bob's correction for each of its outcomes."""
    if np.max(np.abs(factor.imag)) > 1e-12:
        raise NotPreparableError("party factor is not real")
    f = factor.real
    n = f.size
    if n == 2:
        return qubit_basis_change(f), [np.eye(2, dtype=complex), PI_ROTATION]
    cat = catalog(n)
    return cat.alice_operator(f).astype(complex), [v.T.astype(complex) for v in cat.operators]


def plan_separable(q: QuditSpec, L: int | None = None, policy: str = "case1",
                   us: UsCatalog | str = "identity", limit: int | None = None) -> RoundPlan:
    if not q.is_real:
        raise ConfigError("separable protocols need real coefficients")
    L = max(1, qubit_bounds(q.s)[0]) if L is None else L
    check_pairs(q.s, L)
    v = embed(q, L)
    cat = us_catalog(us, L) if isinstance(us, str) else us
    if cat.matrices[0].shape != (2**L, 2**L):
        raise ConfigError("U_s catalog dimension does not match the register")
    groupings = candidate_groupings(L, policy, limit)

    found = None
    for ui, u in enumerate(cat.matrices):
        w = apply_us(v, u, cat)
        if np.max(np.abs(w.imag)) > 1e-12:
            continue
        for gi, g in enumerate(groupings):
            if separability_measure(w, g) <= SEPARABLE_TOL:
                found = ui, gi, g, w
                break
        if found:
            break
    if found is None:
        raise NotPreparableError(
            f"target is not separable under any {policy} grouping with {len(cat)} U_s choice(s)")
    ui, gi, g, w = found

    factors = extract_factors(w, g)
    ops, corrections = zip(*(party_operators(f) for f in factors))
    alice = [(op, list(p)) for op, p in zip(ops, g.parties)]

    def outcomes(k):
        bits = format(k, f"0{L}b")
        return [int(bits[p[0]:p[-1] + 1], 2) for p in g.parties]

    def corr(k):
        return [(corrections[r][j], list(p)) for r, (j, p) in enumerate(zip(outcomes(k), g.parties))]

    def messages(k):
        msgs = []
        if len(cat) > 1:
            msgs.append((len(cat), ui))
        if len(groupings) > 1:
            msgs.append((len(groupings), gi))
        msgs.extend((2 ** len(p), j) for j, p in zip(outcomes(k), g.parties))
        return msgs

    u = cat.matrices[ui]
    extras = {
        "policy": policy,
        "grouping": g.to_list(),
        "us_index": ui,
        "us_label": cat.labels[ui],
        # party r uses EPR pairs with the same indices as its qubit slots
        "channel_map": [{"party": r, "pairs": list(p)} for r, p in enumerate(g.parties)],
    }
    return RoundPlan("separable", q.s, L, alice, w, corr, messages,
                     logical_target=v, logical_undo=u.conj().T, extras=extras)


def run_separable(q: QuditSpec, L: int | None = None, policy: str = "case1",
                  us: UsCatalog | str = "identity", mode: str = "sample", seed: int = 0,
                  limit: int | None = None) -> ProtocolTranscript | BranchTable:
    plan = plan_separable(q, L, policy, us, limit)
    if mode == "exhaustive":
        return enumerate_branches(plan)
    if mode == "sample":
        return execute(plan, seed)
    raise ValueError(f"unknown mode {mode!r}")
