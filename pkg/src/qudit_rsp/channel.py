"""
Two-party protocol engine over L shared EPR pairs.

The joint state lives on 2L qubits: Alice's halves occupy slots 0..L-1
(most significant), Bob's halves slots L..2L-1. Viewed as a
``2**L x 2**L`` matrix (rows indexed by Alice, columns by Bob) a fresh
channel is ``I / 2**(L/2)``, so after Alice applies ``M`` the (unnormalized)
state Bob holds when she observes ``k`` is row ``k`` of ``M``.

Every protocol in this package is expressed as a :class:`RoundPlan` and run
through :func:`execute` (one seeded round), :func:`enumerate_branches`
(all outcomes, exact probabilities) or :func:`sample_many` (Monte Carlo).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence, Union

import numpy as np

from . import linalg
from .errors import InvariantViolation

MAX_PAIRS = 10
SUCCESS_FIDELITY = 1 - 1e-8

#: a local operator together with the qubit slots (within one party's register) it acts on
LocalOp = tuple[np.ndarray, Sequence[int]]
#: either a full register operator or a list of local pieces
Operation = Union[np.ndarray, list[LocalOp]]


@dataclass(frozen=True)
class EprChannel:
    L: int
    joint: np.ndarray = field(repr=False)

    @property
    def alice_slots(self) -> list[int]:
        return list(range(self.L))

    @property
    def bob_slots(self) -> list[int]:
        return list(range(self.L, 2 * self.L))

    def as_matrix(self) -> np.ndarray:
        """Joint amplitudes as a (Alice index, Bob index) matrix."""
        n = 2**self.L
        return self.joint.reshape(n, n)


@dataclass(frozen=True)
class ClassicalMessage:
    alphabet_size: int
    symbol: int

    def __post_init__(self):
        if self.alphabet_size < 1 or not 0 <= self.symbol < self.alphabet_size:
            raise ValueError(f"symbol {self.symbol} outside alphabet of size {self.alphabet_size}")

    @property
    def cbits(self) -> float:
        return math.log2(self.alphabet_size)

    @property
    def wire_bits(self) -> int:
        return math.ceil(math.log2(self.alphabet_size)) if self.alphabet_size > 1 else 0

    def to_dict(self) -> dict:
        return {"alphabet": self.alphabet_size, "symbol": self.symbol}


@dataclass(frozen=True)
class ProtocolTranscript:
    protocol: str
    s: int
    L: int
    alice_outcome: int
    bob_final: np.ndarray = field(repr=False)
    success: bool = False
    fidelity: float = 0.0
    messages: tuple[ClassicalMessage, ...] = ()
    extras: dict = field(default_factory=dict)

    @property
    def cbits_total(self) -> float:
        return float(sum(m.cbits for m in self.messages))

    @property
    def wire_bits(self) -> int:
        return sum(m.wire_bits for m in self.messages)

    def to_dict(self) -> dict:
        d = {
            "protocol": self.protocol,
            "s": self.s,
            "L": self.L,
            "outcome": self.alice_outcome,
            "success": self.success,
            "fidelity": self.fidelity,
            "cbits": self.cbits_total,
            "messages": [m.to_dict() for m in self.messages],
        }
        d.update(self.extras)
        return d


@dataclass(frozen=True)
class Branch:
    k: int
    prob: float
    bob_state: np.ndarray | None = field(default=None, repr=False)


@dataclass(frozen=True)
class BranchResult:
    """One exhaustive-mode row: Alice's outcome and what Bob ends up with."""

    k: int
    prob: float
    success: bool
    fidelity: float
    cbits: float
    bob_final: np.ndarray | None = field(default=None, repr=False)
    logical_fidelity: float | None = None

    def to_dict(self) -> dict:
        d = {
            "k": self.k,
            "prob": self.prob,
            "success": self.success,
            "fidelity_after_correction": self.fidelity,
            "cbits": self.cbits,
        }
        if self.logical_fidelity is not None:
            d["logical_fidelity"] = self.logical_fidelity
        return d


@dataclass(frozen=True)
class BranchTable:
    protocol: str
    s: int
    L: int
    branches: tuple[BranchResult, ...]
    extras: dict = field(default_factory=dict)

    @property
    def success_probability(self) -> float:
        return math.fsum(b.prob for b in self.branches if b.success)

    @property
    def total_probability(self) -> float:
        return math.fsum(b.prob for b in self.branches)

    @property
    def cbits(self) -> float:
        """Cost of a run; all protocols here charge the same on every branch."""
        costs = {round(b.cbits, 12) for b in self.branches if b.prob > 0}
        if len(costs) != 1:
            raise InvariantViolation(f"branch-dependent cbit cost {sorted(costs)}")
        return next(b.cbits for b in self.branches if b.prob > 0)

    def to_dict(self) -> dict:
        d = {
            "protocol": self.protocol,
            "s": self.s,
            "L": self.L,
            "success_probability": self.success_probability,
            "cbits": self.cbits,
            "branches": [b.to_dict() for b in self.branches],
        }
        d.update(self.extras)
        return d


@dataclass(frozen=True)
class RoundPlan:
    """Everything a protocol fixes before the channel is touched.

    ``correction(k)`` returns Bob's operation for outcome ``k`` or ``None``
    when ``k`` signals failure; ``messages(k)`` lists the
    ``(alphabet_size, symbol)`` pairs Alice sends.
    """

    protocol: str
    s: int
    L: int
    alice_operation: Operation = field(repr=False)
    target: np.ndarray = field(repr=False)
    correction: Callable[[int], Operation | None] = field(repr=False)
    messages: Callable[[int], list[tuple[int, int]]] = field(repr=False)
    logical_target: np.ndarray | None = field(default=None, repr=False)
    logical_undo: np.ndarray | None = field(default=None, repr=False)
    extras: dict = field(default_factory=dict)


def build_channel(L: int) -> EprChannel:
    """``L`` copies of (|00> + |11>)/sqrt(2), regrouped so Alice's qubits come first."""
    if not 1 <= L <= MAX_PAIRS:
        raise ValueError(f"pair count must be in [1, {MAX_PAIRS}], got {L}")
    bell = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)
    pairs = linalg.tensor(*[bell] * L)  # slot order a0 b0 a1 b1 ...
    order = [2 * i for i in range(L)] + [2 * i + 1 for i in range(L)]
    joint = pairs.reshape([2] * (2 * L)).transpose(order).reshape(-1)
    return EprChannel(L, joint)


def alice_apply(ch: EprChannel, m, slots: Sequence[int] | None = None) -> EprChannel:
    """Apply a unitary to Alice's qubits (all of them unless ``slots`` is given)."""
    m = linalg.as_matrix(m)
    if not linalg.is_unitary(m):
        raise ValueError("Alice's operator is not unitary")
    slots = ch.alice_slots if slots is None else list(slots)
    if any(not 0 <= q < ch.L for q in slots):
        raise ValueError(f"slots {slots} are not Alice's")
    if len(slots) == ch.L and slots == ch.alice_slots:
        if m.shape != (2**ch.L, 2**ch.L):
            raise ValueError(f"operator of shape {m.shape} does not act on {ch.L} qubits")
        joint = (m @ ch.as_matrix()).reshape(-1)
    else:
        joint = linalg.apply_on_slots(m, ch.joint, slots)
    return EprChannel(ch.L, joint)


def measurement_branches(ch: EprChannel) -> list[Branch]:
    """All computational-basis outcomes of Alice's register with Bob's conditional states."""
    mat = ch.as_matrix()
    probs = np.sum(np.abs(mat) ** 2, axis=1)
    out = []
    for k, p in enumerate(probs):
        p = float(p)
        bob = mat[k] / math.sqrt(p) if p > 1e-15 else None
        out.append(Branch(k, p, bob))
    return out


def draw_outcome(probs: np.ndarray, seed: int) -> int:
    """Draw one outcome from ``probs`` with a generator seeded by ``seed``."""
    u = np.random.default_rng(seed).random()
    return _pick(np.cumsum(probs), u)


def _pick(cdf: np.ndarray, u: float) -> int:
    k = int(np.searchsorted(cdf, u * cdf[-1], side="right"))
    return min(k, len(cdf) - 1)


def alice_measure(ch: EprChannel, seed: int | None = None, *, exhaustive: bool = False,
                  outcome: int | None = None):
    """Measure Alice's qubits in the computational basis.

    Returns ``(k, prob, bob_state)`` for a seeded draw, or for a requested
    ``outcome``; with ``exhaustive=True`` returns the list of all branches.
    """
    branches = measurement_branches(ch)
    if exhaustive:
        return branches
    if outcome is not None:
        if not 0 <= outcome < len(branches):
            raise ValueError(f"outcome {outcome} out of range")
        b = branches[outcome]
        if b.bob_state is None:
            raise ValueError(f"outcome {outcome} has zero probability")
        return b.k, b.prob, b.bob_state
    if seed is None:
        raise ValueError("sampling needs a seed")
    k = draw_outcome(np.array([b.prob for b in branches]), seed)
    b = branches[k]
    return b.k, b.prob, b.bob_state


def bob_correct(bob_state, op: Operation) -> np.ndarray:
    """Apply Bob's correction, given whole or as ``[(matrix, slots), ...]``."""
    bob_state = np.asarray(bob_state, dtype=complex)
    if isinstance(op, list):
        for m, slots in op:
            bob_state = linalg.apply_on_slots(m, bob_state, slots)
        return bob_state
    return linalg.apply(op, bob_state)


def charge_message(t: ProtocolTranscript, alphabet_size: int, symbol: int) -> ProtocolTranscript:
    return replace(t, messages=t.messages + (ClassicalMessage(alphabet_size, symbol),))


def teleport_cost(s: int, L: int) -> float:
    """Classical bits teleportation would need for the same qudit."""
    if s < 1:
        raise ValueError("dimension must be positive")
    return math.log2(s) + L


def _apply_alice(ch: EprChannel, op: Operation) -> EprChannel:
    if isinstance(op, list):
        for m, slots in op:
            ch = alice_apply(ch, m, slots)
        return ch
    return alice_apply(ch, op)


def _finish(plan: RoundPlan, k: int, bob_state: np.ndarray | None):
    """Bob's side for outcome ``k``: returns (bob_final, success, fidelity, logical)."""
    op = plan.correction(k)
    if bob_state is None:
        return None, False, 0.0, None
    if op is None:
        final = bob_state
        success = False
    else:
        final = bob_correct(bob_state, op)
        success = True
    fid = linalg.fidelity(plan.target, final)
    if success and fid < SUCCESS_FIDELITY:
        raise InvariantViolation(
            f"{plan.protocol}: branch {k} corrected to fidelity {fid:.12f} < {SUCCESS_FIDELITY}")
    logical = None
    if plan.logical_target is not None:
        undone = final if plan.logical_undo is None else linalg.apply(plan.logical_undo, final)
        logical = linalg.fidelity(plan.logical_target, undone)
    return final, success, fid, logical


def prepared_channel(plan: RoundPlan) -> EprChannel:
    return _apply_alice(build_channel(plan.L), plan.alice_operation)


def execute(plan: RoundPlan, seed: int) -> ProtocolTranscript:
    """One seeded round: Alice operates and measures, messages go out, Bob corrects."""
    ch = prepared_channel(plan)
    k, _, bob_state = alice_measure(ch, seed)
    final, success, fid, logical = _finish(plan, k, bob_state)
    t = ProtocolTranscript(plan.protocol, plan.s, plan.L, k, final, success, fid,
                           extras=dict(plan.extras))
    for alphabet, symbol in plan.messages(k):
        t = charge_message(t, alphabet, symbol)
    if logical is not None:
        t = replace(t, extras={**t.extras, "logical_fidelity": logical})
    return t


def enumerate_branches(plan: RoundPlan) -> BranchTable:
    ch = prepared_channel(plan)
    rows = []
    for b in measurement_branches(ch):
        final, success, fid, logical = _finish(plan, b.k, b.bob_state)
        cbits = math.fsum(math.log2(a) for a, _ in plan.messages(b.k))
        rows.append(BranchResult(b.k, b.prob, success, fid, cbits, final, logical))
    table = BranchTable(plan.protocol, plan.s, plan.L, tuple(rows), dict(plan.extras))
    if abs(table.total_probability - 1.0) > 1e-10:
        raise InvariantViolation(f"branch probabilities sum to {table.total_probability}")
    return table


@dataclass(frozen=True)
class SampleSummary:
    trials: int
    seed: int
    counts: tuple[int, ...]
    successes: int
    mean_fidelity_on_success: float | None

    @property
    def success_frequency(self) -> float:
        return self.successes / self.trials


def _count_outcomes(cdf: np.ndarray, seed: int, start: int, stop: int) -> np.ndarray:
    counts = np.zeros(len(cdf), dtype=np.int64)
    for i in range(start, stop):
        u = np.random.default_rng(seed + i).random()
        counts[_pick(cdf, u)] += 1
    return counts


def sample_many(plan: RoundPlan, trials: int, seed: int, workers: int | None = 1,
                table: BranchTable | None = None) -> SampleSummary:
    """Monte Carlo over ``trials`` rounds; trial ``i`` draws with seed ``seed + i``.

    Trial ``i`` reproduces ``execute(plan, seed + i)`` exactly. Bob's
    corrected state depends only on the outcome, so it is taken from the
    branch table instead of being recomputed per trial.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if table is None:
        table = enumerate_branches(plan)
    cdf = np.cumsum([b.prob for b in table.branches])
    workers = workers or os.cpu_count() or 1
    workers = max(1, min(workers, trials // 10_000 or 1))
    if workers == 1:
        counts = _count_outcomes(cdf, seed, 0, trials)
    else:
        edges = np.linspace(0, trials, workers + 1).astype(int)
        with ProcessPoolExecutor(workers) as pool:
            parts = pool.map(_count_outcomes, [cdf] * workers, [seed] * workers,
                             edges[:-1].tolist(), edges[1:].tolist())
            counts = np.sum(list(parts), axis=0)
    successes = int(sum(int(c) for c, b in zip(counts, table.branches) if b.success))
    if successes:
        mean_fid = math.fsum(int(c) * b.fidelity for c, b in zip(counts, table.branches)
                             if b.success) / successes
    else:
        mean_fid = None
    return SampleSummary(trials, seed, tuple(int(c) for c in counts), successes, mean_fid)
