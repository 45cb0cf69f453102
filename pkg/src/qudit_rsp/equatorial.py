"""
Probabilistic remote preparation of equatorial qudits.

Target: ``(1/sqrt(s)) sum_j exp(i phi_j) |j>`` with ``phi_0 = 0`` on
``L`` EPR pairs, ``2**L >= s``. Alice rotates the first ``s`` basis states
of her register into the family ``psi_k`` (the target dressed with DFT
phases) and leaves the rest alone. Outcomes ``k < s`` are fixed by Bob with
a diagonal phase gate; outcomes ``k >= s`` are failures.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from . import linalg
from .channel import BranchTable, ProtocolTranscript, RoundPlan, enumerate_branches, execute
from .errors import ConfigError
from .states import QuditSpec, check_pairs, embed, qubit_bounds


def target_family(s: int, phases: Sequence[float]) -> list[np.ndarray]:
    """The ``s`` mutually orthogonal states ``psi_k``; ``psi_0`` is the target itself."""
    phases = np.asarray(phases, dtype=float)
    if phases.shape != (s,):
        raise ValueError(f"need {s} phases, got {phases.shape}")
    if phases[0] != 0:
        raise ValueError("the first phase must be 0")
    j = np.arange(s)
    base = np.exp(1j * phases) / math.sqrt(s)
    return [np.exp(2j * np.pi * k * j / s) * base for k in range(s)]


def build_alice_operator(family: Sequence[np.ndarray], L: int) -> np.ndarray:
    """Row ``k`` holds ``psi_k``'s coefficients (not conjugated); identity on the rest.

    With this row convention Bob's state after outcome ``k < s`` is exactly
    ``psi_k`` with no extra phase.
    """
    s = len(family)
    n = 2**L
    if n < s:
        raise ValueError(f"{L} pairs cannot carry dimension {s}")
    block = np.array(family, dtype=complex).reshape(s, s)
    if np.max(np.abs(block @ block.conj().T - np.eye(s))) > linalg.NORM_TOL:
        raise ValueError("family is not orthonormal")
    u = np.eye(n, dtype=complex)
    u[:s, :s] = block
    return u


def correction(k: int, s: int, L: int) -> np.ndarray:
    """Bob's phase fix for outcome ``k``: ``diag(exp(-2 pi i k j / s))`` on the s-block."""
    if not 0 <= k < s:
        raise ValueError(f"outcome {k} is a failure outcome for s={s}; no correction exists")
    d = np.ones(2**L, dtype=complex)
    d[:s] = np.exp(-2j * np.pi * k * np.arange(s) / s)
    return np.diag(d)


def default_pairs(s: int) -> int:
    return max(1, qubit_bounds(s)[0])


def plan_equatorial(s: int, phases: Sequence[float], L: int | None = None) -> RoundPlan:
    L = default_pairs(s) if L is None else L
    if L < 1:
        raise ConfigError("at least one EPR pair is needed")
    check_pairs(s, L)
    family = target_family(s, phases)
    op = build_alice_operator(family, L)
    target = embed(QuditSpec("equatorial", s, family[0], tuple(phases)), L)
    exact = s == 2**L
    # one shared failure symbol unless the protocol cannot fail
    alphabet = s if exact else s + 1

    def corr(k):
        return correction(k, s, L) if k < s else None

    def messages(k):
        return [(alphabet, min(k, s))]

    return RoundPlan("equatorial", s, L, op, target, corr, messages)


def success_probability(s: int, L: int) -> float:
    return s / 2**L


def cbits(s: int, L: int) -> float:
    return math.log2(s) if s == 2**L else math.log2(s + 1)


def run_equatorial(s: int, phases: Sequence[float], L: int | None = None, mode: str = "sample",
                   seed: int = 0) -> ProtocolTranscript | BranchTable:
    plan = plan_equatorial(s, phases, L)
    if mode == "exhaustive":
        return enumerate_branches(plan)
    if mode == "sample":
        return execute(plan, seed)
    raise ValueError(f"unknown mode {mode!r}")
