"""
Qudit targets and their embedding into qubit registers.

A qudit of dimension ``s`` is carried on ``L`` qubits by placing its
amplitudes on the first ``s`` computational basis states. Basis index
``k`` maps to qubit bits with the last tensor factor as the least
significant bit, i.e. ``|0...01>`` is index 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError

EQUIV_TOL = 1e-9
KINDS = ("equatorial", "real", "general")


@dataclass(frozen=True)
class QuditSpec:
    """Pure qudit target. ``phases`` is kept for equatorial targets."""

    kind: str
    s: int
    amplitudes: np.ndarray = field(repr=False)
    phases: tuple[float, ...] | None = None

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        if self.kind not in KINDS:
            raise ConfigError(f"unknown qudit kind {self.kind!r}")
        if self.s < 1 or amps.shape != (self.s,):
            raise ConfigError(f"expected {self.s} amplitudes, got shape {amps.shape}")
        if abs(np.linalg.norm(amps) - 1.0) > 1e-10:
            raise ConfigError("qudit amplitudes are not normalized")
        if self.kind == "equatorial" and np.max(np.abs(np.abs(amps) - 1 / math.sqrt(self.s))) > 1e-10:
            raise ConfigError("equatorial amplitudes must all have magnitude 1/sqrt(s)")
        if self.kind == "real" and np.max(np.abs(amps.imag)) > 1e-12:
            raise ConfigError("real qudit has non-zero imaginary parts")

    @classmethod
    def equatorial(cls, phases: Sequence[float]) -> "QuditSpec":
        phases = tuple(float(p) for p in phases)
        s = len(phases)
        amps = np.exp(1j * np.asarray(phases)) / math.sqrt(s)
        return cls("equatorial", s, amps, phases)

    @classmethod
    def real(cls, coeffs: Sequence[float], *, renormalize_tol: float = 1e-6) -> "QuditSpec":
        c = np.asarray(coeffs)
        if np.iscomplexobj(c):
            if np.max(np.abs(c.imag), initial=0.0) > 1e-12:
                raise ConfigError("real coefficients have non-zero imaginary parts")
            c = c.real
        c = c.astype(float)
        norm = np.linalg.norm(c)
        if c.ndim != 1 or c.size == 0 or abs(norm - 1.0) > renormalize_tol:
            raise ConfigError(f"real coefficients must have unit norm (got {norm:.6g})")
        return cls("real", c.size, (c / norm).astype(complex))

    @classmethod
    def general(cls, re: Sequence[float], im: Sequence[float], *, renormalize_tol: float = 1e-6) -> "QuditSpec":
        re = np.asarray(re, dtype=float)
        im = np.asarray(im, dtype=float)
        if re.shape != im.shape or re.ndim != 1:
            raise ConfigError("re and im must be lists of equal length")
        amps = re + 1j * im
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > renormalize_tol:
            raise ConfigError(f"amplitudes must have unit norm (got {norm:.6g})")
        return cls("general", amps.size, amps / norm)

    @property
    def is_real(self) -> bool:
        return bool(np.max(np.abs(self.amplitudes.imag)) <= 1e-12)

    def to_dict(self) -> dict:
        if self.kind == "equatorial":
            return {"kind": "equatorial", "s": self.s, "phases": list(self.phases)}
        if self.kind == "real":
            return {"kind": "real", "s": self.s, "coeffs": self.amplitudes.real.tolist()}
        return {
            "kind": "general",
            "s": self.s,
            "re": self.amplitudes.real.tolist(),
            "im": self.amplitudes.imag.tolist(),
        }


def qudit_from_dict(d: dict) -> QuditSpec:
    """Load a target from its JSON form (see README for the schema)."""
    try:
        kind = d["kind"]
        if kind == "equatorial":
            q = QuditSpec.equatorial(d["phases"])
        elif kind == "real":
            q = QuditSpec.real(d["coeffs"])
        elif kind == "general":
            q = QuditSpec.general(d["re"], d["im"])
        else:
            raise ConfigError(f"unknown qudit kind {kind!r}")
    except KeyError as exc:
        raise ConfigError(f"qudit spec is missing field {exc}") from None
    if "s" in d and int(d["s"]) != q.s:
        raise ConfigError(f"declared s={d['s']} but {q.s} amplitudes were given")
    return q


def qubit_bounds(s: int) -> tuple[int, int]:
    """Smallest and largest admissible qubit count for a dimension-``s`` qudit.

    ``L`` must satisfy ``log2(s) <= L <= 1 + log2(s)``.
    """
    if s < 1:
        raise ValueError(f"dimension must be >= 1, got {s}")
    lo = (s - 1).bit_length()  # ceil(log2 s), exact for integers
    hi = s.bit_length()  # floor(log2 s) + 1
    return lo, hi


def check_pairs(s: int, L: int) -> None:
    lo, hi = qubit_bounds(s)
    if not lo <= L <= hi:
        raise ConfigError(f"L={L} outside the admissible range [{lo}, {hi}] for s={s}")


def encode_index(k: int, L: int) -> list[int]:
    """Bits of ``k``, first tensor factor first (most significant)."""
    if not 0 <= k < 2**L:
        raise ValueError(f"index {k} out of range for {L} qubits")
    return [(k >> (L - 1 - i)) & 1 for i in range(L)]


def decode_index(bits: Sequence[int]) -> int:
    k = 0
    for b in bits:
        if b not in (0, 1):
            raise ValueError(f"not a bit: {b!r}")
        k = (k << 1) | b
    return k


def embed(q: QuditSpec, L: int) -> np.ndarray:
    if 2**L < q.s:
        raise ValueError(f"{L} qubits cannot hold a qudit of dimension {q.s}")
    v = np.zeros(2**L, dtype=complex)
    v[: q.s] = q.amplitudes
    return v


def equivalent(a, subspace_basis: Sequence[int], q: QuditSpec, *, strict: bool = False,
               tol: float = EQUIV_TOL) -> bool:
    """True if ``a`` restricted to ``subspace_basis`` carries exactly ``q``'s coefficients.

    By default one shared global phase is allowed; ``strict`` demands literal
    equality of the coefficient tuples. Any weight outside the subspace fails.
    """
    a = np.asarray(a, dtype=complex)
    idx = list(subspace_basis)
    if len(set(idx)) != len(idx) or any(not 0 <= i < a.size for i in idx):
        raise ValueError("subspace indices must be distinct and within range")
    if len(idx) != q.s:
        return False
    outside = np.ones(a.size, dtype=bool)
    outside[idx] = False
    if np.sum(np.abs(a[outside]) ** 2) > tol:
        return False
    coeffs = a[idx]
    if not strict:
        overlap = np.vdot(coeffs, q.amplitudes)
        if abs(overlap) < tol:
            return False
        coeffs = coeffs * (overlap / abs(overlap))
    return bool(np.max(np.abs(coeffs - q.amplitudes)) <= tol)
