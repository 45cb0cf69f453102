"""
Dense complex linear algebra for multi-qubit state vectors.

States are 1-D complex numpy arrays, operators are 2-D complex arrays.
Qubit slot 0 is the most significant tensor factor (plain Kronecker order),
so the last slot is the least significant bit of a basis index.
"""

from __future__ import annotations

from functools import reduce
from typing import Iterable, Sequence

import numpy as np

NORM_TOL = 1e-10
EXACT_TOL = 1e-12

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def as_state(v, *, check: bool = True) -> np.ndarray:
    """Coerce ``v`` to a complex 1-D array, optionally checking unit norm."""
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"state vector must be a non-empty 1-D array, got shape {v.shape}")
    if check and abs(np.linalg.norm(v) - 1.0) > NORM_TOL:
        raise ValueError(f"state vector is not normalized (norm={np.linalg.norm(v):.3e})")
    return v


def as_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    return m


def is_unitary(m, tol: float = NORM_TOL) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) <= tol)


def num_qubits(dim: int) -> int:
    """Return ``L`` with ``dim == 2**L``; raise if ``dim`` is not a power of two."""
    if dim < 1 or dim & (dim - 1):
        raise ValueError(f"dimension {dim} is not a power of two")
    return dim.bit_length() - 1


def tensor(*factors) -> np.ndarray:
    """Kronecker product of vectors or matrices, left factor most significant."""
    if not factors:
        raise ValueError("tensor needs at least one factor")
    arrays = [np.asarray(f, dtype=complex) for f in factors]
    ndims = {a.ndim for a in arrays}
    if len(ndims) != 1 or ndims.pop() not in (1, 2):
        raise ValueError("tensor factors must all be vectors or all be matrices")
    return reduce(np.kron, arrays)


def apply(m, v) -> np.ndarray:
    m = as_matrix(m)
    v = np.asarray(v, dtype=complex)
    if m.shape[0] != m.shape[1] or m.shape[1] != v.shape[0]:
        raise ValueError(f"cannot apply {m.shape} operator to vector of length {v.shape[0]}")
    return m @ v


def apply_on_slots(m, v, slots: Sequence[int]) -> np.ndarray:
    """Apply ``m`` to the qubits listed in ``slots`` (in that order), identity elsewhere."""
    m = as_matrix(m)
    v = np.asarray(v, dtype=complex)
    n = num_qubits(v.shape[0])
    slots = list(slots)
    k = len(slots)
    if len(set(slots)) != k:
        raise ValueError(f"duplicate slots in {slots}")
    if any(not 0 <= q < n for q in slots):
        raise ValueError(f"slots {slots} out of range for {n} qubits")
    if m.shape != (2**k, 2**k):
        raise ValueError(f"operator of shape {m.shape} does not act on {k} qubits")
    if k == 0:
        return v.copy()

    psi = v.reshape([2] * n)
    op = m.reshape([2] * (2 * k))
    # contract the operator's input legs with the target axes; output legs land first
    out = np.tensordot(op, psi, axes=(list(range(k, 2 * k)), slots))
    rest = [q for q in range(n) if q not in slots]
    order = slots + rest
    return np.moveaxis(out, list(range(n)), order).reshape(-1)


def density(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def partial_trace(rho, keep: Iterable[int], n_qubits: int) -> np.ndarray:
    """Reduced density matrix on the ``keep`` slots, returned in ascending slot order."""
    rho = as_matrix(rho)
    if rho.shape != (2**n_qubits, 2**n_qubits):
        num_qubits(rho.shape[0])
        raise ValueError(f"density matrix of shape {rho.shape} does not match {n_qubits} qubits")
    keep = sorted(set(keep))
    if any(not 0 <= q < n_qubits for q in keep):
        raise ValueError(f"slots {keep} out of range for {n_qubits} qubits")
    traced = [q for q in range(n_qubits) if q not in keep]
    dk, dt = 2 ** len(keep), 2 ** len(traced)

    t = rho.reshape([2] * (2 * n_qubits))
    perm = keep + traced + [n_qubits + q for q in keep] + [n_qubits + q for q in traced]
    t = t.transpose(perm).reshape(dk, dt, dk, dt)
    return np.einsum("ajbj->ab", t)


def reduced_density(v, keep: Iterable[int]) -> np.ndarray:
    """Same as ``partial_trace(density(v), keep, L)`` without building the full matrix."""
    v = np.asarray(v, dtype=complex)
    n = num_qubits(v.shape[0])
    keep = sorted(set(keep))
    if any(not 0 <= q < n for q in keep):
        raise ValueError(f"slots {keep} out of range for {n} qubits")
    traced = [q for q in range(n) if q not in keep]
    a = v.reshape([2] * n).transpose(keep + traced).reshape(2 ** len(keep), 2 ** len(traced))
    return a @ a.conj().T


def purity(rho) -> float:
    rho = as_matrix(rho)
    # tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return float(np.sum(np.abs(rho) ** 2))


def fidelity(a, b) -> float:
    """``|<a|b>|^2``; blind to a global phase on either argument."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(min(1.0, abs(np.vdot(a, b)) ** 2))


def equal_up_to_phase(a, b, tol: float = NORM_TOL) -> bool:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        return False
    overlap = np.vdot(a, b)
    if abs(overlap) < 1e-300:
        return bool(np.max(np.abs(a - b)) <= tol)
    phase = overlap / abs(overlap)
    return bool(np.max(np.abs(a * phase - b)) <= tol)


def random_state(dim: int, rng: np.random.Generator, *, real: bool = False) -> np.ndarray:
    v = rng.normal(size=dim)
    if not real:
        v = v + 1j * rng.normal(size=dim)
    v = np.asarray(v, dtype=complex)
    return v / np.linalg.norm(v)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
