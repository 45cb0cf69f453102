"""
Deterministic remote preparation of real qudits with ``s <= 8``.

Needs a family ``V_0..V_{n-1}`` of real orthogonal matrices such that
``{V_j psi}`` is an orthonormal basis for *every* real unit ``psi``. Such
families exist for ``n`` in {1, 2, 4, 8}: left multiplication by the unit
basis elements of the reals, complex numbers, quaternions and octonions.
All four are produced by the same Cayley-Dickson product; the
``n = 4`` case reproduces the block matrices built from ``-i sigma_y``,
``sigma_z`` and ``sigma_x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import linalg
from .channel import BranchTable, ProtocolTranscript, RoundPlan, enumerate_branches, execute
from .errors import ConfigError
from .states import QuditSpec, embed

CATALOG_DIMS = (1, 2, 4, 8)
MINUS_I_SIGMA_Y = np.array([[0.0, -1.0], [1.0, 0.0]])


def _conj(x: np.ndarray) -> np.ndarray:
    c = -x
    c[0] = x[0]
    return c


def cayley_dickson(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Product in the 2**n-dimensional Cayley-Dickson algebra.

    ``(a, b)(c, d) = (ac - d* b, da + b c*)``.
    """
    n = len(x)
    if n == 1:
        return x * y
    h = n // 2
    a, b, c, d = x[:h], x[h:], y[:h], y[h:]
    return np.concatenate([
        cayley_dickson(a, c) - cayley_dickson(_conj(d), b),
        cayley_dickson(d, a) + cayley_dickson(b, _conj(c)),
    ])


def left_multiplication(j: int, n: int) -> np.ndarray:
    """Matrix of ``y -> e_j y`` in the n-dimensional algebra."""
    e = np.eye(n)
    return np.column_stack([cayley_dickson(e[j], e[i]) for i in range(n)])


def kron_factor(m: np.ndarray, left_dim: int, tol: float = 1e-12):
    """Split ``m`` as ``A (x) B`` with ``A`` of size ``left_dim``, or return None.

    Uses the rank-one test on the realigned matrix. ``A`` is scaled to be
    orthogonal-norm (``||A||_F**2 == left_dim``) with its first non-zero entry positive.
    """
    m = np.asarray(m)
    n = m.shape[0]
    rd = n // left_dim
    r = m.reshape(left_dim, rd, left_dim, rd).transpose(0, 2, 1, 3).reshape(left_dim**2, rd**2)
    u, sv, vh = np.linalg.svd(r)
    if sv.size > 1 and sv[1] > tol * max(1.0, sv[0]):
        return None
    a = (u[:, 0] * math.sqrt(sv[0])).reshape(left_dim, left_dim)
    b = (vh[0] * math.sqrt(sv[0])).reshape(rd, rd)
    scale = math.sqrt(left_dim) / np.linalg.norm(a)
    a, b = a * scale, b / scale
    pivot = a.flat[np.flatnonzero(np.abs(a) > 1e-9)[0]]
    phase = pivot / abs(pivot)
    a, b = a / phase, b * phase
    if np.max(np.abs(np.kron(a, b) - m)) > 1e-10:
        return None
    if np.max(np.abs(a.imag)) < 1e-14 and np.max(np.abs(b.imag)) < 1e-14:
        a, b = a.real, b.real
    return a, b


@dataclass(frozen=True)
class OperatorCatalog:
    dim: int
    operators: tuple[np.ndarray, ...] = field(repr=False)
    # per-operator (M_j, N_j) with M_j (x) N_j == V_j^T, or None
    factorizations: tuple[tuple[np.ndarray, np.ndarray] | None, ...] = field(repr=False)

    def __len__(self):
        return self.dim

    def __getitem__(self, j: int) -> np.ndarray:
        return self.operators[j]

    def alice_operator(self, psi) -> np.ndarray:
        """Matrix whose row ``j`` is ``(V_j psi)^T``."""
        psi = np.asarray(psi, dtype=float)
        return np.array([v @ psi for v in self.operators])

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "operators": [v.tolist() for v in self.operators],
            "factorizations": [
                None if f is None else {"M": f[0].tolist(), "N": f[1].tolist()}
                for f in self.factorizations
            ],
        }


@lru_cache(maxsize=None)
def catalog(dim: int) -> OperatorCatalog:
    if dim not in CATALOG_DIMS:
        raise ValueError(f"no operator catalog in dimension {dim}; choose from {CATALOG_DIMS}")
    ops = [left_multiplication(j, dim) for j in range(dim)]
    for v in ops:
        v.setflags(write=False)
    if dim == 4:
        factors = _four_dim_factors()
    elif dim == 8:
        # split first qubit from the other two; only some V_j^T survive
        factors = tuple(kron_factor(v.T, 2) for v in ops)
    else:
        factors = tuple(None for _ in ops)
    return OperatorCatalog(dim, tuple(ops), factors)


def _four_dim_factors():
    i2 = np.eye(2)
    z = linalg.SIGMA_Z.real
    x = linalg.SIGMA_X.real
    i_sigma_y = -MINUS_I_SIGMA_Y
    # V_1 = I (x) (-i sy), V_2 = (-i sy) (x) sz, V_3 = (-i sy) (x) sx; transposes flip -i sy
    return (
        (i2, i2),
        (i2, i_sigma_y),
        (i_sigma_y, z),
        (i_sigma_y, x),
    )


def factored_correction(j: int, cat: OperatorCatalog):
    """``(M_j, N_j)`` with ``M_j (x) N_j == V_j^dagger``, or None if not a product."""
    if not 0 <= j < cat.dim:
        raise ValueError(f"operator index {j} out of range")
    return cat.factorizations[j]


def catalog_dim_for(s: int) -> int:
    for d in CATALOG_DIMS:
        if d >= s:
            return d
    raise ConfigError(f"s={s} exceeds 8; use the separable protocols")


def pad_to_catalog(q: QuditSpec) -> tuple[np.ndarray, int]:
    if not q.is_real:
        raise ConfigError("minimum RSP needs real coefficients")
    d = catalog_dim_for(q.s)
    psi = np.zeros(d)
    psi[: q.s] = q.amplitudes.real
    return psi, d


def pairs_for(s: int) -> int:
    """Two EPR pairs up to s = 4, three up to s = 8."""
    if s < 2:
        raise ConfigError("real-space protocol needs s >= 2")
    if s <= 4:
        return 2
    if s <= 8:
        return 3
    raise ConfigError(f"s={s} exceeds 8; use the separable protocols")


def plan_realspace(q: QuditSpec, L: int | None = None, *, factored: bool = False) -> RoundPlan:
    """Alice applies the rows ``V_j psi``; Bob undoes outcome ``j`` with ``V_j^T``.

    ``factored=True`` makes Bob apply ``M_j`` and ``N_j`` separately wherever
    ``V_j^T`` splits off the first qubit.
    """
    if not q.is_real:
        raise ConfigError("minimum RSP needs real coefficients")
    need = pairs_for(q.s)
    if L is not None and L != need:
        raise ConfigError(f"s={q.s} is prepared on exactly {need} EPR pairs, not {L}")
    L = need
    n = 2**L
    cat = catalog(n)
    psi = np.zeros(n)
    psi[: q.s] = q.amplitudes.real
    op = cat.alice_operator(psi)
    target = embed(q, L)

    def corr(j):
        f = cat.factorizations[j] if factored else None
        if f is None:
            return cat[j].T.astype(complex)
        return [(f[0], [0]), (f[1], list(range(1, L)))]

    def messages(j):
        return [(n, j)]

    return RoundPlan("real-min", q.s, L, op.astype(complex), target, corr, messages,
                     extras={"catalog_dim": n})


def run_realspace(q: QuditSpec, L: int | None = None, mode: str = "sample", seed: int = 0,
                  *, factored: bool = False) -> ProtocolTranscript | BranchTable:
    plan = plan_realspace(q, L, factored=factored)
    if mode == "exhaustive":
        return enumerate_branches(plan)
    if mode == "sample":
        return execute(plan, seed)
    raise ValueError(f"unknown mode {mode!r}")
