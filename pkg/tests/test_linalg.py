import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qudit_rsp import linalg
from qudit_rsp.linalg import SIGMA_X, SIGMA_Z, I2
from qudit_rsp.realspace import catalog

SQ = 1 / math.sqrt(2)


def brute_partial_trace(rho, keep, n):
    """Index-by-index partial trace, independent of the reshape-based version."""
    keep = sorted(keep)
    traced = [q for q in range(n) if q not in keep]
    dk = 2 ** len(keep)
    out = np.zeros((dk, dk), dtype=complex)

    def index(kbits, tbits):
        bits = [0] * n
        for q, b in zip(keep, kbits):
            bits[q] = b
        for q, b in zip(traced, tbits):
            bits[q] = b
        return int("".join(map(str, bits)) or "0", 2)

    for a, b in itertools.product(range(dk), repeat=2):
        abits = [int(c) for c in format(a, f"0{len(keep)}b")] if keep else []
        bbits = [int(c) for c in format(b, f"0{len(keep)}b")] if keep else []
        for t in itertools.product((0, 1), repeat=len(traced)):
            out[a, b] += rho[index(abits, t), index(bbits, t)]
    return out


def test_tensor_basis_states():
    np.testing.assert_array_equal(linalg.tensor([1, 0], [0, 1]), [0, 1, 0, 0])
    np.testing.assert_allclose(linalg.tensor([SQ, SQ], [1, 0]), [SQ, 0, SQ, 0])


def test_tensor_sigma_z_sigma_x_hand_expanded():
    expected = np.array([[0, 1, 0, 0],
                         [1, 0, 0, 0],
                         [0, 0, 0, -1],
                         [0, 0, -1, 0]])
    np.testing.assert_array_equal(linalg.tensor(SIGMA_Z, SIGMA_X), expected)


def test_tensor_rejects_mixed_kinds():
    with pytest.raises(ValueError):
        linalg.tensor([1, 0], I2)


def test_tensor_associative(rng):
    a, b, c = (linalg.random_unitary(2, rng) for _ in range(3))
    left = linalg.tensor(linalg.tensor(a, b), c)
    right = linalg.tensor(a, linalg.tensor(b, c))
    assert np.max(np.abs(left - right)) <= 1e-12


def test_apply_examples():
    v = np.array([0.6, 0.8j])
    np.testing.assert_array_equal(linalg.apply(I2, v), v)
    np.testing.assert_array_equal(linalg.apply(SIGMA_X, [1, 0]), [0, 1])
    np.testing.assert_array_equal(linalg.apply(catalog(4)[1], [1, 0, 0, 0]), [0, 1, 0, 0])


def test_apply_dimension_mismatch():
    with pytest.raises(ValueError):
        linalg.apply(I2, [1, 0, 0, 0])


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_apply_preserves_norm(n, seed):
    rng = np.random.default_rng(seed)
    u = linalg.random_unitary(2**n, rng)
    v = linalg.random_state(2**n, rng)
    assert abs(np.linalg.norm(linalg.apply(u, v)) - 1) <= 1e-10


def test_apply_on_slots_examples():
    ket00 = np.array([1, 0, 0, 0], dtype=complex)
    np.testing.assert_array_equal(linalg.apply_on_slots(SIGMA_X, ket00, [1]), [0, 1, 0, 0])
    v = np.array([0, SQ, 0, SQ])
    np.testing.assert_allclose(linalg.apply_on_slots(SIGMA_Z, v, [0]), [0, SQ, 0, -SQ])
    np.testing.assert_array_equal(linalg.apply_on_slots(np.eye(4), v, [1, 0]), v)


def test_apply_on_slots_matches_full_kron(rng):
    v = linalg.random_state(16, rng)
    u = linalg.random_unitary(4, rng)
    full = linalg.tensor(I2, u, I2)
    np.testing.assert_allclose(linalg.apply_on_slots(u, v, [1, 2]), full @ v, atol=1e-12)
    # reversed slot order == swapping the operator's qubits
    swap = np.eye(4)[[0, 2, 1, 3]]
    np.testing.assert_allclose(linalg.apply_on_slots(u, v, [2, 1]),
                               linalg.tensor(I2, swap @ u @ swap, I2) @ v, atol=1e-12)


@pytest.mark.parametrize("slots", [[3], [0, 0], [-1]])
def test_apply_on_slots_bad_slots(slots):
    with pytest.raises(ValueError):
        linalg.apply_on_slots(np.eye(2 ** len(slots)), np.eye(8)[0], slots)


def test_partial_trace_product_and_bell(rng):
    a = linalg.density(linalg.random_state(2, rng))
    b = linalg.density(linalg.random_state(2, rng))
    np.testing.assert_allclose(linalg.partial_trace(np.kron(a, b), [0], 2), a, atol=1e-12)
    bell = linalg.density([SQ, 0, 0, SQ])
    for keep in ([0], [1]):
        np.testing.assert_allclose(linalg.partial_trace(bell, keep, 2), I2 / 2, atol=1e-12)


def test_partial_trace_against_brute_force(rng):
    v = linalg.random_state(8, rng)
    rho = linalg.density(v)
    for keep in ([0], [1], [2], [0, 2], [1, 2], [0, 1, 2], []):
        got = linalg.partial_trace(rho, keep, 3)
        np.testing.assert_allclose(got, brute_partial_trace(rho, keep, 3), atol=1e-12)
        assert abs(np.trace(got) - 1) <= 1e-10
        assert np.max(np.abs(got - got.conj().T)) <= 1e-12
        np.testing.assert_allclose(linalg.reduced_density(v, keep), got, atol=1e-12)


def test_partial_trace_all_slots_is_identity_map(rng):
    rho = linalg.density(linalg.random_state(8, rng))
    np.testing.assert_allclose(linalg.partial_trace(rho, [0, 1, 2], 3), rho, atol=1e-15)


def test_partial_trace_bad_dimension():
    with pytest.raises(ValueError):
        linalg.partial_trace(np.eye(3) / 3, [0], 2)


def test_purity_examples(rng):
    assert linalg.purity(linalg.density(linalg.random_state(4, rng))) == pytest.approx(1.0, abs=1e-12)
    assert linalg.purity(I2 / 2) == 0.5
    assert linalg.purity(np.eye(4) / 4) == 0.25


def test_purity_of_reductions(rng):
    prod = linalg.tensor(linalg.random_state(2, rng), linalg.random_state(4, rng))
    assert abs(linalg.purity(linalg.reduced_density(prod, [0])) - 1) <= 1e-10
    assert abs(linalg.purity(linalg.reduced_density([SQ, 0, 0, SQ], [1])) - 0.5) <= 1e-12


def test_fidelity_examples(rng):
    v = linalg.random_state(4, rng)
    assert linalg.fidelity(v, v) == pytest.approx(1.0, abs=1e-12)
    assert linalg.fidelity(v, np.exp(0.7j) * v) == pytest.approx(1.0, abs=1e-12)
    assert linalg.fidelity([1, 0], [0, 1]) == 0.0
    with pytest.raises(ValueError):
        linalg.fidelity([1, 0], [1, 0, 0, 0])


def test_is_unitary():
    assert linalg.is_unitary(SIGMA_X)
    assert not linalg.is_unitary(np.ones((2, 2)))
    assert not linalg.is_unitary(np.ones((2, 3)))
