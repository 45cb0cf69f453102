import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qudit_rsp import linalg
from qudit_rsp.errors import ConfigError
from qudit_rsp.states import (
    QuditSpec,
    decode_index,
    embed,
    encode_index,
    equivalent,
    qubit_bounds,
    qudit_from_dict,
)


@pytest.mark.parametrize("s, bounds", [(3, (2, 2)), (8, (3, 4)), (1, (0, 1)), (4, (2, 3)), (9, (4, 4))])
def test_qubit_bounds(s, bounds):
    assert qubit_bounds(s) == bounds


def test_qubit_bounds_match_log_inequality():
    for s in range(1, 300):
        lo, hi = qubit_bounds(s)
        admissible = [L for L in range(0, 12) if math.log2(s) <= L <= 1 + math.log2(s)]
        assert (lo, hi) == (admissible[0], admissible[-1])


def test_qubit_bounds_rejects_zero():
    with pytest.raises(ValueError):
        qubit_bounds(0)


def test_encode_examples():
    assert encode_index(1, 3) == [0, 0, 1]
    assert encode_index(0, 3) == [0, 0, 0]
    assert encode_index(5, 3) == [1, 0, 1]
    with pytest.raises(ValueError):
        encode_index(8, 3)


def test_encode_decode_bijection_exhaustive():
    for L in range(0, 11):
        seen = set()
        for k in range(2**L):
            bits = encode_index(k, L)
            assert len(bits) == L
            assert decode_index(bits) == k
            seen.add(tuple(bits))
        assert len(seen) == 2**L


def test_encode_agrees_with_tensor_order():
    # |0>^(L-1)|1> is basis index 1
    e0, e1 = np.array([1, 0]), np.array([0, 1])
    for k in range(8):
        vec = linalg.tensor(*[e1 if b else e0 for b in encode_index(k, 3)])
        assert np.argmax(np.abs(vec)) == k


def test_embed_examples():
    np.testing.assert_array_equal(embed(QuditSpec.real([1, 0]), 1), [1, 0])
    a = np.array([0.6, 0.0, 0.8])
    np.testing.assert_array_equal(embed(QuditSpec.real(a), 2), [0.6, 0, 0.8, 0])
    np.testing.assert_array_equal(embed(QuditSpec.real([0.5] * 4), 3), [0.5] * 4 + [0] * 4)
    with pytest.raises(ValueError):
        embed(QuditSpec.real([0.5] * 4), 1)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 40), st.integers(0, 1), st.integers(0, 2**32 - 1))
def test_embed_preserves_norm_and_is_equivalent(s, extra, seed):
    rng = np.random.default_rng(seed)
    amps = linalg.random_state(s, rng)
    q = QuditSpec("general", s, amps)
    L = min(qubit_bounds(s)[1], max(qubit_bounds(s)[0], 1) + extra)
    v = embed(q, L)
    assert abs(np.linalg.norm(v) - 1) <= 1e-12
    assert equivalent(v, range(s), q)
    assert equivalent(v, range(s), q, strict=True)


def test_equivalent_global_phase_and_strict_mode():
    q = QuditSpec.equatorial([0, 1.0, 2.0])
    v = np.exp(0.4j) * embed(q, 2)
    assert equivalent(v, range(3), q)
    assert not equivalent(v, range(3), q, strict=True)


def test_equivalent_rejects_weight_outside_subspace():
    q = QuditSpec.real([0.6, 0.8, 0.0])
    v = embed(q, 2)
    v[3] = 0.1
    v = v / np.linalg.norm(v)
    assert np.sum(np.abs(v[3:]) ** 2) > 1e-9  # residual weight is ~0.0099
    assert not equivalent(v, range(3), q)


def test_equivalent_other_subspace():
    q = QuditSpec.real([0.6, 0.8])
    v = np.zeros(8, dtype=complex)
    v[[5, 2]] = [0.6, 0.8]
    assert equivalent(v, [5, 2], q)
    assert not equivalent(v, [2, 5], q)


def test_quditspec_invariants():
    with pytest.raises(ConfigError):
        QuditSpec("equatorial", 2, np.array([0.6, 0.8]))
    with pytest.raises(ConfigError):
        QuditSpec("real", 2, np.array([0.6, 0.8j]))
    with pytest.raises(ConfigError):
        QuditSpec("general", 2, np.array([1.0, 1.0]))


def test_loader_schema():
    q = qudit_from_dict({"kind": "equatorial", "s": 3, "phases": [0.0, 1.2, 2.5]})
    assert q.s == 3 and q.kind == "equatorial"
    np.testing.assert_allclose(np.abs(q.amplitudes), 1 / math.sqrt(3))
    r = qudit_from_dict({"kind": "real", "s": 2, "coeffs": [0.6, 0.8000001]})
    assert abs(np.linalg.norm(r.amplitudes) - 1) <= 1e-15
    g = qudit_from_dict({"kind": "general", "s": 2, "re": [0.6, 0], "im": [0, 0.8]})
    np.testing.assert_allclose(g.amplitudes, [0.6, 0.8j])
    assert qudit_from_dict(g.to_dict()).s == 2


@pytest.mark.parametrize("bad", [
    {"kind": "real", "coeffs": [1.0, 1.0]},
    {"kind": "real", "s": 3, "coeffs": [0.6, 0.8]},
    {"kind": "spin", "coeffs": [1.0]},
    {"kind": "equatorial"},
])
def test_loader_rejects(bad):
    with pytest.raises(ConfigError):
        qudit_from_dict(bad)
