import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from varlanczos.state import HermitianOperator, as_state, inner, linear_combination, norm, normalize

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
cplx = st.builds(complex, finite, finite)


def vectors(dim):
    return arrays(np.complex128, dim, elements=cplx)


def naive_inner(u, v):
    # element by element, independent of np.vdot
    total = 0j
    for a, b in zip(u, v):
        total += complex(a).conjugate() * complex(b)
    return total


class Doubler(HermitianOperator):
    def _apply(self, psi):
        return 2.0 * psi


def test_inner_unit_vectors():
    e1, e2 = np.array([1, 0]), np.array([0, 1])
    assert inner(e1, e1) == 1
    assert inner(e1, e2) == 0


def test_inner_sesquilinear_hand_value():
    u = np.array([1, 1j]) / np.sqrt(2)
    v = np.array([1, -1j]) / np.sqrt(2)
    assert abs(inner(u, v)) < 1e-15
    assert abs(naive_inner(u, v)) < 1e-15
    # conjugation sits in the first slot
    assert inner(np.array([1j]), np.array([1])) == -1j


def test_inner_dimension_mismatch():
    with pytest.raises(ValueError):
        inner(np.ones(3), np.ones(4))


def test_norm_examples():
    assert norm(np.zeros(5)) == 0
    assert norm(np.array([1, 0])) == 1
    assert norm(np.array([3, 4])) == 5


def test_normalize():
    v = normalize(np.array([3, 4j, 12]))
    assert abs(inner(v, v) - 1) <= 1e-14
    with pytest.raises(ValueError):
        normalize(np.zeros(3))


def test_as_state_rejects_bad_shapes():
    with pytest.raises(ValueError):
        as_state(np.ones((2, 2)))
    with pytest.raises(ValueError):
        as_state([])


def test_linear_combination_examples():
    psi = np.array([1 + 2j, -0.5, 3j])
    np.testing.assert_array_equal(linear_combination([1], [psi]), psi)
    np.testing.assert_array_equal(linear_combination([1, -1], [psi, psi]), np.zeros(3))
    e1, e2 = np.array([1, 0]), np.array([0, 1])
    np.testing.assert_array_equal(linear_combination([2, 3j], [e1, e2]), [2, 3j])


def test_linear_combination_errors():
    with pytest.raises(ValueError):
        linear_combination([1, 2], [np.ones(2)])
    with pytest.raises(ValueError):
        linear_combination([], [])
    with pytest.raises(ValueError):
        linear_combination([1, 1], [np.ones(2), np.ones(3)])


@settings(max_examples=60, deadline=None)
@given(vectors(6), vectors(6))
def test_inner_properties(u, v):
    uv, vu = inner(u, v), inner(v, u)
    scale = max(norm(u) * norm(v), 1e-300)
    assert abs(uv - vu.conjugate()) <= 1e-15 * scale
    assert abs(uv) <= norm(u) * norm(v) + 1e-12 + 1e-13 * scale
    assert abs(uv - naive_inner(u, v)) <= 1e-12 * scale + 1e-300


@settings(max_examples=60, deadline=None)
@given(vectors(3), vectors(3), st.lists(vectors(5), min_size=3, max_size=3))
def test_linear_combination_is_linear(a, b, states):
    lhs = linear_combination(a + b, states)
    rhs = linear_combination(a, states) + linear_combination(b, states)
    # relative to the size of the terms being summed, not of the (possibly cancelled) result
    scale = (np.abs(a) + np.abs(b)) @ np.abs(np.array(states))
    assert np.all(np.abs(lhs - rhs) <= 1e-13 * scale + 1e-300)


def test_operator_counts_and_does_not_mutate():
    op = Doubler(4)
    psi = np.arange(4, dtype=complex)
    before = psi.copy()
    out = op.apply(psi)
    np.testing.assert_array_equal(psi, before)
    np.testing.assert_array_equal(out, 2 * before)
    op(psi)
    assert op.matvecs == 2
    op.reset_counter()
    assert op.matvecs == 0
    with pytest.raises(ValueError):
        op.apply(np.ones(3))
    assert op.matvecs == 0


def test_operator_counter_thread_safe():
    op = Doubler(8)
    psi = np.ones(8, complex)

    def work():
        for _ in range(500):
            op.apply(psi)

    threads = [threading.Thread(target=work) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert op.matvecs == 4000
