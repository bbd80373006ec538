import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from l2pnorm.errors import DegenerateRowError, DomainError
from l2pnorm.norms import (
    DegeneratePolicy,
    WeightDiagonal,
    as_matrix,
    build_weights,
    l2p_power,
    phi,
    row_l2_norms,
    smoothed_l2p_power,
)

from conftest import loop_row_norms

exponents = st.floats(min_value=0.01, max_value=1.0)
matrices = st.integers(1, 6).flatmap(
    lambda r: st.integers(1, 4).flatmap(
        lambda c: arrays(np.float64, (r, c), elements=st.floats(-1e3, 1e3).map(lambda x: round(x, 6)))
    )
)


def test_row_norms_examples():
    np.testing.assert_array_equal(row_l2_norms([[3, 4], [0, 0], [1, 0]]), [5, 0, 1])
    np.testing.assert_array_equal(row_l2_norms(np.zeros((2, 3))), [0, 0])


def test_row_norms_match_loop(rng):
    Y = rng.standard_normal((5, 3))
    np.testing.assert_allclose(row_l2_norms(Y), loop_row_norms(Y), rtol=0, atol=1e-12)


def test_as_matrix_rejects_nonfinite():
    with pytest.raises(DomainError):
        as_matrix([[1.0, np.nan]])
    with pytest.raises(DomainError):
        as_matrix(np.zeros((0, 2)))


def test_l2p_power_examples():
    assert l2p_power([[4, 0], [0, 9]], 0.5) == pytest.approx(5.0, abs=1e-15)
    assert l2p_power([[3, 4], [0, 0]], 1) == 5.0


def test_l2p_power_matches_loop(rng):
    Y = rng.standard_normal((6, 2))
    expected = sum(r**0.75 for r in loop_row_norms(Y))
    assert l2p_power(Y, 0.75) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("p", [0.0, -0.5, 1.5, float("nan")])
def test_exponent_range(p):
    with pytest.raises(DomainError):
        l2p_power([[1.0]], p)


def test_weights_direct_formula():
    Y = np.array([[4.0, 0.0], [0.0, 1.0]])
    w = build_weights(Y, 0.5, epsilon=0.0)
    np.testing.assert_allclose(w.entries, [0.03125, 0.25], rtol=1e-15)
    np.testing.assert_allclose(w.inverse * w.entries, 1.0, rtol=1e-15)


def test_weights_p1_is_l21_reweighting(rng):
    Y = rng.standard_normal((7, 3))
    w = build_weights(Y, 1.0, epsilon=0.0)
    np.testing.assert_allclose(w.entries, 1.0 / (2.0 * np.array(loop_row_norms(Y))), rtol=1e-14)


def test_weights_zero_row_smoothed():
    Y = np.array([[1.0, 2.0], [0.0, 0.0]])
    w = build_weights(Y, 0.5, epsilon=1e-8)
    expected = 0.5 / (2 * (1e-8) ** 0.75)
    assert w.entries[1] == pytest.approx(expected, rel=1e-14)
    assert np.isfinite(w.entries).all() and (w.entries > 0).all()


def test_weights_zero_row_strict_raises():
    Y = np.array([[1.0], [0.0]])
    with pytest.raises(DegenerateRowError) as info:
        build_weights(Y, 0.5, epsilon=0.0, policy="strict")
    assert info.value.rows == [1]


def test_weights_invert_zero_pins_row():
    Y = np.array([[2.0], [0.0]])
    w = build_weights(Y, 0.5, epsilon=0.0, policy=DegeneratePolicy.INVERT_ZERO)
    assert w.inverse[1] == 0.0
    assert w.pinned_mask.tolist() == [False, True]
    assert w.inverse[0] == pytest.approx(2 * 2.0**1.5 / 0.5)


def test_weights_reject_negative_epsilon():
    with pytest.raises(DomainError):
        build_weights([[1.0]], 0.5, epsilon=-1.0)


def test_weight_diagonal_rejects_bad_entries():
    with pytest.raises(DomainError):
        WeightDiagonal(np.array([1.0, 0.0]), np.array([1.0, np.inf]))


def test_phi_examples():
    for p in (0.1, 0.5, 1.0):
        assert phi(1.0, p) == pytest.approx(0.0, abs=1e-15)
    assert phi(2.0, 1.0) == -1.0
    with pytest.raises(DomainError):
        phi(0.0, 0.5)


def test_phi_overflow_is_negative():
    assert phi(100.0, 0.01) == -math.inf


def test_phi_random_sweep(rng):
    t = rng.uniform(0, 100, 1000)
    t[t == 0] = 1e-3
    p = 1.0 - rng.uniform(0, 1, 1000)  # (0, 1]
    assert max(phi(a, b) for a, b in zip(t, p)) <= 0.0


@given(matrices, st.randoms(use_true_random=False))
def test_row_norms_permutation_equivariant(Y, rnd):
    perm = list(range(Y.shape[0]))
    rnd.shuffle(perm)
    np.testing.assert_array_equal(row_l2_norms(Y[perm]), row_l2_norms(Y)[perm])


@given(matrices, matrices, exponents)
def test_stacking_decomposes(top, bottom, p):
    if top.shape[1] != bottom.shape[1]:
        bottom = np.resize(bottom, (bottom.shape[0], top.shape[1]))
    whole = l2p_power(np.vstack([top, bottom]), p)
    parts = l2p_power(top, p) + l2p_power(bottom, p)
    assert whole == pytest.approx(parts, rel=1e-12, abs=1e-300)


@given(matrices, exponents, st.floats(-50, 50).filter(lambda c: c == 0 or abs(c) > 1e-6))
def test_homogeneity(Y, p, c):
    lhs = l2p_power(c * Y, p)
    rhs = abs(c) ** p * l2p_power(Y, p)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-300)


def test_triangle_inequality_fails_below_one():
    A = np.array([[1.0], [0.0]])
    B = np.array([[0.0], [1.0]])
    p = 0.5
    pseudo = lambda Z: l2p_power(Z, p) ** (1 / p)
    assert pseudo(A + B) == pytest.approx(4.0)
    assert pseudo(A + B) > pseudo(A) + pseudo(B)


@given(st.floats(1e-6, 1e3), exponents)
def test_phi_nonpositive_zero_only_at_one(t, p):
    v = phi(t, p)
    assert v <= 1e-15
    if abs(t - 1.0) > 1e-3:
        assert v < 0


def test_smoothed_objective_reduces_to_plain(rng):
    Y = rng.standard_normal((4, 2))
    assert smoothed_l2p_power(Y, 0.5, 0.0) == pytest.approx(l2p_power(Y, 0.5), rel=1e-14)
