import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from isackit.typeclasses import (
    is_conditionally_typical,
    is_strongly_typical,
    joint_type,
    typicality_lower_bound,
)


def test_joint_type_pair_counts():
    jt = joint_type((np.array([0, 1, 0, 1]), np.array([0, 1, 1, 1])))
    pmf = jt.pmf
    assert pmf[0, 0] == 0.25
    assert pmf[0, 1] == 0.25
    assert pmf[1, 1] == 0.5
    assert pmf[1, 0] == 0.0
    assert jt.counts.sum() == jt.n == 4


def test_joint_type_constant_sequence_is_point_mass():
    jt = joint_type(np.array([2, 2, 2]), sizes=(4,))
    expected = np.zeros(4)
    expected[2] = 1.0
    np.testing.assert_array_equal(jt.pmf, expected)


@given(seed=st.integers(0, 2**31))
def test_joint_type_invariant_under_time_permutation(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 30))
    x = rng.integers(0, 3, n)
    y = rng.integers(0, 2, n)
    perm = rng.permutation(n)
    a = joint_type((x, y), sizes=(3, 2))
    b = joint_type((x[perm], y[perm]), sizes=(3, 2))
    np.testing.assert_array_equal(a.counts, b.counts)


def test_joint_type_three_sequences():
    jt = joint_type((np.array([0, 1]), np.array([1, 0]), np.array([1, 1])))
    assert jt.counts[0, 1, 1] == 1
    assert jt.counts[1, 0, 1] == 1
    assert jt.counts.sum() == 2


def test_joint_type_errors():
    with pytest.raises(ValueError, match="length"):
        joint_type((np.array([0, 1]), np.array([0])))
    with pytest.raises(ValueError, match="empty"):
        joint_type(np.array([], dtype=int))
    with pytest.raises(ValueError, match="1 to 3"):
        joint_type((np.zeros(2, int),) * 4)


def test_concatenation_counts_add_exactly():
    rng = np.random.default_rng(11)
    x1, y1 = rng.integers(0, 2, 7), rng.integers(0, 2, 7)
    x2, y2 = rng.integers(0, 2, 13), rng.integers(0, 2, 13)
    a = joint_type((x1, y1), sizes=(2, 2))
    b = joint_type((x2, y2), sizes=(2, 2))
    c = joint_type((np.concatenate([x1, x2]), np.concatenate([y1, y2])), sizes=(2, 2))
    np.testing.assert_array_equal(c.counts, a.counts + b.counts)
    assert c.n == a.n + b.n


def test_strongly_typical_exact_type_match():
    assert is_strongly_typical(np.array([0, 1, 0, 1]), np.array([0.5, 0.5]), mu=0.0)


def test_strongly_typical_deviation_rejected():
    assert not is_strongly_typical(np.array([0, 0, 0, 1]), np.array([0.5, 0.5]), mu=0.1)


def test_strongly_typical_zero_mass_condition():
    p = np.array([1.0, 0.0])
    seq = np.array([0, 1, 0])
    for mu in (0.0, 0.5, 1.0, 100.0):
        assert not is_strongly_typical(seq, p, mu)


def test_strongly_typical_pairs():
    x = np.array([0, 1, 0, 1])
    y = np.array([0, 1, 1, 1])
    p = np.array([[0.25, 0.25], [0.0, 0.5]])
    assert is_strongly_typical((x, y), p, mu=0.0)
    assert not is_strongly_typical((x, y), p.T, mu=0.1)


@given(seed=st.integers(0, 2**31), mu=st.floats(0.0, 0.5), extra=st.floats(0.0, 0.5))
def test_mu_monotonicity(seed, mu, extra):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 20))
    seq = rng.integers(0, 2, n)
    p = rng.random(2) + 0.05
    p /= p.sum()
    if is_strongly_typical(seq, p, mu):
        assert is_strongly_typical(seq, p, mu + extra)


def test_conditionally_typical_identity_channel():
    x = np.array([0, 1, 1, 0])
    assert is_conditionally_typical(x, x, np.eye(2), mu=0.0)


def test_conditionally_typical_zero_mass_condition():
    w = np.array([[1.0, 0.0], [0.0, 1.0]])
    x = np.array([0, 0])
    y = np.array([0, 1])  # (0, 1) has w = 0 but occurs
    assert not is_conditionally_typical(y, x, w, mu=1.0)


def test_conditionally_typical_bsc_half():
    x = np.array([0, 0, 1, 1])
    y = np.array([0, 1, 0, 1])
    w = np.full((2, 2), 0.5)
    assert is_conditionally_typical(y, x, w, mu=0.25)
    assert is_conditionally_typical(y, x, w, mu=0.0)


def test_bound_values():
    assert typicality_lower_bound(0.1, 10000, 8) == pytest.approx(0.98, abs=1e-12)
    assert typicality_lower_bound(0.1, 100, 8) == pytest.approx(-1.0, abs=1e-12)
    assert typicality_lower_bound(0.3, 50, 0) == 1.0


def test_bound_undefined_for_zero_mu():
    with pytest.raises(ValueError, match="undefined"):
        typicality_lower_bound(0.0, 10, 4)


def exact_binary_marginal_mass(p, n, mu):
    """Exact typical-set probability for i.i.d. bits, by enumerating counts."""
    from math import comb

    total = 0.0
    for k in range(n + 1):
        seq = np.array([1] * k + [0] * (n - k))
        if is_strongly_typical(seq, p, mu):
            total += comb(n, k) * p[1] ** k * p[0] ** (n - k)
    return total


@pytest.mark.parametrize("p1", [0.5, 0.3, 0.15])
@pytest.mark.parametrize("n", [8, 10, 12])
def test_bound_holds_exactly_binary(p1, n):
    p = np.array([1 - p1, p1])
    for mu in (0.15, 0.2, 0.25, 0.3):
        bound = typicality_lower_bound(mu, n, cell_count=2)
        if bound <= 0:
            continue
        assert exact_binary_marginal_mass(p, n, mu) >= bound - 1e-12
