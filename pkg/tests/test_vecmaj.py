import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from gfod import vecmaj
from gfod.vecmaj import majorizes, submajorizes_weak

vec = arrays(np.float64, st.integers(1, 7), elements=st.floats(-10, 10))


@pytest.mark.parametrize("x, expected", [
    ([1, 3, 2], [3, 2, 1]),
    ([-1, 1 / 3, 1 / 3, 1 / 3], [1 / 3, 1 / 3, 1 / 3, -1]),
    ([], []),
])
def test_sort_down(x, expected):
    np.testing.assert_array_equal(vecmaj.sort_down(x), expected)


@pytest.mark.parametrize("x, y, weak, full", [
    ([1, 1], [2, 0], True, True),
    ([3, 1, 1, 1], [2, 2, 1, 1], False, False),
    ([2, 1], [2, 1], True, True),
    ([1, 0.5], [2, 0], True, False),
])
def test_known_pairs(x, y, weak, full):
    assert submajorizes_weak(x, y) is weak
    assert majorizes(x, y) is full


def test_first_failure_reports_partial_sum():
    assert vecmaj.first_failure([3, 1, 1, 1], [2, 2, 1, 1]) == 1
    assert vecmaj.first_failure([2, 2, 0], [2, 1, 1]) == 2
    assert vecmaj.first_failure([1, 1], [2, 0]) is None


def test_different_lengths_compare_common_prefix():
    # partial sums up to min length, totals over the full vectors
    assert majorizes([1, 1, 1], [3])
    assert majorizes([2, 1], [2, 1, 0, 0])
    assert not majorizes([2, 1], [2, 0.5, 0.5])  # totals agree, 2nd partial sum fails
    assert submajorizes_weak([5, 0, 0], [5])


def test_tolerance_is_absolute_1e9():
    assert majorizes([1 + 5e-10, 1 - 5e-10], [1, 1])
    assert not majorizes([1 + 5e-9, 1 - 5e-9], [1, 1])


def test_strict_needs_a_real_gap():
    assert vecmaj.strictly_majorizes([1, 1], [2, 0])
    assert not vecmaj.strictly_majorizes([2, 0], [2, 0])


@given(vec)
def test_reflexive(x):
    assert majorizes(x, x)


@given(vec, st.data())
def test_entrywise_le_implies_weak(x, data):
    bump = data.draw(arrays(np.float64, x.size, elements=st.floats(0, 5)))
    assert submajorizes_weak(x, x + bump)


@settings(max_examples=200)
@given(st.data())
def test_concatenation(data):
    seeds = data.draw(st.lists(st.integers(0, 2**31), min_size=2, max_size=2))
    parts = []
    for s in seeds:
        rng = np.random.default_rng(s)
        y = rng.uniform(-3, 3, int(rng.integers(1, 5)))
        # x = D y with D doubly stochastic is majorized by y
        D = _sinkhorn(rng.uniform(0.1, 1, (y.size, y.size)))
        parts.append((D @ y, y))
    (x, y), (z, w) = parts
    assert majorizes(x, y) and majorizes(z, w)
    assert majorizes(np.concatenate([x, z]), np.concatenate([y, w]))


def _sinkhorn(M, iters=500):
    for _ in range(iters):
        M = M / M.sum(axis=1, keepdims=True)
        M = M / M.sum(axis=0, keepdims=True)
    return M


@settings(max_examples=200)
@given(st.integers(0, 2**31))
def test_majorization_passes_to_absolute_values(seed):
    rng = np.random.default_rng(seed)
    y = rng.uniform(-3, 3, int(rng.integers(1, 6)))
    x = _sinkhorn(rng.uniform(0.1, 1, (y.size, y.size))) @ y
    assert majorizes(x, y)
    assert submajorizes_weak(np.abs(x), np.abs(y))
