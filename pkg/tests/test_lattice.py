import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtorsion.errors import ConvergenceBudgetExceeded
from qtorsion.lattice import enumerate_shell, point_count_bound, tail_bound


def brute(form, shift, cutoff, radius=12):
    n = form.shape[0]
    vals = []
    for xi in itertools.product(range(-radius, radius + 1), repeat=n):
        x = np.asarray(xi) + shift
        v = x @ form @ x
        if v <= cutoff:
            vals.append(v)
    return np.sort(vals)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(0, 10_000))
def test_shell_matches_brute_force(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    form = a @ a.T + 0.5 * np.eye(n)
    shift = rng.uniform(0, 1, n)
    cutoff = 6.0
    _, vals = enumerate_shell(form, shift, cutoff)
    ref = brute(form, shift, cutoff, radius=8 if n < 3 else 6)
    np.testing.assert_allclose(np.sort(vals), ref, rtol=0, atol=1e-12)


def test_shell_is_deterministically_ordered():
    form = np.eye(2)
    xi, vals = enumerate_shell(form, np.zeros(2), 2.0)
    assert np.all(np.diff(np.round(vals, 9)) >= 0)
    again, _ = enumerate_shell(form, np.zeros(2), 2.0)
    assert np.array_equal(xi, again)
    # ties at value 1 are sorted lexicographically
    ones = xi[np.isclose(vals, 1.0)]
    assert [tuple(r) for r in ones] == sorted(tuple(r) for r in ones)


def test_budget():
    with pytest.raises(ConvergenceBudgetExceeded):
        enumerate_shell(np.eye(4) * 1e-3, np.zeros(4), 1e3, budget=1000)


def test_point_count_bound_is_an_upper_bound():
    for level in (0.5, 3.0, 20.0):
        count = brute(np.eye(2), np.array([0.3, 0.7]), level).size
        assert count <= point_count_bound(level, 1.0, 2)


def test_tail_bound_dominates_actual_tail():
    form = np.eye(2) * 4 * np.pi**2
    shift = np.array([0.25, 0.5])
    _, vals = enumerate_shell(form, shift, 2000.0)
    cutoff = 300.0
    actual = np.exp(-0.05 * vals[vals > cutoff]).sum()
    bound = tail_bound(lambda v: np.exp(-0.05 * v), cutoff, 4 * np.pi**2, 2, 20.0)
    assert actual <= bound
