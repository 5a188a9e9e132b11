import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gfod import core, uinorms, vecmaj
from gfod.core import GfodInstance
from _gen import instance

EX49 = GfodInstance.create([3, 1], [1, 1])
EX410 = GfodInstance.create([1, 0], [2, 1])
EX314 = GfodInstance.create([2, 2, 1, 1], [3, 1, 1, 1])
seeds = st.integers(0, 2**32 - 1)


# --- instance validation -------------------------------------------------

@pytest.mark.parametrize("lam, a, msg", [
    ([1, -1], [1], "non-negative"),
    ([1, 1], [1, 0], "strictly positive"),
    ([], [1], "non-empty"),
    ([1, np.inf], [1], "non-finite"),
])
def test_invalid_instances(lam, a, msg):
    with pytest.raises(core.InstanceError, match=msg):
        GfodInstance.create(lam, a)


def test_unsorted_direct_construction_rejected():
    with pytest.raises(core.InstanceError, match="non-increasing"):
        GfodInstance(np.array([1.0, 3.0]), np.array([1.0]))


def test_create_sorts_and_records_permutation():
    inst = GfodInstance.create([1, 3, 2], [0.5, 2])
    np.testing.assert_array_equal(inst.lam, [3, 2, 1])
    np.testing.assert_array_equal(inst.lam_perm, [1, 2, 0])
    np.testing.assert_array_equal(inst.a_perm, [1, 0])
    assert (inst.d, inst.k, inst.m) == (3, 2, 2)


# --- averages and water-filling -------------------------------------------

def test_averages():
    t = core.averages(EX49)
    assert t.P(1, 1) == 2 and t.P(1, 2) == 1
    assert core.averages(EX314).P(1, 1) == -1
    t = core.averages(GfodInstance.create([4, 2, 1], [4, 2, 1]))
    assert all(t.P(j, r) == 0 for j in range(1, 4) for r in range(j, 4))
    with pytest.raises(IndexError):
        t.P(2, 1)


@settings(max_examples=100)
@given(seeds)
def test_averages_match_direct_sums(seed):
    inst = instance(np.random.default_rng(seed))
    t = core.averages(inst)
    h = inst.lam[: inst.m] - inst.a[: inst.m]
    for j in range(1, inst.m + 1):
        for r in range(j, inst.m + 1):
            assert abs(t.P(j, r) - h[j - 1 : r].mean()) <= 1e-12


@pytest.mark.parametrize("tail, total, c", [
    ([3, 1], 2, 1.0),
    ([1, 0], 3, -1.0),
    ([2, 1, 1], 3, 1 / 3),
])
def test_waterfill(tail, total, c):
    assert core.waterfill_c(np.array(tail, float), total) == pytest.approx(c, abs=1e-15)


def test_waterfill_rejects_nonpositive_total():
    with pytest.raises(ValueError):
        core.waterfill_c(np.array([1.0]), 0.0)


@settings(max_examples=200)
@given(seeds)
def test_waterfill_solves_its_equation(seed):
    rng = np.random.default_rng(seed)
    tail = -np.sort(-rng.uniform(0, 3, int(rng.integers(1, 8))))
    if rng.uniform() < 0.3:
        tail = np.round(tail)
    total = rng.uniform(0.01, 10)
    c = core.waterfill_c(tail, total)
    assert c < tail[0]
    assert abs(np.maximum(tail - c, 0).sum() - total) <= 1e-12 * (1 + total)


# --- co-feasibility, blocks, admissibility --------------------------------

def test_check_cofeasible_examples():
    r0 = core.check_cofeasible(EX314, 0)
    assert not r0.cofeasible and r0.c == pytest.approx(0.0, abs=1e-15)
    r = core.check_cofeasible(EX49, 0)
    assert r.cofeasible and r.c == pytest.approx(1.0)
    np.testing.assert_allclose(r.truncated_mu, [2, 0])
    r1 = core.check_cofeasible(EX314, 1)
    assert r1.cofeasible and r1.c == pytest.approx(1 / 3, abs=1e-15)
    with pytest.raises(IndexError):
        core.check_cofeasible(EX49, 2)


def test_block_structure_examples():
    assert core.block_structure(EX314, 1) == ([1], [-1.0])
    assert core.block_structure(EX314, 0) == ([], [])
    ends, consts = core.block_structure(GfodInstance.create([5, 4, 1], [1, 1, 1]), 2)
    assert ends == [2] and consts == pytest.approx([3.5])
    with pytest.raises(IndexError):
        core.block_structure(EX49, 2)


def test_block_structure_ties_take_rightmost():
    # h = (0, 0, 1): P(1,1) = P(1,2) = 0 are tied minima
    inst = GfodInstance.create([1, 1, 1], [1, 1, 0.001])
    ends, consts = core.block_structure(inst, 2)
    assert ends == [2] and consts == [0.0]


def test_is_admissible_examples():
    assert core.is_admissible(EX314, 1)
    assert core.is_admissible(EX49, 0)
    assert core.is_admissible(EX410, 0)
    with pytest.raises(ValueError, match="not co-feasible"):
        core.is_admissible(EX314, 0)


@pytest.mark.parametrize("inst, r", [(EX314, 1), (EX49, 0), (EX410, 0)])
def test_minimal_cofeasible_index(inst, r):
    assert core.minimal_cofeasible_index(inst) == r
    assert core.minimal_cofeasible_index(inst, exhaustive=True) == r


def test_tied_index_is_not_admissible():
    # r = 1 is co-feasible for (1, 0), (2, 1) but c_1 = c_2 = -1 is a tie
    assert core.check_cofeasible(EX410, 1).cofeasible
    assert not core.is_admissible(EX410, 1)


def test_minimal_index_needs_k_ge_d():
    with pytest.raises(core.InstanceError):
        core.minimal_cofeasible_index(GfodInstance.create([2, 1, 1], [1]))


def test_missing_cofeasible_index_is_reported(monkeypatch):
    monkeypatch.setattr(core, "cofeasible_indices", lambda inst: [])
    fake = core.CoFeasibility(0, 0.0, False, np.zeros(2))
    monkeypatch.setattr(core, "check_cofeasible", lambda inst, r: fake)
    with pytest.raises(core.SolverError, match="no co-feasible index"):
        core.minimal_cofeasible_index(EX49)


def test_reduce_to_k():
    red, tail = core.reduce_to_k(GfodInstance.create([2, 1, 1], [1]))
    np.testing.assert_array_equal(red.lam, [2])
    np.testing.assert_array_equal(tail, [1, 1])
    red, tail = core.reduce_to_k(GfodInstance.create([5, 3, 2, 1], [4, 4]))
    np.testing.assert_array_equal(red.lam, [5, 3])
    np.testing.assert_array_equal(tail, [2, 1])
    with pytest.raises(core.InstanceError):
        core.reduce_to_k(EX49)


# --- delta ----------------------------------------------------------------

@pytest.mark.parametrize("lam, a, delta, mu, mode", [
    ([3, 1], [1, 1], [1, 1], [2, 0], "k>=d"),
    ([1, 0], [2, 1], [-1, -1], [2, 1], "k>=d"),
    ([2, 2, 1, 1], [3, 1, 1, 1], [-1, 1 / 3, 1 / 3, 1 / 3], [3, 5 / 3, 2 / 3, 2 / 3], "k>=d"),
    ([2, 1, 1], [1], [1, 1, 1], [1, 0, 0], "k<d"),
    ([1, 1], [1, 1], [0, 0], [1, 1], "k>=d"),
])
def test_delta_examples(lam, a, delta, mu, mode):
    sol = core.solve(lam, a)
    np.testing.assert_allclose(sol.delta, delta, atol=1e-12)
    np.testing.assert_allclose(sol.mu, mu, atol=1e-12)
    assert sol.kd_mode == mode


def test_delta_ex314_blocks():
    sol = core.delta(EX314)
    assert sol.r_star == 1 and sol.s == [0, 1, 4]
    np.testing.assert_allclose(sol.c, [-1, 1 / 3], atol=1e-15)
    assert [sol.block_of_vector(i) for i in range(4)] == [0, 1, 1, 1]


def test_delta_of_unsorted_input_refers_to_sorted_instance():
    sol = core.solve([1, 3], [1, 1])
    np.testing.assert_allclose(sol.delta, [1, 1])
    np.testing.assert_array_equal(sol.instance.lam_perm, [1, 0])


def test_global_min_values():
    assert core.global_min_value(EX49, uinorms.FROBENIUS) == pytest.approx(np.sqrt(2), abs=1e-15)
    assert core.global_min_value(EX410, uinorms.schatten(3)) == pytest.approx(2 ** (1 / 3), abs=1e-15)
    assert core.global_min_value(GfodInstance.create([1, 1], [1, 1]), uinorms.FROBENIUS) == 0


# --- properties -------------------------------------------------------------

def _all_instances(rng, n, **kw):
    return [instance(rng, **kw) for _ in range(n)]


def test_uniqueness_scan():
    rng = np.random.default_rng(405)
    for inst in _all_instances(rng, 500, d_max=8, k_max=12, k_at_least_d=True):
        good = [r for r in core.cofeasible_indices(inst) if core.is_admissible(inst, r)]
        assert good == [core.minimal_cofeasible_index(inst)]


def test_uniqueness_scan_with_ties():
    rng = np.random.default_rng(406)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", core.DegenerateInstanceWarning)
        for inst in _all_instances(rng, 300, d_max=6, k_max=8, k_at_least_d=True, grid=0.5):
            r = core.minimal_cofeasible_index(inst, exhaustive=True)
            assert core.check_cofeasible(inst, r).cofeasible


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_cofeasible_constants_non_increasing(seed):
    inst = instance(np.random.default_rng(seed), d_max=8, k_max=12, k_at_least_d=True)
    cs = [core.check_cofeasible(inst, r).c for r in core.cofeasible_indices(inst)]
    assert all(x >= y - 1e-12 for x, y in zip(cs, cs[1:]))


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_solution_invariants(seed):
    sol = core.delta(instance(np.random.default_rng(seed), d_max=8, k_max=10))
    inst = sol.instance
    assert abs(sol.delta.sum() - (inst.lam.sum() - inst.a.sum())) <= 1e-9
    assert np.all(np.diff(sol.c) > 0)
    head = sol.delta[: inst.m]
    assert np.all(head <= np.minimum(sol.c[-1], inst.lam[: inst.m]) + 1e-9)
    assert vecmaj.majorizes(inst.a, inst.lam - sol.delta)
    assert sol.mu.min() >= -1e-9
    if inst.k < inst.d:
        assert np.all(sol.mu[inst.k:] == 0)
    assert all(ok for ok, _ in sol.invariants().values())


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_blockwise_majorization(seed):
    sol = core.delta(instance(np.random.default_rng(seed), d_max=8, k_max=10))
    work = sol.instance
    if sol.kd_mode == "k<d":
        work, _ = core.reduce_to_k(work)
    lam, a, s = work.lam, work.a, sol.s
    for j in range(sol.q - 1):
        blk = slice(s[j], s[j + 1])
        assert vecmaj.majorizes(a[blk], lam[blk] - sol.c[j])
    r = s[-2]
    assert vecmaj.majorizes(a[r:], np.maximum(lam[r:] - sol.c[-1], 0))


@settings(max_examples=200, deadline=None)
@given(seeds, st.floats(0.01, 100))
def test_scale_equivariance(seed, t):
    inst = instance(np.random.default_rng(seed), d_max=8, k_max=10)
    base = core.delta(inst).delta
    scaled = core.solve(t * inst.lam, t * inst.a).delta
    np.testing.assert_allclose(scaled, t * base, rtol=1e-9, atol=1e-9 * t)
