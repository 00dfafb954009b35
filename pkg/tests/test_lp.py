import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fairbid import (DualCertificate, GroupSpec, Instance, InvalidDualError, MWConfig,
                     PreconditionError, brute_force_integer_opt, derive_bounds, evaluate,
                     solve_mw, solve_one_dim, thresholds, thresholds_to_bids)
from fairbid.lp import SUCCEEDED, ThresholdVector
from fairbid.model import group_coefficients

from .helpers import e1, random_instance


# bounds

def test_bounds_e1():
    b = derive_bounds(e1())
    assert b.V_obj == 4.0 and b.V_budget == 2.0
    assert not b.degenerate


def test_group_bound_e1():
    b = derive_bounds(e1(mu_b=0.5))
    assert b.V_group[1] == pytest.approx(1.5)


def test_degenerate_bounds_warn():
    with pytest.warns(UserWarning, match="degenerate"):
        b = derive_bounds(Instance([1.0], [0.0], [1.0], budget=1.0))
    assert b.V_obj == 0 and b.degenerate


# one-dimensional oracle

def _single(v, cpc, g=None, mu=0.5):
    if g is None:
        return Instance([v], [1.0], [cpc], budget=1.0)
    return Instance([v], [1.0], [cpc], [[g]], [GroupSpec("g", mu)], 1.0)


def test_one_dim_no_groups():
    assert solve_one_dim(_single(1.0, 0.4), 2.0, []).y.tolist() == [1]


def test_one_dim_member_selected():
    # b = 1 - 0.4 * (0.5 - 1) = 1.2 >= 1.1
    assert solve_one_dim(_single(1.0, 1.1, g=1), 1.0, [0.4]).y.tolist() == [1]


def test_one_dim_nonmember_rejected():
    # b = 1 - 0.4 * 0.5 = 0.8 < 1.1
    assert solve_one_dim(_single(1.0, 1.1, g=0), 1.0, [0.4]).y.tolist() == [0]


def test_one_dim_tie_selects():
    assert solve_one_dim(_single(1.0, 0.5), 2.0, []).y.tolist() == [1]


@pytest.mark.parametrize("alpha, beta", [(0.0, []), (-1.0, []), (1.0, [-0.1])])
def test_one_dim_rejects_bad_duals(alpha, beta):
    inst = _single(1.0, 1.0) if not beta else _single(1.0, 1.0, g=1)
    with pytest.raises(InvalidDualError):
        solve_one_dim(inst, alpha, beta)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_one_dim_maximizes_lagrangian(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 11))
    inst = random_instance(rng, n, int(rng.integers(0, 3)))
    alpha = float(rng.uniform(0.1, 3))
    beta = rng.uniform(0, 2, inst.n_groups)
    coef = inst.ctr * (inst.value - alpha * inst.cpc) - group_coefficients(inst) @ beta
    y = solve_one_dim(inst, alpha, beta).y
    best = max(np.dot(coef, c) for c in itertools.product([0, 1], repeat=n))
    assert np.dot(coef, y) >= best - 1e-12


# config

def test_config_defaults():
    c = MWConfig(0.05).resolved(2)
    assert c.outer_iters == 40
    assert c.inner_iters == math.ceil(32 * math.log(4) / 0.05**2)
    assert c.mw_step == pytest.approx(0.0125)


@pytest.mark.parametrize("kw", [dict(delta=0), dict(delta=1.2), dict(outer_iters=3),
                                dict(inner_iters=0), dict(mw_step=0.6)])
def test_config_validation(kw):
    with pytest.raises(PreconditionError):
        MWConfig(**{"delta": 0.05, **kw})


# MW solver

def test_mw_e1():
    res = solve_mw(e1(), MWConfig(0.05))
    assert res.objective >= 2 - 0.05 * 4
    assert res.spend <= 1 + 0.05 * 2
    assert res.status[np.searchsorted(res.candidates, res.achieved_V)] == SUCCEEDED


@pytest.mark.parametrize("seed", range(3))
def test_mw_zero_budget_gives_zeros(seed):
    inst = random_instance(np.random.default_rng(seed), 15, 2).with_budget(0.0)
    res = solve_mw(inst)
    assert np.all(res.x == 0) and res.achieved_V == 0


def test_mw_report_keys():
    rep = solve_mw(e1(mu_b=0.5)).report()
    assert set(rep) == {"objective", "spend", "group_slack", "delta", "achieved_V",
                        "iterations"}
    assert set(rep["group_slack"]) == {"A", "B"}


def test_mw_deterministic():
    inst = random_instance(np.random.default_rng(1), 30, 2)
    a, b = solve_mw(inst), solve_mw(inst)
    assert np.array_equal(a.x, b.x) and a.iterations == b.iterations


@pytest.mark.parametrize("seed", range(12))
def test_mw_lemma_triple_against_enumeration(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, int(rng.integers(3, 13)), int(rng.integers(0, 3)))
    delta = 0.05
    res = solve_mw(inst, MWConfig(delta))
    b = res.bounds
    _, opt = brute_force_integer_opt(inst)
    assert res.objective >= opt - delta * b.V_obj
    assert res.spend <= inst.budget + delta * b.V_budget
    assert np.all(res.group_slack <= delta * b.V_group + 1e-12)


@pytest.mark.parametrize("seed", range(8))
def test_mw_width_bound(seed):
    rng = np.random.default_rng(100 + seed)
    inst = random_instance(rng, 40, 3, mu_high=0.9)
    assert solve_mw(inst, MWConfig(0.1)).max_width <= 2.0


def test_mw_monotone_in_budget():
    rng = np.random.default_rng(7)
    inst = random_instance(rng, 25, 2)
    delta = 0.05
    total = float((inst.ctr * inst.cpc).sum())
    prev = -np.inf
    for frac in np.linspace(0.05, 1.0, 8):
        res = solve_mw(inst.with_budget(frac * total), MWConfig(delta))
        assert res.achieved_V >= prev - delta * res.bounds.V_obj
        prev = max(prev, res.achieved_V)


def test_mw_duals_nonnegative():
    inst = random_instance(np.random.default_rng(2), 30, 2)
    d = solve_mw(inst).duals
    assert d is not None
    assert d.alpha >= 0 and np.all(d.beta >= 0) and np.all(d.delta >= 0)


def test_mw_ctr_zero_queries_stay_zero():
    inst = random_instance(np.random.default_rng(5), 20, 1, zero_ctr_frac=0.3)
    res = solve_mw(inst)
    assert np.all(res.x[inst.ctr == 0] == 0)


# duals and thresholds

def test_dual_certificate_rejects_negative():
    with pytest.raises(InvalidDualError):
        DualCertificate(-1.0, [], [])
    with pytest.raises(InvalidDualError):
        DualCertificate(1.0, [-0.1], [])


def test_completing_certificate_is_dual_feasible():
    inst = random_instance(np.random.default_rng(4), 20, 2)
    d = DualCertificate.completing(inst, 0.7, [0.3, 0.1])
    reduced = inst.ctr * (inst.value - 0.7 * inst.cpc) - group_coefficients(inst) @ d.beta
    assert np.all(d.delta >= reduced - 1e-15)
    assert np.all(d.delta >= 0)


def test_thresholds_identity_without_groups():
    inst = e1()
    t = thresholds(inst, DualCertificate(1.0, [], np.zeros(3))).t
    np.testing.assert_array_equal(t, inst.value)


@pytest.mark.parametrize("g, expected", [(1, 1.2), (0, 0.8)])
def test_threshold_formula(g, expected):
    inst = _single(1.0, 1.1, g=g)
    t = thresholds(inst, DualCertificate(1.0, [0.4], [0.0])).t
    assert t[0] == pytest.approx(expected)


def test_thresholds_undefined_when_alpha_zero():
    with pytest.warns(UserWarning, match="alpha"):
        tv = thresholds(e1(), DualCertificate(0.0, [], np.zeros(3)))
    assert not tv.defined.any()


def test_thresholds_undefined_for_zero_ctr():
    inst = Instance([1.0, 1.0], [0.0, 0.5], [1.0, 1.0], budget=1.0)
    tv = thresholds(inst, DualCertificate(1.0, [], [0, 0]))
    assert tv.defined.tolist() == [False, True]


def test_bids_second_price():
    tv = ThresholdVector(np.array([1.2, 0.8]))
    inst = Instance([1, 1], [1, 1], [1.1, 1.1], budget=1)
    np.testing.assert_allclose(thresholds_to_bids(tv, inst, "second"), [1.2, 0.8])


def test_bids_first_price():
    tv = ThresholdVector(np.array([1.2, 0.8]))
    inst = Instance([1, 1], [1, 1], [1.1, 1.1], budget=1)
    np.testing.assert_allclose(thresholds_to_bids(tv, inst, "first"), [1.1, 0.0])


def test_undefined_threshold_bids_zero():
    tv = ThresholdVector(np.array([np.nan, 0.8]))
    inst = Instance([1, 1], [1, 1], [0.5, 0.5], budget=1)
    with pytest.warns(UserWarning, match="undefined"):
        bids = thresholds_to_bids(tv, inst, "first")
    assert bids.tolist() == [0.0, 0.5]


def test_mw_solution_feasible_for_evaluate():
    inst = random_instance(np.random.default_rng(9), 30, 2)
    res = solve_mw(inst)
    ev = evaluate(inst, res.x)
    assert ev.objective == pytest.approx(res.objective)
