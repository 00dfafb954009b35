"""Acceptance criteria, one test each, every test printing a PASS/FAIL line."""

import time
import warnings
from dataclasses import replace

import numpy as np
import pytest

from fairbid import (GroupSpec, Instance, MWConfig, brute_force_integer_opt,
                     deterministic_round, evaluate, exact_lp, flexibility,
                     repair_round_condition, solve_mw, thresholds, verify_threshold_theorem)
from fairbid.lp import derive_bounds
from fairbid.online import OnlineState, decide, run_horizon
from fairbid.rounding import FRACTIONAL_TOL, randomized_round_trials, round_order
from fairbid.simulator import (Strategy, approximate_parity_strategy,
                               average_bid_parity_strategy, bid_outcome_parity_strategy,
                               build_scenario, compare_strategies, equal_price_population,
                               example_3_1, example_3_1_outcome_parity_bids, run_auction)
from fairbid.simulator.scenarios import SWEEP_AUTOBIDDER, SWEEP_BUDGETS, standard_strategies

from .helpers import partition_instance, random_instance

pytestmark = pytest.mark.acceptance


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}"
                  + (f" ({detail})" if detail else ""))
        assert ok, detail
    return emit


def test_c1_example_3_1(report):
    t0 = time.perf_counter()
    inst = example_3_1()
    rep = run_auction(inst, Strategy.single(1.0), "second", "impression", seed=2024,
                      trials=100_000)
    elapsed = time.perf_counter() - t0
    op = run_auction(inst, Strategy.per_query(example_3_1_outcome_parity_bids(inst)), "second",
                     "impression", seed=1, trials=1000)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        bop = bid_outcome_parity_strategy(inst, ("A", "B"), inst.budget).bid
    ok = (abs(rep.mean_exposures - 21.3) <= 0.3 and elapsed < 10
          and np.all(op.exposures == 50) and np.allclose(op.spend, 5.0) and bop == 1.0)
    report(1, "Example 3.1 reproduction", ok,
           f"single bid {rep.mean_exposures:.3f} exposures in {elapsed:.1f}s; outcome parity "
           f"{op.exposures.min()}-{op.exposures.max()} exposures; finder bid {bop}")


def test_c2_solver_vs_integer_oracle(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(202)
    delta = 0.05
    bad = []
    for k in range(100):
        n = int(rng.integers(2, 15))
        G = int(rng.integers(0, 3))
        inst = random_instance(rng, n, G, budget_frac=rng.uniform(0.1, 0.8))
        b = derive_bounds(inst)
        res = solve_mw(inst, MWConfig(delta=delta))
        _, opt = brute_force_integer_opt(inst)
        ok = (res.objective >= opt - delta * b.V_obj - 1e-9
              and res.spend <= inst.budget + delta * b.V_budget + 1e-9
              and np.all(res.group_slack <= delta * b.V_group + 1e-9))
        if not ok:
            bad.append(k)
    elapsed = time.perf_counter() - t0
    report(2, "MW solver vs integer optimum", not bad and elapsed < 60,
           f"{100 - len(bad)}/100 instances within tolerance in {elapsed:.1f}s")


def test_c3_solver_vs_exact_lp(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(303)
    delta = 0.05
    gaps = []
    for _ in range(50):
        n = int(rng.integers(5, 101))
        G = int(rng.integers(0, 4))
        inst = random_instance(rng, n, G, budget_frac=rng.uniform(0.1, 0.8))
        res = solve_mw(inst, MWConfig(delta=delta))
        lp = exact_lp(inst)
        gaps.append((lp.objective - res.objective) / derive_bounds(inst).V_obj)
    elapsed = time.perf_counter() - t0
    worst = max(gaps)
    report(3, "MW solver vs exact LP", worst <= delta + 1e-9 and elapsed < 60,
           f"worst normalized gap {worst:.4f} vs delta {delta} in {elapsed:.1f}s")


def test_c4_threshold_theorem(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(404)
    failed, done = 0, 0
    while done < 200:
        inst = random_instance(rng, 50, 2, budget_frac=0.3)
        lp = exact_lp(inst)
        if lp.duals.alpha <= 0:
            continue
        done += 1
        failed += not verify_threshold_theorem(inst, lp.allocation, lp.duals).passed
    elapsed = time.perf_counter() - t0
    report(4, "threshold characterization of optimal solutions", failed == 0 and elapsed < 60,
           f"{200 - failed}/200 pass in {elapsed:.1f}s")


def _suffixes_ok(inst, x, y):
    for g in range(inst.n_groups):
        idx = np.flatnonzero(inst.membership[:, g] & (x > FRACTIONAL_TOL)
                             & (x < 1 - FRACTIONAL_TOL))
        if idx.size == 0:
            continue
        order = round_order(inst, idx)
        sx = np.cumsum(x[order][::-1])
        sy = np.cumsum(y[order][::-1])
        if np.any(sy > sx + 1e-9) or np.any(sy < sx - 1 - 1e-9):
            return False
    return True


def test_c5_deterministic_rounding(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(505)
    bad = []
    for k in range(1000):
        n = int(rng.integers(5, 501))
        G = int(rng.integers(1, 6))
        inst = partition_instance(rng, n, G, budget_frac=rng.uniform(0.1, 0.8))
        x = exact_lp(inst, enforce_size=False).x
        xr = repair_round_condition(inst, x).x
        y = deterministic_round(inst, xr, repair=False).y.astype(float)
        vmax = inst.value.max()
        spend_y, spend_x = y @ inst.cpc, xr @ inst.cpc
        ok = (spend_y <= spend_x + 1e-9 and spend_x <= inst.budget + 1e-9
              and np.all(y @ inst.membership + 1 >= inst.mu * y.sum() - 1e-9)
              and y @ inst.value >= x @ inst.value - G * vmax - 1e-9
              and _suffixes_ok(inst, xr, y))
        if not ok:
            bad.append(k)
    elapsed = time.perf_counter() - t0
    report(5, "deterministic rounding guarantees", not bad and elapsed < 60,
           f"{1000 - len(bad)}/1000 instances in {elapsed:.1f}s")


def _flexible_instance(rng, n=2000):
    a = rng.random(n) < 0.18
    b = ~a & (rng.random(n) < 0.25)
    value = rng.uniform(0.2, 2.0, n)
    value[a] *= 0.5  # makes the A target bind
    cpc = rng.uniform(0.1, 1.5, n)
    ctr = rng.uniform(0.9, 1.0, n)
    groups = [GroupSpec("A", 0.2), GroupSpec("B", 0.0)]
    return Instance(value, ctr, cpc, np.column_stack([a, b]), groups,
                    0.3 * float((ctr * cpc).sum()))


def test_c6_randomized_rounding(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(606)
    inst = _flexible_instance(rng)
    eps, trials = 0.3, 1000
    x = exact_lp(inst, enforce_size=False).x
    flex = flexibility(inst, x)
    Y = randomized_round_trials(inst, x, flex.s_zero, eps, seed=7, trials=trials)
    R = np.random.default_rng(8).random(Y.shape) < inst.ctr
    yr = Y * R
    coef = inst.mu[None, :] - inst.membership
    frac_rep = (x * inst.ctr) @ coef
    budget_ok = yr @ inst.cpc <= (x * inst.ctr) @ inst.cpc + 1e-9
    # realized representation must hold wherever the fractional solution meets it
    fair_ok = np.all(yr @ coef <= np.maximum(frac_rep, 0.0) + 1e-9, axis=1)
    freq = float(np.mean(budget_ok & fair_ok))
    util = yr @ inst.value
    se = util.std(ddof=1) / np.sqrt(trials)
    target = (1 - eps) * float((x * inst.ctr) @ inst.value)
    elapsed = time.perf_counter() - t0
    ok = freq >= 0.95 and util.mean() >= target - 3 * se and elapsed < 120 and eps > flex.gamma
    report(6, "randomized rounding", ok,
           f"gamma {flex.gamma:.3f}, constraints held in {freq:.1%} of trials, utility "
           f"{util.mean():.1f} vs {target:.1f} - 3*{se:.2f}, {elapsed:.1f}s")


def _online_distribution(rng, n=200):
    women = rng.random(n) < 0.5
    cpc = np.where(women, rng.uniform(0.8, 1.6, n), rng.uniform(0.3, 0.9, n))
    return Instance(rng.uniform(0.5, 1.5, n), rng.uniform(0.2, 0.8, n), cpc, women[:, None],
                    [GroupSpec("w", 0.5)], 0.0)


def test_c7_online_violation_decay(report):
    t0 = time.perf_counter()
    dist = _online_distribution(np.random.default_rng(707))
    viol = {}
    overspent = 0
    for T in (1_000, 10_000):
        rows = []
        for s in range(20):
            rep = run_horizon(dist, 0.1 * T, T, seed=s)
            overspent += bool(np.any(rep.spend > 0.1 * T + 1e-9))
            rows.append(list(rep.positive_violation.values()))
        viol[T] = np.mean(rows, axis=0)
    elapsed = time.perf_counter() - t0
    names = list(rep.positive_violation)
    parts, ok = [], overspent == 0 and elapsed < 120
    for j, name in enumerate(names):
        lo, hi = viol[10_000][j], viol[1_000][j]
        if hi == 0 and lo == 0:
            parts.append(f"{name} 0 at both horizons")
            continue
        ratio = hi / lo if lo > 0 else np.inf
        ok &= ratio >= 1.3
        parts.append(f"{name} {hi:.4f} -> {lo:.4f} (ratio {ratio:.2f})")
    report(7, "online constraint violation decay", ok,
           "; ".join(parts) + f"; {overspent} overspent trajectories; {elapsed:.1f}s")


def test_c8_decide_threshold_equivalence(report):
    rng = np.random.default_rng(808)
    mismatched, done = 0, 0
    while done < 100:
        inst = random_instance(rng, 40, 2, budget_frac=0.3)
        lp = exact_lp(inst)
        d = lp.duals
        if d.alpha <= 0:
            continue
        done += 1
        state = OnlineState.start(inst.mu, np.inf, inst.n)
        state = replace(state, lambda_budget=d.alpha,
                        lambda_group=np.asarray(d.beta, dtype=float))
        chosen = np.array([decide(state, q) for q in inst.queries])
        T = thresholds(inst, d).t
        active = inst.ctr > 0
        mismatched += not np.array_equal(chosen[active], (T >= inst.cpc)[active].astype(int))
    report(8, "online decision equals threshold selection", mismatched == 0,
           f"{100 - mismatched}/100 instances identical")


def _sweep(share):
    sc = build_scenario("synthetic", {"women_share": share}, seed=1)
    sample = build_scenario("synthetic", {"women_share": share}, seed=2).instance
    strategies = standard_strategies(sample, ("women", "men"), SWEEP_AUTOBIDDER)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rows = compare_strategies(sc.instance, strategies, SWEEP_BUDGETS, seed=3, trials=1000,
                                  pay_per=sc.pay_per)
    return {(r.budget, r.strategy): r.report for r in rows}


@pytest.mark.parametrize("share", [0.5, 0.21])
def test_c9_synthetic_sweep(report, share):
    t0 = time.perf_counter()
    cells = _sweep(share)
    elapsed = time.perf_counter() - t0
    low = SWEEP_BUDGETS[:2]
    bp_cap = 0.45 if share == 0.5 else 0.9 * share
    ok, parts = elapsed < 150, []
    for B in SWEEP_BUDGETS:
        bp = cells[B, "bid_parity"].representation_ratio["women"]
        ab = cells[B, "autobidder"]
        bop = cells[B, "bid_and_outcome_parity"]
        ab_ratio = ab.representation_ratio["women"]
        se = np.hypot(ab.utility_stderr, bop.utility_stderr)
        ok &= abs(ab_ratio - share) <= 0.05
        ok &= ab.mean_utility >= bop.mean_utility - 2 * se
        if B in low:
            ok &= bp < bp_cap
        parts.append(f"B={B:g}: bid parity {bp:.3f}, autobidder {ab_ratio:.3f} "
                     f"utility {ab.mean_utility:.1f} vs {bop.mean_utility:.1f}")
    report(9, f"synthetic sweep, women share {share}", ok,
           "; ".join(parts) + f"; {elapsed:.1f}s")


def test_c10_appendix_counterexamples(report):
    inst = equal_price_population(100, w=1.0)
    avg = run_auction(inst, average_bid_parity_strategy(inst, ("A", "B"), 1.0, 0.1),
                      pay_per="impression", seed=10, trials=200)
    ea, eb = avg.exposures_per_group.mean(axis=0)
    se = np.std(avg.exposures_per_group[:, 0] / avg.exposures_per_group[:, 1], ddof=1)
    approx = run_auction(inst, approximate_parity_strategy(inst, ("A", "B"), 1.0, 0.05),
                         pay_per="impression", seed=11, trials=200)
    ok = abs(ea / eb - 10) <= 3 * se / np.sqrt(200) + 1e-9 and np.all(
        approx.exposures_per_group[:, 1] == 0)
    report(10, "average and approximate bid parity counterexamples", ok,
           f"average parity ratio {ea / eb:.2f}; approximate parity B exposures "
           f"max {approx.exposures_per_group[:, 1].max():.0f}")
