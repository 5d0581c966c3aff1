"""Acceptance criteria, one test each.

Every test prints a single ``[criterion N] PASS|FAIL ...`` line (visible in
``pytest -v`` output) and then asserts the same condition.
"""

import itertools
import math
import time

import numpy as np
import pytest

from relloss.families import Bernoulli, Gamma, Gaussian
from relloss.harness.experiment import identity_sweep, order_sensitivity_demo, sweep_configurations
from relloss.mixture import JEFFREYS, mixture_bound, permutation_invariance_check
from relloss.online import Mode, run, run_many
from relloss.regression import reg_init, reg_predict, reg_regret_report, reg_update
from relloss.regret import (bernoulli_offline_from_counts, bernoulli_regret_bound, bernoulli_total_from_counts,
                            gamma_bound, gamma_chain, gaussian_bound, regret_report)

pytestmark = pytest.mark.acceptance


@pytest.fixture
def announce(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'} {detail}")
    return emit


def test_criterion_1_exact_regret_identity(announce):
    start = time.perf_counter()
    configs = sweep_configurations(240, seed=1)
    results = identity_sweep(240, seed=1)
    elapsed = time.perf_counter() - start
    worst = max(r.identity_residuals["theorem34"] / r.scale for _, r in results)
    combos = {(c.family, c.mode) for c in configs}
    ok = len(results) >= 200 and len(combos) == 6 and worst < 1e-8 and elapsed < 10
    announce(1, ok, f"{len(results)} configs over {len(combos)} family/mode pairs, "
                    f"max relative residual {worst:.2e} (< 1e-8), {elapsed:.2f} s (< 10 s)")
    assert ok


def test_criterion_2_bernoulli_closed_form(announce):
    start = time.perf_counter()
    worst_total = 0.0
    worst_margin = -math.inf
    runs = 0
    for T in range(1, 15):
        bits = np.array(list(itertools.product((0.0, 1.0), repeat=T)))
        _, losses, _ = run_many(Bernoulli(), 0.5, 0.0, Mode.FORWARD, bits)
        totals = losses.sum(axis=1)
        ones = bits.sum(axis=1)
        closed = bernoulli_total_from_counts(T, ones)
        regret = closed - bernoulli_offline_from_counts(T, ones)
        worst_total = max(worst_total, float(np.max(np.abs(totals - closed))))
        worst_margin = max(worst_margin, float(np.max(regret)) - bernoulli_regret_bound(T))
        runs += len(bits)
    elapsed = time.perf_counter() - start
    ok = worst_total < 1e-9 and worst_margin <= 0 and elapsed < 60
    announce(2, ok, f"{runs} sequences, max |total - closed form| {worst_total:.2e} (< 1e-9), "
                    f"max regret - bound {worst_margin:.3f} (<= 0), {elapsed:.2f} s (< 60 s)")
    assert ok


def test_criterion_3_gaussian(announce):
    rng = np.random.default_rng(3)
    start = time.perf_counter()
    worst_exact = 0.0
    log_checked = log_violations = 0
    for _ in range(100):
        T = int(rng.integers(1, 101))
        xs = rng.normal(scale=rng.uniform(0.2, 3.0), size=T)
        eta_b_inv = float(rng.uniform(0.0, 5.0))
        for mode in Mode:
            trace = run(Gaussian(1), 0.0, eta_b_inv, mode, xs)
            exact, log_bound = gaussian_bound(trace)
            regret = regret_report(trace).regret
            if mode is Mode.FORWARD:
                worst_exact = max(worst_exact, abs(regret - exact) / max(1.0, abs(regret)))
            if trace.eta1_inv > 1:
                log_checked += 1
                log_violations += regret > log_bound
    elapsed = time.perf_counter() - start
    ok = worst_exact < 1e-8 and log_violations == 0 and elapsed < 5
    announce(3, ok, f"forward max |regret - exact| {worst_exact:.2e} (< 1e-8); log bound violated "
                    f"{log_violations}/{log_checked}; {elapsed:.2f} s (< 5 s)")
    assert ok


def test_criterion_4_gamma_chain(announce):
    rng = np.random.default_rng(4)
    start = time.perf_counter()
    chain_failures = bound_failures = trials = 0
    for _ in range(100):
        T = int(rng.integers(1, 101))
        xs = rng.exponential(rng.uniform(0.2, 5.0), T) + 1e-6
        trace = run(Gamma(), float(rng.uniform(0.1, 5.0)), float(rng.uniform(1.0, 6.0)),
                    Mode.INCREMENTAL_OFFLINE, xs)
        chain = gamma_chain(trace)
        trials += T
        chain_failures += int(np.sum(chain.divergence > chain.per_trial_bound + 1e-12))
        bound_failures += regret_report(trace).regret > gamma_bound(trace)
    elapsed = time.perf_counter() - start
    ok = chain_failures == 0 and bound_failures == 0 and elapsed < 5
    announce(4, ok, f"per-trial chain failures {chain_failures}/{trials}, sequence bound failures "
                    f"{bound_failures}/100, {elapsed:.2f} s (< 5 s)")
    assert ok


def test_criterion_5_regression(announce):
    rng = np.random.default_rng(5)
    start = time.perf_counter()
    worst_exact = worst_dense = 0.0
    ridge = {m: 0 for m in Mode}
    dimension = {m: 0 for m in Mode}
    worst_excess = 0.0
    n = 100
    for _ in range(n):
        d, T = int(rng.integers(1, 9)), int(rng.integers(1, 201))
        a = float(np.exp(rng.uniform(math.log(0.1), math.log(10.0))))
        big_x, big_y = rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)
        xs, ys = rng.uniform(-big_x, big_x, (T, d)), rng.uniform(-big_y, big_y, T)
        for mode in Mode:
            report = reg_regret_report(xs, ys, a, mode)
            if mode is Mode.FORWARD:
                worst_exact = max(worst_exact, report.identity_residuals["forward_exact"] / report.scale)
            ridge[mode] += not report.bounds["log_ridge"].holds
            dimension[mode] += not report.bounds["log_dimension"].holds
            worst_excess = max(worst_excess, report.regret - report.bounds["log_ridge"].value)
            state = reg_init(d, a, mode)
            for x, y in zip(xs, ys):
                _, state = reg_predict(state, x)
                state = reg_update(state, x, y)
                dense = np.linalg.solve(state.inv_rate, state.xy_sum)
                worst_dense = max(worst_dense, float(np.max(np.abs(state.theta - dense))))
    elapsed = time.perf_counter() - start
    ridge_fail = sum(ridge.values())
    ok = worst_exact < 1e-8 and worst_dense < 1e-8 and ridge_fail == 0 and elapsed < 10
    announce(5, ok, f"forward max |regret - expression| {worst_exact:.2e} (< 1e-8); rank-one vs dense "
                    f"{worst_dense:.2e} (< 1e-8); (aY^2/2)ln(1+TX^2/a) violated "
                    f"{ridge[Mode.FORWARD]}/{n} forward, {ridge[Mode.INCREMENTAL_OFFLINE]}/{n} incremental "
                    f"(max excess {worst_excess:.3f}); {elapsed:.2f} s (< 10 s)")
    dim_fail = sum(dimension.values())
    announce("5 (info)", dim_fail == 0, f"(dY^2/2)ln(1+TX^2/a) violated {dim_fail}/{2 * n}")
    assert ok


def _naturals(family, rng, n):
    if isinstance(family, Gamma):
        return -np.exp(rng.uniform(-2.0, 2.0, (n, family.dim)))
    return rng.uniform(-4.0, 4.0, (n, family.dim))


def test_criterion_6_duality(announce):
    rng = np.random.default_rng(6)
    h = 1e-5
    worst = {"round_trip": 0.0, "hessian": 0.0, "gradient": 0.0}
    for family in (Bernoulli(), Gaussian(2), Gamma()):
        eye = np.eye(family.dim)
        for theta in _naturals(family, rng, 1000):
            mu = family.link(theta)
            back = family.inverse_link(mu)
            worst["round_trip"] = max(worst["round_trip"],
                                      float(np.max(np.abs(back - theta) / np.maximum(1.0, np.abs(theta)))))
            legendre = abs(family.dual(mu) + family.cumulant(theta) - float(theta @ mu))
            worst["round_trip"] = max(worst["round_trip"], legendre / max(1.0, abs(family.cumulant(theta))))
            prod = family.dual_hessian(mu) @ family.cumulant_hessian(theta)
            worst["hessian"] = max(worst["hessian"], float(np.max(np.abs(prod - eye))))
            fd_g = np.array([(family.cumulant(theta + h * e) - family.cumulant(theta - h * e)) / (2 * h)
                             for e in eye])
            fd_f = np.array([(family.dual(mu + h * e) - family.dual(mu - h * e)) / (2 * h) for e in eye])
            worst["gradient"] = max(worst["gradient"], float(np.max(np.abs(fd_g - mu))),
                                    float(np.max(np.abs(fd_f - back))))
    ok = worst["round_trip"] < 1e-10 and worst["hessian"] < 1e-8 and worst["gradient"] < 1e-6
    announce(6, ok, f"3 families x 1000 points: round trip/Legendre {worst['round_trip']:.2e} (< 1e-10), "
                    f"Hessian inverse {worst['hessian']:.2e} (< 1e-8), finite differences "
                    f"{worst['gradient']:.2e} (< 1e-6)")
    assert ok


def test_criterion_7_mixture(announce):
    start = time.perf_counter()
    worst = 0.0
    count = 0
    for T in range(1, 13):
        bits = np.array(list(itertools.product((0.0, 1.0), repeat=T)))
        _, losses, _ = run_many(Bernoulli(), 0.5, 0.0, Mode.FORWARD, bits)
        for seq, total in zip(bits, losses.sum(axis=1)):
            worst = max(worst, abs(mixture_bound(Bernoulli(), JEFFREYS, 1.0, seq) - total))
            count += 1
    spread = 0.0
    for T in range(1, 9):
        for ones in range(T + 1):
            seq = [1.0] * ones + [0.0] * (T - ones)
            spread = max(spread, permutation_invariance_check(Bernoulli(), JEFFREYS, 1.0, seq))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-7 and spread < 1e-8
    announce(7, ok, f"{count} sequences, max |mixture - forward total| {worst:.2e} (< 1e-7); "
                    f"max spread over orderings (T <= 8) {spread:.2e} (< 1e-8); {elapsed:.1f} s")
    assert ok


def test_criterion_8_order_sensitivity(announce):
    first, second = order_sensitivity_demo()
    gap = abs(first["online_total"] - second["online_total"])
    mu_gap = abs(first["final_mu"] - second["final_mu"])
    ok = gap > 1e-3 and mu_gap < 1e-12
    announce(8, ok, f"{first['sequence']} vs {second['sequence']}: total loss {first['online_total']:.6f} vs "
                    f"{second['online_total']:.6f} (gap {gap:.3f} > 1e-3), final mean gap {mu_gap:.1e} (< 1e-12)")
    assert ok
