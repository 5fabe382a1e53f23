"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line (shown in the terminal summary) and
then asserts, so a failing criterion is reported rather than hidden.
"""

import itertools

import numpy as np
import pytest
from scipy import integrate

from conftest import SERVICES_FIT, record_acceptance
from oracles import barriers
from refprice.bidder import BidderModelParams, moments, regime_density, regime_moments, sample_bids
from refprice.coalition import (coalition_bid, custom_plan, median_coalition_plan,
                                simulate_median_coalition, steal_probabilities)
from refprice.dynamics import (NoiseSpec, best_response_step, closed_form_trajectory,
                               cost_fixed_point, iterate_best_response, reference_prices,
                               simulate_stochastic, stationary_law)
from refprice.estimation import Method, confidence_interval, estimate_q, fit
from refprice.game import (AwardRule, GameConfig, Schedule, barrier_sequences, contraction_ratio,
                           eliminate, fix_iter, profitable_deviations)

REL10 = GameConfig.normalized(num_players=10)
REL = GameConfig.normalized()


def check(number, ok, detail):
    record_acceptance(number, bool(ok), detail)
    assert ok, detail


def test_criterion_01_designated_bids():
    expected = [-0.01188, 0.00145, 0.01478, 0.02811, 0.04143]
    got = [coalition_bid(REL10, SERVICES_FIT, size) for size in range(2, 7)]
    err = max(abs(a - b) for a, b in zip(got, expected))
    check(1, err <= 5e-5, f"x* max error {err:.2e} (tol 5e-5): {np.round(got, 6).tolist()}")


def test_criterion_02_steal_probabilities():
    single = [0.25734, 0.07229, 0.03634, 0.02268, 0.01871]
    anyone = [0.94892, 0.52782, 0.30935, 0.20500, 0.17209]
    risks = [steal_probabilities(REL10, SERVICES_FIT, size) for size in range(2, 7)]
    err_single = max(abs(r.p_single - v) for r, v in zip(risks, single))
    err_any = max(abs(r.p_any_field - v) for r, v in zip(risks, anyone))
    check(2, err_single <= 1e-3 and err_any <= 1e-3,
          f"p_single max error {err_single:.4f}, p_any max error {err_any:.4f} (tol 1e-3); "
          f"got p_single {np.round([r.p_single for r in risks], 5).tolist()}")


def test_criterion_03_deterministic_dynamics():
    rng = np.random.default_rng(3)
    worst_rate = 0.0
    for n in (2, 5, 10):
        g = GameConfig.from_percent(100.0, n)
        x = rng.uniform(g.lower, g.upper, n)
        p0 = reference_prices(g, x)[0]
        for step in range(31):
            p = reference_prices(g, x)[0]
            worst_rate = max(worst_rate,
                             abs(abs(p - 100) - contraction_ratio(n) ** step * abs(p0 - 100)))
            x = best_response_step(g, x)
    worst_path = 0.0
    for n in range(2, 21):
        g = GameConfig.from_percent(100.0, n)
        x0 = rng.uniform(g.lower, g.upper, n)
        x = x0.copy()
        for step in range(51):
            worst_path = max(worst_path,
                             np.max(np.abs(closed_form_trajectory(g, x0, step) - x)))
            x = best_response_step(g, x)
    check(3, worst_rate <= 1e-12 and worst_path <= 1e-10,
          f"price-rate gap {worst_rate:.1e} (tol 1e-12), closed form vs iteration "
          f"{worst_path:.1e} (tol 1e-10)")


def test_criterion_04_cost_fixed_point():
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 13))
        e = float(rng.uniform(50, 5000))
        g = GameConfig.from_percent(e, n, contract_kind=rng.choice(["works", "supplies_services"]))
        costs = rng.uniform(0.6 * e, 1.3 * e, n)
        x, _ = iterate_best_response(g, rng.uniform(g.lower, g.upper, n), costs)
        worst = max(worst, np.max(np.abs(x - cost_fixed_point(g, costs))))
    check(4, worst <= 1e-10, f"max gap to closed-form fixed point {worst:.1e} over 100 instances")


def test_criterion_05_density_normalization():
    worst = 0.0
    for p in (0.1, 0.3, 0.5, 0.7, 0.9):
        for regime in ("lower", "upper"):
            lo, hi = (REL.lower, 0.0) if regime == "lower" else (0.0, REL.upper)
            total, _ = integrate.quad(lambda y: float(regime_density(REL, y, p, regime)), lo, hi,
                                      points=barriers(REL, regime, 45)[1:], limit=400,
                                      epsabs=1e-12)
            worst = max(worst, abs(total - 1))
    check(5, worst <= 1e-6, f"max |integral - 1| = {worst:.1e} (tol 1e-6), p=0.5 included")


def test_criterion_06_moment_fidelity():
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(5):
        params = BidderModelParams(rng.uniform(0.05, 0.5), rng.uniform(0.1, 0.9),
                                   rng.uniform(0.1, 0.9))
        y = sample_bids(params, REL, 1_000_000, rng)
        mean, var = moments(params, REL)
        m4 = np.mean((y - y.mean()) ** 4)
        z_mean = abs(y.mean() - mean) / np.sqrt(var / y.size)
        z_var = abs(y.var(ddof=1) - var) / np.sqrt((m4 - var ** 2) / y.size)
        worst = max(worst, z_mean, z_var)
    m_lo, v_lo = regime_moments(REL, 1.0, "lower")
    exact = m_lo == (REL.estimate + REL.lower) / 2 and v_lo == (REL.estimate - REL.lower) ** 2 / 12
    check(6, worst <= 3 and exact,
          f"largest Monte Carlo z-score {worst:.2f} (tol 3), uniform limits exact: {exact}")


def test_criterion_07_estimator_round_trip():
    truth = (0.10, 0.25, 0.35)
    y = sample_bids(BidderModelParams(*truth), REL, 100_000, seed=7)
    mle = fit(y, REL, Method.MLE)
    mom = fit(y, REL, Method.MOMENTS)
    errs = [abs(r.q_hat - truth[0]) for r in (mle, mom)]
    errs += [abs(r.p_hat_plus - truth[1]) for r in (mle, mom)]
    errs += [abs(r.p_hat_minus - truth[2]) for r in (mle, mom)]
    better = mle.loglik_plus >= mom.loglik_plus and mle.loglik_minus >= mom.loglik_minus
    check(7, max(errs) <= 0.02 and better,
          f"max error {max(errs):.4f} (tol 0.02); MLE ({mle.p_hat_plus:.4f}, "
          f"{mle.p_hat_minus:.4f}), moments ({mom.p_hat_plus:.4f}, {mom.p_hat_minus:.4f}); "
          f"MLE log-likelihood not below moments: {better}")


def test_criterion_08_ci_coverage():
    rng = np.random.default_rng(8)
    rates = {}
    for regime in ("lower", "upper"):
        hits = 0
        for _ in range(500):
            params = BidderModelParams(1.0 if regime == "upper" else 0.0, 0.35, 0.35)
            y = sample_bids(params, REL, 200, rng)
            lo, hi = confidence_interval(y, REL, regime, alpha=0.01)
            hits += lo <= 0.35 <= hi
        rates[regime] = hits / 500
    check(8, min(rates.values()) >= 0.97, f"99% interval coverage {rates} (need >= 0.97)")


def test_criterion_09_stationary_law():
    n = 4
    g = GameConfig.from_percent(100.0, n)
    noise = NoiseSpec([0.5, 1.0, 1.5, 2.0], [1.0, 2.0, 0.5, 1.5])
    law = stationary_law(g, noise)
    path = simulate_stochastic(g, np.full(n, 100.0), noise, 101_000, seed=9)
    prices = reference_prices(g, path)[1001:]
    rho = contraction_ratio(n)
    se = np.sqrt(law.price_variance * (1 + rho) / (1 - rho) / prices.size)
    z = abs(prices.mean() - law.price_mean) / se
    rel = abs(prices.var(ddof=1) / law.price_variance - 1)
    sample74 = np.concatenate([np.linspace(0.01, 0.15, 8), np.linspace(-0.24, -0.001, 66)])
    q74 = estimate_q(sample74)
    check(9, z <= 3 and rel <= 0.05 and q74 == 8 / 74,
          f"price mean z={z:.2f} (tol 3), variance rel. error {rel:.3f} (tol 0.05); "
          f"derived variance {law.price_variance:.5f} vs unscaled {law.unscaled_price_variance:.5f}; "
          f"q from reconstructed 74-bid sample {q74:.5f}")


def test_criterion_10_no_nash_witness():
    total = 0
    failures = 0
    for n in (2, 3):
        g = GameConfig.normalized(num_players=n)
        grid = np.linspace(g.lower, g.upper, 101)
        # winning replies depend only on the multiset of the other bids
        for others in itertools.combinations_with_replacement(grid, n - 1):
            total += 1
            failures += profitable_deviations(g, others, grid).size == 0
    check(10, failures == 0,
          f"{total} opponent profiles checked, {failures} without a winning deviation")


def test_criterion_11_median_manipulation():
    rates, sub = {}, {}
    for n in (3, 5, 7, 10):
        g = GameConfig.normalized(num_players=n, rule=AwardRule.MEDIAN)
        plan = median_coalition_plan(g)
        rates[n] = simulate_median_coalition(g, 10_000, seed=n, plan=plan)
        sub[n] = simulate_median_coalition(g, 10_000, seed=n,
                                           plan=custom_plan(g, plan.size - 1))
    ok = all(r == 1.0 for r in rates.values()) and all(r < 1.0 for r in sub.values())
    check(11, ok, f"plan win rates {rates}; one member short {sub}")


def test_criterion_12_elimination_schedules():
    ok = True
    for n in (2, 5, 10):
        g = GameConfig.normalized(num_players=n)
        for step in range(1, 41):
            a_n, b_n = barrier_sequences(g, step)
            ok &= a_n < fix_iter(g, g.lower, step) <= fix_iter(g, g.upper, step) < b_n
        for sched in Schedule:
            widths = [iv.width for iv in eliminate(g, 40, sched)]
            ok &= all(b < a for a, b in zip(widths, widths[1:])) and widths[-1] < 1e-9
    check(12, ok, "interleaving for n <= 40, N in {2, 5, 10}; widths strictly shrinking to 0")
