import numpy as np
import pytest

from sgem.core import AllocationError, DomainError
from sgem.dynamics import (
    allocate_investment,
    allocate_investment_pooled,
    allocation_shares,
    capital_remuneration,
    capital_update,
    step_period,
)
from sgem.equilibrium import benchmark_state, solve_period


class TestCapitalUpdate:
    def test_direct_arithmetic(self):
        assert capital_update(100.0, 0.05, 10.0) == pytest.approx(105.0)

    def test_replacement_investment_keeps_capital(self):
        k = np.array([80.0, 120.0])
        delta = np.array([0.04, 0.08])
        assert np.allclose(capital_update(k, delta, delta * k), k,
                           rtol=1e-14)

    def test_full_depreciation(self):
        assert capital_update(50.0, 1.0, 0.0) == 0.0

    def test_domain_checks(self):
        with pytest.raises(DomainError):
            capital_update(-1.0, 0.05, 0.0)
        with pytest.raises(DomainError):
            capital_update(1.0, 1.5, 0.0)
        with pytest.raises(DomainError):
            capital_update(1.0, 0.5, -2.0)


class TestCapitalRemuneration:
    def test_product_form_arithmetic(self):
        assert capital_remuneration(0.1, 1.0, 0.02, 0.05) == \
            pytest.approx(0.007, abs=1e-15)

    def test_zero_rent(self):
        assert capital_remuneration(0.0, 2.0, 0.02, 0.05) == 0.0

    def test_real_rate_homogeneity(self):
        a = capital_remuneration(0.1, 1.0, 0.02, 0.05)
        b = capital_remuneration(0.2, 2.0, 0.02, 0.05)
        assert a == pytest.approx(b, rel=1e-15)

    def test_ratio_form_switch(self):
        assert capital_remuneration(0.1, 1.0, 0.02, 0.05, ratio_form=True) \
            == pytest.approx(0.1 / 0.07, rel=1e-14)

    def test_nonpositive_price_index_rejected(self):
        with pytest.raises(DomainError):
            capital_remuneration(0.1, 0.0, 0.02, 0.05)


class TestAllocateInvestment:
    def test_symmetric_choice_set(self):
        inv = allocate_investment(np.array([100.0]), np.ones((1, 2)),
                                  np.ones((1, 2)), np.full((1, 2), 0.07),
                                  2.0)
        assert np.allclose(inv, [[50.0, 50.0]], rtol=1e-14)

    def test_theta_zero_shares_proportional_to_bk(self):
        b = np.array([[2.0, 1.0]])
        k = np.array([[1.0, 2.0]])
        wkr = np.array([[0.9, 0.1]])
        inv = allocate_investment(np.array([60.0]), b, k, wkr, 0.0)
        assert np.allclose(inv, [[30.0, 30.0]], rtol=1e-14)

    def test_softmax_example_four_significant_figures(self):
        inv = allocate_investment(
            np.array([100.0]), np.ones((1, 2)), np.ones((1, 2)),
            np.array([[0.10, 0.05]]), 2.0,
        )
        assert np.round(inv[0, 0], 2) == 52.50
        assert np.round(inv[0, 1], 2) == 47.50

    def test_savings_exhaustion_exact(self):
        rng = np.random.default_rng(0)
        s = rng.uniform(10, 100, size=4)
        b = rng.uniform(0.5, 2.0, size=(4, 6))
        k = rng.uniform(10, 200, size=(4, 6))
        wkr = rng.uniform(0.0, 0.2, size=(4, 6))
        inv = allocate_investment(s, b, k, wkr, 1.7)
        assert np.allclose(inv.sum(axis=1), s, rtol=0, atol=1e-12 * s.max())

    def test_shift_invariance_of_shares(self):
        b = np.array([[1.0, 2.0, 3.0]])
        k = np.array([[5.0, 1.0, 2.0]])
        wkr = np.array([[0.1, 0.3, 0.2]])
        s1 = allocation_shares(b, k, wkr, 1.5)
        s2 = allocation_shares(b, k, wkr + 17.0, 1.5)
        assert np.allclose(s1, s2, rtol=1e-12)

    def test_empty_choice_set_raises(self):
        with pytest.raises(AllocationError):
            allocate_investment(np.array([10.0]), np.zeros((1, 2)),
                                np.ones((1, 2)), np.zeros((1, 2)), 1.0)

    def test_negative_pool_rejected(self):
        with pytest.raises(DomainError):
            allocate_investment(np.array([-1.0]), np.ones((1, 2)),
                                np.ones((1, 2)), np.zeros((1, 2)), 1.0)

    def test_pooled_mode_spans_regions(self):
        b = np.ones((2, 2))
        k = np.ones((2, 2))
        wkr = np.zeros((2, 2))
        inv = allocate_investment_pooled(80.0, b, k, wkr, 1.0)
        assert inv.shape == (2, 2)
        assert np.allclose(inv, 20.0, rtol=1e-14)
        assert np.isclose(inv.sum(), 80.0, rtol=1e-14)


class TestStepPeriod:
    def test_stationary_toy_is_a_fixed_point(self, stationary_model22):
        model = stationary_model22
        s0 = solve_period(benchmark_state(model), model.params)
        s1 = solve_period(step_period(s0, model.params), model.params)
        assert s1.year == s0.year + 1
        assert np.allclose(s1.capital, s0.capital, rtol=1e-9)
        assert np.allclose(s1.prices, s0.prices, rtol=1e-7)
        assert np.allclose(s1.activity, s0.activity, rtol=1e-7)
        assert np.allclose(s1.gdp_real, s0.gdp_real, rtol=1e-7)

    def test_zero_depreciation_zero_savings_keeps_capital(self):
        k = capital_update(np.array([5.0, 7.0]), 0.0, np.zeros(2))
        assert np.array_equal(k, [5.0, 7.0])

    def test_transient_tfp_shock_capital_returns_monotonically(
            self, stationary_model22):
        """One-period productivity shock, then removal: the extra capital
        decays back toward the baseline path."""
        model = stationary_model22
        base = [solve_period(benchmark_state(model), model.params)]
        for _ in range(8):
            base.append(solve_period(step_period(base[-1], model.params),
                                     model.params))

        shock = [base[0]]
        for t in range(8):
            guess = step_period(shock[-1], model.params)
            if t == 0:   # productivity up for one period only
                guess = guess.replace(tfp=guess.tfp * 1.2)
            elif t == 1:  # removal: back to the stationary level
                guess = guess.replace(tfp=base[0].tfp)
            shock.append(solve_period(guess, model.params))

        gaps = [np.abs(shock[t].capital - base[t].capital).max()
                for t in range(2, 9)]
        assert gaps[0] > 1e-3
        assert all(gaps[i + 1] < gaps[i] for i in range(len(gaps) - 1))

    def test_warm_start_prices_scale_with_tfp(self, stationary_model22):
        model = stationary_model22
        s0 = solve_period(benchmark_state(model), model.params)
        nxt = step_period(s0, model.params)
        assert np.allclose(nxt.prices, s0.prices, rtol=1e-12)
        assert np.array_equal(nxt.tfp_prev, s0.tfp)

    @pytest.mark.parametrize("mode", ["pooled", "ratio"])
    def test_alternative_dynamics_modes_replicate_benchmark(self, mode):
        """Both the cross-region pool and the ratio-form remuneration rate
        recalibrate the attractors so the benchmark allocation still
        replicates exactly."""
        from sgem.calibration import CalibrationConfig, calibrate
        from sgem.toydata import make_toy, stationary_growth_tables

        cfg = CalibrationConfig(
            pooled_investment=(mode == "pooled"),
            wkr_ratio_form=(mode == "ratio"),
        )
        data = make_toy(42, 2, 2, tfp_spread=0.0)
        model = calibrate(data, cfg,
                          growth_coefs=stationary_growth_tables())
        s0 = solve_period(benchmark_state(model), model.params)
        s1 = solve_period(step_period(s0, model.params), model.params)
        assert np.allclose(s1.capital, data.k0, rtol=1e-9)
        assert np.allclose(s1.gdp_real, s0.gdp_real, rtol=1e-7)
