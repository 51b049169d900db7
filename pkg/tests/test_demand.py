import numpy as np
import pytest

from sgem.core import DomainError, InfeasibleDemandError
from sgem.demand import (
    government_accounts,
    household_budget,
    household_disposable_income,
    les_demand,
)


class TestLesDemand:
    def test_cobb_douglas_case(self):
        c = les_demand(np.zeros(2), np.array([0.6, 0.4]), np.ones(2), 100.0)
        assert np.allclose(c, [60.0, 40.0], rtol=0, atol=1e-12)

    def test_subsistence_case(self):
        c = les_demand(np.array([10.0, 5.0]), np.array([0.5, 0.5]),
                       np.ones(2), 100.0)
        assert np.allclose(c, [52.5, 47.5], rtol=0, atol=1e-12)

    def test_homogeneity_degree_zero(self):
        mu = np.array([3.0, 7.0])
        gamma = np.array([0.3, 0.7])
        p = np.array([1.2, 0.8])
        c1 = les_demand(mu, gamma, p, 50.0)
        c2 = les_demand(mu, gamma, 2.0 * p, 100.0)
        assert np.allclose(c1, c2, rtol=1e-14)

    def test_adding_up_thousand_random(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            n = rng.integers(2, 8)
            gamma = rng.dirichlet(np.ones(n))
            p = rng.uniform(0.2, 5.0, n)
            mu = rng.uniform(0.0, 2.0, n)
            income = (mu * p).sum() + rng.uniform(0.5, 100.0)
            c = les_demand(mu, gamma, p, income)
            assert abs((p * c).sum() - income) <= 1e-12 * max(income, 1.0)
            assert np.all(c >= mu - 1e-14)

    def test_infeasible_income_raises(self):
        with pytest.raises(InfeasibleDemandError):
            les_demand(np.array([10.0, 10.0]), np.array([0.5, 0.5]),
                       np.ones(2), 5.0)

    def test_nonpositive_price_rejected(self):
        with pytest.raises(DomainError):
            les_demand(np.zeros(2), np.array([0.5, 0.5]),
                       np.array([1.0, 0.0]), 10.0)

    def test_engel_limit(self):
        mu = np.array([5.0, 2.0, 1.0])
        gamma = np.array([0.2, 0.5, 0.3])
        p = np.array([1.0, 2.0, 0.5])
        income = 1e6 * ((mu * p).sum() + 1.0)
        c = les_demand(mu, gamma, p, income)
        shares = p * c / income
        assert np.allclose(shares, gamma, atol=1e-4)

    def test_weakly_increasing_in_income(self):
        mu = np.array([1.0, 2.0])
        gamma = np.array([0.7, 0.3])
        p = np.array([1.0, 1.5])
        lo = les_demand(mu, gamma, p, 10.0)
        hi = les_demand(mu, gamma, p, 20.0)
        assert np.all(hi >= lo - 1e-14)

    def test_vectorised_over_regions(self):
        mu = np.array([[1.0, 2.0], [0.0, 0.0]])
        gamma = np.array([[0.5, 0.5], [0.25, 0.75]])
        p = np.ones((2, 2))
        c = les_demand(mu, gamma, p, np.array([10.0, 8.0]))
        assert c.shape == (2, 2)
        assert np.allclose((p * c).sum(axis=1), [10.0, 8.0], atol=1e-12)


class TestHouseholdAccounts:
    def test_stated_arithmetic(self):
        assert household_disposable_income(70 + 30, 10, 15, 20) == 75.0

    def test_zero_wedges_returns_factor_income(self):
        assert household_disposable_income(100.0, 0.0, 0.0, 0.0) == 100.0

    def test_benchmark_budget_matches_consumption_spend(self, model22, toy22):
        p = model22.params
        fy = toy22.factor_income()
        tax, sav, budget = household_budget(p, fy, toy22.transfers)
        spend = toy22.consumption.sum(axis=1) + toy22.cons_tax.sum(axis=1)
        assert np.allclose(tax, toy22.income_tax, rtol=1e-12)
        assert np.allclose(sav, toy22.hh_savings, rtol=1e-12)
        assert np.allclose(budget, spend, rtol=1e-12)


class TestAgentAccounts:
    def test_benchmark_snapshot_matches_data(self, model22, toy22):
        from sgem.demand import agent_accounts
        from sgem.equilibrium import benchmark_state

        acc = agent_accounts(benchmark_state(model22), model22.params)
        assert np.allclose(acc.factor_income, toy22.factor_income(),
                           rtol=1e-12)
        assert np.allclose(acc.income_tax, toy22.income_tax, rtol=1e-12)
        assert np.allclose(acc.hh_savings, toy22.hh_savings, rtol=1e-12)
        assert np.allclose(acc.prod_tax, toy22.prod_tax.sum(axis=1),
                           rtol=1e-12)
        assert np.allclose(acc.revenue, (toy22.prod_tax.sum(axis=1)
                                         + toy22.cons_tax.sum(axis=1)
                                         + toy22.income_tax), rtol=1e-12)
        spend = toy22.consumption.sum(axis=1) + toy22.cons_tax.sum(axis=1)
        assert np.allclose(acc.disposable_income, spend, rtol=1e-12)


class TestGovernmentAccounts:
    def test_benchmark_budget(self, model22, toy22):
        p = model22.params
        revenue = (toy22.prod_tax.sum(axis=1) + toy22.cons_tax.sum(axis=1)
                   + toy22.income_tax)
        budget, savings = government_accounts(p, revenue, toy22.transfers,
                                              "exogenous")
        assert np.allclose(budget, toy22.government.sum(axis=1), rtol=1e-12)
        assert np.allclose(savings, toy22.gov_savings, rtol=1e-12)

    def test_production_tax_rate_increase_raises_revenue_exactly(
            self, model22, toy22):
        # at benchmark prices and activity, +10% on the rates adds exactly
        # tax-base x rate-delta to revenue
        p = model22.params
        base = (p.tau_prod * toy22.output).sum(axis=1)
        raised = (1.1 * p.tau_prod * toy22.output).sum(axis=1)
        assert np.allclose(raised - base, 0.1 * toy22.prod_tax.sum(axis=1),
                           rtol=1e-12)

    def test_endogenous_savings_absorbs_revenue_delta(self, model22, toy22):
        p = model22.params
        revenue = (toy22.prod_tax.sum(axis=1) + toy22.cons_tax.sum(axis=1)
                   + toy22.income_tax)
        prices = np.ones_like(toy22.government)
        b0, s0 = government_accounts(
            p, revenue, toy22.transfers, "endogenous",
            fixed_purchases=toy22.government, composite_prices=prices,
        )
        b1, s1 = government_accounts(
            p, revenue + 5.0, toy22.transfers, "endogenous",
            fixed_purchases=toy22.government, composite_prices=prices,
        )
        assert np.allclose(b1, b0, rtol=1e-14)
        assert np.allclose(s1 - s0, 5.0, rtol=1e-12)

    def test_unknown_mode_rejected(self, model22, toy22):
        with pytest.raises(DomainError):
            government_accounts(model22.params, toy22.income_tax,
                                toy22.transfers, "nope")
