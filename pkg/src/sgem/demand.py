"""Household and government demand: the linear expenditure system.

Both agents maximise Stone-Geary utility, so demand is a subsistence bundle
plus a fixed marginal budget share of supernumerary income:

    C_i = mu_i + gamma_i / P_i * (B - sum_j mu_j P_j)

Adding-up (sum P*C = B) holds exactly for every evaluation.  Households
save a fixed benchmark-calibrated fraction of gross disposable income;
government savings are either a fixed share of revenue (exogenous mode) or
the residual of a fixed real purchase bundle (endogenous mode).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DomainError, InfeasibleDemandError, ParameterSet


def les_demand(mu, gamma, prices, spendable_income):
    """Consumption vector(s) of the linear expenditure system.

    Works on 1-D vectors or on [R, I] stacks with ``spendable_income`` of
    shape [R].  Raises :class:`InfeasibleDemandError` when income cannot
    cover the subsistence bundle (reported, never clamped).
    """
    mu = np.asarray(mu, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    prices = np.asarray(prices, dtype=float)
    income = np.asarray(spendable_income, dtype=float)
    if np.any(prices <= 0):
        raise DomainError("LES prices must be strictly positive")
    committed = (mu * prices).sum(axis=-1)
    supernumerary = income - committed
    if np.any(supernumerary < -1e-12 * np.maximum(np.abs(income), 1.0)):
        bad = np.atleast_1d(supernumerary).min()
        raise InfeasibleDemandError(
            f"spendable income below subsistence cost by {-bad:.6g}"
        )
    return mu + gamma * np.expand_dims(supernumerary, -1) / prices


@dataclass(frozen=True)
class AgentAccounts:
    """Per-region income flows of one period."""

    factor_income: np.ndarray      # [R] wages + capital rents
    transfers: np.ndarray          # [R] government -> households
    income_tax: np.ndarray         # [R]
    hh_savings: np.ndarray         # [R]
    prod_tax: np.ndarray           # [R]
    cons_tax: np.ndarray           # [R]
    gov_savings: np.ndarray        # [R]

    @property
    def revenue(self) -> np.ndarray:
        return self.prod_tax + self.cons_tax + self.income_tax

    @property
    def disposable_income(self) -> np.ndarray:
        return household_disposable_income(
            self.factor_income, self.transfers, self.income_tax,
            self.hh_savings,
        )


def agent_accounts(state, params: ParameterSet) -> AgentAccounts:
    """Income-flow snapshot of a (solved) economy state."""
    services = params.psi_capital * state.capital
    factor_income = (state.wages * params.labour_supply).sum(axis=1) \
        + (state.rents * services).sum(axis=1)
    transfers = params.transfers0 * state.cpi
    income_tax, hh_savings, _ = household_budget(params, factor_income,
                                                 transfers)
    prod_tax = (params.tau_prod * state.prices * state.activity).sum(axis=1)
    cons_tax = (params.tau_cons * state.composite_prices
                * state.consumption).sum(axis=1)
    gov_savings = params.save_share_g * (prod_tax + cons_tax + income_tax)
    return AgentAccounts(
        factor_income=factor_income, transfers=transfers,
        income_tax=income_tax, hh_savings=hh_savings, prod_tax=prod_tax,
        cons_tax=cons_tax, gov_savings=gov_savings,
    )


def household_disposable_income(factor_income, transfers, income_tax,
                                savings=0.0):
    """Spendable income: wages + rents + transfers - taxes - savings."""
    out = (
        np.asarray(factor_income, dtype=float)
        + np.asarray(transfers, dtype=float)
        - np.asarray(income_tax, dtype=float)
        - np.asarray(savings, dtype=float)
    )
    if np.any(~np.isfinite(out)):
        raise DomainError("household income components must be finite")
    return out


def household_budget(params: ParameterSet, factor_income, transfers):
    """(income tax, savings, spendable consumption budget) per region."""
    gross = np.asarray(factor_income, dtype=float) + np.asarray(
        transfers, dtype=float
    )
    income_tax = params.tau_inc * gross
    disposable = gross - income_tax
    savings = params.save_rate_h * disposable
    return income_tax, savings, disposable - savings


def government_accounts(params: ParameterSet, revenue, transfers,
                        mode: str = "exogenous", fixed_purchases=None,
                        composite_prices=None, grants=None):
    """Government consumption budget and savings under the chosen closure.

    Exogenous mode: savings are the benchmark share of revenue and the
    purchase budget is the residual.  Endogenous mode: the benchmark real
    purchase bundle is bought and savings absorb any revenue change.
    ``grants`` are net exogenous budget injections (scenario shocks).
    """
    revenue = np.asarray(revenue, dtype=float)
    transfers = np.asarray(transfers, dtype=float)
    extra = 0.0 if grants is None else np.asarray(grants, dtype=float)
    if mode == "exogenous":
        savings = params.save_share_g * revenue
        budget = revenue - transfers - savings + extra
    elif mode == "endogenous":
        if fixed_purchases is None or composite_prices is None:
            raise DomainError(
                "endogenous savings closure needs the fixed purchase bundle"
            )
        budget = (fixed_purchases * composite_prices).sum(axis=-1)
        savings = revenue - transfers - budget + extra
    else:
        raise DomainError(f"unknown government savings mode {mode!r}")
    return budget, savings
