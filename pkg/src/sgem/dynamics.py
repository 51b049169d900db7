"""Period linkage: capital accumulation and logit investment allocation.

By the end of each period the regional pool of savings (households,
government, foreign) is distributed over the region's sectors with a
discrete-choice rule: a sector's share is proportional to
``B * K * exp(theta * WKR)`` where WKR is the capital remuneration rate.
Capital then accumulates as ``K' = K (1 - delta) + I``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AllocationError, DomainError, EconomyState, ParameterSet
from .growth import GrowthShocks, apply_growth


@dataclass(frozen=True)
class DynamicsParams:
    """Depreciation, steady-state growth, adjustment speed, attractors."""

    delta: np.ndarray        # [I]
    growth_rate: np.ndarray  # [R]
    theta_inv: float
    attractor: np.ndarray    # [R, I]
    ratio_form: bool = False
    pooled: bool = False

    @classmethod
    def from_params(cls, params: ParameterSet) -> "DynamicsParams":
        return cls(
            delta=params.delta, growth_rate=params.growth_rate,
            theta_inv=params.theta_inv, attractor=params.attractor,
            ratio_form=params.wkr_ratio_form, pooled=params.pooled_investment,
        )


def capital_update(k_prev, delta, investment) -> np.ndarray:
    """K' = K (1 - delta) + I, elementwise."""
    k_prev = np.asarray(k_prev, dtype=float)
    delta = np.asarray(delta, dtype=float)
    inv = np.asarray(investment, dtype=float)
    if np.any(k_prev < 0) or np.any(inv < 0):
        raise DomainError("capital stocks and investment must be nonnegative")
    if np.any((delta < 0) | (delta > 1)):
        raise DomainError("depreciation must lie in [0, 1]")
    return k_prev * (1.0 - delta) + inv


def capital_remuneration(rent, inv_price, g, delta,
                         ratio_form: bool = False) -> np.ndarray:
    """WKR: real return scaled by growth-plus-depreciation.

    Default is the product form ``(r / PI) * (g + delta)``; the ratio form
    ``(r / PI) / (g + delta)`` is available behind a switch since the two
    readings differ only by a monotone transform.
    """
    rent = np.asarray(rent, dtype=float)
    pi = np.asarray(inv_price, dtype=float)
    if np.any(pi <= 0):
        raise DomainError("investment price index must be positive")
    real = rent / pi
    gd = np.asarray(g, dtype=float) + np.asarray(delta, dtype=float)
    if ratio_form:
        return real / gd
    return real * gd


def allocation_shares(b, k_prev, wkr, theta) -> np.ndarray:
    """Softmax-style sectoral shares, rows summing to one."""
    b = np.asarray(b, dtype=float)
    k = np.asarray(k_prev, dtype=float)
    wkr = np.asarray(wkr, dtype=float)
    # shift the exponent per row: shares are invariant and overflow-safe
    shift = np.max(theta * wkr, axis=-1, keepdims=True)
    weight = b * k * np.exp(theta * wkr - shift)
    denom = weight.sum(axis=-1, keepdims=True)
    if np.any(denom <= 0):
        row = int(np.argwhere(denom.ravel() <= 0)[0][0])
        raise AllocationError(
            f"investment allocation has an all-zero choice set in row {row}"
        )
    return weight / denom


def allocate_investment(savings, b, k_prev, wkr, theta) -> np.ndarray:
    """[R, I] investment values; rows exhaust the regional pool exactly."""
    savings = np.asarray(savings, dtype=float)
    if np.any(savings < 0):
        raise DomainError("savings pool must be nonnegative")
    shares = allocation_shares(b, k_prev, wkr, theta)
    return shares * savings[..., None]


def allocate_investment_pooled(total_savings, b, k_prev, wkr,
                               theta) -> np.ndarray:
    """Cross-region pool variant: one softmax over all (region, sector)."""
    flat = allocation_shares(
        b.reshape(1, -1), k_prev.reshape(1, -1), wkr.reshape(1, -1), theta
    )
    return (flat * float(total_savings)).reshape(b.shape)


def step_period(state: EconomyState, params: ParameterSet,
                shocks: GrowthShocks | None = None) -> EconomyState:
    """Initial state for period t+1 from a solved period t.

    Capital accumulates from the allocated savings pool, TFP / R&D / human
    capital step through the growth engine, and the solved prices carry
    over as the next period's warm-start guess.  Quantity fields keep their
    period-t values until the next solve overwrites them.
    """
    dyn = DynamicsParams.from_params(params)
    # return per unit of stock: service price times the service coefficient
    stock_return = state.rents * params.psi_capital
    wkr = capital_remuneration(
        stock_return, state.inv_price[:, None],
        dyn.growth_rate[:, None], dyn.delta[None, :], dyn.ratio_form,
    )
    if dyn.pooled:
        inv_value = allocate_investment_pooled(
            state.savings.sum(), dyn.attractor, state.capital, wkr,
            dyn.theta_inv,
        )
    else:
        inv_value = allocate_investment(
            state.savings, dyn.attractor, state.capital, wkr, dyn.theta_inv
        )
    inv_units = inv_value / state.inv_price[:, None]
    k_next = capital_update(state.capital, dyn.delta[None, :], inv_units)

    tfp_next, rd_next, h_next = apply_growth(
        state.tfp, state.tfp_prev, state.rd_intensity, state.human_capital,
        params, shocks,
    )
    # warm start: by zero profit, producer prices move with the inverse of
    # the TFP change to first order
    price_guess = state.prices * (state.tfp / tfp_next)
    return state.replace(
        year=state.year + 1,
        capital=k_next,
        tfp=tfp_next,
        tfp_prev=state.tfp,
        rd_intensity=rd_next,
        human_capital=h_next,
        prices=price_guess,
        trace=None,
    )
