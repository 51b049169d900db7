"""Two-level Armington sourcing with per-unit transport margins.

Level one splits each region's composite absorption between the domestic
variety and an import composite (elasticity sigma_i); level two allocates
the import composite across origin regions (elasticity 2 * sigma_i, the
GTAP convention).  Moving one unit of commodity i from origin s to
destination r requires ``margin_coef[s, r, i]`` units of the origin
region's transport commodity, so the delivered price is
``p_origin + margin_coef * p_transport(origin)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DomainError, ParameterSet, StructuralDataError
from .production import ces_price


@dataclass(frozen=True)
class TradeStructure:
    """Armington shares, elasticities and margin coefficients."""

    share_dom: np.ndarray     # [R, I] domestic value share
    share_imp: np.ndarray     # [R, I]
    share_origin: np.ndarray  # [S, R, I] delivered-value shares, 0 on diagonal
    sigma: np.ndarray         # [I] domestic vs import composite
    sigma_bilat: np.ndarray   # [I] across origins (= 2 sigma)
    margin_coef: np.ndarray   # [S, R, I] margin per unit of flow
    tradable: np.ndarray      # [R, I] bool
    transport_index: int

    @classmethod
    def from_params(cls, params: ParameterSet) -> "TradeStructure":
        return cls(
            share_dom=params.share_dom, share_imp=params.share_imp,
            share_origin=params.share_origin, sigma=params.sigma_arm,
            sigma_bilat=params.sigma_bilat, margin_coef=params.margin_coef,
            tradable=params.tradable,
            transport_index=params.dims.transport_index,
        )


def delivered_prices(ts: TradeStructure, origin_prices: np.ndarray) -> np.ndarray:
    """[S, R, I] origin supply price plus the margin on that link."""
    if np.any(origin_prices <= 0):
        raise DomainError("origin prices must be strictly positive")
    p_transport = origin_prices[:, ts.transport_index]
    return (
        origin_prices[:, None, :]
        + ts.margin_coef * p_transport[:, None, None]
    )


def import_price(ts: TradeStructure, delivered: np.ndarray) -> np.ndarray:
    """[R, I] CES price index of the import composite.

    The benchmark delivered price of a flow is ``1 + margin``, so prices
    enter relative to that reference and the index is one at benchmark.
    """
    return ces_price(
        ts.share_origin, delivered / (1.0 + ts.margin_coef),
        ts.sigma_bilat[None, None, :], axis=0,
    )


def origin_flow_shares(ts: TradeStructure, delivered: np.ndarray,
                       p_import: np.ndarray) -> np.ndarray:
    """[S, R, I] flow (origin-good units) per unit of import composite."""
    ref = 1.0 + ts.margin_coef
    sig = ts.sigma_bilat[None, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        shares = (ts.share_origin / ref) \
            * (p_import[None, :, :] * ref / delivered) ** sig
    return np.where(ts.share_origin > 0, shares, 0.0)


def composite_price(ts: TradeStructure, p_domestic: np.ndarray,
                    p_import: np.ndarray) -> np.ndarray:
    """[R, I] Armington composite price; domestic price for non-tradables."""
    theta = np.stack([ts.share_dom, ts.share_imp], axis=-1)
    p = np.stack([p_domestic, p_import], axis=-1)
    pa = ces_price(theta, p, ts.sigma[None, :, None], axis=-1)
    return np.where(ts.tradable, pa, p_domestic)


def armington_split(ts: TradeStructure, p_domestic, p_import,
                    total_absorption):
    """Cost-minimising (domestic demand, import demand) for the composite.

    Non-tradable goods take the all-domestic branch without error.
    """
    p_domestic = np.asarray(p_domestic, dtype=float)
    p_import = np.asarray(p_import, dtype=float)
    ad = np.asarray(total_absorption, dtype=float)
    if np.any(p_domestic <= 0) or np.any(p_import <= 0):
        raise DomainError("Armington prices must be strictly positive")
    if np.any(ad < 0):
        raise DomainError("absorption must be nonnegative")
    pa = composite_price(ts, p_domestic, p_import)
    sig = ts.sigma[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        dom = ts.share_dom * (pa / p_domestic) ** sig * ad
        imp = ts.share_imp * (pa / p_import) ** sig * ad
    dom = np.where(ts.tradable, np.where(ts.share_dom > 0, dom, 0.0), ad)
    imp = np.where(ts.tradable, np.where(ts.share_imp > 0, imp, 0.0), 0.0)
    return dom, imp


def bilateral_allocation(ts: TradeStructure, delivered: np.ndarray,
                         import_demand: np.ndarray) -> np.ndarray:
    """[S, R, I] flows that produce the import composite at least cost."""
    if np.any(delivered <= 0):
        raise DomainError("delivered prices must be strictly positive")
    imp = np.asarray(import_demand, dtype=float)
    no_source = (imp > 0) & ~(ts.share_origin.sum(axis=0) > 0)
    if np.any(no_source):
        r, i = np.argwhere(no_source)[0]
        raise StructuralDataError(
            f"positive import demand at destination {r}, commodity {i} "
            f"with no positive origin shares"
        )
    pm = import_price(ts, delivered)
    return origin_flow_shares(ts, delivered, pm) * imp[None, :, :]


def bilateral_aggregate(ts: TradeStructure, flows: np.ndarray) -> np.ndarray:
    """[R, I] import composite produced by given flows (primal CES)."""
    ref = 1.0 + ts.margin_coef
    rho = ((ts.sigma_bilat - 1.0) / ts.sigma_bilat)[None, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(
            ts.share_origin > 0,
            ts.share_origin
            * (flows * ref / np.where(ts.share_origin > 0, ts.share_origin, 1.0))
            ** rho,
            0.0,
        )
        agg = terms.sum(axis=0) ** (1.0 / rho[0])
    return np.where(ts.share_origin.sum(axis=0) > 0, agg, 0.0)


def margin_demand(ts: TradeStructure, flows: np.ndarray) -> np.ndarray:
    """[S] transport-commodity demand accruing to each origin region."""
    if np.any(np.asarray(flows) < 0):
        raise DomainError("flows must be nonnegative")
    return (ts.margin_coef * flows).sum(axis=(1, 2))
