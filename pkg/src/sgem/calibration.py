"""Calibration: make the benchmark an exact equilibrium at unit prices.

Share parameters are benchmark value shares within each nest (calibrated-
share convention: shares sum to one and the scale is absorbed by the
reference point), LES coefficients come from the Frisch-parameter closure,
Armington shares reproduce the benchmark sourcing pattern, and investment
attractors invert the logit allocation rule at the benchmark.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    BenchmarkDataset,
    CalibrationError,
    Dimensions,
    ParameterSet,
    validate_benchmark,
)

DEFAULT_SIGMAS = {
    "m_kle": 0.3,
    "e_kl": 0.4,
    "k_l": 0.8,
    "elec": 1.5,
    "skill": 1.2,
    "armington": 2.0,
}


@dataclass(frozen=True)
class CalibrationConfig:
    """Elasticities and demand-system closure constants.

    ``sigma_overrides`` maps ``(nest, sector)`` to a per-sector elasticity;
    nests are the keys of :data:`DEFAULT_SIGMAS`.  ``frisch`` pins the LES
    subsistence scale: supernumerary income is ``(1 + 1/frisch)`` of the
    budget, so ``frisch -> -inf`` collapses the LES to Cobb-Douglas.
    """

    sigmas: dict = field(default_factory=lambda: dict(DEFAULT_SIGMAS))
    sigma_overrides: dict = field(default_factory=dict)
    frisch: float = -2.0
    income_elasticities: dict = field(default_factory=dict)  # sector -> eta
    subsistence_cap: float = 0.8
    delta: float = 0.05          # default depreciation, per sector override
    delta_overrides: dict = field(default_factory=dict)
    growth_rate: float = 0.0     # steady-state growth g_r, per region override
    growth_overrides: dict = field(default_factory=dict)
    theta_inv: float = 1.0
    wkr_ratio_form: bool = False
    pooled_investment: bool = False

    def __post_init__(self):
        for name, val in {**DEFAULT_SIGMAS, **self.sigmas}.items():
            if val <= 0:
                raise CalibrationError(f"sigma {name} must be positive")
        if self.frisch >= -1.0:
            raise CalibrationError("frisch parameter must be below -1")
        if not 0.0 < self.subsistence_cap < 1.0:
            raise CalibrationError("subsistence cap must lie in (0, 1)")

    def sigma_vector(self, nest: str, dims: Dimensions) -> np.ndarray:
        base = self.sigmas.get(nest, DEFAULT_SIGMAS[nest])
        out = np.full(dims.n_sectors, float(base))
        for (n, sector), val in self.sigma_overrides.items():
            if n == nest:
                out[dims.sector_index(sector)] = float(val)
        return out

    def eta_vector(self, dims: Dimensions) -> np.ndarray:
        out = np.ones(dims.n_sectors)
        for sector, val in self.income_elasticities.items():
            out[dims.sector_index(sector)] = float(val)
        return out


@dataclass(frozen=True)
class LesCalibration:
    mu: np.ndarray
    gamma: np.ndarray
    clamped: tuple        # (region, sector) pairs where mu was clamped


@dataclass(frozen=True)
class CalibratedModel:
    """Benchmark data plus the full parameter set it implies."""

    dims: Dimensions
    data: BenchmarkDataset
    params: ParameterSet
    warnings: tuple = ()


def _value_shares(values: np.ndarray, axis: int = -1) -> np.ndarray:
    total = values.sum(axis=axis, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        shares = np.where(total > 0, values / np.where(total > 0, total, 1.0),
                          0.0)
    return shares


def calibrate_ces_nests(data: BenchmarkDataset, cfg: CalibrationConfig):
    """Nest share parameters from benchmark value shares.

    Raises when a nest value is zero while its parent demands it -- that
    can only happen with an ill-formed dataset (zero total inputs but
    positive output).
    """
    dims = data.dims
    materials = data.io_use.sum(axis=2)
    energy = data.energy_elec + data.energy_nelec
    labour = data.wage_bill.sum(axis=2)
    kl = data.capital_rent + labour
    kle = energy + kl
    total_inputs = materials + kle

    zero_nest = (total_inputs <= 0) & (data.output > 0)
    if np.any(zero_nest):
        r, i = np.argwhere(zero_nest)[0]
        raise CalibrationError(
            f"sector [{dims.regions[r]}, {dims.sectors[i]}] produces output "
            f"with zero total inputs (top nest empty)"
        )

    def pair_share(top: np.ndarray, parent: np.ndarray, name: str):
        bad = (parent <= 0) & (top > 0)
        if np.any(bad):
            r, i = np.argwhere(bad)[0]
            raise CalibrationError(
                f"nest {name} at [{dims.regions[r]}, {dims.sectors[i]}] "
                f"inconsistent: branch value without parent value"
            )
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(parent > 0, top / np.where(parent > 0, parent, 1.0),
                            0.0)

    share_m = pair_share(materials, total_inputs, "M|KLE")
    share_e = pair_share(energy, kle, "E|KL")
    share_k = pair_share(data.capital_rent, kl, "K|L")
    share_nelec = pair_share(data.energy_nelec, energy, "NELEC|ELEC")
    share_skill = _value_shares(data.wage_bill, axis=2)

    with np.errstate(invalid="ignore", divide="ignore"):
        mat_coef = np.where(
            materials[:, :, None] > 0,
            data.io_use / np.where(materials[:, :, None] > 0,
                                   materials[:, :, None], 1.0),
            0.0,
        )
    input_scale = np.where(data.output > 0, total_inputs / data.output, 1.0)
    return {
        "share_m": share_m, "share_e": share_e, "share_k": share_k,
        "share_nelec": share_nelec, "share_skill": share_skill,
        "mat_coef": mat_coef, "input_scale": input_scale,
    }


def calibrate_les(consumption0: np.ndarray, cfg: CalibrationConfig,
                  dims: Dimensions) -> LesCalibration:
    """Subsistence quantities and marginal budget shares per region.

    gamma are income-elasticity-weighted budget shares (normalised to one);
    mu places ``1 + 1/frisch`` of the budget above subsistence.  Negative or
    over-cap mu are clamped to ``[0, s_max * C0]`` and gamma re-derived so
    benchmark demand is still reproduced exactly.
    """
    c0 = np.asarray(consumption0, dtype=float)
    budget = c0.sum(axis=1, keepdims=True)
    if np.any((c0 < 0)):
        raise CalibrationError("benchmark consumption must be nonnegative")
    shares = _value_shares(c0, axis=1)
    eta = cfg.eta_vector(dims)[None, :]
    weighted = eta * shares
    gamma = _value_shares(weighted, axis=1)
    supernumerary_share = 1.0 + 1.0 / cfg.frisch
    mu = c0 - gamma * budget * supernumerary_share

    lo = np.zeros_like(mu)
    hi = cfg.subsistence_cap * c0
    clamped_mask = (mu < lo - 1e-15 * np.maximum(c0, 1.0)) | (mu > hi)
    mu = np.clip(mu, lo, hi)
    # re-derive gamma from the clamped mu so that benchmark consumption is
    # reproduced exactly: C0 = mu + gamma * (B0 - sum mu)
    supern = budget - mu.sum(axis=1, keepdims=True)
    if np.any(supern <= 0):
        raise CalibrationError("subsistence bundle exhausts the budget")
    gamma = (c0 - mu) / supern
    zero_budget = budget[:, 0] <= 0
    if np.any(zero_budget):
        raise CalibrationError("an agent has a zero consumption budget")
    clamped = tuple(
        (dims.regions[r], dims.sectors[i])
        for r, i in np.argwhere(clamped_mask)
    )
    return LesCalibration(mu=mu, gamma=gamma, clamped=clamped)


def calibrate_armington(data: BenchmarkDataset, cfg: CalibrationConfig):
    """Domestic/import and bilateral sourcing shares at benchmark prices."""
    dims = data.dims
    ds = data.domestic_sales()
    imp_delivered = (data.trade + data.margin).sum(axis=0)
    absorption = data.absorption()
    tradable = imp_delivered > 0

    missing = (imp_delivered > 0) & (data.trade.sum(axis=0) <= 0)
    if np.any(missing):
        r, i = np.argwhere(missing)[0]
        raise CalibrationError(
            f"[{dims.regions[r]}, {dims.sectors[i]}] records imports with "
            f"no bilateral source flows"
        )
    if np.any((absorption <= 0) & tradable):
        r, i = np.argwhere((absorption <= 0) & tradable)[0]
        raise CalibrationError(
            f"traded good [{dims.regions[r]}, {dims.sectors[i]}] has "
            f"nonpositive total absorption"
        )

    total = ds + imp_delivered
    with np.errstate(invalid="ignore", divide="ignore"):
        share_dom = np.where(total > 0, ds / np.where(total > 0, total, 1.0),
                             1.0)
    share_imp = np.where(tradable, 1.0 - share_dom, 0.0)
    share_dom = np.where(tradable, share_dom, 1.0)

    delivered = data.trade + data.margin
    share_origin = _value_shares(delivered, axis=0)

    with np.errstate(invalid="ignore", divide="ignore"):
        margin_coef = np.where(
            data.trade > 0,
            data.margin / np.where(data.trade > 0, data.trade, 1.0),
            0.0,
        )
    sigma = cfg.sigma_vector("armington", dims)
    return {
        "share_dom": share_dom, "share_imp": share_imp,
        "share_origin": share_origin, "sigma_arm": sigma,
        "sigma_bilat": 2.0 * sigma, "margin_coef": margin_coef,
        "tradable": tradable,
    }


def benchmark_wkr(data: BenchmarkDataset, cfg: CalibrationConfig,
                  delta: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Benchmark capital remuneration rate per (region, sector)."""
    rate = data.capital_rent / data.k0  # benchmark return per unit of stock
    if cfg.wkr_ratio_form:
        return rate / (g[:, None] + delta[None, :])
    return rate * (g[:, None] + delta[None, :])


def calibrate_investment_attractors(data: BenchmarkDataset,
                                    cfg: CalibrationConfig,
                                    delta: np.ndarray,
                                    g: np.ndarray) -> np.ndarray:
    """Gravity attractors B that replicate the benchmark allocation.

    B is scaled so the logit denominator equals one at the benchmark,
    which makes the period-0 allocation exactly the benchmark split.
    """
    pool = data.savings_pool()
    bad = (data.k0 <= 0) & (data.inv_by_sector > 0)
    if np.any(bad):
        r, i = np.argwhere(bad)[0]
        raise CalibrationError(
            f"[{data.dims.regions[r]}, {data.dims.sectors[i]}] attracts "
            f"investment with zero capital stock"
        )
    wkr = benchmark_wkr(data, cfg, delta, g)
    weight = data.k0 * np.exp(cfg.theta_inv * wkr)
    if cfg.pooled_investment:
        shares = data.inv_by_sector / pool.sum()
    else:
        shares = data.inv_by_sector / pool[:, None]
    return shares / weight


def calibrate(data: BenchmarkDataset, cfg: CalibrationConfig | None = None,
              growth_coefs=None, rd_process=None,
              check: bool = True) -> CalibratedModel:
    """Full calibration: every ParameterSet entry from one benchmark."""
    from .growth import default_growth_arrays  # deferred: avoids cycle

    cfg = cfg or CalibrationConfig()
    dims = data.dims
    if check:
        report = validate_benchmark(data)
        if not report.ok:
            fails = ", ".join(
                f"{c.name}[{c.region}, {c.sector}]" for c in report.failures()[:5]
            )
            raise CalibrationError(f"benchmark identities violated: {fails}")

    nests = calibrate_ces_nests(data, cfg)
    arm = calibrate_armington(data, cfg)

    les_h = calibrate_les(data.consumption, cfg, dims)
    les_g = calibrate_les(data.government, cfg, dims)
    warnings = tuple(
        f"household mu clamped at {cell}" for cell in les_h.clamped
    ) + tuple(f"government mu clamped at {cell}" for cell in les_g.clamped)

    with np.errstate(invalid="ignore", divide="ignore"):
        tau_prod = np.where(data.output > 0, data.prod_tax / np.maximum(
            data.output, 1e-300), 0.0)
        tau_cons = np.where(data.consumption > 0, data.cons_tax / np.maximum(
            data.consumption, 1e-300), 0.0)
    fy = data.factor_income()
    gross = fy + data.transfers
    tau_inc = data.income_tax / gross
    disposable = gross - data.income_tax
    save_rate_h = data.hh_savings / disposable
    revenue = (
        data.prod_tax.sum(axis=1) + data.cons_tax.sum(axis=1) + data.income_tax
    )
    save_share_g = data.gov_savings / revenue

    pool = data.savings_pool()
    inv_coef = data.inv_demand / pool[:, None]

    spend = data.consumption + data.cons_tax
    cpi_weights = _value_shares(spend, axis=1)
    gdp0 = (
        fy + data.prod_tax.sum(axis=1) + data.cons_tax.sum(axis=1)
    )
    world_weights = gdp0 / gdp0.sum()

    delta = np.full(dims.n_sectors, cfg.delta)
    for sector, val in cfg.delta_overrides.items():
        delta[dims.sector_index(sector)] = float(val)
    g = np.full(dims.n_regions, cfg.growth_rate)
    for region, val in cfg.growth_overrides.items():
        g[dims.region_index(region)] = float(val)

    attractor = calibrate_investment_attractors(data, cfg, delta, g)

    gc, rd_a, rd_c = default_growth_arrays(dims, growth_coefs, rd_process)

    params = ParameterSet(
        dims=dims,
        share_m=nests["share_m"], share_e=nests["share_e"],
        share_k=nests["share_k"], share_nelec=nests["share_nelec"],
        share_skill=nests["share_skill"],
        sigma_m_kle=cfg.sigma_vector("m_kle", dims),
        sigma_e_kl=cfg.sigma_vector("e_kl", dims),
        sigma_k_l=cfg.sigma_vector("k_l", dims),
        sigma_elec=cfg.sigma_vector("elec", dims),
        sigma_skill=cfg.sigma_vector("skill", dims),
        mat_coef=nests["mat_coef"], input_scale=nests["input_scale"],
        a0=data.a0,
        share_dom=arm["share_dom"], share_imp=arm["share_imp"],
        share_origin=arm["share_origin"], sigma_arm=arm["sigma_arm"],
        sigma_bilat=arm["sigma_bilat"], margin_coef=arm["margin_coef"],
        tradable=arm["tradable"],
        mu_h=les_h.mu, gamma_h=les_h.gamma,
        mu_g=les_g.mu, gamma_g=les_g.gamma, gov_bundle0=data.government,
        tau_prod=tau_prod, tau_cons=tau_cons, tau_inc=tau_inc,
        save_rate_h=save_rate_h, save_share_g=save_share_g,
        transfers0=data.transfers, foreign_transfers0=data.foreign_transfers,
        labour_supply=data.labour_endowment(),
        inv_coef=inv_coef, cpi_weights=cpi_weights,
        world_weights=world_weights,
        psi_capital=data.capital_rent / data.k0,
        delta=delta, growth_rate=g, theta_inv=cfg.theta_inv,
        attractor=attractor, wkr_ratio_form=cfg.wkr_ratio_form,
        pooled_investment=cfg.pooled_investment,
        growth_coefs=gc, rd_persistence=rd_a, rd_constant=rd_c,
    )
    return CalibratedModel(dims=dims, data=data, params=params,
                           warnings=warnings)


def replication_residual(model: CalibratedModel) -> float:
    """Max relative benchmark-replication error across all market blocks."""
    from .equilibrium import benchmark_state, excess_demands, ClosureSpec

    state = benchmark_state(model)
    return excess_demands(state, model.params, ClosureSpec()).max_rel_residual
