"""Within-period market equilibrium: residual system and damped Newton.

Unknowns are log domestic prices, log wages, log capital-service rents and
log real investment per region.  Given prices, activity levels solve a
linear system exactly (every demand for domestic output is linear in
activity at fixed prices), so the Newton residuals are zero profits,
labour and capital market clearing, and the savings-investment balance.
One savings-investment row is redundant (Walras law); it is dropped and
replaced by the numeraire normalisation.

All residuals are relative: value or quantity gaps divided by the size of
the market they belong to.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .calibration import CalibratedModel
from .core import (
    DomainError,
    EconomyState,
    EquilibriumError,
    InfeasibleDemandError,
    ParameterSet,
    SolveTrace,
)
from .demand import government_accounts, household_budget, les_demand
from .production import (
    InputPrices,
    NestedTechnology,
    per_unit_demands,
    unit_cost,
)
from .trade import (
    TradeStructure,
    composite_price,
    delivered_prices,
    import_price,
    origin_flow_shares,
)


@dataclass(frozen=True)
class ClosureSpec:
    """Numeraire, government savings mode, and the dropped Walras row."""

    numeraire_kind: str = "cpi"          # "cpi" | "commodity"
    numeraire_region: str | None = None  # default: first region
    numeraire_sector: str | None = None  # for the commodity numeraire
    gov_savings: str = "exogenous"       # "exogenous" | "endogenous"
    drop_region: str | None = None       # savings-investment row to drop
    foreign_transfers_fixed: bool = True

    def resolve(self, params: ParameterSet):
        dims = params.dims
        num_r = (dims.region_index(self.numeraire_region)
                 if self.numeraire_region else 0)
        num_i = (dims.sector_index(self.numeraire_sector)
                 if self.numeraire_sector else 0)
        drop_r = (dims.region_index(self.drop_region)
                  if self.drop_region else num_r)
        if self.numeraire_kind not in ("cpi", "commodity"):
            raise DomainError(f"unknown numeraire {self.numeraire_kind!r}")
        if self.gov_savings not in ("exogenous", "endogenous"):
            raise DomainError(
                f"unknown government savings mode {self.gov_savings!r}"
            )
        if not self.foreign_transfers_fixed:
            # a floating external balance needs a balancing variable the
            # model does not carry; only the fixed-transfers closure exists
            raise DomainError(
                "only the fixed foreign-transfers closure is implemented"
            )
        return num_r, num_i, drop_r


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 50
    tolerance: float = 1e-9        # on the max relative residual
    damping: float = 1.0           # initial line-search step
    fd_step: float = 1e-7          # forward difference in log unknowns
    linesearch_shrink: float = 0.5
    price_floor: float = 1e-10
    max_backtracks: int = 25
    step_cap: float = 2.0          # max log-step per Newton iteration

    def __post_init__(self):
        if self.tolerance <= 0 or self.price_floor <= 0:
            raise DomainError("tolerance and price floor must be positive")
        if not 0 < self.damping <= 1:
            raise DomainError("damping factor must lie in (0, 1]")


@dataclass
class Evaluation:
    """Everything implied by one price/activity point."""

    prices: np.ndarray
    wages: np.ndarray
    rents: np.ndarray
    real_investment: np.ndarray
    activity: np.ndarray
    pa: np.ndarray
    pc: np.ndarray
    pm: np.ndarray
    delivered: np.ndarray
    cpi: np.ndarray
    pw: float
    pi: np.ndarray
    consumption: np.ndarray
    government: np.ndarray
    inv_demand: np.ndarray
    absorption: np.ndarray
    domestic_sales: np.ndarray
    import_composite: np.ndarray
    trade_flows: np.ndarray
    transport_demand: np.ndarray
    exports: np.ndarray
    labour_demand: np.ndarray
    capital_demand: np.ndarray
    capital_services: np.ndarray
    savings: np.ndarray
    hh_savings: np.ndarray
    gov_savings: np.ndarray
    foreign_transfers: np.ndarray
    tax_revenue: np.ndarray
    prod_tax: np.ndarray
    cons_tax: np.ndarray
    income_tax: np.ndarray
    gdp_income: np.ndarray
    gdp_real: np.ndarray
    unit_costs: np.ndarray
    residuals: dict = field(default_factory=dict)


def _evaluate(params: ParameterSet, closure: ClosureSpec,
              pd: np.ndarray, w: np.ndarray, rent: np.ndarray,
              iq: np.ndarray, capital: np.ndarray, tfp: np.ndarray,
              grants: np.ndarray | None = None,
              activity: np.ndarray | None = None) -> Evaluation:
    """Evaluate the full economy at given prices.

    With ``activity=None`` the domestic output levels are solved from the
    (linear) demand system; otherwise the supplied levels are used and the
    goods residual reports their market imbalance.
    """
    dims = params.dims
    R, I, E = dims.n_regions, dims.n_sectors, dims.n_skills
    ts = TradeStructure.from_params(params)
    tech = NestedTechnology.from_params(params)
    trn = dims.transport_index

    delivered = delivered_prices(ts, pd)
    pm = import_price(ts, delivered)
    pa = composite_price(ts, pd, pm)
    pc = pa * (1.0 + params.tau_cons)
    cpi = (params.cpi_weights * pa).sum(axis=1)
    pw = float((params.world_weights * cpi).sum())
    pi = (params.inv_coef * pa).sum(axis=1)

    prices = InputPrices(composite=pa, wage=w, rent=rent)
    uc = unit_cost(tech, prices, tfp)
    pu = per_unit_demands(tech, prices, tfp)

    # households
    services = params.psi_capital * capital
    factor_income = (w * params.labour_supply).sum(axis=1) \
        + (rent * services).sum(axis=1)
    transfers = params.transfers0 * cpi
    income_tax, hh_savings, hh_budget = household_budget(
        params, factor_income, transfers
    )
    consumption = les_demand(params.mu_h, params.gamma_h, pc, hh_budget)
    cons_tax = (params.tau_cons * pa * consumption).sum(axis=1)

    # government: split the budget into an activity-free base plus the
    # production-tax slope so the goods system stays linear in activity
    if grants is None:
        net_grant = np.zeros(R)
    else:
        total = float(np.sum(grants))
        net_grant = (np.asarray(grants, dtype=float)
                     - params.world_weights * total) * pw
    taupd = params.tau_prod * pd
    committed_g = (params.mu_g * pa).sum(axis=1)
    if closure.gov_savings == "exogenous":
        # budget = (1 - sg) * revenue - transfers + grant; the production
        # tax part of revenue is linear in activity, so keep it as a slope
        base_budget, _ = government_accounts(
            params, cons_tax + income_tax, transfers, "exogenous",
            grants=net_grant,
        )
        gov_slope = 1.0 - params.save_share_g
        # raw LES formula on the partial budget (feasibility is checked on
        # the full budget once activity is known)
        gov_base = params.mu_g + params.gamma_g / pa \
            * (base_budget - committed_g)[:, None]
        gov_slope_demand = gov_slope[:, None] * params.gamma_g / pa
    else:
        # fixed real bundle; grants buy extra units along the gamma shares
        gov_base = params.gov_bundle0 + params.gamma_g * net_grant[:, None] / pa
        base_budget = (pa * gov_base).sum(axis=1)
        gov_slope = np.zeros(R)
        gov_slope_demand = np.zeros_like(params.gamma_g)

    inv_demand = params.inv_coef * iq[:, None]

    # composite absorption that does not depend on activity
    final_base = consumption + gov_base + inv_demand

    # per-unit composite use by producers: materials plus the energy nests
    use_per_unit = pu["materials"].copy()          # [R, I, J]
    use_per_unit[:, :, dims.elec_index] += pu["elec"]
    use_per_unit[:, :, dims.nelec_index] += pu["nelec"]

    # Armington split and sourcing shares at current prices
    with np.errstate(divide="ignore", invalid="ignore"):
        s_dom = ts.share_dom * (pa / pd) ** ts.sigma[None, :]
        s_imp = ts.share_imp * (pa / pm) ** ts.sigma[None, :]
    s_dom = np.where(ts.tradable, np.where(ts.share_dom > 0, s_dom, 0.0), 1.0)
    s_imp = np.where(ts.tradable, np.where(ts.share_imp > 0, s_imp, 0.0), 0.0)
    fsh = origin_flow_shares(ts, delivered, pm)

    def domestic_demand_from_absorption(ad):
        ds = s_dom * ad
        xm = s_imp * ad
        xt = fsh * xm[None, :, :]
        dd = ds + xt.sum(axis=1)
        dd[:, trn] += (ts.margin_coef * xt).sum(axis=(1, 2))
        return dd, ds, xm, xt

    if activity is None:
        # assemble (I - Phi W) x = Phi e0 and solve for activity
        n = R * I
        rr = np.arange(R)
        jj = np.arange(I)
        phi = np.zeros((R, I, R, I))
        phi[rr[:, None], jj[None, :], rr[:, None], jj[None, :]] = s_dom
        bil = fsh * s_imp[None, :, :]              # [S, R, J]
        phi[:, jj, :, jj] += bil.transpose(2, 0, 1)
        phi[:, trn, :, :] += ts.margin_coef * fsh * s_imp[None, :, :]
        phi_m = phi.reshape(n, n)

        w_t = use_per_unit.transpose(0, 2, 1).copy()   # [R, J, I]
        w_t += gov_slope_demand[:, :, None] * taupd[:, None, :]
        w_m = np.zeros((R, I, R, I))
        w_m[rr, :, rr, :] = w_t
        w_m = w_m.reshape(n, n)

        a_sys = np.eye(n) - phi_m @ w_m
        b_sys = phi_m @ final_base.ravel()
        try:
            x = np.linalg.solve(a_sys, b_sys)
        except np.linalg.LinAlgError as exc:
            raise EquilibriumError(
                f"activity system singular at current prices: {exc}"
            ) from None
        activity = x.reshape(R, I)
        if np.any(~np.isfinite(activity)):
            raise EquilibriumError("activity solve produced non-finite levels")

    prod_tax = (taupd * activity).sum(axis=1)
    gov_budget = base_budget + gov_slope * prod_tax
    if closure.gov_savings == "exogenous":
        government = les_demand(params.mu_g, params.gamma_g, pa, gov_budget)
        gov_sav = params.save_share_g * (cons_tax + income_tax + prod_tax)
    else:
        government = gov_base
        gov_sav = (cons_tax + income_tax + prod_tax) + net_grant \
            - transfers - gov_budget

    absorption = final_base \
        + gov_slope_demand * prod_tax[:, None] \
        + np.einsum("rij,ri->rj", use_per_unit, activity)
    dd, ds, xm, xt = domestic_demand_from_absorption(absorption)
    transport_demand = (ts.margin_coef * xt).sum(axis=(1, 2))
    exports = xt.sum(axis=1)

    labour_demand = pu["labour"] * activity[:, :, None]
    capital_demand = pu["capital"] * activity

    trf = params.foreign_transfers0 * pw
    savings = hh_savings + gov_sav + trf
    revenue = prod_tax + cons_tax + income_tax

    gdp_income = (
        (w * params.labour_supply).sum(axis=1)
        + (rent * services).sum(axis=1)
        + prod_tax + cons_tax
    )
    intermediates = np.einsum("rij,ri->r", use_per_unit, activity)
    gdp_real = activity.sum(axis=1) - intermediates

    # residual blocks, all relative
    zp = (pd * (1.0 - params.tau_prod) - uc) / (pd * (1.0 - params.tau_prod))
    goods = (dd - activity) / np.maximum(np.abs(activity), 1e-8)
    lab = (labour_demand.sum(axis=1) - params.labour_supply) \
        / np.maximum(params.labour_supply, 1e-8)
    cap = (capital_demand - services) / np.maximum(services, 1e-8)
    si_scale = np.maximum(np.maximum(np.abs(savings), pi * np.abs(iq)), 1e-8)
    si = (savings - pi * iq) / si_scale

    # value-form residuals for the Walras identity
    residuals = {
        "zero_profit": zp,
        "goods": goods,
        "labour": lab,
        "capital": cap,
        "savings_investment": si,
        "_value": {
            "goods": (dd - activity) * pd,
            "labour": (labour_demand.sum(axis=1) - params.labour_supply) * w,
            "capital": (capital_demand - services) * rent,
            "zero_profit": (pd * (1.0 - params.tau_prod) - uc) * activity,
            "savings_investment": savings - pi * iq,
        },
        "hh_budget": ((pc * consumption).sum(axis=1) - hh_budget)
        / np.maximum(hh_budget, 1e-8),
        "gov_budget": ((pa * government).sum(axis=1) - gov_budget)
        / np.maximum(np.abs(gov_budget), 1e-8),
    }
    for name in ("zero_profit", "goods", "labour", "capital",
                 "savings_investment"):
        if not np.all(np.isfinite(residuals[name])):
            raise EquilibriumError(
                f"non-finite residual in block {name!r}"
            )

    return Evaluation(
        prices=pd, wages=w, rents=rent, real_investment=iq,
        activity=activity, pa=pa, pc=pc, pm=pm, delivered=delivered,
        cpi=cpi, pw=pw, pi=pi, consumption=consumption,
        government=government, inv_demand=inv_demand, absorption=absorption,
        domestic_sales=ds, import_composite=xm, trade_flows=xt,
        transport_demand=transport_demand, exports=exports,
        labour_demand=labour_demand, capital_demand=capital_demand,
        capital_services=services, savings=savings, hh_savings=hh_savings,
        gov_savings=gov_sav, foreign_transfers=trf, tax_revenue=revenue,
        prod_tax=prod_tax, cons_tax=cons_tax, income_tax=income_tax,
        gdp_income=gdp_income, gdp_real=gdp_real, unit_costs=uc,
        residuals=residuals,
    )


@dataclass(frozen=True)
class ResidualReport:
    """Named relative residuals of every equilibrium condition."""

    blocks: dict
    values: dict              # value-form residuals (for Walras accounting)
    dropped: str
    dropped_value: float
    max_rel_residual: float
    walras_sum: float         # value-weighted sum over all conditions

    def block_max(self, name: str) -> float:
        return float(np.max(np.abs(self.blocks[name])))


_MARKET_BLOCKS = ("zero_profit", "goods", "labour", "capital",
                  "savings_investment")


def _residual_report(ev: Evaluation, params: ParameterSet,
                     drop_r: int) -> ResidualReport:
    blocks = {k: v for k, v in ev.residuals.items() if k != "_value"}
    values = ev.residuals["_value"]
    rel_max = 0.0
    for name in _MARKET_BLOCKS:
        arr = np.abs(blocks[name])
        if name == "savings_investment":
            arr = np.delete(arr, drop_r)
        if arr.size:
            rel_max = max(rel_max, float(arr.max()))
    walras = float(
        values["goods"].sum() + values["labour"].sum()
        + values["capital"].sum() + values["zero_profit"].sum()
        + values["savings_investment"].sum()
    )
    region = params.dims.regions[drop_r]
    return ResidualReport(
        blocks=blocks, values=values,
        dropped=f"savings_investment[{region}]",
        dropped_value=float(values["savings_investment"][drop_r]),
        max_rel_residual=rel_max, walras_sum=walras,
    )


def excess_demands(state: EconomyState, params: ParameterSet,
                   closure: ClosureSpec,
                   grants: np.ndarray | None = None) -> ResidualReport:
    """All equilibrium residuals at the state's own prices and activity.

    One savings-investment row (the dropped Walras condition) is excluded
    from ``max_rel_residual`` but still reported.
    """
    _, _, drop_r = closure.resolve(params)
    ev = _evaluate(
        params, closure, state.prices, state.wages, state.rents,
        state.real_investment, state.capital, state.tfp,
        grants=grants, activity=state.activity,
    )
    return _residual_report(ev, params, drop_r)


def walras_residual(state: EconomyState, params: ParameterSet,
                    closure: ClosureSpec,
                    grants: np.ndarray | None = None) -> float:
    """Value of the omitted market's excess demand, relative to its pool.

    Never imposed by the solver; at a solution it vanishes by Walras law.
    """
    _, _, drop_r = closure.resolve(params)
    report = excess_demands(state, params, closure, grants)
    scale = max(abs(float(state.savings[drop_r])), 1e-8)
    return report.dropped_value / scale


def _row_labels(params: ParameterSet, drop_r: int, num_label: str):
    dims = params.dims
    labels = []
    for r in dims.regions:
        for i in dims.sectors:
            labels.append(f"zero_profit[{r},{i}]")
    for r in dims.regions:
        for e in dims.skills:
            labels.append(f"labour[{r},{e}]")
    for r in dims.regions:
        for i in dims.sectors:
            labels.append(f"capital[{r},{i}]")
    for k, r in enumerate(dims.regions):
        if k != drop_r:
            labels.append(f"savings_investment[{r}]")
    labels.append(num_label)
    return labels


def _newton_residual(ev: Evaluation, params: ParameterSet, closure: ClosureSpec,
                     num_r: int, num_i: int, drop_r: int) -> np.ndarray:
    res = ev.residuals
    si = np.delete(res["savings_investment"], drop_r)
    if closure.numeraire_kind == "cpi":
        numeraire = ev.cpi[num_r] - 1.0
    else:
        numeraire = ev.prices[num_r, num_i] - 1.0
    return np.concatenate([
        res["zero_profit"].ravel(),
        res["labour"].ravel(),
        res["capital"].ravel(),
        si,
        [numeraire],
    ])


def benchmark_state(model: CalibratedModel) -> EconomyState:
    """The benchmark as an economy state: unit prices, benchmark levels."""
    data, dims = model.data, model.dims
    R, I, E = dims.n_regions, dims.n_sectors, dims.n_skills
    pool = data.savings_pool()
    return EconomyState(
        year=dims.first_year,
        prices=np.ones((R, I)),
        wages=np.ones((R, E)),
        rents=np.ones((R, I)),
        real_investment=pool.copy(),
        activity=data.output.copy(),
        composite_prices=np.ones((R, I)),
        consumer_prices=1.0 + model.params.tau_cons,
        inv_price=np.ones(R),
        cpi=np.ones(R),
        consumption=data.consumption.copy(),
        government_consumption=data.government.copy(),
        investment_demand=data.inv_demand.copy(),
        imports=(data.trade + data.margin).sum(axis=0),
        trade_flows=data.trade.copy(),
        capital=data.k0.copy(),
        tfp=data.a0.copy(),
        tfp_prev=data.a0.copy(),
        rd_intensity=data.rd0.copy(),
        human_capital=data.h0.copy(),
        savings=pool,
        tax_revenue=(data.prod_tax.sum(axis=1) + data.cons_tax.sum(axis=1)
                     + data.income_tax),
        gdp=(data.factor_income() + data.prod_tax.sum(axis=1)
             + data.cons_tax.sum(axis=1)),
        gdp_real=(data.factor_income() + data.prod_tax.sum(axis=1)),
        trace=None,
    )


def _state_from_evaluation(ev: Evaluation, guess: EconomyState,
                           trace: SolveTrace) -> EconomyState:
    return EconomyState(
        year=guess.year,
        prices=ev.prices, wages=ev.wages, rents=ev.rents,
        real_investment=ev.real_investment, activity=ev.activity,
        composite_prices=ev.pa, consumer_prices=ev.pc,
        inv_price=ev.pi, cpi=ev.cpi,
        consumption=ev.consumption,
        government_consumption=ev.government,
        investment_demand=ev.inv_demand,
        imports=ev.import_composite, trade_flows=ev.trade_flows,
        capital=guess.capital, tfp=guess.tfp, tfp_prev=guess.tfp_prev,
        rd_intensity=guess.rd_intensity, human_capital=guess.human_capital,
        savings=ev.savings, tax_revenue=ev.tax_revenue,
        gdp=ev.gdp_income, gdp_real=ev.gdp_real,
        trace=trace,
    )


def solve_period(state_guess: EconomyState, params: ParameterSet,
                 closure: ClosureSpec | None = None,
                 solver_cfg: SolverConfig | None = None,
                 grants: np.ndarray | None = None,
                 jac_cache: dict | None = None) -> EconomyState:
    """Damped Newton on log prices with a finite-difference Jacobian.

    The Jacobian is updated by Broyden steps between finite-difference
    refreshes; a refresh happens on the first use, after a failed line
    search, or after many chord steps.  ``jac_cache`` (a plain dict owned
    by the caller) carries the factorised Jacobian across consecutive
    period solves of one simulation run.  Raises
    :class:`EquilibriumError` with the iteration history on failure.
    """
    closure = closure or ClosureSpec()
    cfg = solver_cfg or SolverConfig()
    num_r, num_i, drop_r = closure.resolve(params)
    dims = params.dims
    R, I, E = dims.n_regions, dims.n_sectors, dims.n_skills
    n_pd, n_w, n_rent = R * I, R * E, R * I

    def unpack(u):
        pd = np.exp(u[:n_pd]).reshape(R, I)
        w = np.exp(u[n_pd:n_pd + n_w]).reshape(R, E)
        rent = np.exp(u[n_pd + n_w:n_pd + n_w + n_rent]).reshape(R, I)
        iq = np.exp(u[n_pd + n_w + n_rent:])
        return pd, w, rent, iq

    def evaluate(u):
        pd, w, rent, iq = unpack(u)
        if np.any(pd < cfg.price_floor) or np.any(w < cfg.price_floor) \
                or np.any(rent < cfg.price_floor):
            raise EquilibriumError("prices fell below the solver floor")
        ev = _evaluate(params, closure, pd, w, rent, iq,
                       state_guess.capital, state_guess.tfp, grants=grants)
        f = _newton_residual(ev, params, closure, num_r, num_i, drop_r)
        return f, ev

    def try_evaluate(u):
        try:
            return evaluate(u)
        except (EquilibriumError, InfeasibleDemandError, DomainError,
                FloatingPointError):
            return None, None

    u = np.concatenate([
        np.log(state_guess.prices).ravel(),
        np.log(state_guess.wages).ravel(),
        np.log(state_guess.rents).ravel(),
        np.log(np.maximum(state_guess.real_investment, cfg.price_floor)),
    ])
    try:
        f, ev = evaluate(u)
    except (InfeasibleDemandError, DomainError) as exc:
        raise EquilibriumError(f"initial point not evaluable: {exc}") from exc

    def rel_max(f_vec, ev_):
        rep = _residual_report(ev_, params, drop_r)
        return max(rep.max_rel_residual, abs(f_vec[-1]))

    residual_hist = [rel_max(f, ev)]
    step_hist: list[float] = []
    n = u.size
    jac = None
    if jac_cache is not None:
        cached = jac_cache.get("jac")
        if cached is not None and cached.shape == (n, n):
            jac = cached
    jac_fresh = False
    since_refresh = 0

    for it in range(cfg.max_iterations):
        if residual_hist[-1] <= cfg.tolerance:
            break
        if jac is None or since_refresh > 20:
            jac = np.empty((n, n))
            for k in range(n):
                du = u.copy()
                du[k] += cfg.fd_step
                fk, _ = try_evaluate(du)
                if fk is None:
                    raise EquilibriumError(
                        "Jacobian evaluation failed near the current point",
                        report={"residuals": residual_hist},
                    )
                jac[:, k] = (fk - f) / cfg.fd_step
            jac_fresh = True
            since_refresh = 0
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            _raise_singular(jac, params, drop_r, closure, residual_hist)
        cap = np.max(np.abs(step))
        if cap > cfg.step_cap:
            step *= cfg.step_cap / cap

        norm0 = float(np.linalg.norm(f))
        t = cfg.damping
        accepted = False
        for _ in range(cfg.max_backtracks):
            f_new, ev_new = try_evaluate(u + t * step)
            if f_new is not None and np.linalg.norm(f_new) < norm0:
                du = t * step
                df = f_new - f
                u = u + du
                f, ev = f_new, ev_new
                accepted = True
                break
            t *= cfg.linesearch_shrink
        if not accepted:
            if not jac_fresh:
                jac = None       # refresh and retry from the same point
                continue
            raise EquilibriumError(
                "line search failed with a fresh Jacobian",
                report={"residuals": residual_hist, "best": rel_max(f, ev)},
            )
        # Broyden rank-1 update keeps the Jacobian useful between refreshes
        denom = float(du @ du)
        if denom > 0:
            jac = jac + np.outer(df - jac @ du, du) / denom
        jac_fresh = False
        since_refresh += 1
        residual_hist.append(rel_max(f, ev))
        step_hist.append(t)

    converged = residual_hist[-1] <= cfg.tolerance
    if converged:
        # re-impose the numeraire exactly: scaling every nominal price is
        # free by homogeneity and leaves all real residuals unchanged
        if closure.numeraire_kind == "cpi":
            scale = ev.cpi[num_r]
        else:
            scale = ev.prices[num_r, num_i]
        if scale != 1.0:
            u[:n_pd + n_w + n_rent] -= np.log(scale)
            f, ev = evaluate(u)
            residual_hist.append(rel_max(f, ev))
    if jac_cache is not None and jac is not None:
        jac_cache["jac"] = jac
    trace = SolveTrace(
        iterations=len(step_hist),
        residuals=tuple(residual_hist),
        step_sizes=tuple(step_hist),
        converged=converged,
        dropped_condition=f"savings_investment[{dims.regions[drop_r]}]",
    )
    if not converged:
        raise EquilibriumError(
            f"no convergence after {cfg.max_iterations} iterations "
            f"(best residual {min(residual_hist):.3e})",
            report={"trace": trace},
        )
    return _state_from_evaluation(ev, state_guess, trace)


def _raise_singular(jac, params, drop_r, closure, residual_hist):
    labels = _row_labels(
        params, drop_r,
        f"numeraire[{closure.numeraire_kind}]",
    )
    u_, s, _ = np.linalg.svd(jac)
    null = u_[:, -1]          # left null vector: the dependent row combination
    worst = np.argsort(-np.abs(null))[:4]
    rows = ", ".join(labels[k] for k in worst)
    raise EquilibriumError(
        f"singular Jacobian; near-dependent rows: {rows}",
        report={"residuals": residual_hist, "singular_values": s[-4:]},
    )


def gdp_expenditure(state: EconomyState, params: ParameterSet) -> np.ndarray:
    """Expenditure-side nominal GDP: C + G + I + X - M, margins included."""
    dims = params.dims
    trn = dims.transport_index
    exports_value = (state.prices * state.trade_flows.sum(axis=1)).sum(axis=1)
    ts = TradeStructure.from_params(params)
    delivered = delivered_prices(ts, state.prices)
    margin_sales = (ts.margin_coef * state.trade_flows).sum(axis=(1, 2)) \
        * state.prices[:, trn]
    imports_value = (delivered * state.trade_flows).sum(axis=0).sum(axis=1)
    return (
        (state.consumer_prices * state.consumption).sum(axis=1)
        + (state.composite_prices * state.government_consumption).sum(axis=1)
        + (state.composite_prices * state.investment_demand).sum(axis=1)
        + exports_value + margin_sales - imports_value
    )
