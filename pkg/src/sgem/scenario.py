"""Policy scenarios: expenditure tables -> shocks -> runs -> effect reports.

Scenario construction follows four steps: aggregate project expenditures
into the four categories (Business, Education, Other, Research), pin the
per-year budget-split and private co-funding assumptions, convert category
spending into model shocks, and run baseline vs. counterfactual paths.

Shock mapping: Research and Business spending become additive R&D-intensity
shocks (spending divided by sector value added, allocated across sectors by
configurable weights); Education spending becomes an additive high-skill
share shock (scaled by the wage bill through a mandatory cost coefficient);
Other plus the administrative budget share become government purchase
shocks, financed by GDP-weighted contributions of all regional governments
so the world accounts stay closed.

Effects: the "direct" effect is the TFP-channel-only GDP deviation read in
supported regions; "total" is the full-scenario deviation everywhere;
demand and structural channel runs decompose it, with the interaction
residual reported explicitly.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .calibration import CalibratedModel
from .core import ScenarioError, SectorGroup
from .dynamics import step_period
from .equilibrium import ClosureSpec, SolverConfig, benchmark_state, solve_period
from .growth import GrowthShocks

CATEGORIES = ("Business", "Education", "Other", "Research")


@dataclass(frozen=True)
class YearAssumptions:
    cofunding_rate: float
    kic_share: float = 1.0
    direct_share: float = 0.0
    admin_share: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.cofunding_rate <= 1.0:
            raise ScenarioError("co-funding rate must lie in [0, 1]")
        if min(self.kic_share, self.direct_share, self.admin_share) < 0:
            raise ScenarioError("budget shares must be nonnegative")


@dataclass(frozen=True)
class ExpenditureRecord:
    region: str
    kic: str
    category: str
    year: int
    amount: float

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise ScenarioError(
                f"category {self.category!r} not in {CATEGORIES}"
            )
        if self.amount < 0:
            raise ScenarioError("expenditure amounts must be nonnegative")


@dataclass(frozen=True)
class ExpenditureTable:
    records: tuple
    assumptions: dict  # year -> YearAssumptions

    def __post_init__(self):
        object.__setattr__(
            self, "records",
            tuple(r if isinstance(r, ExpenditureRecord)
                  else ExpenditureRecord(**r) for r in self.records),
        )
        object.__setattr__(
            self, "assumptions",
            {int(y): (a if isinstance(a, YearAssumptions)
                      else YearAssumptions(**a))
             for y, a in self.assumptions.items()},
        )

    def years(self):
        return sorted({r.year for r in self.records})

    def category_total(self, category: str) -> float:
        return sum(r.amount for r in self.records if r.category == category)


@dataclass(frozen=True)
class ShockMap:
    """Rules translating category spending into model shocks."""

    rd_categories: tuple = ("Research", "Business")
    education_category: str = "Education"
    demand_categories: tuple = ("Other",)
    #: currency of education spending per wage-bill unit per H point;
    #: mandatory whenever the table contains education spending
    h_shock_scale: float | None = None
    #: optional [R, I] sector weights for R&D spending; default: value-added
    #: weights within the high-tech and knowledge-services groups
    rd_sector_weights: np.ndarray | None = None


@dataclass(frozen=True)
class ShockSeries:
    """Time-indexed shocks plus the audit trail."""

    rd: dict        # year -> [R, I]
    h: dict         # year -> [R]
    demand: dict    # year -> [R]
    supported: np.ndarray  # [R] bool: receives any shock
    audit: pd.DataFrame
    gross_spend: dict      # year -> [R] spend incl. co-funding

    def is_zero(self) -> bool:
        return not (self.rd or self.h or self.demand)


def default_rd_weights(model: CalibratedModel) -> np.ndarray:
    """Value-added weights within HighTech + KnowledgeServices, per region."""
    data, dims = model.data, model.dims
    va = data.wage_bill.sum(axis=2) + data.capital_rent
    groups = dims.group_array()
    mask = np.array([
        g in (SectorGroup.HIGH_TECH, SectorGroup.KNOWLEDGE_SERVICES)
        for g in groups
    ])
    if not mask.any():
        mask = np.ones(dims.n_sectors, dtype=bool)
    weights = va * mask[None, :]
    return weights / weights.sum(axis=1, keepdims=True)


def build_shocks(table: ExpenditureTable, smap: ShockMap,
                 model: CalibratedModel) -> ShockSeries:
    """Convert the expenditure table into time-indexed model shocks.

    Gross investment per record is the amount times (1 + co-funding rate);
    the administrative budget share is routed to the demand channel, the
    rest to the record's category channel.
    """
    dims, data = model.dims, model.data
    R, I = dims.n_regions, dims.n_sectors

    unmatched = sorted({r.region for r in table.records}
                       - set(dims.regions))
    if unmatched:
        raise ScenarioError(f"regions not in the model: {unmatched}")
    missing_years = [y for y in table.years() if y not in table.assumptions]
    if missing_years:
        raise ScenarioError(
            f"no co-funding assumptions for years: {missing_years}"
        )
    for rec in table.records:
        if not dims.first_year <= rec.year <= dims.last_year:
            raise ScenarioError(
                f"expenditure year {rec.year} outside the model horizon"
            )

    weights = smap.rd_sector_weights
    if weights is None:
        weights = default_rd_weights(model)
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (R, I):
        raise ScenarioError("rd sector weights must have shape [R, I]")
    if np.any(np.abs(weights.sum(axis=1) - 1.0) > 1e-9):
        raise ScenarioError("rd sector weights must sum to one per region")

    va0 = data.wage_bill.sum(axis=2) + data.capital_rent
    wagebill0 = data.wage_bill.sum(axis=(1, 2))

    needs_h = any(r.category == smap.education_category and r.amount > 0
                  for r in table.records)
    if needs_h and smap.h_shock_scale is None:
        raise ScenarioError(
            "education spending present but ShockMap.h_shock_scale is not "
            "set; the cost-per-skill-point coefficient is a mandatory input"
        )

    rd: dict[int, np.ndarray] = {}
    h: dict[int, np.ndarray] = {}
    demand: dict[int, np.ndarray] = {}
    gross_spend: dict[int, np.ndarray] = {}
    supported = np.zeros(R, dtype=bool)
    audit_rows = []

    for rec in table.records:
        if rec.amount == 0:
            continue
        asm = table.assumptions[rec.year]
        r = dims.region_index(rec.region)
        gross = rec.amount * (1.0 + asm.cofunding_rate)
        split = asm.kic_share + asm.direct_share + asm.admin_share
        if split <= 0:
            raise ScenarioError(f"budget shares all zero in {rec.year}")
        productive = gross * (asm.kic_share + asm.direct_share) / split
        admin = gross * asm.admin_share / split

        gross_spend.setdefault(rec.year, np.zeros(R))[r] += gross
        supported[r] = True
        channel = None
        if rec.category in smap.rd_categories:
            channel = "rd"
            inc = productive * weights[r] / va0[r]
            rd.setdefault(rec.year, np.zeros((R, I)))[r] += inc
        elif rec.category == smap.education_category:
            channel = "h"
            inc = smap.h_shock_scale * productive / wagebill0[r]
            h.setdefault(rec.year, np.zeros(R))[r] += inc
        elif rec.category in smap.demand_categories:
            channel = "demand"
            demand.setdefault(rec.year, np.zeros(R))[r] += productive
        else:
            raise ScenarioError(
                f"category {rec.category!r} has no channel in the shock map"
            )
        if admin > 0:
            demand.setdefault(rec.year, np.zeros(R))[r] += admin
        audit_rows.append({
            "region": rec.region, "kic": rec.kic, "category": rec.category,
            "year": rec.year, "amount": rec.amount,
            "cofunding_rate": asm.cofunding_rate, "gross": gross,
            "productive": productive, "admin_to_demand": admin,
            "channel": channel,
        })

    audit = pd.DataFrame(
        audit_rows, columns=["region", "kic", "category", "year", "amount",
                             "cofunding_rate", "gross", "productive",
                             "admin_to_demand", "channel"],
    )
    return ShockSeries(rd=rd, h=h, demand=demand, supported=supported,
                       audit=audit, gross_spend=gross_spend)


def _run_path(model: CalibratedModel, horizon: int,
              rd_shocks: dict | None, h_shocks: dict | None,
              demand_shocks: dict | None,
              closure: ClosureSpec, solver_cfg: SolverConfig) -> list:
    """Simulate ``horizon`` periods; shock dicts may be None (baseline)."""
    if horizon < 1:
        raise ScenarioError("horizon must cover at least the benchmark year")
    last_allowed = model.dims.last_year - model.dims.first_year + 1
    if horizon > last_allowed:
        raise ScenarioError(
            f"horizon {horizon} exceeds the model's {last_allowed} years"
        )
    first_year = model.dims.first_year
    if rd_shocks and min(rd_shocks) <= first_year:
        raise ScenarioError("growth shocks cannot target the benchmark year")
    if h_shocks and min(h_shocks) <= first_year:
        raise ScenarioError("growth shocks cannot target the benchmark year")

    def grants_for(year):
        if demand_shocks is None:
            return None
        return demand_shocks.get(year)

    path = []
    jac_cache: dict = {}
    guess = benchmark_state(model)
    state = solve_period(guess, model.params, closure, solver_cfg,
                         grants=grants_for(first_year), jac_cache=jac_cache)
    path.append(state)
    for k in range(1, horizon):
        year = first_year + k
        shocks = None
        if rd_shocks is not None or h_shocks is not None:
            rd = rd_shocks.get(year) if rd_shocks else None
            hs = h_shocks.get(year) if h_shocks else None
            if rd is not None or hs is not None:
                shocks = GrowthShocks(rd=rd, h=hs)
        guess = step_period(path[-1], model.params, shocks)
        state = solve_period(guess, model.params, closure, solver_cfg,
                             grants=grants_for(year), jac_cache=jac_cache)
        path.append(state)
    return path


def run_baseline(model: CalibratedModel, horizon: int,
                 closure: ClosureSpec | None = None,
                 solver_cfg: SolverConfig | None = None) -> list:
    """No-policy path: growth dynamics on, every shock off."""
    return _run_path(model, horizon, None, None, None,
                     closure or ClosureSpec(), solver_cfg or SolverConfig())


def run_counterfactual(model: CalibratedModel, shocks: ShockSeries,
                       horizon: int, channels=("tfp", "demand"),
                       closure: ClosureSpec | None = None,
                       solver_cfg: SolverConfig | None = None) -> list:
    """Policy path with the selected channels active.

    ``channels={"tfp"}`` applies only the growth-equation (R&D and human
    capital) shocks; ``{"demand"}`` only the purchase shocks; the empty set
    reproduces the baseline bit for bit.
    """
    channels = set(channels)
    unknown = channels - {"tfp", "demand"}
    if unknown:
        raise ScenarioError(f"unknown channels: {sorted(unknown)}")
    rd = shocks.rd if "tfp" in channels and shocks.rd else None
    h = shocks.h if "tfp" in channels and shocks.h else None
    demand = shocks.demand if "demand" in channels and shocks.demand else None
    return _run_path(model, horizon, rd, h, demand,
                     closure or ClosureSpec(), solver_cfg or SolverConfig())


def run_all(model: CalibratedModel, shocks: ShockSeries, horizon: int,
            closure: ClosureSpec | None = None,
            solver_cfg: SolverConfig | None = None,
            workers: int = 1) -> dict:
    """Baseline plus the three channel runs, optionally in parallel."""
    jobs = {
        "baseline": (),
        "tfp": ("tfp",),
        "demand": ("demand",),
        "full": ("tfp", "demand"),
    }

    def run(channels):
        if channels == ():
            return run_baseline(model, horizon, closure, solver_cfg)
        return run_counterfactual(model, shocks, horizon, channels,
                                  closure, solver_cfg)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {name: pool.submit(run, ch)
                       for name, ch in jobs.items()}
            return {name: fut.result() for name, fut in futures.items()}
    return {name: run(ch) for name, ch in jobs.items()}


@dataclass(frozen=True)
class EffectReport:
    """Per-region, per-year GDP effects of one scenario."""

    frame: pd.DataFrame
    supported: tuple
    eu_direct_cumulative: float
    eu_total_cumulative: float

    @property
    def total_direct_ratio(self) -> float:
        if self.eu_direct_cumulative == 0:
            return float("nan")
        return self.eu_total_cumulative / self.eu_direct_cumulative


def decompose_effects(baseline: list, runs: dict, shocks: ShockSeries,
                      model: CalibratedModel) -> EffectReport:
    """Direct / total / demand / structural effects from the channel runs.

    All runs must share the baseline's horizon.  Effects are real-GDP
    deviations; the demand + structural decomposition never hides the
    interaction term (reported as its own column).
    """
    for name, path in runs.items():
        if len(path) != len(baseline):
            raise ScenarioError(
                f"run {name!r} horizon {len(path)} != baseline "
                f"{len(baseline)}"
            )
    dims = model.dims
    regions = dims.regions
    supported = shocks.supported

    def gdp(path):
        return np.array([st.gdp_real for st in path])  # [T, R]

    g_base = gdp(baseline)
    g_full = gdp(runs["full"])
    g_tfp = gdp(runs["tfp"])
    g_dem = gdp(runs["demand"])

    total = g_full - g_base
    structural = g_tfp - g_base
    demand = g_dem - g_base
    direct = structural * supported[None, :]
    interaction = total - structural - demand

    years = [st.year for st in baseline]
    rows = []
    for t, year in enumerate(years):
        spend = shocks.gross_spend.get(year)
        for r, region in enumerate(regions):
            cost = float(spend[r]) if spend is not None else 0.0
            rows.append({
                "region": region, "year": year,
                "gdp_baseline": g_base[t, r],
                "gdp_counterfactual": g_full[t, r],
                "direct": direct[t, r], "total": total[t, r],
                "demand": demand[t, r], "structural": structural[t, r],
                "interaction": interaction[t, r],
                "policy_cost": cost,
                "direct_pct": 100.0 * direct[t, r] / g_base[t, r],
                "total_pct": 100.0 * total[t, r] / g_base[t, r],
                "cost_pct": 100.0 * cost / g_base[t, r],
                "supported": bool(supported[r]),
            })
    frame = pd.DataFrame(rows)
    return EffectReport(
        frame=frame,
        supported=tuple(regions[r] for r in np.flatnonzero(supported)),
        eu_direct_cumulative=float(direct.sum()),
        eu_total_cumulative=float(total.sum()),
    )
