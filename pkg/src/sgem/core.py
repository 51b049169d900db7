"""Core data model: dimensions, benchmark accounts, parameters, and state.

All containers are immutable after construction (arrays are frozen with
``setflags(write=False)``) so they can be shared read-only across parallel
scenario runs.  New periods are represented by constructing a successor
:class:`EconomyState`, never by mutation.

Benchmark convention: every benchmark entry is a value at prices normalised
to one, so benchmark quantities equal benchmark values.  Capital stocks are
the one exception -- ``k0`` is a stock in asset units and the implied
benchmark rental rate is ``capital_rent / k0``; internally the model prices
capital *services* (one service unit per unit of benchmark rent value) so
that every benchmark price, including the service rent, equals one.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Mapping, Sequence

import numpy as np


class SgemError(Exception):
    """Base class for all model errors."""


class StructuralDataError(SgemError):
    """A dataset is structurally unusable (missing cells, bad invariants)."""


class CalibrationError(SgemError):
    """Benchmark data cannot support the requested calibration."""


class DomainError(SgemError):
    """An operation was called outside its numeric domain (e.g. price <= 0)."""


class InfeasibleDemandError(SgemError):
    """Spendable income below the subsistence bundle cost."""


class EquilibriumError(SgemError):
    """Within-period solve failed; carries the diagnostic report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class AllocationError(SgemError):
    """Investment allocation has an empty choice set."""


class EstimationError(SgemError):
    """Panel estimation failed (rank deficiency, too few periods, ...)."""


class ScenarioError(SgemError):
    """Scenario inputs inconsistent with the model or horizon."""


class SectorGroup(str, Enum):
    TRADITIONAL = "Traditional"
    LOW_TECH = "LowTech"
    MEDIUM_TECH = "MediumTech"
    HIGH_TECH = "HighTech"
    KNOWLEDGE_SERVICES = "KnowledgeServices"
    OTHER_SERVICES = "OtherServices"


#: NACE Rev.2 head codes mapped to the six R&D-intensity groups.  C33 is
#: listed under both medium-tech manufacturing and other services in common
#: classifications; it is assigned to medium-tech here so the mapping stays
#: one-to-one.
DEFAULT_NACE_GROUPS: dict[str, SectorGroup] = {}
for _code in ("A01", "A02", "A03", "B"):
    DEFAULT_NACE_GROUPS[_code] = SectorGroup.TRADITIONAL
for _code in ("C10-C12", "C13-C15", "C16", "C17", "C18", "C31_C32"):
    DEFAULT_NACE_GROUPS[_code] = SectorGroup.LOW_TECH
for _code in ("C19", "C22", "C23", "C24", "C25", "C33"):
    DEFAULT_NACE_GROUPS[_code] = SectorGroup.MEDIUM_TECH
for _code in ("C21", "C26", "C20", "C27", "C28", "C29", "C30"):
    DEFAULT_NACE_GROUPS[_code] = SectorGroup.HIGH_TECH
for _code in (
    "H50", "H51", "J58", "J59_J60", "J61", "J62_J63", "K64", "K65", "K66",
    "M69_M70", "M71", "M72", "M73", "M74_M75", "N78", "N80-N82", "O84",
    "P85", "Q86", "Q87_Q88", "R90-R92", "R93",
):
    DEFAULT_NACE_GROUPS[_code] = SectorGroup.KNOWLEDGE_SERVICES
for _code in (
    "D35", "E36", "E37-E39", "F", "G45", "G46", "G47", "H49", "H52", "H53",
    "I", "L68B", "L68A", "N77", "N79", "S94", "S95", "S96", "T", "U",
):
    DEFAULT_NACE_GROUPS[_code] = SectorGroup.OTHER_SERVICES
del _code


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(np.asarray(arr, dtype=float))
    out.setflags(write=False)
    return out


def _check_unique(name: str, items: Sequence[str]) -> None:
    if len(items) == 0:
        raise StructuralDataError(f"{name} list is empty")
    if len(set(items)) != len(items):
        raise StructuralDataError(f"{name} list has duplicates: {items!r}")


@dataclass(frozen=True)
class Dimensions:
    """Region/sector/skill index sets plus the designated special sectors.

    ``elec_sector`` and ``nelec_sector`` name the commodities that the
    electric / non-electric energy nests purchase; ``transport_sector``
    names the commodity that collects trade-margin payments in the origin
    region.
    """

    regions: tuple[str, ...]
    sectors: tuple[str, ...]
    skills: tuple[str, ...]
    sector_groups: Mapping[str, SectorGroup]
    first_year: int
    last_year: int
    elec_sector: str
    nelec_sector: str
    transport_sector: str

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))
        object.__setattr__(self, "sectors", tuple(self.sectors))
        object.__setattr__(self, "skills", tuple(self.skills))
        _check_unique("regions", self.regions)
        _check_unique("sectors", self.sectors)
        _check_unique("skills", self.skills)
        groups = {}
        for sec in self.sectors:
            if sec not in self.sector_groups:
                raise StructuralDataError(f"sector {sec!r} has no group assignment")
            groups[sec] = SectorGroup(self.sector_groups[sec])
        object.__setattr__(self, "sector_groups", groups)
        if self.first_year > self.last_year:
            raise StructuralDataError(
                f"first_year {self.first_year} > last_year {self.last_year}"
            )
        for name in ("elec_sector", "nelec_sector", "transport_sector"):
            sec = getattr(self, name)
            if sec not in self.sectors:
                raise StructuralDataError(f"{name} {sec!r} not in sector list")
        object.__setattr__(
            self, "_ridx", {r: k for k, r in enumerate(self.regions)}
        )
        object.__setattr__(
            self, "_sidx", {s: k for k, s in enumerate(self.sectors)}
        )
        object.__setattr__(
            self, "_eidx", {e: k for k, e in enumerate(self.skills)}
        )

    @property
    def n_regions(self) -> int:
        return len(self.regions)

    @property
    def n_sectors(self) -> int:
        return len(self.sectors)

    @property
    def n_skills(self) -> int:
        return len(self.skills)

    def region_index(self, region: str) -> int:
        try:
            return self._ridx[region]
        except KeyError:
            raise StructuralDataError(f"unknown region {region!r}") from None

    def sector_index(self, sector: str) -> int:
        try:
            return self._sidx[sector]
        except KeyError:
            raise StructuralDataError(f"unknown sector {sector!r}") from None

    def skill_index(self, skill: str) -> int:
        try:
            return self._eidx[skill]
        except KeyError:
            raise StructuralDataError(f"unknown skill {skill!r}") from None

    @property
    def elec_index(self) -> int:
        return self._sidx[self.elec_sector]

    @property
    def nelec_index(self) -> int:
        return self._sidx[self.nelec_sector]

    @property
    def transport_index(self) -> int:
        return self._sidx[self.transport_sector]

    def group_array(self) -> list[SectorGroup]:
        """Sector groups in sector order."""
        return [self.sector_groups[s] for s in self.sectors]

    @property
    def years(self) -> range:
        return range(self.first_year, self.last_year + 1)


def sector_group_of(dims: Dimensions, sector: str) -> SectorGroup:
    """Group membership of one sector (lookup error if unknown)."""
    if sector not in dims.sector_groups:
        raise StructuralDataError(f"unknown sector {sector!r}")
    return dims.sector_groups[sector]


# Array shape legend used throughout: R regions, I sectors (= commodities),
# E skills.  Bilateral arrays are [origin S, destination R, commodity I].
@dataclass(frozen=True)
class BenchmarkDataset:
    """One benchmark year of regional accounts and bilateral trade.

    All flow entries are values at unit prices.  ``io_use[r, i, j]`` is the
    value of commodity ``j`` used as *material* input by sector ``i`` in
    region ``r``; energy-nest purchases are recorded separately in
    ``energy_elec`` / ``energy_nelec`` (they draw on the designated energy
    commodities) so the KLEM nests stay distinguishable from the Leontief
    materials block.
    """

    dims: Dimensions
    output: np.ndarray          # [R, I] gross output value
    io_use: np.ndarray          # [R, I, J] materials use, purchaser i x commodity j
    wage_bill: np.ndarray       # [R, I, E]
    capital_rent: np.ndarray    # [R, I]
    energy_elec: np.ndarray     # [R, I]
    energy_nelec: np.ndarray    # [R, I]
    consumption: np.ndarray     # [R, I] household, at basic prices
    government: np.ndarray      # [R, I]
    inv_demand: np.ndarray      # [R, I] investment by commodity of origin
    inv_by_sector: np.ndarray   # [R, I] investment by destination sector
    prod_tax: np.ndarray        # [R, I]
    cons_tax: np.ndarray        # [R, I] on household purchases
    income_tax: np.ndarray      # [R]
    transfers: np.ndarray       # [R] government -> households
    hh_savings: np.ndarray      # [R]
    gov_savings: np.ndarray     # [R]
    foreign_transfers: np.ndarray  # [R], sums to zero over regions
    trade: np.ndarray           # [S, R, I] fob flow values, origin s -> dest r
    margin: np.ndarray          # [S, R, I] margin values on those flows
    k0: np.ndarray              # [R, I] initial capital stock
    a0: np.ndarray              # [R, I] initial TFP level
    rd0: np.ndarray             # [R, I] initial R&D intensity
    h0: np.ndarray              # [R] initial high-skill share

    def __post_init__(self):
        R, I, E = self.dims.n_regions, self.dims.n_sectors, self.dims.n_skills
        expected = {
            "output": (R, I), "io_use": (R, I, I), "wage_bill": (R, I, E),
            "capital_rent": (R, I), "energy_elec": (R, I),
            "energy_nelec": (R, I), "consumption": (R, I),
            "government": (R, I), "inv_demand": (R, I),
            "inv_by_sector": (R, I), "prod_tax": (R, I), "cons_tax": (R, I),
            "income_tax": (R,), "transfers": (R,), "hh_savings": (R,),
            "gov_savings": (R,), "foreign_transfers": (R,),
            "trade": (R, R, I), "margin": (R, R, I), "k0": (R, I),
            "a0": (R, I), "rd0": (R, I), "h0": (R,),
        }
        for name, shape in expected.items():
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise StructuralDataError(
                    f"{name} has shape {arr.shape}, expected {shape}"
                )
            if not np.all(np.isfinite(arr)):
                bad = np.argwhere(~np.isfinite(arr))[0]
                raise StructuralDataError(
                    f"{name} has non-finite entry at index {tuple(bad)}"
                )
            object.__setattr__(self, name, _freeze(arr))

    # --- derived benchmark aggregates ------------------------------------
    def exports(self) -> np.ndarray:
        """[R, I] fob exports by origin region and commodity."""
        return self.trade.sum(axis=1)

    def imports_delivered(self) -> np.ndarray:
        """[R, I] imports valued at delivered (fob + margin) prices."""
        return (self.trade + self.margin).sum(axis=0)

    def margin_supply(self) -> np.ndarray:
        """[R] margin services supplied by each origin's transport sector."""
        return self.margin.sum(axis=(1, 2))

    def labour_endowment(self) -> np.ndarray:
        """[R, E] benchmark labour supply (wage bill at unit wages)."""
        return self.wage_bill.sum(axis=1)

    def intermediate_use(self) -> np.ndarray:
        """[R, I] absorption of each commodity by producers, incl. energy."""
        use = self.io_use.sum(axis=1)  # sum over purchasing sectors
        use_e = np.zeros_like(use)
        # += so the two energy types accumulate when they share a commodity
        use_e[:, self.dims.elec_index] += self.energy_elec.sum(axis=1)
        use_e[:, self.dims.nelec_index] += self.energy_nelec.sum(axis=1)
        return use + use_e

    def absorption(self) -> np.ndarray:
        """[R, I] total demand for the composite commodity."""
        return (
            self.intermediate_use()
            + self.consumption
            + self.government
            + self.inv_demand
        )

    def domestic_sales(self) -> np.ndarray:
        """[R, I] output delivered to the home market."""
        ds = self.output - self.exports()
        ds[:, self.dims.transport_index] -= self.margin_supply()
        return ds

    def factor_income(self) -> np.ndarray:
        """[R] wages plus capital rents received by households."""
        return self.wage_bill.sum(axis=(1, 2)) + self.capital_rent.sum(axis=1)

    def savings_pool(self) -> np.ndarray:
        """[R] household + government + foreign savings."""
        return self.hh_savings + self.gov_savings + self.foreign_transfers


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    region: str | None
    sector: str | None
    residual: float
    rel_residual: float
    ok: bool


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[IdentityCheck, ...]
    tolerance: float

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def max_rel_residual(self) -> float:
        return max((c.rel_residual for c in self.checks), default=0.0)

    def failures(self) -> list[IdentityCheck]:
        return [c for c in self.checks if not c.ok]


def validate_benchmark(
    data: BenchmarkDataset, tolerance: float = 1e-8
) -> ValidationReport:
    """Check every benchmark accounting identity.

    Structural defects (negative stocks, flows without sources) raise
    :class:`StructuralDataError`; accounting identities are reported with
    their residuals and flagged when the relative residual exceeds
    ``tolerance``.
    """
    dims = data.dims
    checks: list[IdentityCheck] = []

    for name in ("k0", "a0"):
        arr = getattr(data, name)
        if np.any(arr <= 0):
            r, i = np.argwhere(arr <= 0)[0]
            raise StructuralDataError(
                f"{name}[{dims.regions[r]}, {dims.sectors[i]}] = "
                f"{arr[r, i]} must be positive"
            )
    for name in (
        "output", "io_use", "wage_bill", "capital_rent", "energy_elec",
        "energy_nelec", "consumption", "government", "inv_demand",
        "inv_by_sector", "prod_tax", "cons_tax", "trade", "margin", "rd0",
    ):
        arr = getattr(data, name)
        if np.any(arr < 0):
            idx = tuple(np.argwhere(arr < 0)[0])
            raise StructuralDataError(f"{name}{idx} is negative")
    if np.any(data.h0 < 0) or np.any(data.h0 > 1):
        raise StructuralDataError("h0 must lie in [0, 1]")
    if np.any(np.diagonal(data.trade, axis1=0, axis2=1) != 0):
        raise StructuralDataError("trade matrix has own-region flows")

    def add(name, resid, scale, region=None, sector=None):
        rel = abs(resid) / max(abs(scale), 1e-12)
        checks.append(
            IdentityCheck(name, region, sector, float(resid), float(rel),
                          rel <= tolerance)
        )

    # (1) sector revenue = sector cost
    cost = (
        data.io_use.sum(axis=2)
        + data.energy_elec + data.energy_nelec
        + data.wage_bill.sum(axis=2)
        + data.capital_rent
        + data.prod_tax
    )
    for r, region in enumerate(dims.regions):
        for i, sector in enumerate(dims.sectors):
            add("revenue=cost", data.output[r, i] - cost[r, i],
                data.output[r, i], region, sector)

    # (2) commodity balance: absorption + exports + margin supply
    #     = output + delivered imports
    supply = data.output + data.imports_delivered()
    use = data.absorption() + data.exports()
    use[:, dims.transport_index] += data.margin_supply()
    ds = data.domestic_sales()
    for r, region in enumerate(dims.regions):
        for i, sector in enumerate(dims.sectors):
            add("commodity_balance", use[r, i] - supply[r, i],
                supply[r, i], region, sector)
            if ds[r, i] < -1e-9 * max(data.output[r, i], 1.0):
                raise StructuralDataError(
                    f"domestic sales negative for [{region}, {sector}]: "
                    f"exports + margins exceed output"
                )

    # imports recorded with no bilateral source
    imp = data.trade.sum(axis=0)
    for r, region in enumerate(dims.regions):
        for i, sector in enumerate(dims.sectors):
            ext = data.absorption()[r, i] - ds[r, i]
            if ext > 1e-9 and imp[r, i] <= 0:
                raise StructuralDataError(
                    f"[{region}, {sector}] absorbs imports but has no "
                    f"bilateral source rows"
                )

    fy = data.factor_income()
    cons_spend = data.consumption.sum(axis=1) + data.cons_tax.sum(axis=1)
    for r, region in enumerate(dims.regions):
        # (3) household budget
        add("household_budget",
            fy[r] + data.transfers[r]
            - data.income_tax[r] - data.hh_savings[r] - cons_spend[r],
            fy[r], region)
        # (4) government budget
        revenue = (
            data.prod_tax[r].sum() + data.cons_tax[r].sum()
            + data.income_tax[r]
        )
        add("government_budget",
            revenue - data.transfers[r] - data.government[r].sum()
            - data.gov_savings[r],
            max(revenue, 1.0), region)
        # (5) savings pool = investment
        add("savings=investment",
            data.savings_pool()[r] - data.inv_demand[r].sum(),
            max(data.savings_pool()[r], 1.0), region)
        add("investment_destination",
            data.inv_by_sector[r].sum() - data.inv_demand[r].sum(),
            max(data.inv_demand[r].sum(), 1.0), region)
        # (6) external balance: imports - exports (+ margin sales) matches
        #     the recorded net transfers from abroad
        ext_balance = (
            data.imports_delivered()[r].sum()
            - data.exports()[r].sum() - data.margin_supply()[r]
        )
        add("external_balance",
            ext_balance - data.foreign_transfers[r],
            max(abs(ext_balance), 1.0), region)

    add("world_closure", data.foreign_transfers.sum(), 1.0)

    return ValidationReport(tuple(checks), tolerance)


@dataclass(frozen=True)
class ParameterSet:
    """Every calibrated constant the simulation needs.

    Shares and coefficients follow the calibrated-share CES convention:
    share parameters are benchmark value shares within each nest (they sum
    to one) and the scale is absorbed by evaluating the nest relative to
    benchmark prices of one.
    """

    dims: Dimensions

    # production nests
    share_m: np.ndarray        # [R, I] materials share in the top nest (a)
    share_e: np.ndarray        # [R, I] energy share in the KLE nest (b)
    share_k: np.ndarray        # [R, I] capital share in the KL nest (c)
    share_nelec: np.ndarray    # [R, I] non-electric share in the E nest (d)
    share_skill: np.ndarray    # [R, I, E] skill shares of the labour nest (f)
    sigma_m_kle: np.ndarray    # [I]
    sigma_e_kl: np.ndarray     # [I]
    sigma_k_l: np.ndarray      # [I]
    sigma_elec: np.ndarray     # [I]
    sigma_skill: np.ndarray    # [I]
    mat_coef: np.ndarray       # [R, I, J] commodity j per unit materials bundle
    input_scale: np.ndarray    # [R, I] benchmark input cost per unit output
    a0: np.ndarray             # [R, I] benchmark TFP (technology reference)

    # Armington trade
    share_dom: np.ndarray      # [R, I] domestic value share
    share_imp: np.ndarray      # [R, I]
    share_origin: np.ndarray   # [S, R, I] bilateral delivered-value shares
    sigma_arm: np.ndarray      # [I]
    sigma_bilat: np.ndarray    # [I] = 2 * sigma_arm
    margin_coef: np.ndarray    # [S, R, I] margin per unit of flow
    tradable: np.ndarray       # [R, I] bool mask

    # demand and accounts
    mu_h: np.ndarray           # [R, I] household subsistence quantities
    gamma_h: np.ndarray        # [R, I]
    mu_g: np.ndarray           # [R, I] government LES
    gamma_g: np.ndarray        # [R, I]
    gov_bundle0: np.ndarray    # [R, I] benchmark purchases (endogenous mode)
    tau_prod: np.ndarray       # [R, I]
    tau_cons: np.ndarray       # [R, I]
    tau_inc: np.ndarray        # [R]
    save_rate_h: np.ndarray    # [R] share of gross disposable income saved
    save_share_g: np.ndarray   # [R] government savings share of revenue
    transfers0: np.ndarray     # [R] indexed to the regional CPI
    foreign_transfers0: np.ndarray  # [R] indexed to the world price index
    labour_supply: np.ndarray  # [R, E]
    inv_coef: np.ndarray       # [R, I] Leontief investment bundle coefficients
    cpi_weights: np.ndarray    # [R, I] consumer spending shares
    world_weights: np.ndarray  # [R] benchmark GDP shares
    psi_capital: np.ndarray    # [R, I] service flow per unit of stock

    # dynamics
    delta: np.ndarray          # [I] depreciation
    growth_rate: np.ndarray    # [R] steady-state growth g_r
    theta_inv: float           # speed of investment adjustment
    attractor: np.ndarray      # [R, I] gravity attraction B
    wkr_ratio_form: bool = False  # (r/PI)/(g+delta) instead of (r/PI)*(g+delta)
    pooled_investment: bool = False  # single cross-region savings pool

    # growth engine (per sector, mapped from sector groups)
    growth_coefs: np.ndarray = field(default=None)  # [I, 6] b1..b6
    rd_persistence: np.ndarray = field(default=None)  # [I] AR(1) a
    rd_constant: np.ndarray = field(default=None)     # [I] AR(1) c

    def __post_init__(self):
        for f_ in fields(self):
            if f_.name in ("dims", "theta_inv", "wkr_ratio_form",
                           "pooled_investment"):
                continue
            val = getattr(self, f_.name)
            if val is None:
                raise StructuralDataError(f"parameter {f_.name} missing")
            arr = np.asarray(val)
            if f_.name == "tradable":
                arr = arr.astype(bool)
                arr.setflags(write=False)
                object.__setattr__(self, f_.name, arr)
            else:
                object.__setattr__(self, f_.name, _freeze(arr))
        if not np.allclose(self.sigma_bilat, 2.0 * self.sigma_arm, rtol=0,
                           atol=0):
            raise StructuralDataError(
                "bilateral substitution elasticity must be exactly twice "
                "the top Armington elasticity"
            )
        if np.any(self.sigma_arm <= 0):
            raise StructuralDataError("Armington elasticities must be positive")
        if np.any((self.delta < 0) | (self.delta > 1)):
            raise StructuralDataError("depreciation rates must lie in [0, 1]")
        for name in ("gamma_h", "gamma_g"):
            g = getattr(self, name)
            if np.any(np.abs(g.sum(axis=1) - 1.0) > 1e-9):
                raise StructuralDataError(f"{name} rows must sum to one")

    @property
    def rho_arm(self) -> np.ndarray:
        return (self.sigma_arm - 1.0) / self.sigma_arm


@dataclass(frozen=True)
class SolveTrace:
    """Iteration history of one within-period solve."""

    iterations: int
    residuals: tuple[float, ...]      # max relative residual per iteration
    step_sizes: tuple[float, ...]
    converged: bool
    dropped_condition: str


_STATE_ARRAYS = (
    "prices", "wages", "rents", "real_investment", "activity",
    "composite_prices", "consumer_prices", "inv_price", "cpi",
    "consumption", "government_consumption", "investment_demand",
    "imports", "trade_flows", "capital", "tfp", "tfp_prev", "rd_intensity",
    "human_capital", "savings", "tax_revenue", "gdp", "gdp_real",
)


@dataclass(frozen=True)
class EconomyState:
    """One period's prices, quantities, incomes and stocks."""

    year: int
    prices: np.ndarray              # [R, I] domestic producer prices
    wages: np.ndarray               # [R, E]
    rents: np.ndarray               # [R, I] capital service prices
    real_investment: np.ndarray     # [R] investment bundle quantity
    activity: np.ndarray            # [R, I] domestic output X^D
    composite_prices: np.ndarray    # [R, I] Armington composite prices
    consumer_prices: np.ndarray     # [R, I] composite incl. consumption tax
    inv_price: np.ndarray           # [R] investment price index
    cpi: np.ndarray                 # [R]
    consumption: np.ndarray         # [R, I]
    government_consumption: np.ndarray  # [R, I]
    investment_demand: np.ndarray   # [R, I]
    imports: np.ndarray             # [R, I] import composite quantity
    trade_flows: np.ndarray         # [S, R, I]
    capital: np.ndarray             # [R, I] stocks
    tfp: np.ndarray                 # [R, I]
    tfp_prev: np.ndarray            # [R, I] prior period, for frontier growth
    rd_intensity: np.ndarray        # [R, I]
    human_capital: np.ndarray       # [R]
    savings: np.ndarray             # [R] pool available for investment
    tax_revenue: np.ndarray         # [R]
    gdp: np.ndarray                 # [R] nominal, income side
    gdp_real: np.ndarray            # [R] double-deflated at benchmark prices
    trace: SolveTrace | None = None

    def __post_init__(self):
        for name in _STATE_ARRAYS:
            object.__setattr__(self, name, _freeze(getattr(self, name)))
        for name in ("prices", "wages", "rents", "composite_prices"):
            if np.any(getattr(self, name) <= 0):
                raise DomainError(f"state {name} must be strictly positive")

    def replace(self, **kwargs) -> "EconomyState":
        data = {f_.name: getattr(self, f_.name) for f_ in fields(self)}
        data.update(kwargs)
        return EconomyState(**data)

    def equals(self, other: "EconomyState") -> bool:
        """Bit-for-value equality of all numeric content (trace ignored)."""
        if self.year != other.year:
            return False
        return all(
            np.array_equal(getattr(self, n), getattr(other, n))
            for n in _STATE_ARRAYS
        )
