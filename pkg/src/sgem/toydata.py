"""Synthetic, exactly-balanced benchmark datasets and estimation panels.

The benchmark generator draws technology and trade patterns at random and
then derives every residual account (household savings, government savings,
foreign transfers) from the accounting identities, so the result balances
to machine precision by construction.  The panel generator simulates the
TFP growth equation with a self-consistent (max-based) frontier, so the
estimators can recover the embedded coefficients exactly on noiseless data.
"""

from __future__ import annotations

import numpy as np

from .core import BenchmarkDataset, Dimensions, DEFAULT_NACE_GROUPS, SectorGroup
from .growth import DEFAULT_RD_PROCESS, long_run_rd

SKILLS = ("low", "medium", "high")

#: seed of the canonical synthetic estimation panel
BUNDLED_PANEL_SEED = 1

# representative NACE codes, cycled to the requested sector count
_SECTOR_POOL = (
    "A01", "C26", "D35", "C19", "H49", "J62_J63",
    "C10-C12", "Q86", "K64", "G47", "F", "C24",
)


def toy_dimensions(n_regions: int, n_sectors: int,
                   first_year: int = 2020, last_year: int = 2050) -> Dimensions:
    if n_regions < 2 or n_sectors < 2:
        raise ValueError("toy models need at least 2 regions and 2 sectors")
    if n_sectors > len(_SECTOR_POOL):
        raise ValueError(f"at most {len(_SECTOR_POOL)} toy sectors supported")
    sectors = _SECTOR_POOL[:n_sectors]
    groups = {s: DEFAULT_NACE_GROUPS[s] for s in sectors}
    elec = "D35" if "D35" in sectors else sectors[-1]
    nelec = "C19" if "C19" in sectors else elec
    transport = "H49" if "H49" in sectors else elec
    return Dimensions(
        regions=tuple(f"R{k:02d}" for k in range(n_regions)),
        sectors=sectors,
        skills=SKILLS,
        sector_groups=groups,
        first_year=first_year,
        last_year=last_year,
        elec_sector=elec,
        nelec_sector=nelec,
        transport_sector=transport,
    )


def make_toy(seed: int, n_regions: int = 2, n_sectors: int = 2,
             tfp_spread: float = 0.05, trade_intensity: float = 0.15,
             first_year: int = 2020, last_year: int = 2050,
             delta: np.ndarray | None = None,
             nontradable_sectors: tuple = ()) -> BenchmarkDataset:
    """A balanced synthetic benchmark; identical seeds give identical data.

    ``nontradable_sectors`` names commodities whose bilateral flows are
    zeroed before the residual accounts are derived, so the dataset stays
    exactly balanced with those goods purely domestic.
    """
    rng = np.random.default_rng(seed)
    dims = toy_dimensions(n_regions, n_sectors, first_year, last_year)
    R, I, E = dims.n_regions, dims.n_sectors, dims.n_skills
    trn = dims.transport_index

    output = rng.uniform(80.0, 120.0, size=(R, I))

    # cost structure: coefficients per unit of output
    aio = rng.uniform(0.03, 0.08, size=(R, I, I)) / max(I / 4.0, 1.0)
    a_el = rng.uniform(0.01, 0.04, size=(R, I))
    a_ne = rng.uniform(0.01, 0.04, size=(R, I))
    tau_p = rng.uniform(0.02, 0.05, size=(R, I))
    va_share = 1.0 - aio.sum(axis=2) - a_el - a_ne - tau_p
    if np.any(va_share <= 0.1):
        raise RuntimeError("toy draw left too little value added")

    io_use = aio * output[:, :, None]
    energy_elec = a_el * output
    energy_nelec = a_ne * output
    prod_tax = tau_p * output
    va = va_share * output
    cap_share = rng.uniform(0.30, 0.45, size=(R, I))
    capital_rent = cap_share * va
    skill_mix = rng.uniform(0.5, 1.5, size=(R, 1, E))
    skill_mix = skill_mix / skill_mix.sum(axis=2, keepdims=True)
    wage_bill = ((1.0 - cap_share) * va)[:, :, None] * skill_mix

    # bilateral trade with per-flow margins paid to the origin's transport
    xi = rng.uniform(0.5, 1.5, size=(R, R, I)) * trade_intensity / (R - 1)
    trade = xi * output[:, None, :]
    idx = np.arange(R)
    trade[idx, idx, :] = 0.0
    m_coef = rng.uniform(0.02, 0.08, size=(R, R, I))
    m_coef[idx, idx, :] = 0.0
    for sector in nontradable_sectors:
        trade[:, :, dims.sector_index(sector)] = 0.0
    margin = m_coef * trade

    exports = trade.sum(axis=1)
    margin_supply = margin.sum(axis=(1, 2))
    ds = output - exports
    ds[:, trn] -= margin_supply
    if np.any(ds <= 0):
        raise RuntimeError("toy draw exported more than it produced")

    absorption = ds + (trade + margin).sum(axis=0)
    producer_use = io_use.sum(axis=1)
    producer_use[:, dims.elec_index] += energy_elec.sum(axis=1)
    producer_use[:, dims.nelec_index] += energy_nelec.sum(axis=1)
    final_demand = absorption - producer_use
    if np.any(final_demand <= 0):
        raise RuntimeError("toy draw left no room for final demand")

    # capital stocks sized so benchmark investment replaces depreciation;
    # the default depreciation matches the calibration default so bundled
    # toys are steady states out of the box
    psi = rng.uniform(0.12, 0.18, size=(R, I))
    k0 = capital_rent / psi
    if delta is None:
        delta = np.full(I, 0.05)
    else:
        delta = np.asarray(delta, dtype=float)
    inv_by_sector = delta[None, :] * k0
    inv_total = inv_by_sector.sum(axis=1)

    fd_total = final_demand.sum(axis=1)
    gov_total = rng.uniform(0.12, 0.18, size=R) * fd_total
    cons_total = fd_total - gov_total - inv_total
    if np.any(cons_total <= 0):
        raise RuntimeError("toy draw left no room for consumption")

    shape = final_demand / fd_total[:, None]
    inv_demand = inv_total[:, None] * shape
    government = gov_total[:, None] * shape
    consumption = cons_total[:, None] * shape

    tau_c = rng.uniform(0.05, 0.12, size=R)
    cons_tax = tau_c[:, None] * consumption

    factor_income = wage_bill.sum(axis=(1, 2)) + capital_rent.sum(axis=1)
    transfers = rng.uniform(0.03, 0.08, size=R) * factor_income
    tau_y = rng.uniform(0.08, 0.15, size=R)
    income_tax = tau_y * (factor_income + transfers)

    # residual accounts close every identity exactly
    foreign_transfers = (
        (trade + margin).sum(axis=0).sum(axis=1)
        - exports.sum(axis=1) - margin_supply
    )
    hh_savings = (
        factor_income + transfers - income_tax
        - consumption.sum(axis=1) - cons_tax.sum(axis=1)
    )
    gov_savings = (
        prod_tax.sum(axis=1) + cons_tax.sum(axis=1) + income_tax
        - transfers - government.sum(axis=1)
    )
    if np.any(hh_savings <= 0):
        raise RuntimeError("toy draw produced nonpositive household savings")

    a0 = np.ones((R, I))
    if tfp_spread > 0 and R > 1:
        a0[1:] = 1.0 - tfp_spread * rng.uniform(0.2, 1.0, size=(R - 1, I))

    groups = dims.group_array()
    rd0 = np.tile(
        np.array([long_run_rd(DEFAULT_RD_PROCESS[g]) for g in groups]),
        (R, 1),
    )
    h0 = rng.uniform(0.2, 0.4, size=R)

    return BenchmarkDataset(
        dims=dims, output=output, io_use=io_use, wage_bill=wage_bill,
        capital_rent=capital_rent, energy_elec=energy_elec,
        energy_nelec=energy_nelec, consumption=consumption,
        government=government, inv_demand=inv_demand,
        inv_by_sector=inv_by_sector, prod_tax=prod_tax, cons_tax=cons_tax,
        income_tax=income_tax, transfers=transfers, hh_savings=hh_savings,
        gov_savings=gov_savings, foreign_transfers=foreign_transfers,
        trade=trade, margin=margin, k0=k0, a0=a0, rd0=rd0, h0=h0,
    )


def stationary_growth_tables():
    """Growth overrides that freeze TFP so a balanced toy is a steady state."""
    zeros = (0.0,) * 6
    return {g: zeros for g in SectorGroup}


# ---------------------------------------------------------------------------
# synthetic estimation panel


def make_panel(seed: int, n_countries: int = 28, n_sectors: int = 6,
               n_years: int = 20, noise: float = 0.01,
               coefs=(0.10, -0.47, 0.03, 0.29, 0.26, 0.47)):
    """Panel simulated from the TFP growth equation with max-based frontier.

    Returns ``(rows, truth)`` where rows are dicts with keys
    country/sector/year/tfp/h/rd and truth holds the generator coefficients
    and fixed effects.  Because the frontier in the simulation is the
    realised cross-country maximum (found by fixed-point iteration each
    year), the generated data satisfies the estimating equation exactly.
    """
    rng = np.random.default_rng(seed)
    b1, b2, b3, b4, b5, b6 = coefs
    sectors = _SECTOR_POOL[:n_sectors]
    countries = [f"C{k:02d}" for k in range(n_countries)]
    groups = [DEFAULT_NACE_GROUPS[s] for s in sectors]

    fe_sector = rng.normal(0.0, 0.004, size=n_sectors)
    fe_sector[0] = 0.0

    ln_tfp = np.zeros((n_countries, n_sectors, n_years))
    ln_tfp[0, :, 0] = 0.0
    ln_tfp[1:, :, 0] = -rng.uniform(0.3, 1.2, size=(n_countries - 1, n_sectors))

    # country 0 is a structural leader: higher absorptive capacity keeps it
    # at the frontier and its disturbance is zero, so the frontier-growth
    # regressor shares no noise with any follower's disturbance
    h = np.zeros((n_countries, n_years))
    h[0, 0] = 0.55
    h[1:, 0] = rng.uniform(0.15, 0.45, size=n_countries - 1)
    rd = np.zeros((n_countries, n_sectors, n_years))
    for s, g in enumerate(groups):
        a_g, c_g = DEFAULT_RD_PROCESS[g]
        lr = long_run_rd((a_g, c_g))
        rd[0, s, 0] = 2.5 * lr
        rd[1:, s, 0] = lr * rng.uniform(0.7, 1.3, size=n_countries - 1)

    eps = rng.normal(0.0, noise, size=(n_countries, n_sectors, n_years)) \
        if noise > 0 else np.zeros((n_countries, n_sectors, n_years))
    eps[0] = 0.0

    for t in range(1, n_years):
        # H and RD innovations are independent of the equation disturbance,
        # so the leader's paths may vary without creating endogeneity
        h[1:, t] = np.clip(
            h[1:, t - 1] + rng.normal(0, 0.01, n_countries - 1), 0.0, 1.0
        )
        h[0, t] = np.clip(h[0, t - 1] + rng.normal(0, 0.02), 0.45, 0.65)
        for s, g in enumerate(groups):
            a_g, c_g = DEFAULT_RD_PROCESS[g]
            rd[1:, s, t] = np.maximum(
                a_g * rd[1:, s, t - 1] + c_g
                + rng.normal(0, 0.15 * c_g, n_countries - 1),
                0.0,
            )
            rd[0, s, t] = np.maximum(
                a_g * rd[0, s, t - 1] + 2.5 * c_g
                + rng.normal(0, 0.4 * c_g),
                0.0,
            )

        prev = ln_tfp[:, :, t - 1]
        front_prev = prev.max(axis=0)
        gap = prev - front_prev[None, :]
        base = (
            b2 * gap
            + b3 * h[:, t - 1][:, None] + b4 * h[:, t - 1][:, None] * gap
            + b5 * rd[:, :, t - 1] + b6 * rd[:, :, t - 1] * gap
            + fe_sector[None, :] + eps[:, :, t]
        )
        # frontier growth is contemporaneous: solve the small fixed point
        fg = np.zeros(n_sectors)
        for _ in range(200):
            cur = prev + base + b1 * fg[None, :]
            fg_new = cur.max(axis=0) - front_prev
            if np.max(np.abs(fg_new - fg)) < 1e-14:
                fg = fg_new
                break
            fg = fg_new
        ln_tfp[:, :, t] = prev + base + b1 * fg[None, :]

    rows = []
    for c in range(n_countries):
        for s in range(n_sectors):
            for t in range(n_years):
                rows.append({
                    "country": countries[c],
                    "sector": sectors[s],
                    "year": 2000 + t,
                    "tfp": float(np.exp(ln_tfp[c, s, t])),
                    "h": float(h[c, t]),
                    "rd": float(rd[c, s, t]),
                })
    truth = {
        "coefs": tuple(float(v) for v in coefs),
        "fe_sector": {sectors[s]: float(fe_sector[s])
                      for s in range(n_sectors)},
        "noise": float(noise),
    }
    return rows, truth
