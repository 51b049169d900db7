"""File formats: model manifest + CSV tables, JSON snapshots, reports.

A model on disk is a JSON manifest naming the dimensions plus five CSV
tables: one long-format ``sam_<region>.csv`` per region (columns
row, col, value), a global ``trade.csv`` (origin, destination, sector,
value, margin_value), ``factors.csv`` (region, sector, skill, value; the
skill column uses ``capital`` for rent rows), ``initial_stocks.csv``
(region, sector, K0, A0, RD0) and ``human_capital.csv`` (region, H0).
All CSVs are UTF-8 with a header row and plain decimal points.  Floats are
written with shortest-round-trip repr, so save/load is bit-exact.

SAM account names: ``act:<sector>`` activities, ``com:<sector>``
commodities, ``nrg:elec`` / ``nrg:nelec`` the energy-nest purchases (kept
separate from the materials block so the KLEM nests stay recoverable),
``tax:prod`` / ``tax:cons:<sector>`` / ``tax:inc`` taxes, ``kap:<sector>``
investment by destination, and ``hh`` / ``gov`` / ``inv`` / ``sav`` /
``row`` institutions.
"""

from __future__ import annotations

import json
from dataclasses import fields
from pathlib import Path

import numpy as np
import pandas as pd

from .core import (
    BenchmarkDataset,
    Dimensions,
    EconomyState,
    ParameterSet,
    StructuralDataError,
)

_MANIFEST_NAME = "manifest.json"


def _read_csv(path) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")


def _write_csv(df: pd.DataFrame, path: Path) -> None:
    # %.17g round-trips every float64 exactly
    df.to_csv(path, index=False, float_format="%.17g")


def _require(df: pd.DataFrame, cols, path) -> None:
    missing = [c for c in cols if c not in df.columns]
    if missing:
        raise StructuralDataError(f"{path} missing columns: {missing}")


# --- model (dimensions + benchmark) ---------------------------------------

def save_model(data: BenchmarkDataset, directory) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    dims = data.dims

    manifest = {
        "regions": list(dims.regions),
        "sectors": list(dims.sectors),
        "skills": list(dims.skills),
        "sector_groups": {s: g.value for s, g in dims.sector_groups.items()},
        "first_year": dims.first_year,
        "last_year": dims.last_year,
        "elec_sector": dims.elec_sector,
        "nelec_sector": dims.nelec_sector,
        "transport_sector": dims.transport_sector,
        "files": {
            "sam": [f"sam_{r}.csv" for r in dims.regions],
            "trade": "trade.csv",
            "factors": "factors.csv",
            "initial_stocks": "initial_stocks.csv",
            "human_capital": "human_capital.csv",
        },
    }
    with open(directory / _MANIFEST_NAME, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)

    for r, region in enumerate(dims.regions):
        rows = []

        def cell(row, col, value):
            rows.append({"row": row, "col": col, "value": float(value)})

        for i, sec_i in enumerate(dims.sectors):
            cell(f"act:{sec_i}", f"com:{sec_i}", data.output[r, i])
            for j, sec_j in enumerate(dims.sectors):
                cell(f"com:{sec_j}", f"act:{sec_i}", data.io_use[r, i, j])
            cell("nrg:elec", f"act:{sec_i}", data.energy_elec[r, i])
            cell("nrg:nelec", f"act:{sec_i}", data.energy_nelec[r, i])
            cell("tax:prod", f"act:{sec_i}", data.prod_tax[r, i])
            cell(f"com:{sec_i}", "hh", data.consumption[r, i])
            cell(f"tax:cons:{sec_i}", "hh", data.cons_tax[r, i])
            cell(f"com:{sec_i}", "gov", data.government[r, i])
            cell(f"com:{sec_i}", "inv", data.inv_demand[r, i])
            cell(f"kap:{sec_i}", "inv", data.inv_by_sector[r, i])
        cell("tax:inc", "hh", data.income_tax[r])
        cell("hh", "gov", data.transfers[r])
        cell("sav", "hh", data.hh_savings[r])
        cell("sav", "gov", data.gov_savings[r])
        cell("sav", "row", data.foreign_transfers[r])
        _write_csv(pd.DataFrame(rows), directory / f"sam_{region}.csv")

    trade_rows = []
    for s, origin in enumerate(dims.regions):
        for r, dest in enumerate(dims.regions):
            if s == r:
                continue
            for i, sector in enumerate(dims.sectors):
                trade_rows.append({
                    "origin": origin, "destination": dest, "sector": sector,
                    "value": float(data.trade[s, r, i]),
                    "margin_value": float(data.margin[s, r, i]),
                })
    _write_csv(pd.DataFrame(trade_rows), directory / "trade.csv")

    factor_rows = []
    for r, region in enumerate(dims.regions):
        for i, sector in enumerate(dims.sectors):
            for e, skill in enumerate(dims.skills):
                factor_rows.append({
                    "region": region, "sector": sector, "skill": skill,
                    "value": float(data.wage_bill[r, i, e]),
                })
            factor_rows.append({
                "region": region, "sector": sector, "skill": "capital",
                "value": float(data.capital_rent[r, i]),
            })
    _write_csv(pd.DataFrame(factor_rows), directory / "factors.csv")

    stock_rows = [
        {"region": region, "sector": sector,
         "K0": float(data.k0[r, i]), "A0": float(data.a0[r, i]),
         "RD0": float(data.rd0[r, i])}
        for r, region in enumerate(dims.regions)
        for i, sector in enumerate(dims.sectors)
    ]
    _write_csv(pd.DataFrame(stock_rows), directory / "initial_stocks.csv")
    _write_csv(
        pd.DataFrame([{"region": region, "H0": float(data.h0[r])}
                      for r, region in enumerate(dims.regions)]),
        directory / "human_capital.csv",
    )
    return directory / _MANIFEST_NAME


def load_model(manifest_path) -> BenchmarkDataset:
    manifest_path = Path(manifest_path)
    if manifest_path.is_dir():
        manifest_path = manifest_path / _MANIFEST_NAME
    if not manifest_path.exists():
        raise StructuralDataError(f"manifest not found: {manifest_path}")
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    directory = manifest_path.parent

    dims = Dimensions(
        regions=tuple(manifest["regions"]),
        sectors=tuple(manifest["sectors"]),
        skills=tuple(manifest["skills"]),
        sector_groups=manifest["sector_groups"],
        first_year=int(manifest["first_year"]),
        last_year=int(manifest["last_year"]),
        elec_sector=manifest["elec_sector"],
        nelec_sector=manifest["nelec_sector"],
        transport_sector=manifest["transport_sector"],
    )
    R, I, E = dims.n_regions, dims.n_sectors, dims.n_skills
    arrays = {
        "output": np.zeros((R, I)), "io_use": np.zeros((R, I, I)),
        "wage_bill": np.zeros((R, I, E)), "capital_rent": np.zeros((R, I)),
        "energy_elec": np.zeros((R, I)), "energy_nelec": np.zeros((R, I)),
        "consumption": np.zeros((R, I)), "government": np.zeros((R, I)),
        "inv_demand": np.zeros((R, I)), "inv_by_sector": np.zeros((R, I)),
        "prod_tax": np.zeros((R, I)), "cons_tax": np.zeros((R, I)),
        "income_tax": np.zeros(R), "transfers": np.zeros(R),
        "hh_savings": np.zeros(R), "gov_savings": np.zeros(R),
        "foreign_transfers": np.zeros(R),
        "trade": np.zeros((R, R, I)), "margin": np.zeros((R, R, I)),
        "k0": np.zeros((R, I)), "a0": np.zeros((R, I)),
        "rd0": np.zeros((R, I)), "h0": np.zeros(R),
    }

    for r, region in enumerate(dims.regions):
        path = directory / f"sam_{region}.csv"
        if not path.exists():
            raise StructuralDataError(f"missing SAM file: {path}")
        sam = _read_csv(path)
        _require(sam, ("row", "col", "value"), path)
        for row, col, value in sam.itertuples(index=False):
            _read_sam_cell(arrays, dims, r, str(row), str(col), float(value),
                           path)

    trade_path = directory / manifest["files"]["trade"]
    trade = _read_csv(trade_path)
    _require(trade, ("origin", "destination", "sector", "value",
                     "margin_value"), trade_path)
    for origin, dest, sector, value, margin in trade.itertuples(index=False):
        s = dims.region_index(str(origin))
        r = dims.region_index(str(dest))
        i = dims.sector_index(str(sector))
        arrays["trade"][s, r, i] = float(value)
        arrays["margin"][s, r, i] = float(margin)

    fpath = directory / manifest["files"]["factors"]
    factors = _read_csv(fpath)
    _require(factors, ("region", "sector", "skill", "value"), fpath)
    for region, sector, skill, value in factors.itertuples(index=False):
        r = dims.region_index(str(region))
        i = dims.sector_index(str(sector))
        if str(skill) == "capital":
            arrays["capital_rent"][r, i] = float(value)
        else:
            arrays["wage_bill"][r, i, dims.skill_index(str(skill))] = \
                float(value)

    spath = directory / manifest["files"]["initial_stocks"]
    stocks = _read_csv(spath)
    _require(stocks, ("region", "sector", "K0", "A0", "RD0"), spath)
    for region, sector, k0, a0, rd0 in stocks.itertuples(index=False):
        r = dims.region_index(str(region))
        i = dims.sector_index(str(sector))
        arrays["k0"][r, i] = float(k0)
        arrays["a0"][r, i] = float(a0)
        arrays["rd0"][r, i] = float(rd0)

    hpath = directory / manifest["files"]["human_capital"]
    hc = _read_csv(hpath)
    _require(hc, ("region", "H0"), hpath)
    for region, h0 in hc.itertuples(index=False):
        arrays["h0"][dims.region_index(str(region))] = float(h0)

    return BenchmarkDataset(dims=dims, **arrays)


def _read_sam_cell(arrays, dims, r, row, col, value, path):
    def sector_of(tag, name):
        return dims.sector_index(name[len(tag):])

    if row.startswith("act:") and col.startswith("com:"):
        arrays["output"][r, sector_of("act:", row)] = value
    elif row.startswith("com:") and col.startswith("act:"):
        i = sector_of("act:", col)
        j = sector_of("com:", row)
        arrays["io_use"][r, i, j] = value
    elif row == "nrg:elec" and col.startswith("act:"):
        arrays["energy_elec"][r, sector_of("act:", col)] = value
    elif row == "nrg:nelec" and col.startswith("act:"):
        arrays["energy_nelec"][r, sector_of("act:", col)] = value
    elif row == "tax:prod" and col.startswith("act:"):
        arrays["prod_tax"][r, sector_of("act:", col)] = value
    elif row.startswith("com:") and col == "hh":
        arrays["consumption"][r, sector_of("com:", row)] = value
    elif row.startswith("tax:cons:") and col == "hh":
        arrays["cons_tax"][r, sector_of("tax:cons:", row)] = value
    elif row.startswith("com:") and col == "gov":
        arrays["government"][r, sector_of("com:", row)] = value
    elif row.startswith("com:") and col == "inv":
        arrays["inv_demand"][r, sector_of("com:", row)] = value
    elif row.startswith("kap:") and col == "inv":
        arrays["inv_by_sector"][r, sector_of("kap:", row)] = value
    elif row == "tax:inc" and col == "hh":
        arrays["income_tax"][r] = value
    elif row == "hh" and col == "gov":
        arrays["transfers"][r] = value
    elif row == "sav" and col == "hh":
        arrays["hh_savings"][r] = value
    elif row == "sav" and col == "gov":
        arrays["gov_savings"][r] = value
    elif row == "sav" and col == "row":
        arrays["foreign_transfers"][r] = value
    else:
        raise StructuralDataError(
            f"{path}: unrecognised SAM cell ({row!r}, {col!r})"
        )


# --- JSON snapshots --------------------------------------------------------

def dataset_to_dict(data: BenchmarkDataset) -> dict:
    out = {"dims": _dims_to_dict(data.dims)}
    for f in fields(data):
        if f.name == "dims":
            continue
        out[f.name] = getattr(data, f.name).tolist()
    return out


def dataset_from_dict(payload: dict) -> BenchmarkDataset:
    dims = _dims_from_dict(payload["dims"])
    kwargs = {k: np.asarray(v, dtype=float)
              for k, v in payload.items() if k != "dims"}
    return BenchmarkDataset(dims=dims, **kwargs)


def _dims_to_dict(dims: Dimensions) -> dict:
    return {
        "regions": list(dims.regions), "sectors": list(dims.sectors),
        "skills": list(dims.skills),
        "sector_groups": {s: g.value for s, g in dims.sector_groups.items()},
        "first_year": dims.first_year, "last_year": dims.last_year,
        "elec_sector": dims.elec_sector, "nelec_sector": dims.nelec_sector,
        "transport_sector": dims.transport_sector,
    }


def _dims_from_dict(payload: dict) -> Dimensions:
    return Dimensions(**payload)


def params_to_dict(params: ParameterSet) -> dict:
    out = {"dims": _dims_to_dict(params.dims)}
    for f in fields(params):
        if f.name == "dims":
            continue
        val = getattr(params, f.name)
        if isinstance(val, np.ndarray):
            out[f.name] = val.tolist()
        else:
            out[f.name] = val
    return out


def params_from_dict(payload: dict) -> ParameterSet:
    dims = _dims_from_dict(payload["dims"])
    kwargs = {}
    for f in fields(ParameterSet):
        if f.name == "dims":
            continue
        val = payload[f.name]
        if f.name in ("theta_inv", "wkr_ratio_form", "pooled_investment"):
            kwargs[f.name] = val
        else:
            kwargs[f.name] = np.asarray(val)
    return ParameterSet(dims=dims, **kwargs)


def state_to_dict(state: EconomyState) -> dict:
    out = {"year": state.year}
    for f in fields(state):
        if f.name in ("year", "trace"):
            continue
        out[f.name] = getattr(state, f.name).tolist()
    return out


def state_from_dict(payload: dict) -> EconomyState:
    kwargs = {"year": int(payload["year"]), "trace": None}
    for f in fields(EconomyState):
        if f.name in ("year", "trace"):
            continue
        kwargs[f.name] = np.asarray(payload[f.name], dtype=float)
    return EconomyState(**kwargs)


def save_json(payload: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


# --- reports ---------------------------------------------------------------

def write_calibration_report(model, residual: float, path) -> None:
    """Parameter dump plus the benchmark replication residual."""
    params = model.params
    dims = model.dims
    rows = []
    blocks = {
        ("M|KLE", "share_m"): params.share_m,
        ("E|KL", "share_e"): params.share_e,
        ("K|L", "share_k"): params.share_k,
        ("NELEC|ELEC", "share_nelec"): params.share_nelec,
        ("armington", "share_dom"): params.share_dom,
        ("armington", "share_imp"): params.share_imp,
        ("les_household", "mu"): params.mu_h,
        ("les_household", "gamma"): params.gamma_h,
        ("les_government", "mu"): params.mu_g,
        ("les_government", "gamma"): params.gamma_g,
        ("taxes", "tau_prod"): params.tau_prod,
        ("taxes", "tau_cons"): params.tau_cons,
        ("investment", "attractor"): params.attractor,
    }
    for (nest, name), arr in blocks.items():
        for r, region in enumerate(dims.regions):
            for i, sector in enumerate(dims.sectors):
                rows.append({
                    "nest": nest, "region": region, "sector": sector,
                    "parameter": name, "value": float(arr[r, i]),
                    "replication_residual": residual,
                })
    _write_csv(pd.DataFrame(rows), Path(path))


def read_growth_coefficients(path) -> dict:
    """Sector-group growth coefficients from CSV (group, b1..b6)."""
    from .core import SectorGroup

    df = _read_csv(path)
    _require(df, ("group", "b1", "b2", "b3", "b4", "b5", "b6"), path)
    return {
        SectorGroup(row.group): (row.b1, row.b2, row.b3, row.b4, row.b5,
                                 row.b6)
        for row in df.itertuples(index=False)
    }


def read_rd_process(path) -> dict:
    """Sector-group R&D AR(1) parameters from CSV (group, a, c)."""
    from .core import SectorGroup

    df = _read_csv(path)
    _require(df, ("group", "a", "c"), path)
    return {SectorGroup(row.group): (row.a, row.c)
            for row in df.itertuples(index=False)}


def write_state_path(path_states, directory) -> None:
    """Region-level and sector-level tidy CSVs of a simulated path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    region_rows = []
    sector_rows = []
    for st in path_states:
        dims_regions = len(st.cpi)
        for r in range(dims_regions):
            region_rows.append({
                "year": st.year, "region_index": r,
                "gdp": float(st.gdp[r]), "gdp_real": float(st.gdp_real[r]),
                "cpi": float(st.cpi[r]), "savings": float(st.savings[r]),
                "inv_price": float(st.inv_price[r]),
                "real_investment": float(st.real_investment[r]),
                "tax_revenue": float(st.tax_revenue[r]),
                "human_capital": float(st.human_capital[r]),
            })
            for i in range(st.prices.shape[1]):
                sector_rows.append({
                    "year": st.year, "region_index": r, "sector_index": i,
                    "price": float(st.prices[r, i]),
                    "activity": float(st.activity[r, i]),
                    "capital": float(st.capital[r, i]),
                    "tfp": float(st.tfp[r, i]),
                    "rd": float(st.rd_intensity[r, i]),
                })
    _write_csv(pd.DataFrame(region_rows), directory / "path_regions.csv")
    _write_csv(pd.DataFrame(sector_rows), directory / "path_sectors.csv")


def write_trace(path_states, path) -> None:
    rows = []
    for st in path_states:
        if st.trace is None:
            continue
        steps = st.trace.step_sizes
        for it, resid in enumerate(st.trace.residuals):
            rows.append({
                "year": st.year, "iteration": it, "max_residual": resid,
                "step_size": (steps[it - 1] if 0 < it <= len(steps)
                              else 0.0),
            })
    _write_csv(pd.DataFrame(rows), Path(path))


def write_effect_report(report, directory) -> None:
    """Tidy effects CSVs plus a region-keyed JSON for external mapping.

    ``effects.csv`` is wide (one column per channel); ``effects_long.csv``
    is the (region, year, channel, value) shape plotting tools want.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    _write_csv(report.frame, directory / "effects.csv")
    long = report.frame.melt(
        id_vars=["region", "year"],
        value_vars=["direct", "total", "demand", "structural",
                    "interaction", "policy_cost"],
        var_name="channel", value_name="value",
    )
    _write_csv(long, directory / "effects_long.csv")
    by_region = {}
    for region, sub in report.frame.groupby("region"):
        by_region[region] = {
            "direct_cumulative": float(sub["direct"].sum()),
            "total_cumulative": float(sub["total"].sum()),
            "demand_cumulative": float(sub["demand"].sum()),
            "structural_cumulative": float(sub["structural"].sum()),
            "policy_cost_cumulative": float(sub["policy_cost"].sum()),
            "supported": bool(sub["supported"].iloc[0]),
        }
    payload = {
        "regions": by_region,
        "eu_direct_cumulative": report.eu_direct_cumulative,
        "eu_total_cumulative": report.eu_total_cumulative,
        "total_direct_ratio": report.total_direct_ratio,
    }
    with open(directory / "effects_by_region.json", "w",
              encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)


def write_panel(rows, path) -> None:
    _write_csv(pd.DataFrame(rows,
                            columns=["country", "sector", "year", "tfp",
                                     "h", "rd"]), Path(path))


def read_panel(path) -> pd.DataFrame:
    df = _read_csv(path)
    _require(df, ("country", "sector", "year", "tfp", "h", "rd"), path)
    return df


def write_growth_results(result, path) -> None:
    """Growth-equation estimates in a coefficients x statistics layout."""
    rows = [
        {"parameter": name, "estimate": result.coefficients[name],
         "std_error": result.std_errors[name]}
        for name in result.coefficients
    ]
    rows.append({"parameter": "observations", "estimate": result.n_obs,
                 "std_error": float("nan")})
    rows.append({"parameter": "adjusted_r2", "estimate": result.adjusted_r2,
                 "std_error": float("nan")})
    _write_csv(pd.DataFrame(rows), Path(path))


def write_rd_results(results: dict, path) -> None:
    rows = []
    for group, res in sorted(results.items()):
        rows.append({
            "group": group, "a": res.process.a, "c": res.process.c,
            "se_a": res.se_a, "se_c": res.se_c,
            "long_run_mean": (res.long_run if abs(res.process.a) < 1
                              else float("nan")),
            "observations": res.n_obs, "degenerate": res.degenerate,
        })
    _write_csv(pd.DataFrame(rows), Path(path))
