"""Panel estimation of the growth coefficients.

``build_regressors`` turns a (country, sector, year) TFP/H/RD panel into
the design of the growth equation: dependent dlnTFP, frontier growth, the
lagged gap and its interactions with lagged H and RD.  ``fit_lsdv`` runs
least squares with dummy fixed effects (sector, country-sector, country
trends); ``fit_ar1`` fits the R&D intensity AR(1) by pooled OLS per sector
group (a deliberately simple stand-in for dynamic-panel GMM -- with the
persistence and panel length involved, the Nickell bias is secondary).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .core import EstimationError, SectorGroup
from .growth import RnDProcess, long_run_rd

REGRESSOR_NAMES = ("frontier_growth", "gap", "h", "h_gap", "rd", "rd_gap")


@dataclass(frozen=True)
class FESpec:
    """Which dummy blocks enter the LSDV design."""

    sector: bool = True          # d_s
    country_sector: bool = False  # d_sc (absorbs d_s when present)
    country_trend: bool = False   # d_ct: country x linear year


@dataclass(frozen=True)
class PanelDataset:
    """Balanced or unbalanced panel keyed by (country, sector, year)."""

    frame: pd.DataFrame  # columns: country, sector, year, tfp, h, rd

    def __post_init__(self):
        df = self.frame
        required = {"country", "sector", "year", "tfp", "h", "rd"}
        missing = required - set(df.columns)
        if missing:
            raise EstimationError(f"panel missing columns: {sorted(missing)}")
        if df.duplicated(["country", "sector", "year"]).any():
            raise EstimationError("panel has duplicate (country,sector,year)")
        if (df["tfp"] <= 0).any():
            raise EstimationError("TFP levels must be positive")
        if ((df["h"] < 0) | (df["h"] > 1)).any():
            raise EstimationError("H must lie in [0, 1]")
        if (df["rd"] < 0).any():
            raise EstimationError("RD must be nonnegative")

    @classmethod
    def from_rows(cls, rows) -> "PanelDataset":
        return cls(pd.DataFrame(rows))


@dataclass(frozen=True)
class RegressionResult:
    coefficients: dict
    std_errors: dict
    n_obs: int
    adjusted_r2: float
    fe_spec: FESpec | None = None
    dropped_units: int = 0
    extras: dict = field(default_factory=dict)

    def coef_array(self) -> np.ndarray:
        return np.array([self.coefficients[k] for k in REGRESSOR_NAMES])


def build_regressors(panel: PanelDataset) -> pd.DataFrame:
    """Design rows of the growth equation, one per (c, s, t>=t0+1).

    The frontier per (sector, year) is the max TFP over countries.  Units
    without two consecutive years are dropped (counted in attrs).
    """
    df = panel.frame.sort_values(["country", "sector", "year"]).copy()
    front = df.groupby(["sector", "year"])["tfp"].transform("max")
    df["ln_tfp"] = np.log(df["tfp"])
    df["ln_front"] = np.log(front)
    df["gap_now"] = df["ln_tfp"] - df["ln_front"]

    lag = df.groupby(["country", "sector"])[
        ["year", "ln_tfp", "ln_front", "gap_now", "h", "rd"]
    ].shift(1)
    consecutive = df["year"] == lag["year"] + 1

    out = pd.DataFrame({
        "country": df["country"],
        "sector": df["sector"],
        "year": df["year"],
        "dln_tfp": df["ln_tfp"] - lag["ln_tfp"],
        "frontier_growth": df["ln_front"] - lag["ln_front"],
        "gap": lag["gap_now"],
        "h": lag["h"],
        "rd": lag["rd"],
    })
    out["h_gap"] = out["h"] * out["gap"]
    out["rd_gap"] = out["rd"] * out["gap"]
    kept = out[consecutive.fillna(False)].reset_index(drop=True)

    units = df.groupby(["country", "sector"])["year"].count()
    used = kept.groupby(["country", "sector"])["year"].count()
    dropped = int((~units.index.isin(used.index)).sum())
    kept.attrs["dropped_units"] = dropped
    return kept


def _dummy_matrix(design: pd.DataFrame, fe: FESpec):
    """Fixed-effect columns (drop-first coding) plus an intercept."""
    cols = [np.ones(len(design))]
    names = ["const"]
    if fe.sector and not fe.country_sector:
        # d_s is collinear with d_sc; keep only the finer grouping
        cats = sorted(design["sector"].unique())
        for c in cats[1:]:
            cols.append((design["sector"] == c).to_numpy(float))
            names.append(f"d_s[{c}]")
    if fe.country_sector:
        pairs = sorted(set(zip(design["country"], design["sector"])))
        for c, s in pairs[1:]:
            cols.append(
                ((design["country"] == c) & (design["sector"] == s))
                .to_numpy(float)
            )
            names.append(f"d_sc[{c},{s}]")
    if fe.country_trend:
        t = (design["year"] - design["year"].mean()).to_numpy(float)
        cats = sorted(design["country"].unique())
        for c in cats[1:]:
            cols.append((design["country"] == c).to_numpy(float) * t)
            names.append(f"d_ct[{c}]")
    return np.column_stack(cols), names


def fit_lsdv(design: pd.DataFrame, fe_spec: FESpec | None = None
             ) -> RegressionResult:
    """OLS of dlnTFP on the six regressors plus dummy fixed effects.

    Classical standard errors; dummy coefficients are estimated but not
    reported.  A rank-deficient design raises with the offending columns.
    """
    fe = fe_spec or FESpec()
    y = design["dln_tfp"].to_numpy(float)
    x_core = design[list(REGRESSOR_NAMES)].to_numpy(float)
    x_fe, fe_names = _dummy_matrix(design, fe)
    x = np.column_stack([x_core, x_fe])
    names = list(REGRESSOR_NAMES) + fe_names

    n, k = x.shape
    if n <= k:
        raise EstimationError(
            f"design has {n} rows for {k} parameters; need more observations"
        )
    rank = np.linalg.matrix_rank(x)
    if rank < k:
        _, r = np.linalg.qr(x)
        diag = np.abs(np.diag(r))
        bad = [names[j] for j in np.argsort(diag)[: k - rank]]
        raise EstimationError(f"rank-deficient design; collinear columns: "
                              f"{', '.join(bad)}")

    xtx = x.T @ x
    beta = np.linalg.solve(xtx, x.T @ y)
    resid = y - x @ beta
    dof = n - k
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.inv(xtx)
    se = np.sqrt(np.diag(cov))

    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    adj = 1.0 - (1.0 - r2) * (n - 1) / dof

    m = len(REGRESSOR_NAMES)
    return RegressionResult(
        coefficients={nm: float(b) for nm, b in zip(names[:m], beta[:m])},
        std_errors={nm: float(s) for nm, s in zip(names[:m], se[:m])},
        n_obs=n, adjusted_r2=float(adj), fe_spec=fe,
        dropped_units=design.attrs.get("dropped_units", 0),
        extras={"r2": float(r2), "n_params": k},
    )


@dataclass(frozen=True)
class Ar1Result:
    process: RnDProcess
    se_a: float
    se_c: float
    n_obs: int
    degenerate: bool

    @property
    def long_run(self) -> float:
        return long_run_rd(self.process)


def fit_ar1(panel: PanelDataset, group_of=None) -> dict:
    """Pooled OLS of RD on its lag plus constant, per sector group.

    ``group_of`` maps a sector label to a :class:`SectorGroup`; without it
    every sector forms its own group keyed by label.  Series with no lag
    variation are flagged degenerate rather than fitted.
    """
    df = panel.frame.sort_values(["country", "sector", "year"]).copy()
    counts = df.groupby(["country", "sector"])["year"].count()
    if (counts < 3).any():
        bad = counts[counts < 3].index[0]
        raise EstimationError(
            f"unit {bad} has fewer than 3 periods; AR(1) needs lags"
        )
    lag = df.groupby(["country", "sector"])[["year", "rd"]].shift(1)
    ok = df["year"] == lag["year"] + 1
    df["rd_lag"] = lag["rd"]
    df = df[ok.fillna(False)]

    if group_of is None:
        df["group"] = df["sector"]
    else:
        df["group"] = [SectorGroup(group_of(s)).value for s in df["sector"]]

    results = {}
    for grp, sub in df.groupby("group"):
        y = sub["rd"].to_numpy(float)
        xl = sub["rd_lag"].to_numpy(float)
        n = len(y)
        var = xl.var()
        if var < 1e-16 * max(xl.mean() ** 2, 1e-300):
            results[grp] = Ar1Result(
                process=RnDProcess(a=0.0, c=float(y.mean())),
                se_a=float("nan"), se_c=float("nan"), n_obs=n,
                degenerate=True,
            )
            continue
        x = np.column_stack([xl, np.ones(n)])
        beta, *_ = np.linalg.lstsq(x, y, rcond=None)
        resid = y - x @ beta
        sigma2 = float(resid @ resid) / (n - 2)
        cov = sigma2 * np.linalg.inv(x.T @ x)
        results[grp] = Ar1Result(
            process=RnDProcess(a=float(beta[0]), c=float(beta[1])),
            se_a=float(np.sqrt(cov[0, 0])), se_c=float(np.sqrt(cov[1, 1])),
            n_obs=n, degenerate=False,
        )
    return results
