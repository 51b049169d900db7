"""Spatial general-equilibrium engine for regional investment-policy analysis."""

from .core import (
    BenchmarkDataset,
    Dimensions,
    EconomyState,
    ParameterSet,
    SectorGroup,
    ValidationReport,
    sector_group_of,
    validate_benchmark,
)
from .calibration import CalibratedModel, CalibrationConfig, calibrate
from .equilibrium import (
    ClosureSpec,
    SolverConfig,
    benchmark_state,
    excess_demands,
    solve_period,
    walras_residual,
)
from .dynamics import (
    allocate_investment,
    capital_remuneration,
    capital_update,
    step_period,
)
from .growth import (
    GrowthCoefficients,
    GrowthShocks,
    RnDProcess,
    apply_growth,
    frontier,
    long_run_rd,
    rd_step,
    tfp_growth,
)
from .demand import government_accounts, household_disposable_income, \
    les_demand
from .production import NestedTechnology, input_demands, unit_cost
from .trade import (
    TradeStructure,
    armington_split,
    bilateral_allocation,
    margin_demand,
)
from .estimation import (
    FESpec,
    PanelDataset,
    RegressionResult,
    build_regressors,
    fit_ar1,
    fit_lsdv,
)
from .scenario import (
    EffectReport,
    ExpenditureTable,
    ShockMap,
    build_shocks,
    decompose_effects,
    run_baseline,
    run_counterfactual,
)
from .toydata import make_panel, make_toy

__all__ = [
    "BenchmarkDataset", "Dimensions", "EconomyState", "ParameterSet",
    "SectorGroup", "ValidationReport", "sector_group_of",
    "validate_benchmark", "CalibratedModel", "CalibrationConfig", "calibrate",
    "ClosureSpec", "SolverConfig", "benchmark_state", "excess_demands",
    "solve_period", "walras_residual", "allocate_investment",
    "capital_remuneration", "capital_update", "step_period",
    "GrowthCoefficients", "GrowthShocks", "RnDProcess", "apply_growth",
    "frontier", "long_run_rd", "rd_step", "tfp_growth",
    "government_accounts", "household_disposable_income", "les_demand",
    "NestedTechnology", "input_demands", "unit_cost",
    "TradeStructure", "armington_split", "bilateral_allocation",
    "margin_demand",
    "FESpec", "PanelDataset", "RegressionResult", "build_regressors",
    "fit_ar1", "fit_lsdv",
    "EffectReport", "ExpenditureTable", "ShockMap", "build_shocks",
    "decompose_effects", "run_baseline", "run_counterfactual",
    "make_panel", "make_toy",
]

__version__ = "0.1.0"
