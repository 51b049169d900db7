"""Batch command line: calibrate, run, estimate, make-toy.

Exit codes: 0 success, 2 input/structural error, 3 numerical failure.
All outputs are deterministic given the inputs and seed; the only
environment variable honoured is ``SGEM_THREADS`` (size of the pool used
for the parallel scenario runs).
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import click
import pandas as pd

from . import io
from .calibration import CalibrationConfig, calibrate, \
    replication_residual
from .core import EquilibriumError, SgemError
from .equilibrium import ClosureSpec, SolverConfig
from .estimation import FESpec, PanelDataset, build_regressors, fit_ar1, \
    fit_lsdv
from .scenario import (
    ExpenditureTable,
    ShockMap,
    build_shocks,
    decompose_effects,
    run_all,
    run_baseline,
)
from .toydata import make_panel, make_toy

EXIT_INPUT_ERROR = 2
EXIT_NUMERICAL_ERROR = 3


@dataclass(frozen=True)
class RunConfig:
    """Everything one batch invocation needs, resolved and validated."""

    model_path: Path
    out_dir: Path
    calib_path: Path | None = None
    closure_path: Path | None = None
    solver_path: Path | None = None
    scenario_path: Path | None = None
    horizon: int | None = None
    channels: tuple = ("tfp", "demand")
    trace: bool = False
    seed: int = 42

    def __post_init__(self):
        for name in ("model_path", "calib_path", "closure_path",
                     "solver_path", "scenario_path"):
            val = getattr(self, name)
            if val is not None and not Path(val).exists():
                raise FileNotFoundError(f"{name}: {val} does not exist")


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_calib_config(path):
    """(CalibrationConfig, growth tables) from a JSON file.

    ``growth_coefficients_csv`` / ``rd_process_csv`` entries name CSV files
    (relative to the config) that override the built-in group tables.
    """
    if path is None:
        return CalibrationConfig(), None, None
    path = Path(path)
    payload = io.load_json(path)
    overrides = {}
    for nest, sector, value in payload.get("sigma_overrides", []):
        overrides[(nest, sector)] = value
    growth = None
    rd = None
    if "growth_coefficients_csv" in payload:
        growth = io.read_growth_coefficients(
            path.parent / payload.pop("growth_coefficients_csv")
        )
    if "rd_process_csv" in payload:
        rd = io.read_rd_process(path.parent / payload.pop("rd_process_csv"))
    kwargs = {k: v for k, v in payload.items() if k != "sigma_overrides"}
    kwargs["sigma_overrides"] = overrides
    return CalibrationConfig(**kwargs), growth, rd


def _load_closure(path) -> ClosureSpec:
    if path is None:
        return ClosureSpec()
    return ClosureSpec(**io.load_json(path))


def _load_solver(path) -> SolverConfig:
    if path is None:
        return SolverConfig()
    return SolverConfig(**io.load_json(path))


def _load_scenario(path, model):
    """Scenario manifest: expenditure + assumptions CSVs and the shock map."""
    path = Path(path)
    payload = io.load_json(path)
    base = path.parent
    exp = pd.read_csv(base / payload["expenditure"])
    io._require(exp, ("region", "kic", "category", "year", "amount"),
                payload["expenditure"])
    asm = pd.read_csv(base / payload["assumptions"])
    io._require(asm, ("year", "cofunding_rate"), payload["assumptions"])
    records = [
        dict(region=str(r.region), kic=str(r.kic), category=str(r.category),
             year=int(r.year), amount=float(r.amount))
        for r in exp.itertuples(index=False)
    ]
    assumptions = {}
    for r in asm.itertuples(index=False):
        assumptions[int(r.year)] = dict(
            cofunding_rate=float(r.cofunding_rate),
            kic_share=float(getattr(r, "kic_share", 1.0)),
            direct_share=float(getattr(r, "direct_share", 0.0)),
            admin_share=float(getattr(r, "admin_share", 0.0)),
        )
    table = ExpenditureTable(records=records, assumptions=assumptions)
    smap = ShockMap(h_shock_scale=payload.get("h_shock_scale"))
    return build_shocks(table, smap, model)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("SGEM_THREADS", "1")))
    except ValueError:
        return 1


def _filter_channels(shocks, wanted):
    """Disable the shock channels the user did not request."""
    from dataclasses import replace

    if "tfp" not in wanted:
        shocks = replace(shocks, rd={}, h={})
    if "demand" not in wanted:
        shocks = replace(shocks, demand={})
    return shocks


@click.group()
def main():
    """Spatial general-equilibrium engine."""


@main.command("make-toy")
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--regions", type=int, default=2, show_default=True)
@click.option("--sectors", type=int, default=2, show_default=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--panel/--no-panel", default=True, show_default=True)
@click.option("--panel-noise", type=float, default=0.01, show_default=True)
def cmd_make_toy(seed, regions, sectors, out, panel, panel_noise):
    """Write a balanced synthetic model (and estimation panel) to OUT."""
    try:
        data = make_toy(seed, regions, sectors)
    except (ValueError, RuntimeError) as exc:
        _fail(EXIT_INPUT_ERROR, str(exc))
    out = Path(out)
    io.save_model(data, out)
    if panel:
        rows, truth = make_panel(seed, noise=panel_noise)
        io.write_panel(rows, out / "panel.csv")
        with open(out / "panel_truth.json", "w", encoding="utf-8") as fh:
            json.dump(truth, fh, indent=2, sort_keys=True)
    click.echo(f"model written to {out}")


@main.command("calibrate")
@click.option("--model", "model_path", type=click.Path(exists=True),
              required=True)
@click.option("--calib", "calib_path", type=click.Path(exists=True),
              default=None)
@click.option("--out", type=click.Path(), required=True)
def cmd_calibrate(model_path, calib_path, out):
    """Calibrate a model; exit 0 iff the benchmark replicates below 1e-8."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        data = io.load_model(model_path)
        cfg, growth, rd = _load_calib_config(calib_path)
        model = calibrate(data, cfg, growth_coefs=growth, rd_process=rd)
    except SgemError as exc:
        _fail(EXIT_INPUT_ERROR, str(exc))
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        _fail(EXIT_INPUT_ERROR, f"unreadable input: {exc}")

    residual = replication_residual(model)
    io.save_json(io.params_to_dict(model.params), out / "params.json")
    io.write_calibration_report(model, residual,
                                out / "calibration_report.csv")
    for warning in model.warnings:
        click.echo(f"warning: {warning}", err=True)
    click.echo(f"benchmark replication residual: {residual:.3e}")
    if residual >= 1e-8:
        _fail(EXIT_NUMERICAL_ERROR,
              f"replication residual {residual:.3e} above 1e-8")


@main.command("run")
@click.option("--model", "model_path", type=click.Path(exists=True),
              required=True)
@click.option("--calib", "calib_path", type=click.Path(exists=True),
              default=None)
@click.option("--closure", "closure_path", type=click.Path(exists=True),
              default=None)
@click.option("--solver", "solver_path", type=click.Path(exists=True),
              default=None)
@click.option("--scenario", "scenario_path", type=click.Path(exists=True),
              default=None)
@click.option("--horizon", type=int, default=None,
              help="number of simulated years incl. the benchmark year")
@click.option("--channels", default="tfp,demand", show_default=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--trace", is_flag=True, default=False)
def cmd_run(model_path, calib_path, closure_path, solver_path,
            scenario_path, horizon, channels, out, trace):
    """Baseline (and scenario) simulation with effect decomposition."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        config = RunConfig(
            model_path=Path(model_path), out_dir=out,
            calib_path=Path(calib_path) if calib_path else None,
            closure_path=Path(closure_path) if closure_path else None,
            solver_path=Path(solver_path) if solver_path else None,
            scenario_path=Path(scenario_path) if scenario_path else None,
            horizon=horizon,
            channels=tuple(c.strip() for c in channels.split(",")
                           if c.strip()),
            trace=trace,
        )
        data = io.load_model(config.model_path)
        cfg, growth, rd = _load_calib_config(config.calib_path)
        model = calibrate(data, cfg, growth_coefs=growth, rd_process=rd)
        closure = _load_closure(config.closure_path)
        solver_cfg = _load_solver(config.solver_path)
        shocks = (_load_scenario(config.scenario_path, model)
                  if config.scenario_path else None)
    except (SgemError, FileNotFoundError) as exc:
        _fail(EXIT_INPUT_ERROR, str(exc))
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        _fail(EXIT_INPUT_ERROR, f"unreadable input: {exc}")

    if horizon is None:
        horizon = model.dims.last_year - model.dims.first_year + 1

    try:
        if shocks is None:
            baseline = run_baseline(model, horizon, closure, solver_cfg)
            io.write_state_path(baseline, out / "baseline")
            if trace:
                io.write_trace(baseline, out / "baseline_trace.csv")
        else:
            wanted = set(config.channels)
            unknown = wanted - {"tfp", "demand"}
            if unknown:
                _fail(EXIT_INPUT_ERROR,
                      f"unknown channels: {sorted(unknown)}")
            shocks = _filter_channels(shocks, wanted)
            runs = run_all(model, shocks, horizon, closure, solver_cfg,
                           workers=_workers())
            report = decompose_effects(runs["baseline"], runs, shocks, model)
            for name, path in runs.items():
                io.write_state_path(path, out / name)
                if trace:
                    io.write_trace(path, out / f"{name}_trace.csv")
            io.write_effect_report(report, out)
            shocks.audit.to_csv(out / "shock_audit.csv", index=False)
            click.echo(
                f"EU cumulative direct {report.eu_direct_cumulative:.4f}, "
                f"total {report.eu_total_cumulative:.4f}, "
                f"ratio {report.total_direct_ratio:.3f} "
                f"(channels: {sorted(wanted)})"
            )
    except EquilibriumError as exc:
        _fail(EXIT_NUMERICAL_ERROR, str(exc))
    except SgemError as exc:
        _fail(EXIT_INPUT_ERROR, str(exc))
    click.echo(f"outputs written to {out}")


@main.command("estimate")
@click.option("--panel", "panel_path", type=click.Path(exists=True),
              required=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--sector-fe/--no-sector-fe", default=True, show_default=True)
@click.option("--country-sector-fe", is_flag=True, default=False)
@click.option("--country-trend", is_flag=True, default=False)
def cmd_estimate(panel_path, out, sector_fe, country_sector_fe,
                 country_trend):
    """Fit the growth equation and the R&D AR(1) from a panel CSV."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        frame = io.read_panel(panel_path)
        panel = PanelDataset(frame)
        design = build_regressors(panel)
        fe = FESpec(sector=sector_fe, country_sector=country_sector_fe,
                    country_trend=country_trend)
        growth = fit_lsdv(design, fe)
        rd = fit_ar1(panel)
    except SgemError as exc:
        _fail(EXIT_INPUT_ERROR, str(exc))
    except (OSError, pd.errors.ParserError) as exc:
        _fail(EXIT_INPUT_ERROR, f"unreadable panel: {exc}")
    io.write_growth_results(growth, out / "growth_coefficients.csv")
    io.write_rd_results(rd, out / "rd_process.csv")
    click.echo(
        "growth coefficients: "
        + ", ".join(f"{k}={v:.4f}" for k, v in growth.coefficients.items())
    )
    click.echo(f"results written to {out}")


if __name__ == "__main__":
    main()
