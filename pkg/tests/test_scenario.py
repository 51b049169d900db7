import numpy as np
import pytest

from sgem.core import ScenarioError
from sgem.scenario import (
    ExpenditureTable,
    ShockMap,
    build_shocks,
    decompose_effects,
    default_rd_weights,
    run_all,
    run_baseline,
    run_counterfactual,
)
from sgem.toydata import stationary_growth_tables
from sgem.calibration import calibrate

from test_core import rebuild


def simple_table(records, years=(2022, 2023), cofunding=0.2):
    return ExpenditureTable(
        records=records,
        assumptions={y: dict(cofunding_rate=cofunding) for y in years},
    )


@pytest.fixture(scope="module")
def standard_scenario(model34):
    table = simple_table([
        dict(region="R00", kic="K1", category="Research", year=2022,
             amount=8.0),
        dict(region="R00", kic="K1", category="Education", year=2022,
             amount=4.0),
        dict(region="R00", kic="K2", category="Other", year=2023,
             amount=3.0),
    ])
    shocks = build_shocks(table, ShockMap(h_shock_scale=0.5), model34)
    return table, shocks


class TestBuildShocks:
    def test_zero_table_means_no_shocks(self, model34):
        table = simple_table([
            dict(region="R00", kic="K", category="Research", year=2022,
                 amount=0.0),
        ])
        shocks = build_shocks(table, ShockMap(), model34)
        assert shocks.is_zero()
        assert not shocks.supported.any()

    def test_cofunding_leverage_values_research_at_130(self, model34):
        table = simple_table(
            [dict(region="R00", kic="K", category="Research", year=2022,
                  amount=100.0)],
            cofunding=0.30,
        )
        shocks = build_shocks(table, ShockMap(), model34)
        va0 = (model34.data.wage_bill.sum(axis=2)
               + model34.data.capital_rent)
        implied_spend = (shocks.rd[2022] * va0).sum()
        assert implied_spend == pytest.approx(130.0, rel=1e-12)
        weights = default_rd_weights(model34)
        implied_weights = (shocks.rd[2022][0] * va0[0]) / 130.0
        assert np.allclose(implied_weights, weights[0], rtol=1e-12)

    def test_category_totals_accumulate(self):
        # headline category totals load as-is (Business row total)
        table = simple_table([
            dict(region="R00", kic="ALL", category="Business", year=2022,
                 amount=826716365.0),
            dict(region="R00", kic="ALL", category="Education", year=2022,
                 amount=970502890.0),
            dict(region="R00", kic="ALL", category="Other", year=2022,
                 amount=869578414.0),
            dict(region="R00", kic="ALL", category="Research", year=2022,
                 amount=333202331.0),
        ])
        assert table.category_total("Business") == 826716365.0
        assert table.category_total("Research") == 333202331.0

    def test_unmatched_region_lists_names(self, model34):
        table = simple_table([
            dict(region="XX99", kic="K", category="Research", year=2022,
                 amount=1.0),
        ])
        with pytest.raises(ScenarioError, match="XX99"):
            build_shocks(table, ShockMap(), model34)

    def test_missing_assumptions_year_rejected(self, model34):
        table = ExpenditureTable(
            records=[dict(region="R00", kic="K", category="Research",
                          year=2024, amount=1.0)],
            assumptions={2022: dict(cofunding_rate=0.2)},
        )
        with pytest.raises(ScenarioError, match="2024"):
            build_shocks(table, ShockMap(), model34)

    def test_education_requires_cost_coefficient(self, model34):
        table = simple_table([
            dict(region="R00", kic="K", category="Education", year=2022,
                 amount=5.0),
        ])
        with pytest.raises(ScenarioError, match="h_shock_scale"):
            build_shocks(table, ShockMap(), model34)

    def test_admin_share_routed_to_demand(self, model34):
        table = ExpenditureTable(
            records=[dict(region="R00", kic="K", category="Research",
                          year=2022, amount=100.0)],
            assumptions={2022: dict(cofunding_rate=0.0, kic_share=0.83,
                                    direct_share=0.15, admin_share=0.02)},
        )
        shocks = build_shocks(table, ShockMap(), model34)
        assert shocks.demand[2022][0] == pytest.approx(2.0, rel=1e-12)
        va0 = (model34.data.wage_bill.sum(axis=2)
               + model34.data.capital_rent)
        assert (shocks.rd[2022] * va0).sum() == pytest.approx(98.0,
                                                              rel=1e-12)

    def test_audit_trail_complete(self, standard_scenario):
        _, shocks = standard_scenario
        assert set(shocks.audit["channel"]) == {"rd", "h", "demand"}
        assert (shocks.audit["gross"]
                == shocks.audit["amount"] * 1.2).all()


class TestRunBaseline:
    def test_stationary_toy_flat_gdp(self, stationary_model34):
        path = run_baseline(stationary_model34, 6)
        gdp = np.array([st.gdp_real for st in path])
        assert np.allclose(gdp, gdp[0], rtol=1e-6)

    def test_capital_nonnegative_along_path(self, model34):
        for st in run_baseline(model34, 8):
            assert np.all(st.capital >= 0)
            assert np.all(st.savings >= 0)

    def test_benchmark_year_matches_data(self, model34, toy34):
        path = run_baseline(model34, 1)
        gdp0 = (toy34.factor_income() + toy34.prod_tax.sum(axis=1))
        assert np.allclose(path[0].gdp_real, gdp0, rtol=1e-9)
        nominal0 = gdp0 + toy34.cons_tax.sum(axis=1)
        assert np.allclose(path[0].gdp, nominal0, rtol=1e-9)

    def test_rd_below_long_run_rises_monotonically(self, toy34):
        rd0 = toy34.rd0 * 0.5
        model = calibrate(rebuild(toy34, rd0=rd0),
                          growth_coefs=stationary_growth_tables())
        path = run_baseline(model, 8)
        lr = toy34.rd0  # generator sets rd0 at the group long-run means
        rd_path = np.array([st.rd_intensity for st in path])
        assert np.all(np.diff(rd_path, axis=0) > 0)
        assert np.all(rd_path[-1] < lr + 1e-12)

    def test_horizon_validation(self, model34):
        with pytest.raises(ScenarioError):
            run_baseline(model34, 0)
        with pytest.raises(ScenarioError):
            run_baseline(model34, 10_000)


class TestRunCounterfactual:
    def test_empty_channels_bit_identical_to_baseline(self, model34,
                                                      standard_scenario):
        _, shocks = standard_scenario
        base = run_baseline(model34, 5)
        cf = run_counterfactual(model34, shocks, 5, channels=())
        assert all(a.equals(b) for a, b in zip(base, cf))

    def test_tfp_channel_raises_supported_gdp(self, model34,
                                              standard_scenario):
        _, shocks = standard_scenario
        base = run_baseline(model34, 6)
        cf = run_counterfactual(model34, shocks, 6, channels=("tfp",))
        dev = np.array([c.gdp_real - b.gdp_real for c, b in zip(cf, base)])
        # a year-y spend raises RD_y, which enters TFP growth with its
        # one-period lag: R00's GDP gains from y+1 onward
        shock_offset = 2022 - model34.dims.first_year
        assert np.all(dev[shock_offset + 1:, 0] > 0)
        assert np.allclose(dev[:shock_offset + 1], 0.0, atol=1e-9)

    def test_full_run_spills_over(self, model34, standard_scenario):
        _, shocks = standard_scenario
        base = run_baseline(model34, 6)
        cf = run_counterfactual(model34, shocks, 6)
        dev = np.array([c.gdp_real - b.gdp_real for c, b in zip(cf, base)])
        non_supported = ~shocks.supported
        assert np.max(np.abs(dev[:, non_supported])) > 1e-9

    def test_unknown_channel_rejected(self, model34, standard_scenario):
        _, shocks = standard_scenario
        with pytest.raises(ScenarioError):
            run_counterfactual(model34, shocks, 3, channels=("magic",))

    def test_growth_shock_cannot_hit_benchmark_year(self, model34):
        table = simple_table(
            [dict(region="R00", kic="K", category="Research",
                  year=model34.dims.first_year, amount=1.0)],
            years=(model34.dims.first_year,),
        )
        shocks = build_shocks(table, ShockMap(), model34)
        with pytest.raises(ScenarioError, match="benchmark year"):
            run_counterfactual(model34, shocks, 3, channels=("tfp",))


class TestDecomposeEffects:
    def test_zero_shock_report_is_all_zero(self, model34):
        table = simple_table([
            dict(region="R00", kic="K", category="Research", year=2022,
                 amount=0.0),
        ])
        shocks = build_shocks(table, ShockMap(), model34)
        runs = run_all(model34, shocks, 4)
        report = decompose_effects(runs["baseline"], runs, shocks, model34)
        for col in ("direct", "total", "demand", "structural",
                    "interaction"):
            assert np.allclose(report.frame[col], 0.0, atol=1e-12)

    def test_decomposition_identity_and_report_shape(self, model34,
                                                     standard_scenario):
        _, shocks = standard_scenario
        runs = run_all(model34, shocks, 6)
        report = decompose_effects(runs["baseline"], runs, shocks, model34)
        f = report.frame
        assert np.allclose(
            f["total"], f["demand"] + f["structural"] + f["interaction"],
            atol=1e-12,
        )
        # Table-7-style columns: region, expenditure, direct, cumulative total
        for col in ("region", "year", "policy_cost", "direct", "total",
                    "direct_pct", "total_pct", "cost_pct", "supported"):
            assert col in f.columns
        assert report.eu_total_cumulative == pytest.approx(
            f["total"].sum(), rel=1e-12
        )
        assert report.eu_direct_cumulative == pytest.approx(
            f["direct"].sum(), rel=1e-12
        )

    def test_direct_only_in_supported_regions(self, model34,
                                              standard_scenario):
        _, shocks = standard_scenario
        runs = run_all(model34, shocks, 6)
        report = decompose_effects(runs["baseline"], runs, shocks, model34)
        f = report.frame
        assert (f.loc[~f["supported"], "direct"] == 0.0).all()
        assert f.loc[f["supported"], "direct"].abs().max() > 0

    def test_horizon_mismatch_rejected(self, model34, standard_scenario):
        _, shocks = standard_scenario
        runs = run_all(model34, shocks, 4)
        short = dict(runs)
        short["tfp"] = short["tfp"][:-1]
        with pytest.raises(ScenarioError, match="horizon"):
            decompose_effects(runs["baseline"], short, shocks, model34)

    def test_parallel_runs_match_sequential(self, model34,
                                            standard_scenario):
        _, shocks = standard_scenario
        seq = run_all(model34, shocks, 4, workers=1)
        par = run_all(model34, shocks, 4, workers=3)
        for name in seq:
            assert all(a.equals(b) for a, b in zip(seq[name], par[name]))
