import numpy as np
import pytest

from sgem.core import DomainError
from sgem.production import (
    InputPrices,
    NestedTechnology,
    input_cost,
    input_demands,
    unit_cost,
)

from oracles import central_difference


def random_technology(rng, n_regions=2, n_sectors=3, n_skills=3):
    """A calibrated-share technology with random benchmark value shares."""
    R, I, E = n_regions, n_sectors, n_skills
    mat_coef = rng.uniform(0.1, 1.0, size=(R, I, I))
    mat_coef /= mat_coef.sum(axis=2, keepdims=True)
    skill = rng.uniform(0.2, 1.0, size=(R, I, E))
    skill /= skill.sum(axis=2, keepdims=True)
    return NestedTechnology(
        share_m=rng.uniform(0.2, 0.6, size=(R, I)),
        share_e=rng.uniform(0.05, 0.3, size=(R, I)),
        share_k=rng.uniform(0.2, 0.6, size=(R, I)),
        share_nelec=rng.uniform(0.2, 0.8, size=(R, I)),
        share_skill=skill,
        sigma_m_kle=rng.uniform(0.2, 0.8, size=I),
        sigma_e_kl=rng.uniform(0.3, 1.4, size=I),
        sigma_k_l=rng.uniform(0.4, 1.6, size=I),
        sigma_elec=rng.uniform(0.8, 2.0, size=I),
        sigma_skill=rng.uniform(0.6, 1.5, size=I),
        mat_coef=mat_coef,
        input_scale=rng.uniform(0.85, 1.0, size=(R, I)),
        a0=np.ones((R, I)),
        elec_index=0,
        nelec_index=1,
    )


def random_prices(rng, tech):
    R, I, E = tech.share_skill.shape
    return InputPrices(
        composite=rng.uniform(0.5, 2.0, size=(R, I)),
        wage=rng.uniform(0.5, 2.0, size=(R, E)),
        rent=rng.uniform(0.5, 2.0, size=(R, I)),
    )


def unit_prices(tech):
    R, I, E = tech.share_skill.shape
    return InputPrices(composite=np.ones((R, I)), wage=np.ones((R, E)),
                       rent=np.ones((R, I)))


class TestUnitCost:
    def test_unit_prices_give_benchmark_cost(self):
        rng = np.random.default_rng(0)
        tech = random_technology(rng)
        uc = unit_cost(tech, unit_prices(tech))
        assert np.allclose(uc, tech.input_scale, rtol=1e-12, atol=0)

    def test_unit_cost_one_without_scale(self):
        rng = np.random.default_rng(1)
        tech = random_technology(rng)
        object.__setattr__(tech, "input_scale", np.ones_like(tech.input_scale))
        assert np.allclose(unit_cost(tech, unit_prices(tech)), 1.0,
                           rtol=1e-12)

    def test_linear_homogeneity(self):
        rng = np.random.default_rng(2)
        tech = random_technology(rng)
        p = random_prices(rng, tech)
        doubled = InputPrices(composite=2 * p.composite, wage=2 * p.wage,
                              rent=2 * p.rent)
        assert np.allclose(unit_cost(tech, doubled),
                           2.0 * unit_cost(tech, p), rtol=1e-12)

    def test_tfp_halves_cost(self):
        rng = np.random.default_rng(3)
        tech = random_technology(rng)
        p = unit_prices(tech)
        uc1 = unit_cost(tech, p)
        uc2 = unit_cost(tech, p, tfp=2.0 * tech.a0)
        assert np.allclose(uc2, 0.5 * uc1, rtol=1e-12)

    def test_nonpositive_price_rejected(self):
        rng = np.random.default_rng(4)
        tech = random_technology(rng)
        p = unit_prices(tech)
        bad = InputPrices(composite=p.composite * 0.0, wage=p.wage,
                          rent=p.rent)
        with pytest.raises(DomainError):
            unit_cost(tech, bad)

    def test_monotone_in_every_price(self):
        rng = np.random.default_rng(5)
        tech = random_technology(rng)
        p = random_prices(rng, tech)
        base = unit_cost(tech, p)
        for _ in range(20):
            comp = p.composite.copy()
            comp[rng.integers(2), rng.integers(3)] *= 1.3
            up = unit_cost(tech, InputPrices(comp, p.wage, p.rent))
            assert np.all(up >= base - 1e-12)


class TestInputDemands:
    def test_benchmark_replication_on_toy(self, model22, toy22):
        tech = NestedTechnology.from_params(model22.params)
        R, I = toy22.output.shape
        prices = InputPrices(
            composite=np.ones((R, I)),
            wage=np.ones((R, toy22.dims.n_skills)),
            rent=np.ones((R, I)),
        )
        d = input_demands(tech, prices, toy22.output)
        assert np.allclose(d.materials, toy22.io_use, rtol=1e-12, atol=1e-12)
        assert np.allclose(d.capital, toy22.capital_rent, rtol=1e-12)
        assert np.allclose(d.labour, toy22.wage_bill, rtol=1e-12, atol=1e-12)
        assert np.allclose(d.elec, toy22.energy_elec, rtol=1e-12)
        assert np.allclose(d.nelec, toy22.energy_nelec, rtol=1e-12)

    def test_cost_identity(self):
        rng = np.random.default_rng(6)
        tech = random_technology(rng)
        p = random_prices(rng, tech)
        out = rng.uniform(10, 100, size=(2, 3))
        d = input_demands(tech, p, out)
        paid = input_cost(tech, p, d)
        assert np.allclose(paid, unit_cost(tech, p) * out, rtol=1e-12)

    def test_degree_zero_in_prices_linear_in_output(self):
        rng = np.random.default_rng(7)
        tech = random_technology(rng)
        p = random_prices(rng, tech)
        out = rng.uniform(10, 100, size=(2, 3))
        d1 = input_demands(tech, p, out)
        scaled = InputPrices(3 * p.composite, 3 * p.wage, 3 * p.rent)
        d2 = input_demands(tech, scaled, out)
        assert np.allclose(d1.capital, d2.capital, rtol=1e-12)
        assert np.allclose(d1.materials, d2.materials, rtol=1e-12)
        d3 = input_demands(tech, p, 2.0 * out)
        assert np.allclose(d3.labour, 2.0 * d1.labour, rtol=1e-13)

    def test_leontief_limit_fixes_factor_ratio(self):
        rng = np.random.default_rng(8)
        tech = random_technology(rng)
        object.__setattr__(tech, "sigma_k_l", np.full(3, 1e-6))
        p = unit_prices(tech)
        out = np.full((2, 3), 50.0)
        d1 = input_demands(tech, p, out)
        wage_up = InputPrices(p.composite, p.wage * 1.5, p.rent)
        d2 = input_demands(tech, wage_up, out)
        ratio1 = d1.capital / d1.labour.sum(axis=2)
        ratio2 = d2.capital / d2.labour.sum(axis=2)
        assert np.allclose(ratio1, ratio2, rtol=1e-4)

    def test_negative_output_rejected(self):
        rng = np.random.default_rng(9)
        tech = random_technology(rng)
        with pytest.raises(DomainError):
            input_demands(tech, unit_prices(tech), np.full((2, 3), -1.0))


class TestShephard:
    def test_demands_match_cost_gradient(self):
        """Analytic demands vs central differences of the dual, 1e-6."""
        rng = np.random.default_rng(10)
        for _ in range(10):
            tech = random_technology(rng)
            p = random_prices(rng, tech)
            check_shephard(tech, p, rtol=1e-6)

    def test_skill_wage_increase_example(self):
        rng = np.random.default_rng(11)
        tech = random_technology(rng)
        p = random_prices(rng, tech)
        wage = p.wage.copy()
        wage[:, 2] *= 1.1
        check_shephard(tech, InputPrices(p.composite, wage, p.rent),
                       rtol=1e-6)


def check_shephard(tech, p, rtol):
    R, I, E = tech.share_skill.shape
    d = input_demands(tech, p, np.ones((R, I)))

    def cost_of_wages(w):
        return unit_cost(tech, InputPrices(p.composite, w, p.rent))

    grad_w = central_difference(cost_of_wages, p.wage, 1e-5)
    for k in range(p.wage.size):
        r, e = divmod(k, E)
        analytic = d.labour[r, :, e]
        assert np.allclose(grad_w[k][r, :], analytic,
                           rtol=rtol, atol=1e-9), (r, e)

    def cost_of_rents(rents):
        return unit_cost(tech, InputPrices(p.composite, p.wage, rents))

    grad_r = central_difference(cost_of_rents, p.rent, 1e-5)
    for k in range(p.rent.size):
        r, i = divmod(k, I)
        assert np.isclose(grad_r[k][r, i], d.capital[r, i],
                          rtol=rtol, atol=1e-9)

    def cost_of_composites(pa):
        return unit_cost(tech, InputPrices(pa, p.wage, p.rent))

    grad_c = central_difference(cost_of_composites, p.composite, 1e-5)
    for k in range(p.composite.size):
        r, j = divmod(k, I)
        analytic = d.materials[r, :, j].copy()
        if j == tech.elec_index:
            analytic += d.elec[r, :]
        if j == tech.nelec_index:
            analytic += d.nelec[r, :]
        assert np.allclose(grad_c[k][r, :], analytic,
                           rtol=rtol, atol=1e-9), ("composite", r, j)
