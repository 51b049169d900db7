"""Nested KLEM technology: unit costs and cost-minimising input demands.

The nest tree is fixed: output combines materials M with a KLE composite;
KLE combines energy E with a KL composite; KL combines capital services
with a labour composite; E splits electric / non-electric; labour is a CES
over skill types.  Materials are a Leontief bundle of commodities.

Every nest is evaluated on the dual (prices), bottom-up, in calibrated-share
form: with benchmark prices of one, a nest with value shares ``theta`` and
elasticity ``sigma`` has price index ``(sum theta * p^(1-sigma))^(1/(1-sigma))``
and per-unit input demands ``theta * (c/p)^sigma`` -- exact benchmark
replication, linear homogeneity and Shephard's lemma hold by construction.
TFP enters Hicks-neutrally: doubling TFP halves the unit cost at any prices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DomainError, ParameterSet


def ces_price(theta, p, sigma, axis=-1):
    """CES price index along ``axis``; zero-share branches are ignored.

    ``sigma`` must be broadcastable to ``theta``'s shape and constant along
    the nest axis.  A nest whose shares are all zero gets price one (it is
    never demanded).

    Evaluated as ``exp(log1p(sum theta*expm1((1-sigma) ln p)) / (1-sigma))``
    so the index stays accurate to machine precision even for sigma
    arbitrarily close to one (the naive power form loses a factor
    ``1/(1-sigma)`` of precision there and turns finite differences of the
    cost function into noise).
    """
    sig_full = np.broadcast_to(np.asarray(sigma, dtype=float), theta.shape)
    sig = np.take(sig_full, 0, axis=axis)
    total = theta.sum(axis=axis)
    with np.errstate(divide="ignore", invalid="ignore"):
        logp = np.where(theta > 0, np.log(p), 0.0)
        cobb = np.exp((theta * logp).sum(axis=axis))
        a = 1.0 - sig_full
        dev = np.where(theta > 0, theta * np.expm1(a * logp), 0.0).sum(
            axis=axis
        )
        safe_total = np.where(total > 0, total, 1.0)
        log_s = np.log(safe_total) + np.log1p(dev / safe_total)
        a1 = 1.0 - sig
        ces = np.exp(log_s / np.where(a1 == 0.0, 1.0, a1))
    out = np.where(sig == 1.0, cobb, ces)
    return np.where(total > 0, out, 1.0)


def ces_demand(theta, p, c, sigma):
    """Input per unit of nest output: ``theta * (c/p)^sigma``.

    Valid for every sigma > 0, including the Cobb-Douglas case sigma = 1.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        d = theta * (c / p) ** sigma
    return np.where(theta > 0, d, 0.0)


def _pair_price(share_a, p_a, p_b, sigma):
    theta = np.stack([share_a, 1.0 - share_a], axis=-1)
    p = np.stack([p_a, p_b], axis=-1)
    return ces_price(theta, p, sigma, axis=-1)


@dataclass(frozen=True)
class InputPrices:
    """Prices the producer faces: composites, wages, capital-service rents."""

    composite: np.ndarray  # [R, I] Armington composite prices
    wage: np.ndarray       # [R, E]
    rent: np.ndarray       # [R, I]

    def validate(self):
        for name in ("composite", "wage", "rent"):
            arr = getattr(self, name)
            if np.any(arr <= 0) or not np.all(np.isfinite(arr)):
                raise DomainError(f"{name} prices must be positive and finite")


@dataclass(frozen=True)
class NestedTechnology:
    """Calibrated production side for every (region, sector) at once."""

    share_m: np.ndarray       # [R, I] materials share of the top nest
    share_e: np.ndarray       # [R, I] energy share of the KLE nest
    share_k: np.ndarray       # [R, I] capital share of the KL nest
    share_nelec: np.ndarray   # [R, I] non-electric share of the E nest
    share_skill: np.ndarray   # [R, I, E]
    sigma_m_kle: np.ndarray   # [I]
    sigma_e_kl: np.ndarray    # [I]
    sigma_k_l: np.ndarray     # [I]
    sigma_elec: np.ndarray    # [I]
    sigma_skill: np.ndarray   # [I]
    mat_coef: np.ndarray      # [R, I, J] commodity j per unit materials bundle
    input_scale: np.ndarray   # [R, I] benchmark input cost per unit output
    a0: np.ndarray            # [R, I] benchmark TFP
    elec_index: int
    nelec_index: int

    @classmethod
    def from_params(cls, params: ParameterSet) -> "NestedTechnology":
        return cls(
            share_m=params.share_m, share_e=params.share_e,
            share_k=params.share_k, share_nelec=params.share_nelec,
            share_skill=params.share_skill,
            sigma_m_kle=params.sigma_m_kle, sigma_e_kl=params.sigma_e_kl,
            sigma_k_l=params.sigma_k_l, sigma_elec=params.sigma_elec,
            sigma_skill=params.sigma_skill,
            mat_coef=params.mat_coef, input_scale=params.input_scale,
            a0=params.a0,
            elec_index=params.dims.elec_index,
            nelec_index=params.dims.nelec_index,
        )

    def nest_prices(self, prices: InputPrices) -> dict[str, np.ndarray]:
        """Bottom-up price indices of every nest, [R, I] each."""
        prices.validate()
        pa, w, rent = prices.composite, prices.wage, prices.rent
        R, I = rent.shape
        E = w.shape[1]

        p_mat = np.einsum("rij,rj->ri", self.mat_coef, pa)
        p_mat = np.where(self.mat_coef.sum(axis=2) > 0, p_mat, 1.0)

        p_lab = ces_price(
            self.share_skill,
            np.broadcast_to(w[:, None, :], (R, I, E)),
            self.sigma_skill[None, :, None],
            axis=2,
        )
        p_elec = np.broadcast_to(pa[:, self.elec_index][:, None], (R, I))
        p_nelec = np.broadcast_to(pa[:, self.nelec_index][:, None], (R, I))
        p_en = _pair_price(self.share_nelec, p_nelec, p_elec,
                           self.sigma_elec[None, :, None])
        p_kl = _pair_price(self.share_k, rent, p_lab,
                           self.sigma_k_l[None, :, None])
        p_kle = _pair_price(self.share_e, p_en, p_kl,
                            self.sigma_e_kl[None, :, None])
        p_top = _pair_price(self.share_m, p_mat, p_kle,
                            self.sigma_m_kle[None, :, None])
        return {
            "materials": p_mat, "labour": p_lab, "energy": p_en,
            "kl": p_kl, "kle": p_kle, "top": p_top,
            "p_elec": p_elec, "p_nelec": p_nelec,
        }


@dataclass(frozen=True)
class InputDemands:
    """Cost-minimising input quantities for given output levels."""

    materials: np.ndarray      # [R, I, J] commodity use via the M bundle
    capital: np.ndarray        # [R, I] capital services
    labour: np.ndarray         # [R, I, E]
    elec: np.ndarray           # [R, I]
    nelec: np.ndarray          # [R, I]

    def commodity_use(self, elec_index: int, nelec_index: int) -> np.ndarray:
        """[R, J] commodity absorption by all producers of each region."""
        use = self.materials.sum(axis=1)
        use[:, elec_index] += self.elec.sum(axis=1)
        use[:, nelec_index] += self.nelec.sum(axis=1)
        return use


def unit_cost(tech: NestedTechnology, prices: InputPrices,
              tfp: np.ndarray | None = None) -> np.ndarray:
    """Cost of one unit of output at given input prices, [R, I].

    Equals ``input_scale`` (the benchmark input cost per unit of output)
    when all prices are one and TFP is at its benchmark level.
    """
    nests = tech.nest_prices(prices)
    scale = tech.a0 / (tech.a0 if tfp is None else np.asarray(tfp))
    return tech.input_scale * nests["top"] * scale


def per_unit_demands(tech: NestedTechnology, prices: InputPrices,
                     tfp: np.ndarray | None = None) -> dict[str, np.ndarray]:
    """Primitive input quantities per unit of output (Shephard's lemma)."""
    nests = tech.nest_prices(prices)
    scale = tech.input_scale * (
        tech.a0 / (tech.a0 if tfp is None else np.asarray(tfp))
    )

    m_per = ces_demand(tech.share_m, nests["materials"], nests["top"],
                       tech.sigma_m_kle[None, :])
    kle_per = ces_demand(1.0 - tech.share_m, nests["kle"], nests["top"],
                         tech.sigma_m_kle[None, :])
    en_per = ces_demand(tech.share_e, nests["energy"], nests["kle"],
                        tech.sigma_e_kl[None, :])
    kl_per = ces_demand(1.0 - tech.share_e, nests["kl"], nests["kle"],
                        tech.sigma_e_kl[None, :])
    k_per = ces_demand(tech.share_k, prices.rent, nests["kl"],
                       tech.sigma_k_l[None, :])
    lab_per = ces_demand(1.0 - tech.share_k, nests["labour"], nests["kl"],
                         tech.sigma_k_l[None, :])
    ne_per = ces_demand(tech.share_nelec, nests["p_nelec"], nests["energy"],
                        tech.sigma_elec[None, :])
    el_per = ces_demand(1.0 - tech.share_nelec, nests["p_elec"],
                        nests["energy"], tech.sigma_elec[None, :])
    skill_per = ces_demand(
        tech.share_skill,
        prices.wage[:, None, :],
        nests["labour"][:, :, None],
        tech.sigma_skill[None, :, None],
    )

    kle = scale * kle_per
    kl = kle * kl_per
    en = kle * en_per
    mat = scale * m_per
    return {
        "materials": mat[:, :, None] * tech.mat_coef,
        "capital": kl * k_per,
        "labour": (kl * lab_per)[:, :, None] * skill_per,
        "elec": en * el_per,
        "nelec": en * ne_per,
    }


def input_demands(tech: NestedTechnology, prices: InputPrices,
                  output: np.ndarray,
                  tfp: np.ndarray | None = None) -> InputDemands:
    """Total input quantities for given output levels.

    Demands are degree-zero homogeneous in prices and linear in output;
    payments exhaust ``unit_cost * output`` exactly.
    """
    if np.any(np.asarray(output) < 0):
        raise DomainError("output levels must be nonnegative")
    pu = per_unit_demands(tech, prices, tfp)
    out = np.asarray(output, dtype=float)
    return InputDemands(
        materials=pu["materials"] * out[:, :, None],
        capital=pu["capital"] * out,
        labour=pu["labour"] * out[:, :, None],
        elec=pu["elec"] * out,
        nelec=pu["nelec"] * out,
    )


def input_cost(tech: NestedTechnology, prices: InputPrices,
               demands: InputDemands) -> np.ndarray:
    """Total payments to all inputs, [R, I]."""
    return (
        np.einsum("rij,rj->ri", demands.materials, prices.composite)
        + demands.capital * prices.rent
        + np.einsum("rie,re->ri", demands.labour, prices.wage)
        + demands.elec * prices.composite[:, [tech.elec_index]]
        + demands.nelec * prices.composite[:, [tech.nelec_index]]
    )
