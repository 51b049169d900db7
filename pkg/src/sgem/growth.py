"""Endogenous TFP dynamics: frontier catch-up, human capital, R&D.

Sectoral TFP growth is linear in the frontier's growth, the (log) gap to
the frontier, human capital, R&D intensity and the two gap interactions:

    dlnA = b1*dlnA* + b2*gap + b3*H + b4*H*gap + b5*RD + b6*RD*gap

with gap = ln(A / A*) <= 0 and the frontier A* the sectoral maximum over
regions.  R&D intensity follows an AR(1) with constant, whose long-run
mean is c / (1 - a).  Updates are simultaneous from period-t values; the
frontier is recomputed afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dimensions, DomainError, SectorGroup

#: Sector-group TFP growth coefficients (b1..b6).  Group cells that are not
#: statistically distinguishable from zero fall back to the pooled column,
#: mirroring the estimation source; the absorptive-capacity terms b3..b6
#: are only identified on the pooled sample and are shared by all groups.
POOLED_GROWTH = (0.100, -0.47, 0.027, 0.29, 0.26, 0.47)
DEFAULT_GROWTH_COEFS: dict[SectorGroup, tuple] = {
    SectorGroup.TRADITIONAL: (0.24, -0.21) + POOLED_GROWTH[2:],
    SectorGroup.HIGH_TECH: (0.20, -0.22) + POOLED_GROWTH[2:],
    SectorGroup.MEDIUM_TECH: (POOLED_GROWTH[0], -0.51) + POOLED_GROWTH[2:],
    SectorGroup.LOW_TECH: (POOLED_GROWTH[0], -0.13) + POOLED_GROWTH[2:],
    SectorGroup.KNOWLEDGE_SERVICES: (0.049, -0.077) + POOLED_GROWTH[2:],
    SectorGroup.OTHER_SERVICES: (POOLED_GROWTH[0], -0.14) + POOLED_GROWTH[2:],
}

#: AR(1) persistence / constant for R&D intensity per sector group.  The
#: medium-tech persistence is not distinguishable from zero in the source
#: estimates, so the pooled values are used there as well.
POOLED_RD = (0.976, 0.00129)
DEFAULT_RD_PROCESS: dict[SectorGroup, tuple] = {
    SectorGroup.TRADITIONAL: (0.990, 0.000278),
    SectorGroup.HIGH_TECH: (0.958, 0.00627),
    SectorGroup.MEDIUM_TECH: POOLED_RD,
    SectorGroup.LOW_TECH: (0.928, 0.00161),
    SectorGroup.KNOWLEDGE_SERVICES: (0.985, 0.000522),
    SectorGroup.OTHER_SERVICES: (0.907, 0.000366),
}


@dataclass(frozen=True)
class GrowthCoefficients:
    """b1..b6 of the TFP growth equation for one sector group."""

    b1: float  # frontier growth
    b2: float  # gap (catch-up); negative for stable dynamics
    b3: float  # human capital
    b4: float  # human capital x gap
    b5: float  # R&D intensity
    b6: float  # R&D x gap

    def as_array(self) -> np.ndarray:
        return np.array([self.b1, self.b2, self.b3, self.b4, self.b5,
                         self.b6])

    @property
    def gap_stable(self) -> bool:
        return self.b2 < 0


@dataclass(frozen=True)
class RnDProcess:
    """AR(1) with constant: RD' = a * RD + c."""

    a: float
    c: float

    @property
    def long_run_mean(self) -> float:
        return long_run_rd(self)


def frontier(tfp: np.ndarray) -> np.ndarray:
    """[I] sectoral frontier: the max TFP level across regions."""
    return np.asarray(tfp, dtype=float).max(axis=0)


def frontier_gap(tfp: np.ndarray) -> np.ndarray:
    """[R, I] log distance to the frontier, <= 0 with equality for leaders."""
    return np.log(np.asarray(tfp) / frontier(tfp)[None, :])


def tfp_growth(gap, dln_frontier, h, rd, coefs) -> np.ndarray:
    """dlnA from the linear growth equation; applied multiplicatively."""
    gap = np.asarray(gap, dtype=float)
    if np.any(gap > 1e-12):
        raise DomainError("gap must be nonpositive (followers at or below "
                          "the frontier)")
    c = coefs.as_array() if isinstance(coefs, GrowthCoefficients) \
        else np.asarray(coefs, dtype=float)
    b1, b2, b3, b4, b5, b6 = np.moveaxis(np.broadcast_to(
        c, gap.shape + (6,)), -1, 0)
    h = np.asarray(h, dtype=float)
    rd = np.asarray(rd, dtype=float)
    return (
        b1 * np.asarray(dln_frontier, dtype=float)
        + b2 * gap + b3 * h + b4 * h * gap + b5 * rd + b6 * rd * gap
    )


def rd_step(rd_prev, process: RnDProcess | tuple, shock=0.0) -> np.ndarray:
    """One AR(1) step (simulation: disturbance zero, plus policy shock)."""
    if isinstance(process, RnDProcess):
        a, c = process.a, process.c
    else:
        a, c = process
    return np.asarray(a) * np.asarray(rd_prev, dtype=float) + np.asarray(c) \
        + shock


def long_run_rd(process: RnDProcess | tuple) -> float:
    """Stationary mean c / (1 - a); undefined for |a| >= 1."""
    if isinstance(process, RnDProcess):
        a, c = process.a, process.c
    else:
        a, c = process
    if abs(a) >= 1.0:
        raise DomainError(f"AR(1) persistence {a} has no long-run mean")
    return c / (1.0 - a)


def default_growth_arrays(dims: Dimensions, growth_coefs=None,
                          rd_process=None):
    """Per-sector coefficient arrays mapped from sector-group tables.

    ``growth_coefs`` maps SectorGroup -> (b1..b6); ``rd_process`` maps
    SectorGroup -> (a, c).  Missing groups use the defaults.
    """
    gtab = dict(DEFAULT_GROWTH_COEFS)
    if growth_coefs:
        for grp, vals in growth_coefs.items():
            gtab[SectorGroup(grp)] = tuple(float(v) for v in vals)
    rtab = dict(DEFAULT_RD_PROCESS)
    if rd_process:
        for grp, vals in rd_process.items():
            rtab[SectorGroup(grp)] = tuple(float(v) for v in vals)

    groups = dims.group_array()
    gc = np.array([gtab[g] for g in groups], dtype=float)
    rd_a = np.array([rtab[g][0] for g in groups], dtype=float)
    rd_c = np.array([rtab[g][1] for g in groups], dtype=float)
    return gc, rd_a, rd_c


@dataclass(frozen=True)
class GrowthShocks:
    """Additive policy shocks applied during one between-period update."""

    rd: np.ndarray | None = None   # [R, I] R&D intensity increments
    h: np.ndarray | None = None    # [R] human-capital increments


def apply_growth(tfp, tfp_prev, rd, h, params, shocks: GrowthShocks | None = None):
    """(TFP', RD', H') for the next period.

    The frontier growth regressor is the observed frontier growth over the
    last step (zero on the first step); all regions update simultaneously
    from period-t values and the frontier is recomputed afterwards.
    """
    tfp = np.asarray(tfp, dtype=float)
    tfp_prev = np.asarray(tfp_prev, dtype=float)
    rd = np.asarray(rd, dtype=float)
    h = np.asarray(h, dtype=float)

    dln_frontier = np.log(frontier(tfp) / frontier(tfp_prev))
    gap = frontier_gap(tfp)
    dln = tfp_growth(gap, dln_frontier[None, :], h[:, None], rd,
                     params.growth_coefs[None, :, :])
    tfp_next = tfp * np.exp(dln)

    rd_shock = 0.0 if shocks is None or shocks.rd is None else shocks.rd
    h_shock = 0.0 if shocks is None or shocks.h is None else shocks.h
    rd_next = rd_step(rd, (params.rd_persistence[None, :],
                           params.rd_constant[None, :]), rd_shock)
    rd_next = np.maximum(rd_next, 0.0)
    h_next = np.clip(h + h_shock, 0.0, 1.0)
    return tfp_next, rd_next, h_next
