"""Closed-form eta -> infinity results for the degenerate case delta = 0."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Literal

import numpy as np

from .model import ClosedFormDomainError, EnergySurfacePoint, ModelParams, energy_surface


class Regime(str, Enum):
    ALPHA_LESS_BETA_SQ = "AlphaLessBetaSq"
    ALPHA_GREATER_BETA_SQ = "AlphaGreaterBetaSq"
    ALPHA_EQUALS_BETA_SQ = "AlphaEqualsBetaSq"


class Phase(str, Enum):
    NORMAL = "Normal"
    SUPERRADIANT_Y1 = "SuperradiantY1"
    SUPERRADIANT_Y2 = "SuperradiantY2"
    BOUNDARY_U1 = "BoundaryU1"


@dataclass(frozen=True)
class CriticalPoint:
    regime: Regime
    Rc: float


@dataclass(frozen=True)
class PhaseClassification:
    """Ground state of the classical energy surface.

    Order parameters are reported non-negative; ``multiplicity`` counts the
    degenerate minima (1 normal, 2 for the +/- pair, inf on the U(1) ring).
    """

    label: Phase
    y1: float
    y2: float
    energy: float
    multiplicity: float = 1


@dataclass(frozen=True)
class EnergyDerivatives:
    d2E_dR2: float
    dE_dgamma: float


@dataclass(frozen=True)
class MeanPhotons:
    n1_over_eta: float
    n2_over_eta: float


def regime(alpha: float, beta: float, boundary_tol: float = 0.0) -> Regime:
    """Compare alpha with beta^2 exactly (as rationals), optionally with a tolerance band on gamma."""
    if not (alpha > 0 and beta > 0):
        raise ValueError("alpha and beta must be positive")
    if boundary_tol > 0 and abs(alpha / beta**2 - 1.0) <= boundary_tol:
        return Regime.ALPHA_EQUALS_BETA_SQ
    a, b2 = Fraction(alpha), Fraction(beta) ** 2
    if a < b2:
        return Regime.ALPHA_LESS_BETA_SQ
    if a > b2:
        return Regime.ALPHA_GREATER_BETA_SQ
    return Regime.ALPHA_EQUALS_BETA_SQ


def critical_coupling(alpha: float, beta: float, boundary_tol: float = 0.0) -> CriticalPoint:
    reg = regime(alpha, beta, boundary_tol)
    if reg is Regime.ALPHA_LESS_BETA_SQ:
        return CriticalPoint(reg, math.sqrt(alpha) / beta)
    return CriticalPoint(reg, 1.0)


def _y2_squared(alpha, beta, R):
    u = beta**2 * R**2
    return (u * u - alpha**2) / (2.0 * alpha**2 * u)


def _y1_squared(R):
    return (R**4 - 1.0) / (2.0 * R**2)


def _energy_y2(alpha, beta, R):
    u = beta**2 * R**2 / alpha
    return 0.5 - 0.25 * (u + 1.0 / u)


def _energy_y1(R):
    return 0.5 - 0.25 * (R**2 + 1.0 / R**2)


def classify_phase(params: ModelParams, boundary_tol: float = 0.0) -> PhaseClassification:
    params.require_degenerate("classify_phase")
    a, b, R = params.alpha, params.beta, params.R
    crit = critical_coupling(a, b, boundary_tol)
    if R <= crit.Rc:
        return PhaseClassification(Phase.NORMAL, 0.0, 0.0, 0.0, 1)
    if crit.regime is Regime.ALPHA_LESS_BETA_SQ:
        return PhaseClassification(
            Phase.SUPERRADIANT_Y2, 0.0, math.sqrt(_y2_squared(a, b, R)), _energy_y2(a, b, R), 2
        )
    if crit.regime is Regime.ALPHA_GREATER_BETA_SQ:
        return PhaseClassification(Phase.SUPERRADIANT_Y1, math.sqrt(_y1_squared(R)), 0.0, _energy_y1(R), 2)
    # on the ring y1^2 + beta^2 y2^2 = S, report the y2 = 0 representative
    return PhaseClassification(Phase.BOUNDARY_U1, math.sqrt(_y1_squared(R)), 0.0, _energy_y1(R), math.inf)


def grid_minimize_surface(params: ModelParams, half_width: float, step: float) -> EnergySurfacePoint:
    """Brute-force minimum of the energy surface on [-half_width, half_width]^2.

    The best grid point is refined once by fitting a quadratic to its 3x3
    neighbourhood. Only meant as an independent check of :func:`classify_phase`.
    """
    params.require_degenerate("grid_minimize_surface")
    if not step > 0 or not half_width >= 0:
        raise ValueError("step must be positive and half_width non-negative")
    n = int(math.floor(half_width / step + 1e-9))
    axis = step * np.arange(-n, n + 1)
    if axis.size == 0:
        raise ValueError("empty grid")

    best = (math.inf, 0, 0)
    chunk = max(1, 4_000_000 // axis.size)
    for lo in range(0, axis.size, chunk):
        e = energy_surface(params, axis[lo : lo + chunk, None], axis[None, :])
        k = int(np.argmin(e))
        i, j = divmod(k, axis.size)
        if e.flat[k] < best[0]:
            best = (float(e.flat[k]), lo + i, j)
    e0, i, j = best
    y1, y2 = float(axis[i]), float(axis[j])

    if 0 < i < axis.size - 1 and 0 < j < axis.size - 1:
        d = np.array([-1.0, 0.0, 1.0])
        u, v = np.meshgrid(d, d, indexing="ij")
        patch = energy_surface(params, y1 + step * u, y2 + step * v).ravel()
        u, v = u.ravel(), v.ravel()
        design = np.column_stack([np.ones(9), u, v, u * u, u * v, v * v])
        c = np.linalg.lstsq(design, patch, rcond=None)[0]
        hess = np.array([[2 * c[3], c[4]], [c[4], 2 * c[5]]])
        if np.all(np.linalg.eigvalsh(hess) > 0):
            du, dv = np.linalg.solve(hess, -c[1:3])
            if abs(du) <= 1 and abs(dv) <= 1:
                cand = (y1 + step * du, y2 + step * dv)
                e_cand = energy_surface(params, *cand)
                if e_cand <= e0:
                    y1, y2, e0 = cand[0], cand[1], e_cand
    return EnergySurfacePoint(y1, y2, e0)


def ground_energy(params: ModelParams) -> float:
    return classify_phase(params).energy


def ground_energy_derivatives(
    params: ModelParams, side: Literal["below", "above"] = "above"
) -> EnergyDerivatives:
    """d2E0/dR2 at fixed (alpha, beta) and dE0/dgamma at fixed R.

    At a non-analytic point (R = Rc, or gamma = 1 for the gamma derivative)
    the one-sided limit from ``side`` is returned.
    """
    params.require_degenerate("ground_energy_derivatives")
    if side not in ("below", "above"):
        raise ValueError("side must be 'below' or 'above'")
    a, b, R = params.alpha, params.beta, params.R
    crit = critical_coupling(a, b)
    g = a / b**2

    if R < crit.Rc or (R == crit.Rc and side == "below"):
        d2 = 0.0
    elif crit.regime is Regime.ALPHA_LESS_BETA_SQ:
        d2 = -0.25 * (6.0 * a / (b**2 * R**4) + 2.0 * b**2 / a)
    else:
        d2 = -(1.5 / R**4 + 0.5)

    # E0(gamma) at fixed R: y2-branch 1/2 - (gamma/R^2 + R^2/gamma)/4 for R^2 > gamma, gamma < 1;
    # otherwise independent of gamma
    on_y2_side = crit.regime is Regime.ALPHA_LESS_BETA_SQ or (
        crit.regime is Regime.ALPHA_EQUALS_BETA_SQ and side == "below"
    )
    if on_y2_side and R**2 > g:
        de_dg = -0.25 * (1.0 / R**2 - R**2 / g**2)
    else:
        de_dg = 0.0
    return EnergyDerivatives(d2, de_dg)


def analytic_eigenstate(params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Normalized lowest eigenvectors of M at the (+) and (-) field minima."""
    params.require_degenerate("analytic_eigenstate")
    a, b, R = params.alpha, params.beta, params.R
    crit = critical_coupling(a, b)
    if crit.regime is Regime.ALPHA_EQUALS_BETA_SQ:
        raise ClosedFormDomainError("alpha = beta^2 has a continuum of minima")
    if R <= crit.Rc:
        raise ClosedFormDomainError("no symmetry-broken eigenstate in the normal phase")
    if crit.regime is Regime.ALPHA_LESS_BETA_SQ:
        u = b**2 * R**2
        plus = np.array([0.0, -math.sqrt((u + a) / (2 * u)), math.sqrt((u - a) / (2 * u))])
    else:
        u = R**2
        plus = np.array([-math.sqrt((u + 1) / (2 * u)), 0.0, math.sqrt((u - 1) / (2 * u))])
    return plus, -plus


def mean_photon_analytic(params: ModelParams) -> MeanPhotons:
    """<a_i+ a_i>/eta averaged over the two symmetry-broken minima."""
    params.require_degenerate("mean_photon_analytic")
    crit = critical_coupling(params.alpha, params.beta)
    if crit.regime is Regime.ALPHA_EQUALS_BETA_SQ:
        raise ClosedFormDomainError("mean photon numbers are not unique at alpha = beta^2")
    return MeanPhotons(*mean_photon_estimate(params))


def mean_photon_estimate(params: ModelParams) -> tuple[float, float]:
    """Like :func:`mean_photon_analytic` but puts the whole ring occupation into mode 1 at alpha = beta^2."""
    a, b, R = params.alpha, params.beta, params.R
    crit = critical_coupling(a, b)
    if R <= crit.Rc:
        return 0.0, 0.0
    if crit.regime is Regime.ALPHA_LESS_BETA_SQ:
        return 0.0, 0.5 * _y2_squared(a, b, R)
    return 0.5 * _y1_squared(R), 0.0


def soft_modes(params: ModelParams) -> tuple[bool, bool]:
    """Which modes carry the order parameter near the transition."""
    reg = regime(params.alpha, params.beta)
    return (reg is not Regime.ALPHA_LESS_BETA_SQ, reg is not Regime.ALPHA_GREATER_BETA_SQ)
