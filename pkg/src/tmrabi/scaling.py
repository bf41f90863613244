"""Finite-eta scaling analysis: critical point, exponents, data collapse.

Near the transition the order parameter N = <a+a>/eta of the condensing mode
obeys N(eta, r) = eta^(-kappa/nu) f(eta^(1/nu) r), r = (R - Rc)/Rc.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Literal, Sequence

import numpy as np
import scipy.linalg
from scipy.interpolate import CubicSpline

from .model import Branch, ModelParams, build_quartic_hamiltonian, oscillator_length, quartic_coefficient
from .model import quartic_position_squared

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class ScalingError(ValueError):
    """The data cannot support the requested fit."""


@dataclass(frozen=True)
class SweepDataset:
    """Order-parameter samples on a rectangular (eta, R) grid."""

    regime: Branch
    points: tuple[tuple[float, float, float], ...]
    params_base: tuple[float, float, float] = (1.0, 1.0, 0.0)

    def __post_init__(self):
        if self.regime not in ("mode1", "mode2"):
            raise ValueError("regime must be 'mode1' or 'mode2'")
        pts = tuple((float(e), float(r), float(n)) for e, r, n in self.points)
        object.__setattr__(self, "points", pts)
        seen = set()
        for eta, R, n in pts:
            if not eta > 0 or not n >= 0 or not math.isfinite(n):
                raise ValueError(f"invalid point {(eta, R, n)}")
            if (eta, R) in seen:
                raise ValueError(f"duplicate point at eta={eta}, R={R}")
            seen.add((eta, R))
        etas, Rs = self.etas, self.Rs
        if len(seen) != len(etas) * len(Rs):
            raise ValueError("points do not form a rectangular (eta, R) grid")

    @property
    def etas(self) -> np.ndarray:
        return np.array(sorted({p[0] for p in self.points}))

    @property
    def Rs(self) -> np.ndarray:
        return np.array(sorted({p[1] for p in self.points}))

    def grid(self) -> np.ndarray:
        """Array N[i_R, i_eta] on the sorted axes."""
        etas, Rs = list(self.etas), list(self.Rs)
        out = np.empty((len(Rs), len(etas)))
        for eta, R, n in self.points:
            out[Rs.index(R), etas.index(eta)] = n
        return out

    def restrict(self, eta_min: float) -> "SweepDataset":
        return SweepDataset(self.regime, tuple(p for p in self.points if p[0] >= eta_min), self.params_base)


@dataclass(frozen=True)
class CriticalFit:
    Rc_est: float
    slope: float
    linfit_residual: float
    eta_min: float
    R_grid: np.ndarray = field(repr=False)
    slopes: np.ndarray = field(repr=False)
    residuals: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class CollapseFit:
    nu: float
    collapse_cost: float


@dataclass(frozen=True)
class ScalingFit:
    Rc_est: float
    slope: float
    nu: float
    kappa: float
    linfit_residual: float
    collapse_cost: float
    eta_min: float = 0.0


def loglog_fits(data: SweepDataset) -> tuple[np.ndarray, np.ndarray]:
    """Per-R least-squares fit of ln N against ln eta: (slopes, residual sums of squares)."""
    etas = data.etas
    if etas.size < 2:
        raise ScalingError("need at least two eta values")
    grid = data.grid()
    if np.any(grid <= 0):
        raise ScalingError("order parameter must be positive for a log-log fit")
    x = np.log(etas)
    xc = x - x.mean()
    y = np.log(grid)
    yc = y - y.mean(axis=1, keepdims=True)
    slopes = yc @ xc / (xc @ xc)
    resid = ((yc - slopes[:, None] * xc) ** 2).sum(axis=1)
    return slopes, resid


def _fit_line(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    xc = x - x.mean()
    yc = y - y.mean()
    slope = float(yc @ xc / (xc @ xc))
    return slope, float(((yc - slope * xc) ** 2).sum())


def _locate(data: SweepDataset, min_decay: float) -> CriticalFit:
    if data.etas.size < 4:
        raise ScalingError("need at least four distinct eta values")
    Rs = data.Rs
    if Rs.size < 3:
        raise ScalingError("need at least three R values")
    slopes, resid = loglog_fits(data)
    # the order parameter vanishes as eta grows at the critical point; deep in
    # the ordered phase N is nearly eta-independent and also fits a line well
    decaying = slopes <= -min_decay
    if not np.any(decaying):
        raise ScalingError(f"no R on the grid where N decays faster than eta^-{min_decay}")
    k = int(np.argmin(np.where(decaying, resid, np.inf)))
    if k == 0 or k == Rs.size - 1:
        raise ScalingError(
            f"log-log residual is smallest at the edge of the R grid (R={Rs[k]}); widen the grid"
        )
    # ln N(R) is smooth on each eta slice: interpolate it and minimize the
    # residual of the log-log fit continuously between the grid neighbours
    x = np.log(data.etas)
    spline = CubicSpline(Rs, np.log(data.grid()), axis=0)

    def residual_at(R):
        return _fit_line(x, spline(R))[1]

    Rc = golden_section(residual_at, float(Rs[k - 1]), float(Rs[k + 1]), tol=1e-12 * max(1.0, abs(Rs[k])))
    if residual_at(float(Rs[k])) <= residual_at(Rc):
        Rc = float(Rs[k])
    slope, lin = _fit_line(x, spline(Rc))
    return CriticalFit(float(Rc), slope, lin, float(data.etas[0]), Rs, slopes, resid)


def locate_critical(
    data: SweepDataset,
    eta_min: float | Literal["auto"] | None = "auto",
    slope_tol: float = 0.01,
    min_decay: float = 0.1,
) -> CriticalFit:
    """Critical coupling from the most linear ln N vs ln eta relation.

    Only grid points whose fitted slope is at most ``-min_decay`` compete, which
    keeps the search away from the flat, eta-independent ordered side.

    With ``eta_min="auto"`` the smallest eta values are dropped one at a time
    while dropping them still moves the fitted slope by ``slope_tol`` or more
    (at least four eta values are always kept).
    """
    if eta_min is None:
        return _locate(data, min_decay)
    if eta_min != "auto":
        return _locate(data.restrict(float(eta_min)), min_decay)
    fit = _locate(data, min_decay)
    etas = data.etas
    i = 0
    while etas.size - i > 4:
        trial = _locate(data.restrict(etas[i + 1]), min_decay)
        if abs(trial.slope - fit.slope) < slope_tol:
            break
        fit = trial
        i += 1
    return fit


def _isotonic(y: np.ndarray) -> np.ndarray:
    """Non-decreasing least-squares fit (pool adjacent violators)."""
    vals, wts, sizes = [], [], []
    for v in y:
        vals.append(float(v))
        wts.append(1.0)
        sizes.append(1)
        while len(vals) > 1 and vals[-2] > vals[-1]:
            w = wts[-2] + wts[-1]
            v = (vals[-2] * wts[-2] + vals[-1] * wts[-1]) / w
            s = sizes[-2] + sizes[-1]
            vals[-2:], wts[-2:], sizes[-2:] = [v], [w], [s]
    return np.repeat(vals, sizes)


def collapse_coordinates(data: SweepDataset, Rc: float, slope: float, nu: float):
    """Rescaled points (eta, x, y) with x = eta^(1/nu) r and y = N eta^(-slope)."""
    eta = np.array([p[0] for p in data.points])
    R = np.array([p[1] for p in data.points])
    n = np.array([p[2] for p in data.points])
    r = (R - Rc) / Rc
    return eta, eta ** (1.0 / nu) * r, n * eta ** (-slope)


def collapse_cost(eta: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    """Mean squared distance of each curve from the others, over the dynamic range squared.

    For every eta, its points lying inside the x-range of the remaining curves
    are compared against a monotone piecewise-linear curve through the pooled,
    x-sorted points of those remaining curves.
    """
    groups = np.unique(eta)
    if groups.size < 2:
        raise ScalingError("collapse needs at least two eta values")
    span = float(y.max() - y.min())
    if span <= 0 or float(x.max() - x.min()) <= 0:
        raise ScalingError("degenerate collapse coordinates")
    sq = []
    for g in groups:
        mine = eta == g
        ox, oy = x[~mine], y[~mine]
        order = np.argsort(ox, kind="stable")
        ox, oy = ox[order], _isotonic(oy[order])
        inside = mine & (x >= ox[0]) & (x <= ox[-1])
        if np.any(inside):
            sq.append((y[inside] - np.interp(x[inside], ox, oy)) ** 2)
    if not sq:
        return math.inf
    return float(np.concatenate(sq).mean() / span**2)


def golden_section(func: Callable[[float], float], lo: float, hi: float, tol: float = 1e-6) -> float:
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = func(c), func(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = func(d)
    return 0.5 * (a + b)


def collapse_nu(
    data: SweepDataset,
    Rc: float,
    slope: float,
    nu_range: tuple[float, float] = (0.8, 3.0),
    coarse: int = 56,
    tol: float = 1e-6,
) -> CollapseFit:
    """Correlation-length exponent minimizing :func:`collapse_cost`.

    A coarse scan over ``nu_range`` picks the basin, golden-section search
    refines it.
    """
    if data.etas.size < 2:
        raise ScalingError("collapse needs at least two eta values")
    lo, hi = nu_range
    if not 0 < lo < hi:
        raise ValueError("nu_range must be an increasing interval of positive numbers")

    def cost(nu):
        return collapse_cost(*collapse_coordinates(data, Rc, slope, nu))

    grid = np.linspace(lo, hi, coarse)
    costs = np.array([cost(nu) for nu in grid])
    k = int(np.argmin(costs))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    nu = golden_section(cost, a, b, tol)
    best = cost(nu)
    if costs[k] < best:
        nu, best = float(grid[k]), float(costs[k])
    return CollapseFit(float(nu), float(best))


def fit_scaling(
    data: SweepDataset,
    eta_min: float | Literal["auto"] | None = "auto",
    nu_range: tuple[float, float] = (0.8, 3.0),
) -> ScalingFit:
    crit = locate_critical(data, eta_min)
    used = data.restrict(crit.eta_min)
    col = collapse_nu(used, crit.Rc_est, crit.slope, nu_range)
    return ScalingFit(
        crit.Rc_est, crit.slope, col.nu, -crit.slope * col.nu, crit.linfit_residual,
        col.collapse_cost, crit.eta_min,
    )


def synthetic_dataset(
    Rc: float,
    kappa_over_nu: float,
    nu: float,
    etas: Sequence[float],
    Rs: Sequence[float],
    scaling_function: Callable[[np.ndarray], np.ndarray] | None = None,
    regime: Branch = "mode1",
) -> SweepDataset:
    """Data obeying N = eta^(-kappa/nu) g(eta^(1/nu) r) exactly."""
    if scaling_function is None:
        def scaling_function(x):
            return 0.5 * (x + np.sqrt(x * x + 1.0))
    pts = []
    for eta in etas:
        for R in Rs:
            x = eta ** (1.0 / nu) * (R - Rc) / Rc
            pts.append((eta, R, float(eta ** (-kappa_over_nu) * scaling_function(np.asarray(x)))))
    return SweepDataset(regime, tuple(pts))


def _quartic_ground_z2(params, branch, rprime, size, length):
    h = build_quartic_hamiltonian(params, branch, size, rprime, length=length).toarray()
    _, vec = scipy.linalg.eigh(h, subset_by_index=[0, 0])
    v = vec[:, 0]
    return float(v @ quartic_position_squared(size, length) @ v)


def universal_f(
    branch: Branch,
    params: ModelParams,
    rprime_grid: Iterable[float],
    trunc_1d: int = 64,
    rtol: float = 1e-9,
    max_trunc: int = 4096,
) -> list[tuple[float, float]]:
    """Scaling function f(r') = <z^2>/2 in the ground state of the 1-D quartic model.

    The oscillator basis is doubled from ``trunc_1d`` until f changes by less
    than ``rtol`` (relative).
    """
    params.require_degenerate("universal_f")
    length = oscillator_length(quartic_coefficient(params, branch))
    out = []
    for rp in rprime_grid:
        size = int(trunc_1d)
        prev = _quartic_ground_z2(params, branch, rp, size, length)
        while True:
            if 2 * size > max_trunc:
                raise ScalingError(f"1-D basis not converged at r'={rp} with {size} states")
            size *= 2
            cur = _quartic_ground_z2(params, branch, rp, size, length)
            if abs(cur - prev) <= rtol * max(abs(cur), 1e-12):
                break
            prev = cur
        out.append((float(rp), 0.5 * cur))
    return out
