"""Parallel exact-diagonalization sweeps over (eta, R)."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

from .analytic import Regime, regime
from .model import Branch, ModelParams
from .scaling import SweepDataset
from .solver import SolverConfig, solve_ground_state

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepPoint:
    eta: float
    R: float
    energy: float
    n1: float
    n2: float
    parity: float
    n1_max: int
    n2_max: int
    iterations: int
    converged: bool
    error: str = ""


def order_parameter_mode(alpha: float, beta: float) -> Branch:
    """Mode that condenses at the normal-superradiant transition."""
    return "mode2" if regime(alpha, beta) is Regime.ALPHA_LESS_BETA_SQ else "mode1"


def _solve_point(task) -> SweepPoint:
    params, config = task
    try:
        res = solve_ground_state(params, config)
    except Exception as exc:  # reported per point by the caller
        return SweepPoint(params.eta, params.R, float("nan"), float("nan"), float("nan"),
                          float("nan"), 0, 0, 0, False, f"{type(exc).__name__}: {exc}")
    return SweepPoint(
        params.eta, params.R, res.energy, res.n1, res.n2, res.parity,
        res.trunc_used.n1_max, res.trunc_used.n2_max, res.iterations, res.converged,
    )


def run_sweep(
    base: ModelParams,
    etas: Sequence[float],
    Rs: Sequence[float],
    config: SolverConfig | None = None,
    workers: int = 1,
) -> list[SweepPoint]:
    """Solve every (eta, R) pair; results come back in eta-major input order."""
    config = config or SolverConfig()
    tasks = [(replace(base, eta=float(eta), R=float(R)), config) for eta in etas for R in Rs]
    if workers <= 1:
        results = [_solve_point(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_solve_point, tasks, chunksize=1))
    for p in results:
        if p.error or not p.converged:
            log.warning("point eta=%g R=%g: %s", p.eta, p.R, p.error or "not converged")
    return results


def to_dataset(points: Sequence[SweepPoint], base: ModelParams, mode: Branch | None = None) -> SweepDataset:
    mode = mode or order_parameter_mode(base.alpha, base.beta)
    pick = (lambda p: p.n1) if mode == "mode1" else (lambda p: p.n2)
    return SweepDataset(
        mode,
        tuple((p.eta, p.R, pick(p) / p.eta) for p in points),
        (base.alpha, base.beta, base.delta),
    )
