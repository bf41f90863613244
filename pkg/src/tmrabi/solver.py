"""Ground states of the finite-eta model by sparse exact diagonalization."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .lanczos import lanczos_lowest
from .model import (
    DEFAULT_MAX_DIM,
    ModelParams,
    SparseOperator,
    TruncationError,
    TruncationSpec,
    build_hamiltonian,
    pad_state,
    parity_diagonal,
    symmetry_labels,
)

log = logging.getLogger(__name__)

# fixed order in which symmetry sectors are tried; ties resolve to the earliest
SECTORS = ((1, -1), (-1, 1), (1, 1), (-1, -1))


class ConvergenceError(RuntimeError):
    """Raised by callers that require a converged ground state."""


@dataclass(frozen=True)
class SolverConfig:
    tol_energy: float = 1e-10
    max_krylov: int = 64
    max_restarts: int = 200
    trunc_growth: float = 1.5
    trunc_tol: float = 1e-6
    seed: int = 0
    tail_tol: float = 1e-10
    initial_trunc: TruncationSpec | None = None
    max_dim: int = DEFAULT_MAX_DIM
    max_growth_steps: int = 40

    def __post_init__(self):
        if not self.tol_energy > 0:
            raise ValueError("tol_energy must be positive")
        if not self.trunc_growth > 1:
            raise ValueError("trunc_growth must exceed 1")
        if not self.trunc_tol > 0 or not self.tail_tol > 0:
            raise ValueError("trunc_tol and tail_tol must be positive")
        if self.max_krylov < 2 or self.max_restarts < 0:
            raise ValueError("max_krylov must be >= 2 and max_restarts >= 0")


@dataclass
class GroundStateResult:
    energy: float
    vector: np.ndarray
    n1: float
    n2: float
    parity: float
    trunc_used: TruncationSpec
    iterations: int
    converged: bool
    residual: float = math.nan
    tails: tuple[float, float] = (math.nan, math.nan)
    history: list[tuple[TruncationSpec, float, float, float]] = field(default_factory=list)


def matvec(op: SparseOperator, v: np.ndarray) -> np.ndarray:
    """Sparse product ``op @ v`` with a fixed (row-major CSR) summation order."""
    v = np.asarray(v, dtype=float)
    if v.shape != (op.dimension,):
        raise ValueError(f"vector of shape {v.shape} does not match dimension {op.dimension}")
    return op.csr @ v


def observe(result: GroundStateResult, observable: SparseOperator) -> float:
    v = result.vector
    return float(v @ matvec(observable, v))


def photon_tails(vector: np.ndarray, trunc: TruncationSpec) -> tuple[float, float]:
    """Probability weight in the top tenth (at least one level) of each mode's Fock ladder."""
    prob = np.reshape(vector, trunc.shape) ** 2
    p1 = prob.sum(axis=(0, 2))
    p2 = prob.sum(axis=(0, 1))
    w1 = max(1, math.ceil(p1.size / 10))
    w2 = max(1, math.ceil(p2.size / 10))
    return float(p1[-w1:].sum()), float(p2[-w2:].sum())


def initial_truncation(params: ModelParams) -> TruncationSpec:
    """Cutoffs sized from the eta -> infinity photon numbers plus a critical-window margin."""
    est = [0.0, 0.0]
    if params.delta == 0:
        from .analytic import soft_modes, mean_photon_estimate

        occ = mean_photon_estimate(params)
        crit = params.eta ** (1.0 / 3.0)
        for i, soft in enumerate(soft_modes(params)):
            est[i] = params.eta * occ[i] + (2.0 * crit if soft else 0.0)
    cut = [int(math.ceil(e + 6.0 * math.sqrt(e) + 8)) for e in est]
    return TruncationSpec(*cut)


def _diagonalize(params, trunc, config, warm):
    """Lowest state over all symmetry sectors; ``warm`` maps sector -> padded start vector."""
    ham = build_hamiltonian(params, trunc, max_dim=config.max_dim).csr
    p1, p2 = symmetry_labels(trunc)
    rng = np.random.default_rng(config.seed)
    best = None
    vectors = {}
    iterations = 0
    all_converged = True
    for sector in SECTORS:
        idx = np.flatnonzero((p1 == sector[0]) & (p2 == sector[1]))
        if idx.size == 0:
            continue
        block = ham[idx][:, idx].tocsr()
        start = rng.standard_normal(idx.size)
        if sector in warm:
            guess = warm[sector][idx]
            if np.linalg.norm(guess) > 0:
                start = guess + 1e-8 * start / np.linalg.norm(start) * np.linalg.norm(guess)
        res = lanczos_lowest(
            block.dot,
            start,
            tol=config.tol_energy,
            max_krylov=config.max_krylov,
            max_restarts=config.max_restarts,
        )
        iterations += res.matvecs
        all_converged &= res.converged
        full = np.zeros(trunc.dimension)
        full[idx] = res.vector
        vectors[sector] = full
        tie = config.tol_energy * max(1.0, abs(res.value))
        if best is None or res.value < best[0] - tie:
            best = (res.value, sector, res.residual, res.converged)
    energy, sector, residual, converged = best
    vec = vectors[sector]
    k = int(np.argmax(np.abs(vec)))
    if vec[k] < 0:
        vec = -vec
    return energy, vec, residual, converged and all_converged, iterations, vectors


def _close(a: float, b: float, rel: float, floor: float) -> bool:
    return abs(a - b) <= rel * max(abs(a), abs(b), floor)


def solve_ground_state(params: ModelParams, config: SolverConfig | None = None) -> GroundStateResult:
    """Converged lowest eigenpair of the finite-eta Hamiltonian.

    The Fock cutoffs grow (independently per mode) until the top tenth of each
    photon distribution carries less than ``tail_tol`` and two successive
    truncations agree on E0, <n1>, <n2> to ``trunc_tol``. If the eigensolver
    misses ``tol_energy`` the current result is returned with
    ``converged=False``. Each truncation is
    solved separately in the four sectors of the two conserved mode parities,
    so the returned state has a definite total parity.
    """
    config = config or SolverConfig()
    trunc = config.initial_trunc or initial_truncation(params)
    warm: dict = {}
    prev = None
    history = []
    iterations = 0
    for _ in range(config.max_growth_steps):
        if trunc.dimension > config.max_dim:
            raise TruncationError(
                f"truncation {trunc} (dimension {trunc.dimension}) exceeds max_dim={config.max_dim}"
            )
        energy, vec, residual, converged, its, vectors = _diagonalize(params, trunc, config, warm)
        iterations += its
        _, n1, n2 = trunc.quantum_numbers()
        prob = vec * vec
        occ1, occ2 = float(prob @ n1), float(prob @ n2)
        tails = photon_tails(vec, trunc)
        history.append((trunc, energy, occ1, occ2))
        log.debug("trunc %s: E0=%.15g n1=%.10g n2=%.10g tails=%s", trunc, energy, occ1, occ2, tails)

        if not converged:
            # growing the basis cannot repair an eigensolver failure
            log.warning("Lanczos did not reach tol_energy at %s for %s", trunc, params)
            parity = float(prob @ parity_diagonal(trunc))
            return GroundStateResult(
                energy, vec, occ1, occ2, parity, trunc, iterations, False, residual, tails, history
            )
        grow1 = tails[0] >= config.tail_tol
        grow2 = tails[1] >= config.tail_tol
        if not (grow1 or grow2) and prev is not None:
            e_prev, n1_prev, n2_prev = prev
            if (
                _close(energy, e_prev, config.trunc_tol, config.tol_energy / config.trunc_tol)
                and _close(occ1, n1_prev, config.trunc_tol, 1.0)
                and _close(occ2, n2_prev, config.trunc_tol, 1.0)
            ):
                parity = float(prob @ parity_diagonal(trunc))
                return GroundStateResult(
                    energy, vec, occ1, occ2, parity, trunc, iterations, True,
                    residual, tails, history,
                )
        if not (grow1 or grow2):
            grow1 = grow2 = True
        prev = (energy, occ1, occ2)
        new = TruncationSpec(
            _grow(trunc.n1_max, config.trunc_growth) if grow1 else trunc.n1_max,
            _grow(trunc.n2_max, config.trunc_growth) if grow2 else trunc.n2_max,
        )
        warm = {s: pad_state(v, trunc, new) for s, v in vectors.items()}
        trunc = new
    raise TruncationError(f"no truncation convergence within {config.max_growth_steps} growth steps")


def _grow(n_max: int, factor: float) -> int:
    return max(n_max + 1, int(math.ceil((n_max + 1) * factor)) - 1)


def solve_fixed(params: ModelParams, trunc: TruncationSpec, config: SolverConfig | None = None) -> GroundStateResult:
    """Ground state at a fixed truncation (no adaptive growth)."""
    config = config or SolverConfig()
    energy, vec, residual, converged, its, _ = _diagonalize(params, trunc, config, {})
    _, n1, n2 = trunc.quantum_numbers()
    prob = vec * vec
    return GroundStateResult(
        energy, vec, float(prob @ n1), float(prob @ n2), float(prob @ parity_diagonal(trunc)),
        trunc, its, converged, residual, photon_tails(vec, trunc),
    )
