"""Hamiltonians of the two-mode Lambda-type three-level Rabi model.

Basis convention for the finite-eta problem: the atomic index (|1>, |2>, |3>)
varies slowest, then the mode-1 Fock number, then the mode-2 Fock number::

    index = atom * (n1_max + 1) * (n2_max + 1) + n1 * (n2_max + 1) + n2

with ``atom`` in {0, 1, 2} standing for |1>, |2>, |3>.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np
import scipy.sparse as sp

Branch = Literal["mode1", "mode2"]

#: refuse to assemble operators larger than this unless told otherwise
DEFAULT_MAX_DIM = 2_000_000


class ClosedFormDomainError(ValueError):
    """A closed-form result was requested outside the degenerate case delta = 0."""


class TruncationError(ValueError):
    """The requested Fock truncation is infeasible."""


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless parameters of one Hamiltonian instance.

    alpha = w2/w1, beta = g2/g1, delta = (e2 - e1)/Delta,
    R = 2 g1 / sqrt(w1 Delta), eta = Delta/w1.
    """

    alpha: float
    beta: float
    delta: float = 0.0
    R: float = 0.0
    eta: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "beta", "delta", "R", "eta"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.alpha <= 0 or self.beta <= 0 or self.eta <= 0:
            raise ValueError("alpha, beta and eta must be positive")
        if self.R < 0 or self.delta < 0:
            raise ValueError("R and delta must be non-negative")

    def gamma(self) -> float:
        return self.alpha / self.beta**2

    @classmethod
    def from_physical(cls, eps1, eps2, eps3, omega1, omega2, g1, g2) -> "ModelParams":
        """Build from level energies, mode frequencies and couplings.

        Energies are measured from ``eps1``; the splitting Delta = eps3 - eps1
        must be positive.
        """
        gap = eps3 - eps1
        if gap <= 0 or omega1 <= 0 or g1 <= 0:
            raise ValueError("need eps3 > eps1, omega1 > 0 and g1 > 0")
        return cls(
            alpha=omega2 / omega1,
            beta=g2 / g1,
            delta=(eps2 - eps1) / gap,
            R=2.0 * g1 / math.sqrt(omega1 * gap),
            eta=gap / omega1,
        )

    def require_degenerate(self, what: str = "closed form") -> None:
        if self.delta != 0:
            raise ClosedFormDomainError(f"{what} is only available for delta = 0 (got {self.delta})")


@dataclass(frozen=True)
class TruncationSpec:
    n1_max: int
    n2_max: int

    def __post_init__(self):
        for name in ("n1_max", "n2_max"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {value!r}")
            object.__setattr__(self, name, int(value))

    @property
    def dimension(self) -> int:
        return 3 * (self.n1_max + 1) * (self.n2_max + 1)

    @property
    def shape(self) -> tuple[int, int, int]:
        """Shape of a state vector reshaped to (atom, n1, n2)."""
        return (3, self.n1_max + 1, self.n2_max + 1)

    def index(self, atom: int, n1: int, n2: int) -> int:
        """Flat index of |atom, n1, n2>; ``atom`` is 1, 2 or 3."""
        if atom not in (1, 2, 3) or not 0 <= n1 <= self.n1_max or not 0 <= n2 <= self.n2_max:
            raise IndexError(f"state |{atom}, {n1}, {n2}> outside truncation {self}")
        return ((atom - 1) * (self.n1_max + 1) + n1) * (self.n2_max + 1) + n2

    def quantum_numbers(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Arrays (atom0, n1, n2) over the flat basis, atom0 in {0, 1, 2}."""
        return tuple(a.ravel() for a in np.indices(self.shape))


@dataclass(frozen=True, eq=False)
class SparseOperator:
    """Real symmetric operator in coordinate format.

    Both triangles are stored explicitly and no entry is an explicit zero.
    """

    dimension: int
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        for name in ("rows", "cols", "values"):
            arr = np.array(getattr(self, name), copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (self.rows.shape == self.cols.shape == self.values.shape):
            raise ValueError("rows, cols and values must have equal length")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("operator entries must be finite")

    @classmethod
    def from_triplets(cls, dimension: int, rows, cols, values) -> "SparseOperator":
        """Assemble from triplets, summing duplicates and dropping zeros."""
        coo = sp.coo_matrix(
            (np.asarray(values, float), (np.asarray(rows), np.asarray(cols))),
            shape=(dimension, dimension),
        ).tocsr()
        coo.sum_duplicates()
        coo.eliminate_zeros()
        coo = coo.tocoo()
        return cls(dimension, coo.row.astype(np.int64), coo.col.astype(np.int64), coo.data)

    @classmethod
    def diagonal(cls, diag) -> "SparseOperator":
        diag = np.asarray(diag, float)
        idx = np.flatnonzero(diag)
        return cls(diag.size, idx, idx, diag[idx])

    @property
    def nnz(self) -> int:
        return self.values.size

    @cached_property
    def csr(self) -> sp.csr_matrix:
        mat = sp.csr_matrix(
            (self.values, (self.rows, self.cols)), shape=(self.dimension, self.dimension)
        )
        mat.sort_indices()
        return mat

    def toarray(self) -> np.ndarray:
        return self.csr.toarray()

    def is_symmetric(self) -> bool:
        diff = self.csr - self.csr.T
        return diff.nnz == 0 or not np.any(diff.data)


def _ladder(n_max: int) -> np.ndarray:
    return np.sqrt(np.arange(1, n_max + 1, dtype=float))


def build_hamiltonian(
    params: ModelParams, trunc: TruncationSpec, max_dim: int = DEFAULT_MAX_DIM
) -> SparseOperator:
    """Matrix of the dimensionless Hamiltonian H/Delta in the truncated basis.

    H' = delta|2><2| + |3><3| + (a1+a1 + alpha a2+a2)/eta
         + R/(2 sqrt(eta)) [A1 (a1+ + a1) + beta A2 (a2+ + a2)],
    A1 = |1><3| + h.c., A2 = |2><3| + h.c.
    """
    dim = trunc.dimension
    if dim < 3:
        raise TruncationError("truncation must contain at least one Fock state per mode")
    if dim > max_dim:
        raise TruncationError(f"basis dimension {dim} exceeds the limit {max_dim}")

    atom, n1, n2 = trunc.quantum_numbers()
    level = np.array([0.0, params.delta, 1.0])
    diag = level[atom] + (n1 + params.alpha * n2) / params.eta
    diag_idx = np.flatnonzero(diag)

    rows = [diag_idx]
    cols = [diag_idx]
    vals = [diag[diag_idx]]

    g = params.R / (2.0 * math.sqrt(params.eta))
    if g != 0.0:
        m1, m2 = trunc.n1_max + 1, trunc.n2_max + 1
        excited = np.arange(2 * m1 * m2, 3 * m1 * m2)
        _, e1, e2 = (q[excited] for q in (atom, n1, n2))
        for lower, amp, ladder_n, stride, mode_n_max in (
            (0, g, e1, m2, trunc.n1_max),
            (1, g * params.beta, e2, 1, trunc.n2_max),
        ):
            base = excited - 2 * m1 * m2 + lower * m1 * m2
            # |3, n> <-> |lower, n+1> and |3, n+1> <-> |lower, n>
            up = ladder_n < mode_n_max
            src = excited[up]
            dst = base[up] + stride
            elem = amp * np.sqrt(ladder_n[up] + 1.0)
            down = ladder_n > 0
            src2 = excited[down]
            dst2 = base[down] - stride
            elem2 = amp * np.sqrt(ladder_n[down].astype(float))
            for s, d, v in ((src, dst, elem), (src2, dst2, elem2)):
                rows += [s, d]
                cols += [d, s]
                vals += [v, v]

    return SparseOperator(
        dim,
        np.concatenate(rows).astype(np.int64),
        np.concatenate(cols).astype(np.int64),
        np.concatenate(vals),
    )


def parity_diagonal(trunc: TruncationSpec) -> np.ndarray:
    """Diagonal of (-1)^(n1+n2) (x) diag(+1, +1, -1)."""
    atom, n1, n2 = trunc.quantum_numbers()
    sign = np.where(atom == 2, -1.0, 1.0)
    return sign * (1.0 - 2.0 * ((n1 + n2) % 2))


def build_parity(trunc: TruncationSpec) -> SparseOperator:
    return SparseOperator.diagonal(parity_diagonal(trunc))


def symmetry_labels(trunc: TruncationSpec) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (+1/-1) of the two independent mode parities on every basis state.

    P1 = (-1)^n1 (x) diag(-1, +1, +1) and P2 = (-1)^n2 (x) diag(+1, -1, +1) both
    commute with the Hamiltonian for any parameters; the total parity is -P1 P2.
    """
    atom, n1, n2 = trunc.quantum_numbers()
    p1 = np.where(atom == 0, -1, 1) * (1 - 2 * (n1 % 2))
    p2 = np.where(atom == 1, -1, 1) * (1 - 2 * (n2 % 2))
    return p1, p2


def number_operator(trunc: TruncationSpec, mode: int) -> SparseOperator:
    if mode not in (1, 2):
        raise ValueError("mode must be 1 or 2")
    _, n1, n2 = trunc.quantum_numbers()
    return SparseOperator.diagonal((n1 if mode == 1 else n2).astype(float))


def pad_state(vector: np.ndarray, old: TruncationSpec, new: TruncationSpec) -> np.ndarray:
    """Embed a state of a smaller truncation into a larger one (zero padding)."""
    if new.n1_max < old.n1_max or new.n2_max < old.n2_max:
        raise ValueError("new truncation must contain the old one")
    out = np.zeros(new.shape)
    out[:, : old.n1_max + 1, : old.n2_max + 1] = np.reshape(vector, old.shape)
    return out.ravel()


# --- eta -> infinity: classical energy surface -------------------------------------


@dataclass(frozen=True)
class EnergySurfacePoint:
    y1: float
    y2: float
    energy: float


def energy_surface(params: ModelParams, y1, y2):
    """Ground-state energy of the eta -> infinity effective Hamiltonian at fixed fields.

    E(y1, y2) = (y1^2 + alpha y2^2)/2 + [1 - sqrt(1 + 2 R^2 (y1^2 + beta^2 y2^2))]/2.
    Broadcasts over array arguments.
    """
    params.require_degenerate("energy_surface")
    y1 = np.asarray(y1, float)
    y2 = np.asarray(y2, float)
    s = y1 * y1 + params.beta**2 * (y2 * y2)
    out = 0.5 * (y1 * y1 + params.alpha * y2 * y2) + 0.5 * (
        1.0 - np.sqrt(1.0 + 2.0 * params.R**2 * s)
    )
    return float(out) if out.ndim == 0 else out


def build_m_matrix(params: ModelParams, y1: float, y2: float) -> np.ndarray:
    """Atomic 3x3 matrix M with H_eff = (y1^2 + alpha y2^2)/2 + M/2."""
    params.require_degenerate("build_m_matrix")
    m = np.zeros((3, 3))
    m[2, 2] = 2.0
    m[0, 2] = m[2, 0] = math.sqrt(2.0) * params.R * y1
    m[1, 2] = m[2, 1] = math.sqrt(2.0) * params.beta * params.R * y2
    return m


# --- critical-region 1-D quartic models --------------------------------------------


def quartic_coefficient(params: ModelParams, branch: Branch) -> float:
    """Prefactor c of H = (c/2) p^2 - c r' z^2 + (c^2/4) z^4 for the given branch."""
    if branch == "mode1":
        return 1.0
    if branch == "mode2":
        return params.alpha
    raise ValueError(f"branch must be 'mode1' or 'mode2', got {branch!r}")


def oscillator_length(c: float) -> float:
    """Gaussian width minimizing <(c/2) p^2 + (c^2/4) z^4>; z = L (a + a+)/sqrt(2)."""
    return (2.0 / (3.0 * c)) ** (1.0 / 6.0)


def _position_powers(size: int, length: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exact truncated matrices of z^2, z^4 and p^2 in a harmonic-oscillator basis."""
    big = size + 4
    a = np.diag(_ladder(big - 1), 1)
    z = length * (a + a.T) / math.sqrt(2.0)
    # p = i (a+ - a) / (sqrt(2) L), so p^2 = -(a+ - a)^2 / (2 L^2)
    d = a.T - a
    z2 = z @ z
    z4 = z2 @ z2
    p2 = -(d @ d) / (2.0 * length**2)
    return z2[:size, :size], z4[:size, :size], p2[:size, :size]


def build_quartic_hamiltonian(
    params: ModelParams,
    branch: Branch,
    trunc_1d: int,
    rprime: float = 0.0,
    *,
    length: float | None = None,
    quartic_scale: float = 1.0,
) -> SparseOperator:
    """Rescaled 1-D critical Hamiltonian, in units of eta^(-4/3).

    mode1: p^2/2 - r' z^2 + z^4/4
    mode2: (alpha/2) p^2 - alpha r' z^2 + (alpha^2/4) z^4

    Represented in ``trunc_1d`` harmonic-oscillator states of length ``length``
    (default: the variational width at r' = 0). ``quartic_scale`` multiplies the
    z^4 term and exists for testing the harmonic limit.
    """
    params.require_degenerate("build_quartic_hamiltonian")
    c = quartic_coefficient(params, branch)
    if int(trunc_1d) != trunc_1d or trunc_1d < 2:
        raise TruncationError("trunc_1d must be an integer >= 2")
    length = oscillator_length(c) if length is None else float(length)
    z2, z4, p2 = _position_powers(int(trunc_1d), length)
    h = 0.5 * c * p2 - c * rprime * z2 + quartic_scale * 0.25 * c * c * z4
    h = 0.5 * (h + h.T)
    rows, cols = np.nonzero(h)
    return SparseOperator(h.shape[0], rows, cols, h[rows, cols])


def quartic_position_squared(trunc_1d: int, length: float) -> np.ndarray:
    """Dense z^2 matrix matching :func:`build_quartic_hamiltonian`'s basis."""
    return _position_powers(int(trunc_1d), length)[0]
