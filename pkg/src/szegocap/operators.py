"""Dense quantized operators on a grid and their algebra.

quantize() builds the Nystrom matrix h_x * k(x_i, x_j) of the operator whose
kernel is the inverse frequency transform of a (pointwise-mapped) symbol.
Symbols that tend to 1 at large frequency (complex exponentials e^{i 2 pi s
sigma}) are quantized as identity plus the quantization of their decaying
part, so the constant symbol maps exactly to the identity matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import toeplitz

from .errors import AliasingError, DomainError, GridMismatchError
from .families import SymbolSpec, sample_symbol
from .grid import Grid
from .transforms import kernel_from_values, kernel_row_time_invariant

_POINTWISE_MAPS = ("identity", "f_eps", "exp_i2pi_s", "product_sigma_exp")


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """Dense matrix representation of an operator on the grid."""
    matrix: np.ndarray
    grid: Grid
    kind: str                    # quantized | projection | composite
    hermitian_defect: float

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SymbolFunctionSpec:
    """A symbol together with a pointwise map applied before quantization."""
    base: SymbolSpec
    pointwise_map: str = "identity"
    s: float | None = None
    f: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.pointwise_map not in _POINTWISE_MAPS:
            raise DomainError(f"unknown pointwise map {self.pointwise_map!r}; "
                              f"known: {_POINTWISE_MAPS}")
        if self.pointwise_map in ("exp_i2pi_s", "product_sigma_exp") and self.s is None:
            raise DomainError(f"pointwise map {self.pointwise_map!r} requires s")
        if self.pointwise_map == "f_eps" and self.f is None:
            raise DomainError("pointwise map 'f_eps' requires the mapped function f")


def hermitian_defect_estimate(matrix: np.ndarray, iters: int = 25) -> float:
    """Operator-norm estimate of (A - A*)/2 by deterministic power iteration."""
    skew = 0.5 * (matrix - matrix.conj().T)
    if np.linalg.norm(skew) == 0.0:
        return 0.0
    n = skew.shape[0]
    v = np.full(n, 1.0 / np.sqrt(n), dtype=skew.dtype)
    for _ in range(iters):
        u = skew.conj().T @ (skew @ v)
        nrm = np.linalg.norm(u)
        if nrm == 0.0:
            return 0.0
        v = u / nrm
    return float(np.linalg.norm(skew @ v))


def _check_aliasing(grid: Grid) -> None:
    if 2.0 * grid.h_x * grid.omega_max > 1.0 + 1e-12:
        raise AliasingError(
            f"grid too coarse: 2 * h_x * omega_max = {2 * grid.h_x * grid.omega_max:.6f} > 1")


def _mapped_values(sfs: SymbolFunctionSpec, grid: Grid) -> tuple[np.ndarray, bool]:
    """Sampled mapped symbol and whether an identity matrix must be added."""
    sigma = sample_symbol(sfs.base, grid)
    if sfs.pointwise_map == "identity":
        return sigma, False
    if sfs.pointwise_map == "f_eps":
        return np.asarray(sfs.f(sigma), dtype=float), False
    phase = np.exp(2j * np.pi * sfs.s * sigma)
    if sfs.pointwise_map == "exp_i2pi_s":
        # e^{i 2 pi s sigma} = 1 + (e^{i 2 pi s sigma} - 1); the constant-1 part
        # quantizes exactly to the identity operator
        return phase - 1.0, True
    return sigma * phase, False


def quantize(sfs: SymbolFunctionSpec | SymbolSpec, grid: Grid) -> DiscreteOperator:
    """Nystrom matrix of the quantized (mapped) symbol: h_x * kernel (+ identity)."""
    if isinstance(sfs, SymbolSpec):
        sfs = SymbolFunctionSpec(base=sfs)
    _check_aliasing(grid)
    values, add_identity = _mapped_values(sfs, grid)

    x_independent = sfs.base.time_invariant
    if x_independent:
        row = values[0, :]
        g = kernel_row_time_invariant(row, grid)
        n = grid.n_x
        col = g[n - 1:]
        first_row = g[n - 1::-1]
        matrix = grid.h_x * toeplitz(col, first_row)
    else:
        matrix = grid.h_x * kernel_from_values(values, grid)
    if add_identity:
        matrix = matrix + np.eye(grid.n_x, dtype=matrix.dtype)

    return DiscreteOperator(matrix=matrix, grid=grid, kind="quantized",
                            hermitian_defect=hermitian_defect_estimate(matrix))


def projection(grid: Grid) -> DiscreteOperator:
    """Diagonal 0/1 restriction onto the window [0, alpha]."""
    diag = grid.window_mask().astype(float)
    return DiscreteOperator(matrix=np.diag(diag), grid=grid, kind="projection",
                            hermitian_defect=0.0)


def compose(a: DiscreteOperator, b: DiscreteOperator) -> DiscreteOperator:
    if a.grid is not b.grid and a.grid != b.grid:
        raise GridMismatchError("cannot compose operators on different grids")
    if a.matrix.shape[1] != b.matrix.shape[0]:
        raise GridMismatchError(
            f"dimension mismatch: {a.matrix.shape} @ {b.matrix.shape}")
    matrix = a.matrix @ b.matrix
    return DiscreteOperator(matrix=matrix, grid=a.grid, kind="composite",
                            hermitian_defect=hermitian_defect_estimate(matrix))


def adjoint(a: DiscreteOperator) -> DiscreteOperator:
    return DiscreteOperator(matrix=a.matrix.conj().T.copy(), grid=a.grid,
                            kind=a.kind, hermitian_defect=a.hermitian_defect)


def hermitize(a: DiscreteOperator) -> DiscreteOperator:
    """Hermitian part (A + A*)/2; the removed skew part is a.hermitian_defect."""
    matrix = 0.5 * (a.matrix + a.matrix.conj().T)
    return DiscreteOperator(matrix=matrix, grid=a.grid, kind=a.kind,
                            hermitian_defect=0.0)


def window_block(a: DiscreteOperator) -> np.ndarray:
    """Submatrix of rows and columns inside the window [0, alpha]."""
    mask = a.grid.window_mask()
    return a.matrix[np.ix_(mask, mask)]
