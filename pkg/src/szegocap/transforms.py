"""Symbol <-> kernel Fourier correspondence on a grid, plus envelope checks.

Sign convention, fixed package-wide: symbol -> kernel integrates
e^{-i 2 pi omega z} sigma(x, omega) d omega at z = x - y; kernel -> symbol
applies the inverse phase e^{+i 2 pi omega z}.  Composition and round-trip
tests rely on this pairing.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import TruncationWarning
from .families import KernelEnvelope, SymbolSpec, sample_symbol
from .grid import Grid

DEFAULT_TAIL_TOL = 1e-10


def _phase_matrix(grid: Grid) -> np.ndarray:
    # phase[i, m] = e^{-i 2 pi omega_m x_i}
    return np.exp(-2j * np.pi * np.outer(grid.x_points(), grid.omega_points()))


def kernel_from_values(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Quadrature kernel k[i, j] = sum_m w_m values[i, m] e^{-i 2 pi omega_m (x_i - x_j)}.

    `values` holds the (possibly pointwise-mapped) symbol samples on the
    (x, omega) tensor grid.  The result is the unweighted kernel; quantization
    multiplies by h_x.
    """
    phase = _phase_matrix(grid)
    return ((values * grid.omega_weights()) * phase) @ phase.conj().T


def two_symbol_kernel(row_values: np.ndarray, col_values: np.ndarray,
                      grid: Grid) -> np.ndarray:
    """Mixed kernel K[i, j] = sum_m w_m row[i, m] col[j, m] e^{-i 2 pi omega_m (x_i - x_j)}.

    With col = 1 this is the plain (row-symbol) quadrature kernel; with row = 1
    it is the column-symbol kernel of an adjoint-style quantization.
    """
    phase = _phase_matrix(grid)
    return ((row_values * grid.omega_weights()) * phase) @ (col_values * phase.conj()).T


def kernel_row_time_invariant(values_row: np.ndarray, grid: Grid) -> np.ndarray:
    """Kernel profile g(z) on the lattice z = d * h_x, d = -(n_x-1) .. n_x-1."""
    d = np.arange(-(grid.n_x - 1), grid.n_x) * grid.h_x
    phase = np.exp(-2j * np.pi * np.outer(d, grid.omega_points()))
    return phase @ (values_row * grid.omega_weights())


def symbol_to_kernel(spec: SymbolSpec, grid: Grid,
                     tail_tol: float = DEFAULT_TAIL_TOL) -> np.ndarray:
    """Unweighted kernel matrix k(x_i, x_j) of the symbol on the grid.

    Emits a TruncationWarning when |sigma(x, +-omega_max)| exceeds tail_tol.
    """
    values = sample_symbol(spec, grid)
    edge = max(np.abs(values[:, 0]).max(), np.abs(values[:, -1]).max())
    if edge > tail_tol:
        warnings.warn(TruncationWarning(
            f"symbol mass {edge:.3e} above tail_tol {tail_tol:.1e} at omega = "
            f"+-{grid.omega_max}; frequency truncation may bias the kernel"))
    return kernel_from_values(values, grid)


class SymbolRecovery(NamedTuple):
    sigma: np.ndarray
    max_imag: float


def kernel_to_symbol(kernel: np.ndarray, grid: Grid,
                     tail_tol: float = DEFAULT_TAIL_TOL) -> SymbolRecovery:
    """Recover sigma(x_i, omega_m) from an unweighted kernel matrix.

    Row-wise forward transform in z = x - y with weight h_x.  The imaginary
    residue is returned as a diagnostic; rows that have not decayed below
    tail_tol at the domain edge trigger a TruncationWarning.
    """
    kernel = np.asarray(kernel)
    if kernel.shape != (grid.n_x, grid.n_x):
        raise ValueError(f"kernel shape {kernel.shape} does not match grid n_x {grid.n_x}")
    # the discrete kernel is span-periodic in z = x - y, so rows "end" at |z| = span/2
    x = grid.x_points()
    z = np.abs(x[:, None] - x[None, :])
    edge_band = z >= grid.span / 2.0 - grid.h_x
    edge = float(np.abs(kernel[edge_band]).max()) if np.any(edge_band) else 0.0
    if edge > tail_tol:
        warnings.warn(TruncationWarning(
            f"kernel rows reach {edge:.3e} > tail_tol {tail_tol:.1e} at |z| ~ span/2; "
            "z-truncation may bias the recovered symbol"))
    phase = _phase_matrix(grid)
    # C[i, m] = h_x * sum_j k[i, j] e^{+i 2 pi omega_m (x_i - x_j)}
    C = grid.h_x * (kernel @ phase) * phase.conj()
    return SymbolRecovery(sigma=C.real.copy(), max_imag=float(np.abs(C.imag).max()))


@dataclass
class EnvelopeReport:
    """Result of checking |k(x, x-z)|^2 <= psi(z) and the psi tail bound."""
    passed: bool
    pointwise_ok: bool
    tail_ok: bool
    worst_margin: float                      # min psi / |k|^2 over checked samples
    violations: list[tuple[float, float, float, float]] = field(default_factory=list)
    tail_results: list[tuple[float, float, float]] = field(default_factory=list)


def envelope_check(spec: SymbolSpec, env: KernelEnvelope, grid: Grid,
                   s_samples: np.ndarray | None = None,
                   max_violations: int = 20) -> EnvelopeReport:
    """Verify the kernel envelope pointwise on the grid and its tail constant.

    Pointwise samples are restricted to |z| <= span/2: beyond that the
    discrete kernel is dominated by its span-periodization image rather than
    the continuum profile the envelope describes.  Violations are reported,
    not raised.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        kernel = symbol_to_kernel(spec, grid)
    x = grid.x_points()
    z = x[:, None] - x[None, :]
    keep = np.abs(z) <= grid.span / 2.0
    k2 = np.abs(kernel) ** 2
    psi_z = env.psi(z)

    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(k2 > 0, psi_z / np.maximum(k2, 1e-300), np.inf)
    ratio = np.where(keep, ratio, np.inf)
    worst = float(ratio.min())
    pointwise_ok = worst >= 1.0

    violations: list[tuple[float, float, float, float]] = []
    if not pointwise_ok:
        bad = np.argwhere(ratio < 1.0)
        bad_ratio = ratio[bad[:, 0], bad[:, 1]]
        bad_k2 = k2[bad[:, 0], bad[:, 1]]
        # worst ratio first; ties broken by the largest kernel magnitude
        order = np.lexsort((-bad_k2, bad_ratio))
        for idx in bad[order][:max_violations]:
            i, j = int(idx[0]), int(idx[1])
            violations.append((float(x[i]), float(z[i, j]),
                               float(k2[i, j]), float(psi_z[i, j])))

    if s_samples is None:
        s_samples = np.logspace(np.log10(max(4 * grid.h_x, 0.25)),
                                np.log10(grid.span / 2.0), 12)
    zq = np.linspace(0.0, 8.0 * grid.span, 200001)
    psi_q = env.psi(zq)
    seg = 0.5 * (psi_q[1:] + psi_q[:-1]) * (zq[1] - zq[0])
    tail_cum = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
    tail_results = []
    tail_ok = True
    for s in np.asarray(s_samples, dtype=float):
        tail = 2.0 * float(np.interp(s, zq, tail_cum))
        bound = env.tail_constant / s
        tail_results.append((float(s), tail, bound))
        if tail > bound * (1.0 + 1e-9):
            tail_ok = False

    return EnvelopeReport(passed=pointwise_ok and tail_ok,
                          pointwise_ok=pointwise_ok, tail_ok=tail_ok,
                          worst_margin=worst, violations=violations,
                          tail_results=tail_results)
