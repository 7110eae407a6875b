"""Dense Hermitian eigendecomposition, Schatten norms, restricted traces,
and spectral functional calculus."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NonHermitianError, NumericalError
from .grid import Grid
from .operators import DiscreteOperator, hermitian_defect_estimate

HERMITIAN_DEFECT_TOL = 1e-8
_REAL_CAST_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues in descending order with an optional eigenvector basis."""
    values: np.ndarray
    basis: np.ndarray | None
    grid: Grid | None


def _as_matrix(a) -> np.ndarray:
    return a.matrix if isinstance(a, DiscreteOperator) else np.asarray(a)


def real_cast(matrix: np.ndarray) -> np.ndarray:
    """Drop a numerically negligible imaginary part (speeds up LAPACK paths)."""
    if np.iscomplexobj(matrix):
        scale = max(np.abs(matrix.real).max(), 1e-300)
        if np.abs(matrix.imag).max() <= _REAL_CAST_TOL * scale:
            return np.ascontiguousarray(matrix.real)
    return matrix


def eigh_matrix(matrix: np.ndarray, want_basis: bool = True):
    """Descending eigendecomposition of a Hermitian matrix."""
    matrix = real_cast(matrix)
    if want_basis:
        vals, vecs = np.linalg.eigh(matrix)
        return vals[::-1].copy(), vecs[:, ::-1].copy()
    return np.linalg.eigvalsh(matrix)[::-1].copy(), None


def eigh(a: DiscreteOperator, want_basis: bool = True) -> Spectrum:
    """Spectrum of a hermitized operator (descending eigenvalues).

    Raises NonHermitianError unless the operator's hermitian defect is at most
    HERMITIAN_DEFECT_TOL.
    """
    if a.hermitian_defect > HERMITIAN_DEFECT_TOL:
        raise NonHermitianError(
            f"hermitian defect {a.hermitian_defect:.3e} exceeds {HERMITIAN_DEFECT_TOL:.1e}; "
            "hermitize the operator first")
    vals, vecs = eigh_matrix(a.matrix, want_basis=want_basis)
    return Spectrum(values=vals, basis=vecs, grid=a.grid)


def schatten_norm(a, p: int) -> float:
    """Schatten norm: p=1 sum of singular values, p=2 Frobenius."""
    matrix = _as_matrix(a)
    if p == 2:
        return float(np.linalg.norm(matrix))
    if p == 1:
        return float(np.linalg.svd(matrix, compute_uv=False).sum())
    raise DomainError(f"schatten_norm supports p in {{1, 2}}, got {p}")


def trace_restricted(a, grid: Grid | None = None) -> float:
    """Sum of diagonal entries at grid points inside the window [0, alpha]."""
    if isinstance(a, DiscreteOperator) and grid is None:
        grid = a.grid
    if grid is None:
        raise DomainError("trace_restricted needs a grid")
    diag = np.diagonal(_as_matrix(a))[grid.window_mask()]
    total = complex(diag.sum())
    if abs(total.imag) > 1e-9 * (abs(total.real) + 1.0):
        warnings.warn(f"restricted trace has imaginary residue {total.imag:.3e}")
    return float(total.real)


def apply_spectral_function(a: DiscreteOperator, f) -> DiscreteOperator:
    """V f(Lambda) V* for a hermitized operator; f is applied to eigenvalues."""
    spec = eigh(a, want_basis=True)
    with np.errstate(all="ignore"):
        fvals = np.asarray(f(spec.values), dtype=float)
    if not np.all(np.isfinite(fvals)):
        bad = spec.values[~np.isfinite(fvals)]
        raise DomainError(f"f undefined (non-finite) at eigenvalues {bad[:5]}")
    matrix = (spec.basis * fvals) @ spec.basis.conj().T
    return DiscreteOperator(matrix=matrix, grid=a.grid, kind="composite",
                            hermitian_defect=hermitian_defect_estimate(matrix))


def clip_negative(values: np.ndarray, tol_factor: float = 1e-10) -> np.ndarray:
    """Clip eigenvalues in [-tol, 0) to zero, tol = tol_factor * max |value|.

    More negative values violate the positive-operator contract and raise
    NumericalError.  Use this for spectra of operators that are positive in
    the continuum limit (e.g. time-invariant correlation operators).
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return values.copy()
    tol = tol_factor * float(np.abs(values).max())
    if np.any(values < -tol):
        worst = float(values.min())
        raise NumericalError(
            f"eigenvalue {worst:.6e} below clipping tolerance -{tol:.3e}")
    return np.maximum(values, 0.0)
